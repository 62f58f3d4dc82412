// Benchmark of the instance-parallel kernels against their serial twins.
// Each kernel pair must produce identical output; the run fails loudly if
// they ever diverge.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "ctnli/batch.hpp"

namespace {

using namespace ctnli;
using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point start) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - start)
      .count();
}

// Synthetic corpus: repeated clinical-flavored sentences with per-instance
// numeric variation so feature vectors differ.
std::vector<ResolvedPair> synthetic_pairs(std::size_t n) {
  std::vector<ResolvedPair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char uuid[32];
    std::snprintf(uuid, sizeof uuid, "bench%06zu", i);
    ResolvedPair p;
    p.uuid = uuid;
    p.premise =
        "Participants received " + std::to_string(20 + i % 80) +
        " mg of the study drug once daily for " + std::to_string(4 + i % 9) +
        " weeks. Median overall survival was " + std::to_string(10 + i % 20) +
        " months in the treatment arm. Grade 3 neutropenia occurred in " +
        std::to_string(i % 7) + " patients.";
    p.hypothesis = (i % 2 == 0)
                       ? "The treatment arm received at least " +
                             std::to_string(20 + i % 80) + " mg daily."
                       : "Fewer than " + std::to_string(i % 7) +
                             " patients had grade 3 neutropenia.";
    p.label = (i % 2 == 0) ? Label::Entailment : Label::Contradiction;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

int failures = 0;

template <typename F, typename G, typename Eq>
void bench(const char* name, F&& parallel, G&& serial, Eq&& equal) {
  auto t0 = clock_type::now();
  auto serial_out = serial();
  const double serial_ms = ms_since(t0);

  t0 = clock_type::now();
  auto parallel_out = parallel();
  const double parallel_ms = ms_since(t0);

  const bool same = equal(serial_out, parallel_out);
  if (!same) ++failures;
  std::printf("%-20s %10.2f ms %10.2f ms %8.2fx   %s\n", name, serial_ms,
              parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n =
      argc > 1 ? static_cast<std::size_t>(std::atoll(argv[1])) : 20000;
  const std::uint32_t dim = 1u << 16;

  auto pairs = synthetic_pairs(n);
  std::vector<Label> golds;
  golds.reserve(n);
  for (const auto& p : pairs) golds.push_back(*p.label);

  std::printf("kernels over %zu instances (dim %u)\n", n, dim);
  std::printf("%-20s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  auto xs = featurize_all_serial(pairs, dim);
  LearnerParams theta = LearnerParams::zeros(dim);
  {
    SplitMix64 rng{42};
    for (auto& w : theta.w) w = rng.symmetric(0.05);
  }
  AuxiliaryParams phi = AuxiliaryParams::random_init(dim, 64, 16, 7);

  auto exact = [](const auto& a, const auto& b) { return a == b; };

  bench(
      "featurize", [&] { return featurize_all(pairs, dim); },
      [&] { return featurize_all_serial(pairs, dim); }, exact);
  bench(
      "gold_probs", [&] { return gold_probs_all(theta, xs, golds); },
      [&] { return gold_probs_all_serial(theta, xs, golds); }, exact);
  bench(
      "aux_weights", [&] { return aux_weights_all(phi, xs, golds); },
      [&] { return aux_weights_all_serial(phi, xs, golds); }, exact);
  bench(
      "predict_majority",
      [&] { return predict_majority(theta, pairs, 5, 0); },
      [&] { return ctnli::predict(theta, pairs, 5, 0); }, exact);
  bench(
      "word_overlap", [&] { return word_overlap_all(pairs); },
      [&] { return word_overlap_all_serial(pairs); },
      [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (a[i].uuid != b[i].uuid || a[i].overlap != b[i].overlap)
            return false;
        }
        return true;
      });

  if (failures > 0) {
    std::fprintf(stderr, "%d kernel(s) diverged from the serial reference\n",
                 failures);
    return 1;
  }
  return 0;
}

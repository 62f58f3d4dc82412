#include "ctnli/batch.hpp"

#include <exception>
#include <stdexcept>

namespace ctnli {

namespace {

// Runs fn(i) for each index, parallel or serial, with per-index exception
// capture so the first failure (lowest index) is rethrown deterministically.
template <typename Fn>
void for_each_index(std::size_t n, bool parallel, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<FeatureVector> featurize_impl(const std::vector<ResolvedPair>& pairs,
                                          std::uint32_t dim, bool parallel) {
  std::vector<FeatureVector> out(pairs.size());
  for_each_index(pairs.size(), parallel,
                 [&](std::size_t i) { out[i] = featurize(pairs[i], dim); });
  return out;
}

std::vector<double> gold_probs_impl(const LearnerParams& theta,
                                    const std::vector<FeatureVector>& xs,
                                    const std::vector<Label>& golds,
                                    bool parallel) {
  if (xs.size() != golds.size()) {
    throw std::runtime_error("feature/label size mismatch");
  }
  std::vector<double> out(xs.size());
  for_each_index(xs.size(), parallel, [&](std::size_t i) {
    auto probs = learner_predict_proba(theta, xs[i]);
    out[i] = probs[golds[i] == Label::Entailment ? 0 : 1];
  });
  return out;
}

std::vector<double> aux_weights_impl(const AuxiliaryParams& phi,
                                     const std::vector<FeatureVector>& xs,
                                     const std::vector<Label>& golds,
                                     bool parallel) {
  if (xs.size() != golds.size()) {
    throw std::runtime_error("feature/label size mismatch");
  }
  std::vector<double> out(xs.size());
  for_each_index(xs.size(), parallel, [&](std::size_t i) {
    out[i] = aux_weight(phi, xs[i], golds[i]);
  });
  return out;
}

std::vector<OverlapStats> overlap_impl(const std::vector<ResolvedPair>& pairs,
                                       bool parallel) {
  std::vector<OverlapStats> out(pairs.size());
  for_each_index(pairs.size(), parallel,
                 [&](std::size_t i) { out[i] = word_overlap(pairs[i]); });
  return out;
}

std::vector<PerturbedInstance> flatten(
    std::vector<std::vector<PerturbedInstance>>&& slots) {
  std::vector<PerturbedInstance> out;
  for (auto& slot : slots) {
    for (auto& p : slot) out.push_back(std::move(p));
  }
  return out;
}

std::vector<PerturbedInstance> acronyms_impl(
    const std::vector<NliInstance>& instances, const AcronymInventory& inv,
    AcronymMode mode, const SimilarityScorer& scorer, bool parallel) {
  std::vector<std::vector<PerturbedInstance>> slots(instances.size());
  for_each_index(instances.size(), parallel, [&](std::size_t i) {
    slots[i] = perturb_acronyms(instances[i], inv, mode, scorer);
  });
  return flatten(std::move(slots));
}

std::vector<PerturbedInstance> numeric_impl(
    const std::vector<NliInstance>& instances, const ComparatorLexicon& lex,
    const DeltaPolicy& policy, std::uint64_t seed,
    const std::unordered_map<std::string, std::vector<EntitySpan>>*
        external_spans,
    bool parallel) {
  std::vector<std::vector<PerturbedInstance>> slots(instances.size());
  for_each_index(instances.size(), parallel, [&](std::size_t i) {
    std::optional<std::vector<EntitySpan>> spans;
    if (external_spans) {
      auto it = external_spans->find(instances[i].uuid);
      if (it != external_spans->end()) spans = it->second;
    }
    slots[i] = perturb_numeric_instance(instances[i], lex, policy, seed, spans);
  });
  return flatten(std::move(slots));
}

std::vector<std::pair<std::string, Label>> predict_impl(
    const LearnerParams& theta, const std::vector<ResolvedPair>& pairs,
    std::uint32_t runs, std::uint64_t seed, bool parallel) {
  if (runs == 0 || runs % 2 == 0) {
    throw std::runtime_error("prediction run count must be odd");
  }
  std::vector<std::pair<std::string, Label>> out(pairs.size());
  for_each_index(pairs.size(), parallel, [&](std::size_t i) {
    std::vector<ResolvedPair> one{pairs[i]};
    out[i] = predict(theta, one, runs, seed)[0];
  });
  return out;
}

}  // namespace

std::vector<FeatureVector> featurize_all(const std::vector<ResolvedPair>& pairs,
                                         std::uint32_t dim) {
  return featurize_impl(pairs, dim, true);
}
std::vector<FeatureVector> featurize_all_serial(
    const std::vector<ResolvedPair>& pairs, std::uint32_t dim) {
  return featurize_impl(pairs, dim, false);
}

std::vector<double> gold_probs_all(const LearnerParams& theta,
                                   const std::vector<FeatureVector>& xs,
                                   const std::vector<Label>& golds) {
  return gold_probs_impl(theta, xs, golds, true);
}
std::vector<double> gold_probs_all_serial(const LearnerParams& theta,
                                          const std::vector<FeatureVector>& xs,
                                          const std::vector<Label>& golds) {
  return gold_probs_impl(theta, xs, golds, false);
}

std::vector<double> aux_weights_all(const AuxiliaryParams& phi,
                                    const std::vector<FeatureVector>& xs,
                                    const std::vector<Label>& golds) {
  return aux_weights_impl(phi, xs, golds, true);
}
std::vector<double> aux_weights_all_serial(const AuxiliaryParams& phi,
                                           const std::vector<FeatureVector>& xs,
                                           const std::vector<Label>& golds) {
  return aux_weights_impl(phi, xs, golds, false);
}

std::vector<std::pair<std::string, Label>> predict_majority(
    const LearnerParams& theta, const std::vector<ResolvedPair>& pairs,
    std::uint32_t runs, std::uint64_t seed) {
  return predict_impl(theta, pairs, runs, seed, true);
}

std::vector<OverlapStats> word_overlap_all(
    const std::vector<ResolvedPair>& pairs) {
  return overlap_impl(pairs, true);
}
std::vector<OverlapStats> word_overlap_all_serial(
    const std::vector<ResolvedPair>& pairs) {
  return overlap_impl(pairs, false);
}

std::vector<PerturbedInstance> perturb_acronyms_all(
    const std::vector<NliInstance>& instances, const AcronymInventory& inv,
    AcronymMode mode, const SimilarityScorer& scorer) {
  return acronyms_impl(instances, inv, mode, scorer, true);
}
std::vector<PerturbedInstance> perturb_acronyms_all_serial(
    const std::vector<NliInstance>& instances, const AcronymInventory& inv,
    AcronymMode mode, const SimilarityScorer& scorer) {
  return acronyms_impl(instances, inv, mode, scorer, false);
}

std::vector<PerturbedInstance> perturb_numeric_all(
    const std::vector<NliInstance>& instances, const ComparatorLexicon& lex,
    const DeltaPolicy& policy, std::uint64_t seed,
    const std::unordered_map<std::string, std::vector<EntitySpan>>*
        external_spans) {
  return numeric_impl(instances, lex, policy, seed, external_spans, true);
}
std::vector<PerturbedInstance> perturb_numeric_all_serial(
    const std::vector<NliInstance>& instances, const ComparatorLexicon& lex,
    const DeltaPolicy& policy, std::uint64_t seed,
    const std::unordered_map<std::string, std::vector<EntitySpan>>*
        external_spans) {
  return numeric_impl(instances, lex, policy, seed, external_spans, false);
}

}  // namespace ctnli

#include "ctnli/cartography.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "ctnli/io.hpp"
#include "ctnli/text.hpp"
#include "json.hpp"

namespace ctnli {

namespace {

using json = nlohmann::ordered_json;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string_view difficulty_method_name(DifficultyMethod m) {
  switch (m) {
    case DifficultyMethod::MinMaxWeights: return "MinMaxWeights";
    case DifficultyMethod::Cartography: return "Cartography";
  }
  throw std::logic_error("unreachable difficulty method");
}

DifficultyMethod parse_difficulty_method(std::string_view s) {
  std::string k = text::to_lower(std::string(s));
  if (k == "minmaxweights" || k == "minmax" || k == "weights") {
    return DifficultyMethod::MinMaxWeights;
  }
  if (k == "cartography") return DifficultyMethod::Cartography;
  throw std::runtime_error("unknown difficulty method: " + std::string(s));
}

std::vector<DynamicsSummary> summarize_dynamics(const TrainingDynamics& dyn) {
  if (dyn.per_instance.empty()) {
    throw std::runtime_error("no training dynamics to summarize");
  }
  std::vector<DynamicsSummary> out;
  out.reserve(dyn.per_instance.size());
  for (const auto& [uuid, inst] : dyn.per_instance) {
    const auto& p = inst.gold_probs;
    if (p.empty()) {
      throw std::runtime_error("no epochs logged for " + uuid);
    }
    DynamicsSummary s;
    s.uuid = uuid;
    s.confidence = mean_of(p);
    double var = 0.0;
    for (double x : p) var += (x - s.confidence) * (x - s.confidence);
    s.variability = std::sqrt(var / static_cast<double>(p.size()));
    std::size_t correct = 0;
    for (double x : p) {
      if (x > 0.5) ++correct;
    }
    s.correctness = static_cast<double>(correct) / static_cast<double>(p.size());
    out.push_back(std::move(s));
  }
  return out;
}

DifficultySets classify_difficulty(
    const std::vector<DynamicsSummary>& summaries,
    const std::map<std::string, double>& final_weights,
    const std::map<std::string, bool>& predicted_correctly,
    DifficultyMethod method) {
  if (summaries.size() != final_weights.size() ||
      summaries.size() != predicted_correctly.size()) {
    throw std::runtime_error("difficulty inputs cover different instance sets");
  }
  std::map<std::string, double> score;
  for (const auto& s : summaries) {
    if (final_weights.count(s.uuid) == 0 ||
        predicted_correctly.count(s.uuid) == 0) {
      throw std::runtime_error("difficulty inputs missing uuid " + s.uuid);
    }
    score[s.uuid] = method == DifficultyMethod::MinMaxWeights
                        ? final_weights.at(s.uuid)
                        : s.confidence;
  }

  std::vector<double> correct_scores, incorrect_scores;
  for (const auto& [uuid, v] : score) {
    (predicted_correctly.at(uuid) ? correct_scores : incorrect_scores)
        .push_back(v);
  }
  DifficultySets sets;
  sets.method = method;
  if (correct_scores.empty()) {
    std::cerr << "warning: no correctly predicted instances; easy set empty\n";
  }
  if (incorrect_scores.empty()) {
    std::cerr << "warning: no incorrectly predicted instances; hard set empty\n";
  }
  // Easy instances sit on the low-weight / high-confidence side of the mean;
  // hard instances on the high-weight / low-confidence side.
  const bool low_is_easy = method == DifficultyMethod::MinMaxWeights;
  if (!correct_scores.empty()) {
    double mean = mean_of(correct_scores);
    for (const auto& [uuid, v] : score) {
      if (!predicted_correctly.at(uuid)) continue;
      if (low_is_easy ? v < mean : v > mean) sets.easy.insert(uuid);
    }
  }
  if (!incorrect_scores.empty()) {
    double mean = mean_of(incorrect_scores);
    for (const auto& [uuid, v] : score) {
      if (predicted_correctly.at(uuid)) continue;
      if (low_is_easy ? v > mean : v < mean) sets.hard.insert(uuid);
    }
  }
  return sets;
}

std::pair<std::set<std::string>, std::set<std::string>> intersect_difficulty(
    const DifficultySets& a, const DifficultySets& b) {
  std::pair<std::set<std::string>, std::set<std::string>> out;
  std::set_intersection(a.easy.begin(), a.easy.end(), b.easy.begin(),
                        b.easy.end(),
                        std::inserter(out.first, out.first.end()));
  std::set_intersection(a.hard.begin(), a.hard.end(), b.hard.begin(),
                        b.hard.end(),
                        std::inserter(out.second, out.second.end()));
  return out;
}

OverlapStats word_overlap(const ResolvedPair& pair) {
  auto hyp = text::normalized_token_set(pair.hypothesis);
  if (hyp.empty()) {
    throw std::runtime_error("hypothesis of " + pair.uuid +
                             " has no tokens for overlap");
  }
  auto prem = text::normalized_token_set(pair.premise);
  std::size_t shared = 0;
  for (const auto& t : hyp) {
    if (prem.count(t) > 0) ++shared;
  }
  OverlapStats s;
  s.uuid = pair.uuid;
  s.overlap = static_cast<double>(shared) / static_cast<double>(hyp.size());
  return s;
}

void export_data_map(const std::vector<DynamicsSummary>& summaries,
                     std::size_t bins, const std::string& path) {
  if (summaries.empty()) throw std::runtime_error("no summaries to export");
  if (bins == 0) throw std::runtime_error("bin count must be positive");
  std::string body = "uuid,variability,confidence,correctness,bin\n";
  for (const auto& s : summaries) {
    std::size_t bin = std::min(
        bins - 1, static_cast<std::size_t>(s.correctness * static_cast<double>(bins)));
    body += io::csv_escape(s.uuid) + "," + io::format_double(s.variability) + "," +
            io::format_double(s.confidence) + "," + io::format_double(s.correctness) +
            "," + std::to_string(bin) + "\n";
  }
  io::write_file(path, body);
}

void export_weight_histogram(const std::map<std::string, double>& weights,
                             std::size_t bins, const std::string& path) {
  if (weights.empty()) throw std::runtime_error("no weights to export");
  if (bins == 0) throw std::runtime_error("bin count must be positive");
  double lo = weights.begin()->second;
  double hi = lo;
  for (const auto& [uuid, w] : weights) {
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  std::string body = "bin_lo,bin_hi,count\n";
  if (lo == hi) {
    body += io::format_double(lo) + "," + io::format_double(hi) + "," +
            std::to_string(weights.size()) + "\n";
    io::write_file(path, body);
    return;
  }
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (const auto& [uuid, w] : weights) {
    std::size_t b = std::min(
        bins - 1, static_cast<std::size_t>((w - lo) / width));
    counts[b] += 1;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    body += io::format_double(lo + width * static_cast<double>(b)) + "," +
            io::format_double(lo + width * static_cast<double>(b + 1)) + "," +
            std::to_string(counts[b]) + "\n";
  }
  io::write_file(path, body);
}

std::string difficulty_to_json(const DifficultySets& sets) {
  json j;
  j["method"] = std::string(difficulty_method_name(sets.method));
  j["easy"] = sets.easy;
  j["hard"] = sets.hard;
  return j.dump(2) + "\n";
}

DifficultySets difficulty_from_json(const std::string& text) {
  json j = json::parse(text);
  DifficultySets sets;
  sets.method = parse_difficulty_method(j.at("method").get<std::string>());
  for (const auto& u : j.at("easy")) sets.easy.insert(u.get<std::string>());
  for (const auto& u : j.at("hard")) sets.hard.insert(u.get<std::string>());
  return sets;
}

}  // namespace ctnli

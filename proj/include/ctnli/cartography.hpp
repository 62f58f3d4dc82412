#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctnli/corpus.hpp"
#include "ctnli/minmax.hpp"

namespace ctnli {

// Per-instance training-dynamics statistics over epochs: confidence is the
// mean gold probability, variability its population standard deviation,
// correctness the fraction of epochs with gold probability strictly > 0.5.
struct DynamicsSummary {
  std::string uuid;
  double confidence = 0.0;
  double variability = 0.0;
  double correctness = 0.0;
};

enum class DifficultyMethod { MinMaxWeights, Cartography };

std::string_view difficulty_method_name(DifficultyMethod m);
DifficultyMethod parse_difficulty_method(std::string_view s);

// Mean-split easy/hard sets; easy and hard are disjoint by construction.
struct DifficultySets {
  DifficultyMethod method = DifficultyMethod::MinMaxWeights;
  std::set<std::string> easy;
  std::set<std::string> hard;
};

struct OverlapStats {
  std::string uuid;
  double overlap = 0.0;  // |tokens(hyp) ∩ tokens(premise)| / |tokens(hyp)|
};

// Sorted by uuid. Errors when no epochs were logged.
std::vector<DynamicsSummary> summarize_dynamics(const TrainingDynamics& dyn);

// MinMaxWeights: easy = correct with weight strictly below the mean weight
// of correct instances; hard = incorrect with weight strictly above the mean
// of incorrect ones. Cartography: the analogous split on confidence, with
// easy above and hard below. Emits a warning to stderr when either side of
// the split is empty.
DifficultySets classify_difficulty(
    const std::vector<DynamicsSummary>& summaries,
    const std::map<std::string, double>& final_weights,
    const std::map<std::string, bool>& predicted_correctly,
    DifficultyMethod method);

std::pair<std::set<std::string>, std::set<std::string>> intersect_difficulty(
    const DifficultySets& a, const DifficultySets& b);

// Token-set semantics, lowercased and punctuation-stripped. Errors when the
// hypothesis has no tokens.
OverlapStats word_overlap(const ResolvedPair& pair);

// CSV "uuid,variability,confidence,correctness,bin"; bin indexes equal-width
// correctness bins over [0,1].
void export_data_map(const std::vector<DynamicsSummary>& summaries,
                     std::size_t bins, const std::string& path);

// CSV "bin_lo,bin_hi,count" over the weight data range; a degenerate range
// collapses to a single row.
void export_weight_histogram(const std::map<std::string, double>& weights,
                             std::size_t bins, const std::string& path);

std::string difficulty_to_json(const DifficultySets& sets);
DifficultySets difficulty_from_json(const std::string& text);

}  // namespace ctnli

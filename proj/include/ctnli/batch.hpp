#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ctnli/acronym.hpp"
#include "ctnli/cartography.hpp"
#include "ctnli/minmax.hpp"
#include "ctnli/numeric.hpp"

namespace ctnli {

// Instance-parallel kernels. Each has a serial twin producing bit-identical
// output: results land in per-instance slots, so thread scheduling cannot
// reorder them. Exceptions raised inside a kernel are rethrown for the
// lowest failing index.

std::vector<FeatureVector> featurize_all(const std::vector<ResolvedPair>& pairs,
                                         std::uint32_t dim);
std::vector<FeatureVector> featurize_all_serial(
    const std::vector<ResolvedPair>& pairs, std::uint32_t dim);

// Gold-label probability per instance under the learner.
std::vector<double> gold_probs_all(const LearnerParams& theta,
                                   const std::vector<FeatureVector>& xs,
                                   const std::vector<Label>& golds);
std::vector<double> gold_probs_all_serial(const LearnerParams& theta,
                                          const std::vector<FeatureVector>& xs,
                                          const std::vector<Label>& golds);

std::vector<double> aux_weights_all(const AuxiliaryParams& phi,
                                    const std::vector<FeatureVector>& xs,
                                    const std::vector<Label>& golds);
std::vector<double> aux_weights_all_serial(const AuxiliaryParams& phi,
                                           const std::vector<FeatureVector>& xs,
                                           const std::vector<Label>& golds);

// Majority-vote prediction, parallel across instances; matches
// ctnli::predict exactly.
std::vector<std::pair<std::string, Label>> predict_majority(
    const LearnerParams& theta, const std::vector<ResolvedPair>& pairs,
    std::uint32_t runs, std::uint64_t seed);

std::vector<OverlapStats> word_overlap_all(
    const std::vector<ResolvedPair>& pairs);
std::vector<OverlapStats> word_overlap_all_serial(
    const std::vector<ResolvedPair>& pairs);

// Batch perturbation, ordered by input (source uuid) order.
std::vector<PerturbedInstance> perturb_acronyms_all(
    const std::vector<NliInstance>& instances, const AcronymInventory& inv,
    AcronymMode mode, const SimilarityScorer& scorer);
std::vector<PerturbedInstance> perturb_acronyms_all_serial(
    const std::vector<NliInstance>& instances, const AcronymInventory& inv,
    AcronymMode mode, const SimilarityScorer& scorer);

std::vector<PerturbedInstance> perturb_numeric_all(
    const std::vector<NliInstance>& instances, const ComparatorLexicon& lex,
    const DeltaPolicy& policy, std::uint64_t seed,
    const std::unordered_map<std::string, std::vector<EntitySpan>>*
        external_spans = nullptr);
std::vector<PerturbedInstance> perturb_numeric_all_serial(
    const std::vector<NliInstance>& instances, const ComparatorLexicon& lex,
    const DeltaPolicy& policy, std::uint64_t seed,
    const std::unordered_map<std::string, std::vector<EntitySpan>>*
        external_spans = nullptr);

}  // namespace ctnli

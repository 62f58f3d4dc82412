#pragma once

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctnli/perturb.hpp"

namespace ctnli {

// Short-form -> long-form inventory, optionally with an embedding table for
// similarity scoring. CSV columns: short_form,long_form[,vector] with the
// vector as semicolon-joined floats. A row with an empty long_form registers
// an embedding for the short_form string itself (usable for context tokens).
struct AcronymInventory {
  std::map<std::string, std::vector<std::string>> entries;
  std::unordered_map<std::string, std::vector<double>> embeddings;

  static AcronymInventory from_csv(const std::string& path);
};

struct ShortFormHit {
  std::string short_form;
  std::size_t char_offset = 0;  // 0-based into the hypothesis
  std::size_t length = 0;
};

// Whole-token inventory matches: maximal alphanumeric runs of 2-6 characters
// containing at least two uppercase letters. Non-overlapping, left to right.
std::vector<ShortFormHit> extract_short_forms(std::string_view hypothesis,
                                              const AcronymInventory& inv);

class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  // Similarity of a candidate long form to the hit's context, in [-1, 1].
  virtual double score(const std::string& long_form,
                       const std::string& context) const = 0;
};

// Cosine over character-trigram count vectors of the lowercased strings.
class TrigramCosineScorer : public SimilarityScorer {
 public:
  double score(const std::string& long_form,
               const std::string& context) const override;
};

// Cosine between the long form's inventory vector and the mean vector of
// context tokens found in the table; 0 when either side is missing.
class EmbeddingScorer : public SimilarityScorer {
 public:
  explicit EmbeddingScorer(const AcronymInventory& inv) : inv_(&inv) {}
  double score(const std::string& long_form,
               const std::string& context) const override;

 private:
  const AcronymInventory* inv_;
};

// The original text slice spanning `window` whitespace tokens on each side of
// the hit.
std::string context_window(std::string_view hypothesis, const ShortFormHit& hit,
                           std::size_t window = 10);

// Candidates scored against the context, sorted by descending score with a
// lexicographic tie-break on the long form. Empty candidate list is an error.
std::vector<std::pair<std::string, double>> rank_long_forms(
    const std::string& short_form, const std::string& context,
    const std::vector<std::string>& candidates, const SimilarityScorer& scorer);

enum class AcronymMode { Positive, Negative };

// Expands every hit to "SF (LF)" in one derived instance. Positive picks the
// most similar long form and preserves the label; Negative picks the least
// similar one and flips it. Negative skips hits with a single candidate; with
// no expandable hit the result is empty. The instance must carry a label.
std::vector<PerturbedInstance> perturb_acronyms(const NliInstance& inst,
                                                const AcronymInventory& inv,
                                                AcronymMode mode,
                                                const SimilarityScorer& scorer);

// One row per (hit, candidate) for the human sign-off CSV.
struct ReviewRow {
  std::string uuid;
  std::string short_form;
  std::size_t char_offset = 0;
  std::string long_form;
  double score = 0.0;
  std::size_t rank = 0;
  bool chosen = false;
};

std::vector<ReviewRow> acronym_review_rows(const NliInstance& inst,
                                           const AcronymInventory& inv,
                                           AcronymMode mode,
                                           const SimilarityScorer& scorer);

}  // namespace ctnli

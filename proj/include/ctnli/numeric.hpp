#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctnli/perturb.hpp"

namespace ctnli {

enum class EntityKind { Age, Dosage, LabValue, Duration, Date };

std::string_view entity_kind_name(EntityKind k);
EntityKind parse_entity_kind(std::string_view s);

// A numeric mention. The char range covers exactly the number text, which
// parses to `value`; the unit, when recognized, sits outside the range.
struct EntitySpan {
  EntityKind kind = EntityKind::Age;
  std::size_t start = 0;
  std::size_t end = 0;
  double value = 0.0;
  std::optional<std::string> unit;
};

// Symmetric antonym pairs, lowercase, no phrase in two pairs.
struct ComparatorLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;

  // The 12 built-in pairs.
  static ComparatorLexicon defaults();
  // CSV with header "phrase,antonym".
  static ComparatorLexicon from_csv(const std::string& path);
  void validate() const;
};

// Pattern-based detection of Age/Dosage/LabValue/Duration/Date mentions.
// When external spans are supplied they are returned verbatim after range
// validation, standing in for a real NER's output.
std::vector<EntitySpan> detect_entities(
    std::string_view hypothesis,
    const std::optional<std::vector<EntitySpan>>& external_spans = std::nullopt);

// External spans, one JSON object per line: {uuid, kind, start, end, value,
// unit}, grouped by uuid.
std::unordered_map<std::string, std::vector<EntitySpan>> read_spans_jsonl(
    const std::string& path);

// Replaces every whole-word lexicon phrase by its antonym, longest phrase
// first, preserving the case of the first letter. Applying it twice is the
// identity. Returns the new text and the number of flips.
std::pair<std::string, std::size_t> flip_comparators(std::string_view hypothesis,
                                                     const ComparatorLexicon& lex);

struct DeltaPolicy {
  enum class Mode { AddPercent, AddAbsolute };
  Mode mode = Mode::AddPercent;
  double amount = 10.0;

  static DeltaPolicy add_percent(double p) { return {Mode::AddPercent, p}; }
  static DeltaPolicy add_absolute(double k) { return {Mode::AddAbsolute, k}; }
};

// At most one value-shifted instance (every detected entity moved by the
// policy, rounded to the source's decimal precision) and at most one
// comparator-flipped instance; both flip the label. Entities whose shift
// would make an Age/Dosage/Duration non-positive, or whose rendered text
// would not change, are skipped. The seed is accepted for the contract's
// sake; both built-in policies are deterministic.
std::vector<PerturbedInstance> perturb_numeric_instance(
    const NliInstance& inst, const ComparatorLexicon& lex,
    const DeltaPolicy& policy, std::uint64_t seed,
    const std::optional<std::vector<EntitySpan>>& external_spans = std::nullopt);

}  // namespace ctnli

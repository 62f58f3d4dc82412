#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctnli/intervention.hpp"

namespace ctnli {

enum class Label { Entailment, Contradiction };

Label opposite(Label l);
std::string_view label_name(Label l);
// Accepts exactly "Entailment" / "Contradiction".
Label parse_label(std::string_view s);

enum class Section { Intervention, Eligibility, Results, AdverseEvents };

inline constexpr std::array<Section, 4> kAllSections = {
    Section::Intervention, Section::Eligibility, Section::Results,
    Section::AdverseEvents};

std::string_view section_name(Section s);
Section parse_section(std::string_view s);

enum class InstanceType { Single, Comparison };

std::string_view instance_type_name(InstanceType t);
InstanceType parse_instance_type(std::string_view s);

struct ClinicalTrialRecord {
  std::string trial_id;
  // All four sections always present after loading, possibly empty.
  std::map<Section, std::vector<std::string>> sections;
};

struct NliInstance {
  std::string uuid;
  InstanceType itype = InstanceType::Single;
  Section section = Section::Intervention;
  std::string primary_id;
  std::optional<std::string> secondary_id;  // present iff itype == Comparison
  std::string statement;
  std::optional<Label> label;
  std::optional<InterventionKind> intervention;
};

struct ResolvedPair {
  std::string uuid;
  std::string premise;
  std::string hypothesis;
  std::optional<Label> label;
};

using CtrMap = std::unordered_map<std::string, ClinicalTrialRecord>;

struct Corpus {
  std::vector<NliInstance> instances;  // ordered by uuid
  CtrMap ctrs;
};

// Reads a uuid-keyed instance object plus one JSON file per referenced trial
// from `ctr_dir`. Fails on a missing trial file (naming the trial id), on an
// unknown section name (naming the uuid) and on a malformed label string.
Corpus load_corpus(const std::string& instances_path, const std::string& ctr_dir);

// Parses the instance object alone; trial references are not checked.
std::vector<NliInstance> load_instances(const std::string& instances_path);

ResolvedPair resolve_premise(const NliInstance& inst, const CtrMap& ctrs);

// Whitespace tokens reserved for the prompt scaffolding around the pair.
inline constexpr std::size_t kPromptReserveTokens = 16;

enum class TruncateMode { Truncate, Remove };

// Enforces `premise + hypothesis + kPromptReserveTokens <= budget` counted in
// whitespace tokens. Truncate cuts the premise from the end (original spacing
// of the kept prefix preserved); Remove yields nullopt for an over-budget
// pair. In Truncate mode the budget must at least cover the hypothesis and
// the reserve.
std::optional<ResolvedPair> truncate_pair(const ResolvedPair& pair,
                                          std::size_t budget, TruncateMode mode);

// Counts by (type, section, label). The label axis has a third cell for
// unlabeled instances so the table always sums to the instance count.
struct CorpusStats {
  static constexpr int kLabelCells = 3;  // Entailment, Contradiction, Unlabeled
  std::array<std::array<std::array<std::uint64_t, kLabelCells>, 4>, 2> counts{};
  std::uint64_t total = 0;

  std::uint64_t by_type(InstanceType t) const;
  std::uint64_t by_section(Section s) const;
  std::uint64_t by_label(Label l) const;
  std::uint64_t cell(InstanceType t, Section s) const;
  std::string to_csv() const;
};

CorpusStats corpus_stats(const std::vector<NliInstance>& instances);

}  // namespace ctnli

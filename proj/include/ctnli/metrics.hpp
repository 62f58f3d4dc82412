#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctnli/corpus.hpp"
#include "ctnli/intervention.hpp"

namespace ctnli {

struct LabelScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

// Per-class scores plus their unweighted mean. A class with zero support
// contributes F1 = 0.
struct MacroF1Result {
  LabelScores entailment;
  LabelScores contradiction;
  double macro = 0.0;
};

MacroF1Result macro_f1(const std::map<std::string, Label>& gold,
                       const std::map<std::string, Label>& pred);

// Link from an intervened instance to the instance it was derived from.
struct InterventionLink {
  std::string uuid;
  std::string source_uuid;
  InterventionKind kind = InterventionKind::Paraphrase;
};

std::vector<InterventionLink> read_intervention_links(const std::string& path);
void write_intervention_links(const std::string& path,
                              const std::vector<InterventionLink>& links);

// Fraction of semantic-preserving intervention instances predicted the same
// as their source. Absent (not 0) when there are no such instances. Errors
// on a non-preserving kind.
std::optional<double> consistency(
    const std::map<std::string, Label>& base_pred,
    const std::map<std::string, Label>& intervened_pred,
    const std::vector<InterventionLink>& links);

// Over semantic-altering instances whose source was predicted correctly, the
// fraction predicted with the flipped gold label. Absent when no source was
// predicted correctly. Errors on a non-altering kind or an unflipped gold.
std::optional<double> faithfulness(
    const std::map<std::string, Label>& base_pred,
    const std::map<std::string, Label>& gold_base,
    const std::map<std::string, Label>& intervened_pred,
    const std::map<std::string, Label>& gold_intervened,
    const std::vector<InterventionLink>& links);

struct GroupF1Row {
  std::string group;
  MacroF1Result scores;
  std::size_t support = 0;
};

// One row per group value, sorted by group name; instances missing from the
// grouping map are an error.
std::vector<GroupF1Row> per_group_f1(
    const std::map<std::string, Label>& gold,
    const std::map<std::string, Label>& pred,
    const std::map<std::string, std::string>& group_of);

std::string group_f1_to_csv(const std::vector<GroupF1Row>& rows);

struct MetricsReport {
  MacroF1Result overall;
  std::optional<double> consistency;
  std::optional<double> faithfulness;
  std::vector<GroupF1Row> per_section;
  std::vector<GroupF1Row> per_intervention;
};

// Optional intervention-side inputs for build_report.
struct InterventionInputs {
  std::vector<InterventionLink> links;
  std::map<std::string, Label> predictions;
  std::map<std::string, Label> gold;
};

MetricsReport build_report(
    const std::map<std::string, Label>& gold,
    const std::map<std::string, Label>& pred,
    const std::map<std::string, std::string>& section_of,
    const std::optional<InterventionInputs>& interventions = std::nullopt);

// Absent metrics serialize as null, never 0.
std::string report_to_json(const MetricsReport& report);

// Leaderboard-style prediction file: JSON object mapping uuid to
// {"Prediction": "Entailment"|"Contradiction"}.
std::map<std::string, Label> read_predictions(const std::string& path);
void write_predictions(const std::string& path,
                       const std::map<std::string, Label>& preds);

}  // namespace ctnli

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ctnli/corpus.hpp"
#include "ctnli/intervention.hpp"

namespace ctnli {

enum class PerturbKind {
  AcronymPositive,
  AcronymNegative,
  NumericValue,
  NumericComparator,
};

enum class LabelAction { Preserve, Flip };

std::string_view perturb_kind_name(PerturbKind k);
PerturbKind parse_perturb_kind(std::string_view s);
std::string_view label_action_name(LabelAction a);
LabelAction parse_label_action(std::string_view s);

// A derived instance. `label` already reflects the action: equal to the
// source label under Preserve, opposite under Flip. The hypothesis always
// differs from the source hypothesis.
struct PerturbedInstance {
  std::string new_uuid;
  std::string source_uuid;
  PerturbKind kind = PerturbKind::AcronymPositive;
  LabelAction label_action = LabelAction::Preserve;
  std::string hypothesis;
  Label label = Label::Entailment;
};

std::string perturbed_to_jsonl_line(const PerturbedInstance& p);
PerturbedInstance parse_perturbed_jsonl_line(std::string_view line);
void write_perturbed_jsonl(const std::string& path,
                           const std::vector<PerturbedInstance>& items);
std::vector<PerturbedInstance> read_perturbed_jsonl(const std::string& path);

// Intervention category a perturbation behaves as during evaluation: a
// positive expansion is a paraphrase, a negative expansion a contradiction,
// and both numeric edits numerical contradictions.
InterventionKind intervention_kind_for(PerturbKind k);

// Derived NliInstances: each perturbation applied to its source instance
// (same trial references and section, new uuid/hypothesis/label). Errors on
// a source_uuid absent from `instances`.
std::vector<NliInstance> apply_perturbations(
    const std::vector<NliInstance>& instances,
    const std::vector<PerturbedInstance>& perturbed);

}  // namespace ctnli

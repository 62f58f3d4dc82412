#pragma once

#include <string>
#include <string_view>

namespace ctnli {

// Controlled-edit categories attached to evaluation statements. Paraphrase,
// Numerical_paraphrase, Definitions and Text_appended keep the gold label;
// Contradiction and Numerical_contradiction flip it; Control and Contrast
// belong to neither group.
enum class InterventionKind {
  Control,
  Contrast,
  Paraphrase,
  Contradiction,
  NumericalContradiction,
  NumericalParaphrase,
  Definitions,
  TextAppended,
};

bool is_semantic_preserving(InterventionKind k);
bool is_semantic_altering(InterventionKind k);

std::string_view intervention_kind_name(InterventionKind k);
InterventionKind parse_intervention_kind(std::string_view s);

}  // namespace ctnli

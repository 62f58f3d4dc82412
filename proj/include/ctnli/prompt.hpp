#pragma once

#include <string>
#include <string_view>

#include "ctnli/corpus.hpp"

namespace ctnli {

// Fixed prompt scaffolding. The wording is part of the artifact's contract:
// header + context block + question block + answer slot, 16 whitespace tokens
// in total including the rendered answer, matching kPromptReserveTokens.
inline constexpr std::string_view kPromptHeader =
    "Answer \"Yes\" if the statement is entailed by the context, else \"No\".";
inline constexpr std::string_view kPromptContextMarker = "Context:";
inline constexpr std::string_view kPromptQuestionMarker = "Question:";
inline constexpr std::string_view kPromptAnswerMarker = "Answer:";

// Entailment renders as "Yes", Contradiction as "No". With include_answer the
// prompt ends in the answer word; without it the prompt ends at the empty
// answer slot. include_answer on an unlabeled pair is an error.
std::string render_prompt(const ResolvedPair& pair, bool include_answer);

}  // namespace ctnli

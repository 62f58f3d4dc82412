#include "ctnli/prompt.hpp"

#include <stdexcept>

namespace ctnli {

std::string render_prompt(const ResolvedPair& pair, bool include_answer) {
  if (include_answer && !pair.label.has_value()) {
    throw std::runtime_error("include_answer requested but pair " + pair.uuid +
                             " has no label");
  }
  std::string out;
  out.reserve(pair.premise.size() + pair.hypothesis.size() + 96);
  out += kPromptHeader;
  out += '\n';
  out += kPromptContextMarker;
  out += '\n';
  out += pair.premise;
  out += '\n';
  out += kPromptQuestionMarker;
  out += '\n';
  out += pair.hypothesis;
  out += '\n';
  out += kPromptAnswerMarker;
  out += '\n';
  if (include_answer) {
    out += (*pair.label == Label::Entailment) ? "Yes" : "No";
  }
  return out;
}

}  // namespace ctnli

#include "ctnli/perturb.hpp"

#include <fstream>
#include <stdexcept>

#include "ctnli/io.hpp"
#include "json.hpp"

namespace ctnli {

using nlohmann::json;

std::string_view perturb_kind_name(PerturbKind k) {
  switch (k) {
    case PerturbKind::AcronymPositive: return "AcronymPositive";
    case PerturbKind::AcronymNegative: return "AcronymNegative";
    case PerturbKind::NumericValue: return "NumericValue";
    case PerturbKind::NumericComparator: return "NumericComparator";
  }
  throw std::logic_error("bad perturb kind");
}

PerturbKind parse_perturb_kind(std::string_view s) {
  if (s == "AcronymPositive") return PerturbKind::AcronymPositive;
  if (s == "AcronymNegative") return PerturbKind::AcronymNegative;
  if (s == "NumericValue") return PerturbKind::NumericValue;
  if (s == "NumericComparator") return PerturbKind::NumericComparator;
  throw std::runtime_error("unknown perturbation kind: \"" + std::string(s) + "\"");
}

std::string_view label_action_name(LabelAction a) {
  return a == LabelAction::Preserve ? "Preserve" : "Flip";
}

LabelAction parse_label_action(std::string_view s) {
  if (s == "Preserve") return LabelAction::Preserve;
  if (s == "Flip") return LabelAction::Flip;
  throw std::runtime_error("unknown label action: \"" + std::string(s) + "\"");
}

std::string perturbed_to_jsonl_line(const PerturbedInstance& p) {
  json j;
  j["uuid"] = p.new_uuid;
  j["source_uuid"] = p.source_uuid;
  j["kind"] = perturb_kind_name(p.kind);
  j["label_action"] = label_action_name(p.label_action);
  j["hypothesis"] = p.hypothesis;
  j["label"] = label_name(p.label);
  return j.dump();
}

PerturbedInstance parse_perturbed_jsonl_line(std::string_view line) {
  json j = json::parse(line);
  PerturbedInstance p;
  p.new_uuid = j.at("uuid").get<std::string>();
  p.source_uuid = j.at("source_uuid").get<std::string>();
  p.kind = parse_perturb_kind(j.at("kind").get<std::string>());
  p.label_action = parse_label_action(j.at("label_action").get<std::string>());
  p.hypothesis = j.at("hypothesis").get<std::string>();
  p.label = parse_label(j.at("label").get<std::string>());
  return p;
}

void write_perturbed_jsonl(const std::string& path,
                           const std::vector<PerturbedInstance>& items) {
  std::string out;
  for (const auto& p : items) {
    out += perturbed_to_jsonl_line(p);
    out.push_back('\n');
  }
  io::write_file(path, out);
}

std::vector<PerturbedInstance> read_perturbed_jsonl(const std::string& path) {
  std::vector<PerturbedInstance> items;
  for (const auto& line : io::read_lines(path)) {
    if (line.empty()) continue;
    items.push_back(parse_perturbed_jsonl_line(line));
  }
  return items;
}

InterventionKind intervention_kind_for(PerturbKind k) {
  switch (k) {
    case PerturbKind::AcronymPositive: return InterventionKind::Paraphrase;
    case PerturbKind::AcronymNegative: return InterventionKind::Contradiction;
    case PerturbKind::NumericValue:
    case PerturbKind::NumericComparator:
      return InterventionKind::NumericalContradiction;
  }
  throw std::logic_error("bad perturb kind");
}

std::vector<NliInstance> apply_perturbations(
    const std::vector<NliInstance>& instances,
    const std::vector<PerturbedInstance>& perturbed) {
  std::unordered_map<std::string_view, const NliInstance*> by_uuid;
  for (const auto& inst : instances) by_uuid.emplace(inst.uuid, &inst);
  std::vector<NliInstance> out;
  out.reserve(perturbed.size());
  for (const auto& p : perturbed) {
    auto it = by_uuid.find(p.source_uuid);
    if (it == by_uuid.end()) {
      throw std::runtime_error("perturbed instance " + p.new_uuid +
                               " references unknown source uuid \"" +
                               p.source_uuid + "\"");
    }
    NliInstance inst = *it->second;
    inst.uuid = p.new_uuid;
    inst.statement = p.hypothesis;
    inst.label = p.label;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace ctnli

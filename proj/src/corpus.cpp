#include "ctnli/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ctnli/text.hpp"
#include "json.hpp"

namespace ctnli {

using nlohmann::json;

Label opposite(Label l) {
  return l == Label::Entailment ? Label::Contradiction : Label::Entailment;
}

std::string_view label_name(Label l) {
  return l == Label::Entailment ? "Entailment" : "Contradiction";
}

Label parse_label(std::string_view s) {
  if (s == "Entailment") return Label::Entailment;
  if (s == "Contradiction") return Label::Contradiction;
  throw std::runtime_error("malformed label string: \"" + std::string(s) + "\"");
}

std::string_view section_name(Section s) {
  switch (s) {
    case Section::Intervention: return "Intervention";
    case Section::Eligibility: return "Eligibility";
    case Section::Results: return "Results";
    case Section::AdverseEvents: return "Adverse Events";
  }
  throw std::logic_error("bad section");
}

Section parse_section(std::string_view s) {
  for (Section sec : kAllSections) {
    if (s == section_name(sec)) return sec;
  }
  throw std::runtime_error("unknown section name: \"" + std::string(s) + "\"");
}

std::string_view instance_type_name(InstanceType t) {
  return t == InstanceType::Single ? "Single" : "Comparison";
}

InstanceType parse_instance_type(std::string_view s) {
  if (s == "Single") return InstanceType::Single;
  if (s == "Comparison") return InstanceType::Comparison;
  throw std::runtime_error("unknown instance type: \"" + std::string(s) + "\"");
}

bool is_semantic_preserving(InterventionKind k) {
  switch (k) {
    case InterventionKind::Paraphrase:
    case InterventionKind::NumericalParaphrase:
    case InterventionKind::Definitions:
    case InterventionKind::TextAppended:
      return true;
    default:
      return false;
  }
}

bool is_semantic_altering(InterventionKind k) {
  return k == InterventionKind::Contradiction ||
         k == InterventionKind::NumericalContradiction;
}

std::string_view intervention_kind_name(InterventionKind k) {
  switch (k) {
    case InterventionKind::Control: return "Control";
    case InterventionKind::Contrast: return "Contrast";
    case InterventionKind::Paraphrase: return "Paraphrase";
    case InterventionKind::Contradiction: return "Contradiction";
    case InterventionKind::NumericalContradiction: return "Numerical_contradiction";
    case InterventionKind::NumericalParaphrase: return "Numerical_paraphrase";
    case InterventionKind::Definitions: return "Definitions";
    case InterventionKind::TextAppended: return "Text_appended";
  }
  throw std::logic_error("bad intervention kind");
}

InterventionKind parse_intervention_kind(std::string_view s) {
  // Case-insensitive, '_'/' ' ignored, so the task-style spellings
  // ("Numerical_contradiction") and the compact ones ("NumericalContradiction")
  // both parse.
  std::string key;
  for (char c : s) {
    if (c == '_' || c == ' ') continue;
    key.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  static const std::array<InterventionKind, 8> all = {
      InterventionKind::Control,       InterventionKind::Contrast,
      InterventionKind::Paraphrase,    InterventionKind::Contradiction,
      InterventionKind::NumericalContradiction,
      InterventionKind::NumericalParaphrase,
      InterventionKind::Definitions,   InterventionKind::TextAppended};
  for (InterventionKind k : all) {
    std::string canon;
    for (char c : intervention_kind_name(k)) {
      if (c == '_' || c == ' ') continue;
      canon.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    }
    if (key == canon) return k;
  }
  throw std::runtime_error("unknown intervention kind: \"" + std::string(s) + "\"");
}

namespace {

json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

ClinicalTrialRecord load_ctr_file(const std::string& path, const std::string& trial_id) {
  json j = parse_json_file(path);
  if (!j.is_object()) {
    throw std::runtime_error("CTR file is not a JSON object: " + path);
  }
  ClinicalTrialRecord rec;
  rec.trial_id = trial_id;
  for (Section s : kAllSections) rec.sections[s] = {};
  for (const auto& [key, value] : j.items()) {
    bool is_section = false;
    for (Section s : kAllSections) {
      if (key == section_name(s)) {
        if (!value.is_array()) {
          throw std::runtime_error("section \"" + key + "\" in " + path +
                                   " is not an array of lines");
        }
        auto& lines = rec.sections[s];
        for (const auto& line : value) {
          if (!line.is_string()) {
            throw std::runtime_error("non-string line in section \"" + key +
                                     "\" of " + path);
          }
          lines.push_back(line.get<std::string>());
        }
        is_section = true;
        break;
      }
    }
    (void)is_section;  // non-section keys (e.g. the trial id field) are ignored
  }
  return rec;
}

NliInstance parse_instance(const std::string& uuid, const json& j) {
  if (!j.is_object()) {
    throw std::runtime_error("instance " + uuid + " is not a JSON object");
  }
  NliInstance inst;
  inst.uuid = uuid;
  try {
    inst.itype = parse_instance_type(j.at("Type").get<std::string>());
  } catch (const json::exception&) {
    throw std::runtime_error("instance " + uuid + " is missing a valid \"Type\"");
  }
  std::string section_str;
  try {
    section_str = j.at("Section_id").get<std::string>();
  } catch (const json::exception&) {
    throw std::runtime_error("instance " + uuid + " is missing \"Section_id\"");
  }
  try {
    inst.section = parse_section(section_str);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("unknown section name \"" + section_str +
                             "\" in instance " + uuid);
  }
  try {
    inst.primary_id = j.at("Primary_id").get<std::string>();
  } catch (const json::exception&) {
    throw std::runtime_error("instance " + uuid + " is missing \"Primary_id\"");
  }
  if (inst.primary_id.empty()) {
    throw std::runtime_error("instance " + uuid + " has an empty Primary_id");
  }
  if (j.contains("Secondary_id")) {
    inst.secondary_id = j.at("Secondary_id").get<std::string>();
  }
  if (inst.itype == InstanceType::Comparison && !inst.secondary_id.has_value()) {
    throw std::runtime_error("comparison instance " + uuid +
                             " is missing \"Secondary_id\"");
  }
  if (inst.itype == InstanceType::Single && inst.secondary_id.has_value()) {
    throw std::runtime_error("single instance " + uuid +
                             " must not carry \"Secondary_id\"");
  }
  try {
    inst.statement = j.at("Statement").get<std::string>();
  } catch (const json::exception&) {
    throw std::runtime_error("instance " + uuid + " is missing \"Statement\"");
  }
  if (j.contains("Label") && !j.at("Label").is_null()) {
    try {
      inst.label = parse_label(j.at("Label").get<std::string>());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(std::string(e.what()) + " in instance " + uuid);
    }
  }
  if (j.contains("Intervention_type") && !j.at("Intervention_type").is_null()) {
    inst.intervention =
        parse_intervention_kind(j.at("Intervention_type").get<std::string>());
  }
  return inst;
}

}  // namespace

std::vector<NliInstance> load_instances(const std::string& instances_path) {
  json j = parse_json_file(instances_path);
  if (!j.is_object()) {
    throw std::runtime_error("instance file is not a uuid-keyed JSON object: " +
                             instances_path);
  }
  std::vector<NliInstance> out;
  out.reserve(j.size());
  for (const auto& [uuid, body] : j.items()) {
    out.push_back(parse_instance(uuid, body));
  }
  return out;  // nlohmann objects iterate key-sorted, so order is by uuid
}

Corpus load_corpus(const std::string& instances_path, const std::string& ctr_dir) {
  Corpus corpus;
  corpus.instances = load_instances(instances_path);

  std::set<std::string> trial_ids;
  for (const auto& inst : corpus.instances) {
    trial_ids.insert(inst.primary_id);
    if (inst.secondary_id) trial_ids.insert(*inst.secondary_id);
  }
  namespace fs = std::filesystem;
  for (const auto& id : trial_ids) {
    fs::path path = fs::path(ctr_dir) / (id + ".json");
    if (!fs::exists(path)) {
      throw std::runtime_error("missing CTR file for trial id " + id + " (" +
                               path.string() + ")");
    }
    corpus.ctrs.emplace(id, load_ctr_file(path.string(), id));
  }
  return corpus;
}

ResolvedPair resolve_premise(const NliInstance& inst, const CtrMap& ctrs) {
  auto section_text = [&](const std::string& trial_id) -> std::string {
    auto it = ctrs.find(trial_id);
    if (it == ctrs.end()) {
      throw std::runtime_error("instance " + inst.uuid +
                               " references unloaded trial " + trial_id);
    }
    auto sit = it->second.sections.find(inst.section);
    const std::vector<std::string>* lines =
        sit == it->second.sections.end() ? nullptr : &sit->second;
    std::string joined;
    if (lines) {
      for (std::size_t i = 0; i < lines->size(); ++i) {
        if (i) joined.push_back('\n');
        joined += (*lines)[i];
      }
    }
    return joined;
  };

  ResolvedPair pair;
  pair.uuid = inst.uuid;
  pair.hypothesis = inst.statement;
  pair.label = inst.label;

  if (inst.itype == InstanceType::Single) {
    pair.premise = section_text(inst.primary_id);
    if (pair.premise.empty()) {
      throw std::runtime_error("section " + std::string(section_name(inst.section)) +
                               " is empty in trial " + inst.primary_id +
                               " for instance " + inst.uuid);
    }
  } else {
    if (!inst.secondary_id) {
      throw std::runtime_error("comparison instance " + inst.uuid +
                               " has no secondary trial id");
    }
    std::string primary = section_text(inst.primary_id);
    std::string secondary = section_text(*inst.secondary_id);
    if (primary.empty() && secondary.empty()) {
      throw std::runtime_error("section " + std::string(section_name(inst.section)) +
                               " is empty in all referenced trials for instance " +
                               inst.uuid);
    }
    pair.premise =
        "Primary trial:\n" + primary + "\nSecondary trial:\n" + secondary;
  }
  return pair;
}

std::optional<ResolvedPair> truncate_pair(const ResolvedPair& pair,
                                          std::size_t budget, TruncateMode mode) {
  const std::size_t hyp_tokens = text::token_count(pair.hypothesis);
  const std::size_t premise_tokens = text::token_count(pair.premise);
  if (mode == TruncateMode::Truncate && budget <= hyp_tokens + kPromptReserveTokens) {
    throw std::runtime_error(
        "token budget " + std::to_string(budget) +
        " cannot hold the hypothesis (" + std::to_string(hyp_tokens) +
        " tokens) plus the reserve of " + std::to_string(kPromptReserveTokens));
  }
  const std::size_t total = premise_tokens + hyp_tokens + kPromptReserveTokens;
  if (total <= budget) return pair;
  if (mode == TruncateMode::Remove) return std::nullopt;

  ResolvedPair cut = pair;
  const std::size_t keep = budget - hyp_tokens - kPromptReserveTokens;
  cut.premise = std::string(text::prefix_tokens(pair.premise, keep));
  return cut;
}

std::uint64_t CorpusStats::by_type(InstanceType t) const {
  std::uint64_t n = 0;
  for (const auto& sec : counts[static_cast<int>(t)])
    for (auto c : sec) n += c;
  return n;
}

std::uint64_t CorpusStats::by_section(Section s) const {
  std::uint64_t n = 0;
  for (const auto& type : counts)
    for (auto c : type[static_cast<int>(s)]) n += c;
  return n;
}

std::uint64_t CorpusStats::by_label(Label l) const {
  std::uint64_t n = 0;
  for (const auto& type : counts)
    for (const auto& sec : type) n += sec[static_cast<int>(l)];
  return n;
}

std::uint64_t CorpusStats::cell(InstanceType t, Section s) const {
  std::uint64_t n = 0;
  for (auto c : counts[static_cast<int>(t)][static_cast<int>(s)]) n += c;
  return n;
}

std::string CorpusStats::to_csv() const {
  std::ostringstream out;
  out << "type,section,label,count\n";
  for (InstanceType t : {InstanceType::Single, InstanceType::Comparison}) {
    for (Section s : kAllSections) {
      for (int cell = 0; cell < kLabelCells; ++cell) {
        const char* label = cell == 0   ? "Entailment"
                            : cell == 1 ? "Contradiction"
                                        : "Unlabeled";
        out << instance_type_name(t) << ',' << section_name(s) << ',' << label
            << ',' << counts[static_cast<int>(t)][static_cast<int>(s)][cell]
            << '\n';
      }
    }
  }
  return out.str();
}

CorpusStats corpus_stats(const std::vector<NliInstance>& instances) {
  CorpusStats stats;
  for (const auto& inst : instances) {
    int label_cell = CorpusStats::kLabelCells - 1;
    if (inst.label) label_cell = static_cast<int>(*inst.label);
    ++stats.counts[static_cast<int>(inst.itype)][static_cast<int>(inst.section)]
                  [label_cell];
    ++stats.total;
  }
  return stats;
}

}  // namespace ctnli

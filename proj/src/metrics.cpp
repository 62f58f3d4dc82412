#include "ctnli/metrics.hpp"

#include <stdexcept>

#include "ctnli/io.hpp"
#include "json.hpp"

namespace ctnli {

namespace {

using json = nlohmann::ordered_json;

LabelScores score_class(const std::map<std::string, Label>& gold,
                        const std::map<std::string, Label>& pred, Label cls) {
  std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  for (const auto& [uuid, g] : gold) {
    Label p = pred.at(uuid);
    if (g == cls) ++support;
    if (p == cls && g == cls) ++tp;
    if (p == cls && g != cls) ++fp;
    if (p != cls && g == cls) ++fn;
  }
  LabelScores s;
  s.support = support;
  s.precision = tp + fp == 0 ? 0.0
                             : static_cast<double>(tp) /
                                   static_cast<double>(tp + fp);
  s.recall = tp + fn == 0 ? 0.0
                          : static_cast<double>(tp) /
                                static_cast<double>(tp + fn);
  s.f1 = s.precision + s.recall == 0.0
             ? 0.0
             : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

void require_same_uuids(const std::map<std::string, Label>& gold,
                        const std::map<std::string, Label>& pred) {
  if (gold.size() != pred.size()) {
    throw std::runtime_error("gold and prediction uuid sets differ in size");
  }
  for (const auto& [uuid, g] : gold) {
    if (pred.count(uuid) == 0) {
      throw std::runtime_error("prediction missing for " + uuid);
    }
  }
}

json scores_to_json(const LabelScores& s) {
  json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  j["support"] = s.support;
  return j;
}

json macro_to_json(const MacroF1Result& m) {
  json j;
  j["macro_f1"] = m.macro;
  j["entailment"] = scores_to_json(m.entailment);
  j["contradiction"] = scores_to_json(m.contradiction);
  return j;
}

}  // namespace

MacroF1Result macro_f1(const std::map<std::string, Label>& gold,
                       const std::map<std::string, Label>& pred) {
  require_same_uuids(gold, pred);
  MacroF1Result r;
  r.entailment = score_class(gold, pred, Label::Entailment);
  r.contradiction = score_class(gold, pred, Label::Contradiction);
  r.macro = (r.entailment.f1 + r.contradiction.f1) / 2.0;
  return r;
}

std::vector<InterventionLink> read_intervention_links(const std::string& path) {
  std::vector<InterventionLink> links;
  for (const auto& line : io::read_lines(path)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    InterventionLink l;
    l.uuid = j.at("uuid").get<std::string>();
    l.source_uuid = j.at("source_uuid").get<std::string>();
    l.kind = parse_intervention_kind(j.at("kind").get<std::string>());
    links.push_back(std::move(l));
  }
  return links;
}

void write_intervention_links(const std::string& path,
                              const std::vector<InterventionLink>& links) {
  std::string body;
  for (const auto& l : links) {
    json j;
    j["uuid"] = l.uuid;
    j["source_uuid"] = l.source_uuid;
    j["kind"] = std::string(intervention_kind_name(l.kind));
    body += j.dump();
    body.push_back('\n');
  }
  io::write_file(path, body);
}

std::optional<double> consistency(
    const std::map<std::string, Label>& base_pred,
    const std::map<std::string, Label>& intervened_pred,
    const std::vector<InterventionLink>& links) {
  std::size_t total = 0, same = 0;
  for (const auto& l : links) {
    if (!is_semantic_preserving(l.kind)) {
      throw std::runtime_error(
          "consistency expects semantic-preserving kinds; " + l.uuid + " is " +
          std::string(intervention_kind_name(l.kind)));
    }
    if (base_pred.count(l.source_uuid) == 0) {
      throw std::runtime_error("no base prediction for source " + l.source_uuid);
    }
    if (intervened_pred.count(l.uuid) == 0) {
      throw std::runtime_error("no prediction for intervened " + l.uuid);
    }
    ++total;
    if (intervened_pred.at(l.uuid) == base_pred.at(l.source_uuid)) ++same;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(same) / static_cast<double>(total);
}

std::optional<double> faithfulness(
    const std::map<std::string, Label>& base_pred,
    const std::map<std::string, Label>& gold_base,
    const std::map<std::string, Label>& intervened_pred,
    const std::map<std::string, Label>& gold_intervened,
    const std::vector<InterventionLink>& links) {
  std::size_t eligible = 0, flipped = 0;
  for (const auto& l : links) {
    if (!is_semantic_altering(l.kind)) {
      throw std::runtime_error(
          "faithfulness expects semantic-altering kinds; " + l.uuid + " is " +
          std::string(intervention_kind_name(l.kind)));
    }
    if (base_pred.count(l.source_uuid) == 0 ||
        gold_base.count(l.source_uuid) == 0) {
      throw std::runtime_error("no base data for source " + l.source_uuid);
    }
    if (intervened_pred.count(l.uuid) == 0 ||
        gold_intervened.count(l.uuid) == 0) {
      throw std::runtime_error("no intervened data for " + l.uuid);
    }
    if (gold_intervened.at(l.uuid) == gold_base.at(l.source_uuid)) {
      throw std::runtime_error("altering intervention " + l.uuid +
                               " does not flip the gold label");
    }
    if (base_pred.at(l.source_uuid) != gold_base.at(l.source_uuid)) continue;
    ++eligible;
    if (intervened_pred.at(l.uuid) == gold_intervened.at(l.uuid)) ++flipped;
  }
  if (eligible == 0) return std::nullopt;
  return static_cast<double>(flipped) / static_cast<double>(eligible);
}

std::vector<GroupF1Row> per_group_f1(
    const std::map<std::string, Label>& gold,
    const std::map<std::string, Label>& pred,
    const std::map<std::string, std::string>& group_of) {
  require_same_uuids(gold, pred);
  std::map<std::string, std::map<std::string, Label>> gold_by, pred_by;
  for (const auto& [uuid, g] : gold) {
    auto it = group_of.find(uuid);
    if (it == group_of.end()) {
      throw std::runtime_error("no group for " + uuid);
    }
    gold_by[it->second][uuid] = g;
    pred_by[it->second][uuid] = pred.at(uuid);
  }
  std::vector<GroupF1Row> rows;
  for (const auto& [group, g] : gold_by) {
    GroupF1Row row;
    row.group = group;
    row.scores = macro_f1(g, pred_by.at(group));
    row.support = g.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string group_f1_to_csv(const std::vector<GroupF1Row>& rows) {
  std::string body =
      "group,support,macro_f1,f1_entailment,support_entailment,"
      "f1_contradiction,support_contradiction\n";
  for (const auto& r : rows) {
    body += io::csv_escape(r.group) + "," + std::to_string(r.support) + "," +
            io::format_double(r.scores.macro) + "," +
            io::format_double(r.scores.entailment.f1) + "," +
            std::to_string(r.scores.entailment.support) + "," +
            io::format_double(r.scores.contradiction.f1) + "," +
            std::to_string(r.scores.contradiction.support) + "\n";
  }
  return body;
}

MetricsReport build_report(
    const std::map<std::string, Label>& gold,
    const std::map<std::string, Label>& pred,
    const std::map<std::string, std::string>& section_of,
    const std::optional<InterventionInputs>& interventions) {
  MetricsReport report;
  report.overall = macro_f1(gold, pred);
  report.per_section = per_group_f1(gold, pred, section_of);
  if (interventions) {
    std::vector<InterventionLink> preserving, altering;
    std::map<std::string, std::string> kind_of;
    for (const auto& l : interventions->links) {
      if (is_semantic_preserving(l.kind)) preserving.push_back(l);
      if (is_semantic_altering(l.kind)) altering.push_back(l);
      kind_of[l.uuid] = std::string(intervention_kind_name(l.kind));
    }
    report.consistency =
        consistency(pred, interventions->predictions, preserving);
    report.faithfulness = faithfulness(pred, gold, interventions->predictions,
                                       interventions->gold, altering);
    // The gold and prediction maps may cover more uuids than the links (a
    // prediction file often spans base and intervened instances); only the
    // linked uuids enter the per-kind table. Per-kind F1 needs a gold label,
    // which preserving-only link sets lack, so the table is restricted to
    // uuids present in the intervened gold map.
    std::map<std::string, Label> linked_gold, linked_pred;
    std::map<std::string, std::string> linked_kind;
    for (const auto& [uuid, kind] : kind_of) {
      auto g = interventions->gold.find(uuid);
      if (g == interventions->gold.end()) continue;
      auto p = interventions->predictions.find(uuid);
      if (p == interventions->predictions.end()) {
        throw std::runtime_error(
            "intervened predictions lack an entry for uuid " + uuid);
      }
      linked_gold[uuid] = g->second;
      linked_pred[uuid] = p->second;
      linked_kind[uuid] = kind;
    }
    report.per_intervention =
        per_group_f1(linked_gold, linked_pred, linked_kind);
  }
  return report;
}

std::string report_to_json(const MetricsReport& report) {
  json j;
  j["overall"] = macro_to_json(report.overall);
  j["consistency"] =
      report.consistency ? json(*report.consistency) : json(nullptr);
  j["faithfulness"] =
      report.faithfulness ? json(*report.faithfulness) : json(nullptr);
  auto rows_to_json = [](const std::vector<GroupF1Row>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
      json row;
      row["group"] = r.group;
      row["support"] = r.support;
      row["scores"] = macro_to_json(r.scores);
      arr.push_back(std::move(row));
    }
    return arr;
  };
  j["per_section"] = rows_to_json(report.per_section);
  j["per_intervention"] = rows_to_json(report.per_intervention);
  return j.dump(2) + "\n";
}

std::map<std::string, Label> read_predictions(const std::string& path) {
  json j = json::parse(io::read_file(path));
  if (!j.is_object()) {
    throw std::runtime_error("prediction file is not a JSON object: " + path);
  }
  std::map<std::string, Label> out;
  for (const auto& [uuid, entry] : j.items()) {
    out[uuid] = parse_label(entry.at("Prediction").get<std::string>());
  }
  return out;
}

void write_predictions(const std::string& path,
                       const std::map<std::string, Label>& preds) {
  json j = json::object();
  for (const auto& [uuid, label] : preds) {
    j[uuid] = {{"Prediction", std::string(label_name(label))}};
  }
  io::write_file(path, j.dump(2) + "\n");
}

}  // namespace ctnli

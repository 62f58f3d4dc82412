#include "ctnli/numeric.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "ctnli/io.hpp"
#include "ctnli/text.hpp"
#include "json.hpp"

namespace ctnli {

namespace {

using json = nlohmann::ordered_json;

const std::set<std::string> kDosageUnits = {
    "mg",    "mcg",   "ug",     "g",       "kg",       "ml",     "l",
    "iu",    "units", "tablets", "capsules", "doses",   "mg/kg",  "mg/m2",
    "mg/day", "g/day", "ml/kg",  "mg/ml",   "mcg/kg",   "iu/kg"};

const std::set<std::string> kLabUnits = {
    "%",       "mmol/l",   "mg/dl",  "g/dl",      "iu/l",      "u/l",
    "ng/ml",   "pg/ml",    "mmhg",   "cells/mm3", "copies/ml", "meq/l",
    "umol/l",  "mm/h",     "g/l",    "mmol/mol",  "cells/ul",  "ng/dl"};

const std::set<std::string> kDurationUnits = {
    "day",   "days",   "week",   "weeks",   "month",  "months",
    "year",  "years",  "hour",   "hours",   "minute", "minutes"};

const std::set<std::string> kMonths = {
    "january", "february", "march",     "april",   "may",      "june",
    "july",    "august",   "september", "october", "november", "december",
    "jan",     "feb",      "mar",       "apr",     "jun",      "jul",
    "aug",     "sep",      "sept",      "oct",     "nov",      "dec"};

const std::set<std::string> kAgeKeywords = {"age", "aged", "ages"};

bool is_unit_char(char c) {
  return text::is_ascii_alnum(c) || c == '%' || c == '/';
}

struct NumberRun {
  std::size_t start = 0;
  std::size_t end = 0;
  double value = 0.0;
};

std::vector<NumberRun> scan_numbers(std::string_view text) {
  std::vector<NumberRun> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!text::is_ascii_digit(text[i])) {
      ++i;
      continue;
    }
    if (i > 0 && (text::is_ascii_alnum(text[i - 1]) || text[i - 1] == '.')) {
      while (i < n && text::is_ascii_digit(text[i])) ++i;
      continue;
    }
    std::size_t s = i;
    while (i < n && text::is_ascii_digit(text[i])) ++i;
    if (i + 1 < n && text[i] == '.' && text::is_ascii_digit(text[i + 1])) {
      ++i;
      while (i < n && text::is_ascii_digit(text[i])) ++i;
    }
    NumberRun run;
    run.start = s;
    run.end = i;
    run.value = std::stod(std::string(text.substr(s, i - s)));
    out.push_back(run);
  }
  return out;
}

// The token right after the number: either the attached unit-char run
// ("50mg", "50%") or the next whitespace-separated unit-char run.
std::string unit_candidate(std::string_view text, std::size_t end) {
  std::size_t i = end;
  const std::size_t n = text.size();
  if (i < n && !is_unit_char(text[i])) {
    while (i < n && text[i] == ' ') ++i;
  }
  std::size_t s = i;
  while (i < n && is_unit_char(text[i])) ++i;
  return text::to_lower(std::string(text.substr(s, i - s)));
}

std::vector<std::string> window_before(const std::vector<std::string>& toks,
                                       std::size_t idx, std::size_t k) {
  std::size_t lo = idx > k ? idx - k : 0;
  return {toks.begin() + static_cast<std::ptrdiff_t>(lo),
          toks.begin() + static_cast<std::ptrdiff_t>(idx)};
}

std::vector<std::string> window_after(const std::vector<std::string>& toks,
                                      std::size_t idx, std::size_t k) {
  std::size_t hi = std::min(toks.size(), idx + 1 + k);
  return {toks.begin() + static_cast<std::ptrdiff_t>(idx + 1),
          toks.begin() + static_cast<std::ptrdiff_t>(hi)};
}

bool contains(const std::vector<std::string>& v, const std::set<std::string>& s) {
  return std::any_of(v.begin(), v.end(),
                     [&](const std::string& t) { return s.count(t) > 0; });
}

void validate_span(std::string_view text, const EntitySpan& sp,
                   const std::string& where) {
  if (sp.start >= sp.end || sp.end > text.size()) {
    throw std::runtime_error("entity span out of range in " + where);
  }
  std::string piece(text.substr(sp.start, sp.end - sp.start));
  try {
    std::size_t pos = 0;
    double v = std::stod(piece, &pos);
    if (pos != piece.size()) throw std::invalid_argument(piece);
    if (v != sp.value) {
      throw std::runtime_error("entity span value mismatch in " + where + ": '" +
                               piece + "'");
    }
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("entity span is not numeric in " + where + ": '" +
                             piece + "'");
  }
}

}  // namespace

std::string_view entity_kind_name(EntityKind k) {
  switch (k) {
    case EntityKind::Age: return "Age";
    case EntityKind::Dosage: return "Dosage";
    case EntityKind::LabValue: return "LabValue";
    case EntityKind::Duration: return "Duration";
    case EntityKind::Date: return "Date";
  }
  throw std::logic_error("unreachable entity kind");
}

EntityKind parse_entity_kind(std::string_view s) {
  std::string k;
  for (char c : s) {
    if (c == '_' || c == ' ') continue;
    k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (k == "age") return EntityKind::Age;
  if (k == "dosage") return EntityKind::Dosage;
  if (k == "labvalue") return EntityKind::LabValue;
  if (k == "duration") return EntityKind::Duration;
  if (k == "date") return EntityKind::Date;
  throw std::runtime_error("unknown entity kind: " + std::string(s));
}

ComparatorLexicon ComparatorLexicon::defaults() {
  ComparatorLexicon lex;
  lex.pairs = {
      {"lower", "higher"},   {"less", "more"},       {"fewer", "greater"},
      {"at least", "at most"}, {"before", "after"},  {"younger", "older"},
      {"shorter", "longer"}, {"smaller", "larger"},  {"earlier", "later"},
      {"minimum", "maximum"}, {"above", "below"},    {"under", "over"},
  };
  lex.validate();
  return lex;
}

ComparatorLexicon ComparatorLexicon::from_csv(const std::string& path) {
  ComparatorLexicon lex;
  auto lines = io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = io::parse_csv_line(lines[i]);
    if (i == 0 && !fields.empty() && fields[0] == "phrase") continue;
    if (fields.size() != 2) {
      throw std::runtime_error("bad lexicon row in " + path + ": " + lines[i]);
    }
    lex.pairs.emplace_back(text::to_lower(fields[0]), text::to_lower(fields[1]));
  }
  lex.validate();
  return lex;
}

void ComparatorLexicon::validate() const {
  std::set<std::string> seen;
  for (const auto& [a, b] : pairs) {
    if (a.empty() || b.empty() || a == b) {
      throw std::runtime_error("degenerate lexicon pair: '" + a + "'/'" + b + "'");
    }
    for (const std::string& p : {a, b}) {
      if (text::to_lower(p) != p) {
        throw std::runtime_error("lexicon phrase must be lowercase: '" + p + "'");
      }
      if (!seen.insert(p).second) {
        throw std::runtime_error("lexicon phrase appears twice: '" + p + "'");
      }
    }
  }
}

std::vector<EntitySpan> detect_entities(
    std::string_view hypothesis,
    const std::optional<std::vector<EntitySpan>>& external_spans) {
  if (external_spans) {
    std::vector<EntitySpan> out = *external_spans;
    for (const auto& sp : out) validate_span(hypothesis, sp, "external spans");
    std::sort(out.begin(), out.end(),
              [](const EntitySpan& a, const EntitySpan& b) {
                return a.start < b.start;
              });
    return out;
  }

  // Token index for context lookups: normalized tokens of the raw tokens,
  // aligned with the raw token that covers each number.
  std::vector<std::string_view> raw = text::split_whitespace(hypothesis);
  std::vector<std::string> norm(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto t = text::normalized_tokens(raw[i]);
    norm[i] = t.empty() ? std::string() : t[0];
  }
  // Char offset of each raw token.
  std::vector<std::size_t> tok_start;
  {
    std::size_t pos = 0;
    for (const auto& t : raw) {
      pos = hypothesis.find(t, pos);
      tok_start.push_back(pos);
      pos += t.size();
    }
  }
  auto token_of = [&](std::size_t off) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < tok_start.size(); ++i) {
      if (tok_start[i] <= off) idx = i;
    }
    return idx;
  };

  std::vector<EntitySpan> out;
  for (const NumberRun& run : scan_numbers(hypothesis)) {
    std::size_t ti = token_of(run.start);
    auto before = window_before(norm, ti, 3);
    auto after = window_after(norm, ti, 3);
    std::string unit = unit_candidate(hypothesis, run.end);

    EntitySpan sp;
    sp.start = run.start;
    sp.end = run.end;
    sp.value = run.value;

    bool year_old = after.size() >= 2 &&
                    (after[0] == "year" || after[0] == "years") &&
                    (after[1] == "old" || (after.size() >= 3 && after[1] == "of" &&
                                           after[2] == "age"));
    if (contains(before, kAgeKeywords) || year_old) {
      sp.kind = EntityKind::Age;
      if (kDurationUnits.count(unit) > 0) sp.unit = unit;
    } else if (kDosageUnits.count(unit) > 0) {
      sp.kind = EntityKind::Dosage;
      sp.unit = unit;
    } else if (kLabUnits.count(unit) > 0) {
      sp.kind = EntityKind::LabValue;
      sp.unit = unit;
    } else if (kDurationUnits.count(unit) > 0) {
      sp.kind = EntityKind::Duration;
      sp.unit = unit;
    } else {
      bool month_adjacent =
          (!before.empty() && kMonths.count(before.back()) > 0) ||
          (!after.empty() && kMonths.count(after.front()) > 0);
      bool year_like = run.end - run.start == 4 && run.value >= 1900 &&
                       run.value <= 2100;
      if (!month_adjacent && !year_like) continue;
      sp.kind = EntityKind::Date;
    }
    out.push_back(sp);
  }
  return out;
}

std::unordered_map<std::string, std::vector<EntitySpan>> read_spans_jsonl(
    const std::string& path) {
  std::unordered_map<std::string, std::vector<EntitySpan>> out;
  for (const auto& line : io::read_lines(path)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    EntitySpan sp;
    sp.kind = parse_entity_kind(j.at("kind").get<std::string>());
    sp.start = j.at("start").get<std::size_t>();
    sp.end = j.at("end").get<std::size_t>();
    sp.value = j.at("value").get<double>();
    if (j.contains("unit") && !j["unit"].is_null()) {
      sp.unit = j["unit"].get<std::string>();
    }
    out[j.at("uuid").get<std::string>()].push_back(sp);
  }
  return out;
}

std::pair<std::string, std::size_t> flip_comparators(std::string_view hypothesis,
                                                     const ComparatorLexicon& lex) {
  // phrase -> antonym, both directions, tried longest phrase first.
  std::vector<std::pair<std::string, std::string>> repl;
  for (const auto& [a, b] : lex.pairs) {
    repl.emplace_back(a, b);
    repl.emplace_back(b, a);
  }
  std::sort(repl.begin(), repl.end(), [](const auto& x, const auto& y) {
    if (x.first.size() != y.first.size()) return x.first.size() > y.first.size();
    return x.first < y.first;
  });

  auto is_word_char = [](char c) { return text::is_ascii_alnum(c); };
  std::string out;
  out.reserve(hypothesis.size());
  std::size_t i = 0;
  std::size_t flips = 0;
  const std::size_t n = hypothesis.size();
  while (i < n) {
    bool matched = false;
    if (i == 0 || !is_word_char(hypothesis[i - 1])) {
      for (const auto& [phrase, antonym] : repl) {
        const std::size_t len = phrase.size();
        if (i + len > n) continue;
        char c0 = hypothesis[i];
        bool cap = c0 == static_cast<char>(
                             std::toupper(static_cast<unsigned char>(phrase[0])));
        if (c0 != phrase[0] && !(cap && text::is_ascii_upper(c0))) continue;
        if (hypothesis.substr(i + 1, len - 1) !=
            std::string_view(phrase).substr(1)) {
          continue;
        }
        if (i + len < n && is_word_char(hypothesis[i + len])) continue;
        std::string rep = antonym;
        if (c0 != phrase[0]) {
          rep[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(rep[0])));
        }
        out += rep;
        i += len;
        ++flips;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back(hypothesis[i]);
      ++i;
    }
  }
  return {out, flips};
}

namespace {

std::size_t decimals_of(std::string_view number_text) {
  auto dot = number_text.find('.');
  return dot == std::string_view::npos ? 0 : number_text.size() - dot - 1;
}

std::string format_shifted(double v, std::size_t decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", static_cast<int>(decimals), v);
  return buf;
}

}  // namespace

std::vector<PerturbedInstance> perturb_numeric_instance(
    const NliInstance& inst, const ComparatorLexicon& lex,
    const DeltaPolicy& policy, std::uint64_t seed,
    const std::optional<std::vector<EntitySpan>>& external_spans) {
  (void)seed;
  if (!inst.label) {
    throw std::runtime_error("instance " + inst.uuid + " has no label");
  }
  std::vector<PerturbedInstance> out;

  auto spans = detect_entities(inst.statement, external_spans);
  std::string shifted = inst.statement;
  bool any_shift = false;
  for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
    double nv = policy.mode == DeltaPolicy::Mode::AddPercent
                    ? it->value * (1.0 + policy.amount / 100.0)
                    : it->value + policy.amount;
    bool must_be_positive = it->kind == EntityKind::Age ||
                            it->kind == EntityKind::Dosage ||
                            it->kind == EntityKind::Duration;
    if (must_be_positive && nv <= 0.0) continue;
    std::string src = shifted.substr(it->start, it->end - it->start);
    std::string rep = format_shifted(nv, decimals_of(src));
    if (rep == src) continue;
    shifted.replace(it->start, it->end - it->start, rep);
    any_shift = true;
  }
  if (any_shift) {
    PerturbedInstance p;
    p.new_uuid = inst.uuid + "-num-val";
    p.source_uuid = inst.uuid;
    p.kind = PerturbKind::NumericValue;
    p.label_action = LabelAction::Flip;
    p.hypothesis = shifted;
    p.label = opposite(*inst.label);
    out.push_back(std::move(p));
  }

  auto [flipped, count] = flip_comparators(inst.statement, lex);
  if (count > 0) {
    PerturbedInstance p;
    p.new_uuid = inst.uuid + "-num-cmp";
    p.source_uuid = inst.uuid;
    p.kind = PerturbKind::NumericComparator;
    p.label_action = LabelAction::Flip;
    p.hypothesis = flipped;
    p.label = opposite(*inst.label);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ctnli

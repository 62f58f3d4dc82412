#include "ctnli/acronym.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "ctnli/io.hpp"
#include "ctnli/text.hpp"

namespace ctnli {

namespace {

std::vector<double> parse_vector_field(const std::string& field,
                                       const std::string& path) {
  std::vector<double> vec;
  std::stringstream ss{field};
  std::string part;
  while (std::getline(ss, part, ';')) {
    try {
      vec.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw std::runtime_error("bad embedding component \"" + part + "\" in " +
                               path);
    }
  }
  return vec;
}

}  // namespace

AcronymInventory AcronymInventory::from_csv(const std::string& path) {
  AcronymInventory inv;
  std::size_t dim = 0;
  auto lines = io::read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    auto fields = io::parse_csv_line(lines[ln]);
    if (ln == 0 && !fields.empty() && fields[0] == "short_form") continue;
    if (fields.size() < 2) {
      throw std::runtime_error("inventory row " + std::to_string(ln + 1) +
                               " in " + path + " needs short_form,long_form");
    }
    const std::string& sf = fields[0];
    const std::string& lf = fields[1];
    if (sf.empty()) {
      throw std::runtime_error("empty short_form in row " +
                               std::to_string(ln + 1) + " of " + path);
    }
    std::vector<double> vec;
    if (fields.size() >= 3 && !fields[2].empty()) {
      vec = parse_vector_field(fields[2], path);
      if (dim == 0) dim = vec.size();
      if (vec.size() != dim) {
        throw std::runtime_error("embedding dimension mismatch in " + path +
                                 " row " + std::to_string(ln + 1));
      }
    }
    if (lf.empty()) {
      if (vec.empty()) {
        throw std::runtime_error("row " + std::to_string(ln + 1) + " of " +
                                 path + " has neither long_form nor vector");
      }
      inv.embeddings[sf] = std::move(vec);
      continue;
    }
    inv.entries[sf].push_back(lf);
    if (!vec.empty()) inv.embeddings[lf] = std::move(vec);
  }
  return inv;
}

std::vector<ShortFormHit> extract_short_forms(std::string_view hypothesis,
                                              const AcronymInventory& inv) {
  std::vector<ShortFormHit> hits;
  std::size_t i = 0;
  while (i < hypothesis.size()) {
    if (!text::is_ascii_alnum(hypothesis[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < hypothesis.size() && text::is_ascii_alnum(hypothesis[i])) ++i;
    std::size_t len = i - start;
    if (len < 2 || len > 6) continue;
    std::string_view run = hypothesis.substr(start, len);
    int uppercase = 0;
    for (char c : run) uppercase += text::is_ascii_upper(c) ? 1 : 0;
    if (uppercase < 2) continue;
    if (inv.entries.find(std::string(run)) == inv.entries.end()) continue;
    hits.push_back({std::string(run), start, len});
  }
  return hits;
}

namespace {

std::unordered_map<std::string, int> char_trigrams(const std::string& s) {
  std::unordered_map<std::string, int> grams;
  std::string lower = text::to_lower(s);
  if (lower.size() < 3) return grams;
  for (std::size_t i = 0; i + 3 <= lower.size(); ++i) {
    ++grams[lower.substr(i, 3)];
  }
  return grams;
}

double cosine(const std::unordered_map<std::string, int>& a,
              const std::unordered_map<std::string, int>& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [g, c] : a) {
    na += static_cast<double>(c) * c;
    auto it = b.find(g);
    if (it != b.end()) dot += static_cast<double>(c) * it->second;
  }
  for (const auto& [g, c] : b) nb += static_cast<double>(c) * c;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double vec_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double TrigramCosineScorer::score(const std::string& long_form,
                                  const std::string& context) const {
  return cosine(char_trigrams(long_form), char_trigrams(context));
}

double EmbeddingScorer::score(const std::string& long_form,
                              const std::string& context) const {
  auto lf_it = inv_->embeddings.find(long_form);
  if (lf_it == inv_->embeddings.end()) return 0.0;
  std::vector<double> mean;
  std::size_t n = 0;
  for (const auto& tok : text::split_whitespace(context)) {
    auto it = inv_->embeddings.find(std::string(tok));
    if (it == inv_->embeddings.end()) continue;
    if (mean.empty()) mean.assign(it->second.size(), 0.0);
    for (std::size_t i = 0; i < it->second.size(); ++i) mean[i] += it->second[i];
    ++n;
  }
  if (n == 0) return 0.0;
  for (double& v : mean) v /= static_cast<double>(n);
  return vec_cosine(lf_it->second, mean);
}

std::string context_window(std::string_view hypothesis, const ShortFormHit& hit,
                           std::size_t window) {
  // Walk token boundaries; keep `window` tokens on each side of the token
  // containing the hit, slicing the original text.
  auto tokens = text::split_whitespace(hypothesis);
  if (tokens.empty()) return std::string(hypothesis);
  const char* base = hypothesis.data();
  std::size_t hit_tok = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    std::size_t tok_start = static_cast<std::size_t>(tokens[t].data() - base);
    std::size_t tok_end = tok_start + tokens[t].size();
    if (hit.char_offset >= tok_start && hit.char_offset < tok_end) {
      hit_tok = t;
      break;
    }
  }
  std::size_t first = hit_tok > window ? hit_tok - window : 0;
  std::size_t last = std::min(tokens.size() - 1, hit_tok + window);
  std::size_t begin = static_cast<std::size_t>(tokens[first].data() - base);
  std::size_t end =
      static_cast<std::size_t>(tokens[last].data() - base) + tokens[last].size();
  return std::string(hypothesis.substr(begin, end - begin));
}

std::vector<std::pair<std::string, double>> rank_long_forms(
    const std::string& short_form, const std::string& context,
    const std::vector<std::string>& candidates, const SimilarityScorer& scorer) {
  (void)short_form;
  if (candidates.empty()) {
    throw std::runtime_error("rank_long_forms: empty candidate list");
  }
  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(candidates.size());
  for (const auto& lf : candidates) {
    ranked.emplace_back(lf, scorer.score(lf, context));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

namespace {

struct ChosenExpansion {
  ShortFormHit hit;
  std::string long_form;
};

// Hits paired with the long form the mode selects; Negative drops
// single-candidate hits.
std::vector<ChosenExpansion> choose_expansions(const NliInstance& inst,
                                               const AcronymInventory& inv,
                                               AcronymMode mode,
                                               const SimilarityScorer& scorer) {
  std::vector<ChosenExpansion> chosen;
  for (const auto& hit : extract_short_forms(inst.statement, inv)) {
    const auto& candidates = inv.entries.at(hit.short_form);
    if (mode == AcronymMode::Negative && candidates.size() < 2) continue;
    auto ranked = rank_long_forms(hit.short_form,
                                  context_window(inst.statement, hit),
                                  candidates, scorer);
    const std::string& lf =
        mode == AcronymMode::Positive ? ranked.front().first : ranked.back().first;
    chosen.push_back({hit, lf});
  }
  return chosen;
}

}  // namespace

std::vector<PerturbedInstance> perturb_acronyms(const NliInstance& inst,
                                                const AcronymInventory& inv,
                                                AcronymMode mode,
                                                const SimilarityScorer& scorer) {
  if (!inst.label.has_value()) {
    throw std::runtime_error("perturb_acronyms: instance " + inst.uuid +
                             " has no label");
  }
  auto chosen = choose_expansions(inst, inv, mode, scorer);
  if (chosen.empty()) return {};

  std::string out;
  out.reserve(inst.statement.size() + chosen.size() * 24);
  std::size_t pos = 0;
  for (const auto& exp : chosen) {
    std::size_t end = exp.hit.char_offset + exp.hit.length;
    out += inst.statement.substr(pos, end - pos);
    out += " (";
    out += exp.long_form;
    out += ")";
    pos = end;
  }
  out += inst.statement.substr(pos);

  PerturbedInstance p;
  p.source_uuid = inst.uuid;
  p.hypothesis = std::move(out);
  if (mode == AcronymMode::Positive) {
    p.new_uuid = inst.uuid + "-acr-pos";
    p.kind = PerturbKind::AcronymPositive;
    p.label_action = LabelAction::Preserve;
    p.label = *inst.label;
  } else {
    p.new_uuid = inst.uuid + "-acr-neg";
    p.kind = PerturbKind::AcronymNegative;
    p.label_action = LabelAction::Flip;
    p.label = opposite(*inst.label);
  }
  return {std::move(p)};
}

std::vector<ReviewRow> acronym_review_rows(const NliInstance& inst,
                                           const AcronymInventory& inv,
                                           AcronymMode mode,
                                           const SimilarityScorer& scorer) {
  std::vector<ReviewRow> rows;
  for (const auto& hit : extract_short_forms(inst.statement, inv)) {
    const auto& candidates = inv.entries.at(hit.short_form);
    bool expandable = mode == AcronymMode::Positive || candidates.size() >= 2;
    auto ranked = rank_long_forms(hit.short_form,
                                  context_window(inst.statement, hit),
                                  candidates, scorer);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      ReviewRow row;
      row.uuid = inst.uuid;
      row.short_form = hit.short_form;
      row.char_offset = hit.char_offset;
      row.long_form = ranked[r].first;
      row.score = ranked[r].second;
      row.rank = r;
      row.chosen = expandable && (mode == AcronymMode::Positive
                                      ? r == 0
                                      : r + 1 == ranked.size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace ctnli

// Acceptance gate: one [PASS]/[FAIL] line per criterion, [SKIP] when the
// optional real corpus is absent. Exits nonzero iff any criterion failed.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ctnli/acronym.hpp"
#include "ctnli/batch.hpp"
#include "ctnli/cartography.hpp"
#include "ctnli/corpus.hpp"
#include "ctnli/features.hpp"
#include "ctnli/metrics.hpp"
#include "ctnli/minmax.hpp"
#include "ctnli/numeric.hpp"
#include "ctnli/perturb.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using namespace ctnli;

namespace {

int g_failures = 0;
int g_skips = 0;

void report(int number, const std::string& name, bool ok,
            const std::string& detail) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << number << " " << name;
  if (!detail.empty()) std::cout << ": " << detail;
  std::cout << "\n";
  if (!ok) ++g_failures;
}

void report_skip(int number, const std::string& name,
                 const std::string& why) {
  std::cout << "[SKIP] " << number << " " << name << ": " << why << "\n";
  ++g_skips;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

FeatureVector random_features(SplitMix64& rng, std::uint32_t dim,
                              std::size_t lo, std::size_t hi) {
  std::set<std::uint32_t> idx;
  const std::size_t n = lo + rng.next() % (hi - lo + 1);
  while (idx.size() < n) {
    idx.insert(static_cast<std::uint32_t>(rng.next() % dim));
  }
  FeatureVector x;
  x.dim = dim;
  for (auto i : idx) {
    x.entries.push_back({i, static_cast<float>(1 + rng.next() % 3)});
  }
  return x;
}

// --------------------------------------------------------------------------
// 1. Analytic gradients vs central finite differences on random fixtures.

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint32_t dim = 48, h1 = 8, h2 = 4;
  double worst = 0.0;
  for (int f = 0; f < 10; ++f) {
    SplitMix64 rng{1000ull + static_cast<std::uint64_t>(f)};
    LearnerParams theta = LearnerParams::zeros(dim);
    for (auto& w : theta.w) w = rng.symmetric(0.5);
    theta.b = {rng.symmetric(0.2), rng.symmetric(0.2)};
    AuxiliaryParams phi = AuxiliaryParams::random_init(dim, h1, h2, rng.next());

    std::vector<FeatureVector> xs;
    std::vector<Label> golds;
    for (int i = 0; i < 6; ++i) {
      xs.push_back(random_features(rng, dim, 3, 6));
      golds.push_back(rng.next() % 2 == 0 ? Label::Entailment
                                          : Label::Contradiction);
    }
    worst = std::max(worst, gradient_check(theta, phi, xs, golds, 1e-5));
  }
  const double dt = seconds_since(t0);
  report(1, "gradient fidelity", worst < 1e-4 && dt < 10.0,
         "max relative error " + fmt(worst) + " in " + fmt(dt) + "s");
}

// --------------------------------------------------------------------------
// 2. Auxiliary weights separate label-noise from clean instances.

std::vector<ResolvedPair> noisy_corpus(std::set<std::size_t>* noisy_out) {
  const std::vector<std::string> ent_vocab = {
      "platelet", "counts", "remained", "stable",
      "during",   "the",    "study",    "period"};
  const std::vector<std::string> con_vocab = {
      "severe", "nausea", "forced",    "early",
      "from",   "the",    "treatment", "withdrawal"};
  SplitMix64 rng{20240601};
  std::vector<ResolvedPair> pairs;
  for (std::size_t i = 0; i < 200; ++i) {
    const bool entailment_topic = i < 100;
    const auto& vocab = entailment_topic ? ent_vocab : con_vocab;
    std::string hyp;
    const std::size_t words = 4 + rng.next() % 3;
    for (std::size_t w = 0; w < words; ++w) {
      if (w) hyp += ' ';
      hyp += vocab[rng.next() % vocab.size()];
    }
    ResolvedPair p;
    p.uuid = "syn-" + std::to_string(1000 + i);
    p.premise = "the primary trial arm received the assigned regimen";
    p.hypothesis = hyp;
    p.label = entailment_topic ? Label::Entailment : Label::Contradiction;
    pairs.push_back(std::move(p));
  }
  // Flip every fifth label: the statement keeps its topic, so these 40
  // instances are unlearnable without memorization.
  for (std::size_t i = 0; i < 200; i += 5) {
    pairs[i].label = opposite(*pairs[i].label);
    noisy_out->insert(i);
  }
  return pairs;
}

void criterion_noise_separation() {
  const auto t0 = std::chrono::steady_clock::now();
  std::set<std::size_t> noisy;
  const std::vector<ResolvedPair> pairs = noisy_corpus(&noisy);

  int seeds_separated = 0;
  for (std::uint64_t seed : {11, 12, 13, 14, 15}) {
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.dim = 1024;
    cfg.hidden1 = 16;
    cfg.hidden2 = 8;
    cfg.seed = seed;
    auto [theta, phi, dynamics] = train(pairs, cfg);
    (void)theta;
    (void)dynamics;

    double noisy_sum = 0.0, clean_sum = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto x = featurize(pairs[i], cfg.dim);
      const double g = aux_weight(phi, x, *pairs[i].label);
      (noisy.count(i) ? noisy_sum : clean_sum) += g;
    }
    const double noisy_mean = noisy_sum / static_cast<double>(noisy.size());
    const double clean_mean =
        clean_sum / static_cast<double>(pairs.size() - noisy.size());
    if (noisy_mean > clean_mean) ++seeds_separated;
  }
  const double dt = seconds_since(t0);
  report(2, "noise-weight separation", seeds_separated >= 4 && dt < 30.0,
         std::to_string(seeds_separated) + "/5 seeds in " + fmt(dt) + "s");
}

// --------------------------------------------------------------------------
// 3. With a constant auxiliary, the objective is c x mean cross-entropy.

void criterion_objective_identity() {
  const std::uint32_t dim = 64;
  SplitMix64 rng{777};
  double worst = 0.0;
  for (int b = 0; b < 100; ++b) {
    LearnerParams theta = LearnerParams::zeros(dim);
    for (auto& w : theta.w) w = rng.symmetric(0.5);
    theta.b = {rng.symmetric(0.3), rng.symmetric(0.3)};

    // All-zero weights make every hidden unit inert, so the head bias alone
    // fixes the auxiliary output at sigmoid(t) for every instance.
    AuxiliaryParams phi = AuxiliaryParams::zeros(dim, 4, 3);
    phi.b3 = rng.symmetric(2.0);
    const double c = 1.0 / (1.0 + std::exp(-phi.b3));

    std::vector<FeatureVector> xs;
    std::vector<Label> golds;
    const std::size_t n = 4 + rng.next() % 13;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(random_features(rng, dim, 2, 6));
      golds.push_back(rng.next() % 2 == 0 ? Label::Entailment
                                          : Label::Contradiction);
    }
    double ce_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ce_sum += cross_entropy_loss(learner_predict_proba(theta, xs[i]),
                                   golds[i]);
    }
    const double expected = c * (ce_sum / static_cast<double>(n));
    const double got = minmax_objective(theta, phi, xs, golds);
    worst = std::max(worst, std::abs(got - expected));
  }
  report(3, "constant-weight objective identity", worst <= 1e-12,
         "max deviation " + fmt(worst));
}

// --------------------------------------------------------------------------
// 4. Dynamics summaries vs a brute-force recomputation.

void criterion_cartography_oracle() {
  SplitMix64 rng{4242};
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    TrainingDynamics dyn;
    dyn.epochs = 1 + static_cast<std::uint32_t>(rng.next() % 8);
    const std::size_t n = 1 + rng.next() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      InstanceDynamics d;
      for (std::uint32_t e = 0; e < dyn.epochs; ++e) {
        d.gold_probs.push_back(rng.uniform());
        d.aux_weights.push_back(rng.uniform());
      }
      dyn.per_instance["trace-" + std::to_string(i)] = std::move(d);
    }

    const auto summaries = summarize_dynamics(dyn);
    for (const auto& s : summaries) {
      const auto& probs = dyn.per_instance.at(s.uuid).gold_probs;
      double mean = 0.0;
      for (double p : probs) mean += p;
      mean /= static_cast<double>(probs.size());
      double var = 0.0;
      for (double p : probs) var += (p - mean) * (p - mean);
      var /= static_cast<double>(probs.size());
      double correct = 0.0;
      for (double p : probs) correct += p > 0.5 ? 1.0 : 0.0;
      correct /= static_cast<double>(probs.size());

      worst = std::max(worst, std::abs(s.confidence - mean));
      worst = std::max(worst, std::abs(s.variability - std::sqrt(var)));
      worst = std::max(worst, std::abs(s.correctness - correct));
    }
  }

  TrainingDynamics fixture;
  fixture.epochs = 3;
  fixture.per_instance["fx"] = {{0.9, 0.8, 1.0}, {0.5, 0.5, 0.5},
                                Label::Entailment};
  const auto s = summarize_dynamics(fixture).at(0);
  const bool fixture_ok = std::abs(s.confidence - 0.9) <= 1e-12 &&
                          std::abs(s.variability - std::sqrt(0.02 / 3.0)) <=
                              1e-12 &&
                          s.correctness == 1.0;

  report(4, "cartography oracle", worst <= 1e-9 && fixture_ok,
         "max deviation " + fmt(worst) + " over 100 traces");
}

// --------------------------------------------------------------------------
// 5. Perturbation invariants on the bundled fixture corpus.

// Rebuilds the expected perturbed hypothesis from the review table's chosen
// long forms (applied right to left so offsets stay valid).
std::string expected_expansion(const NliInstance& inst,
                               const std::vector<ShortFormHit>& hits,
                               const std::vector<ReviewRow>& rows) {
  std::map<std::size_t, std::string> chosen;  // offset -> long form
  for (const auto& r : rows) {
    if (r.chosen) chosen[r.char_offset] = r.long_form;
  }
  std::string text = inst.statement;
  for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
    auto c = chosen.find(it->char_offset);
    if (c == chosen.end()) continue;
    text.insert(it->char_offset + it->length, " (" + c->second + ")");
  }
  return text;
}

void criterion_perturbations() {
  const auto inv =
      AcronymInventory::from_csv(testutil::data_dir() + "/inventory.csv");
  const TrigramCosineScorer scorer;
  const auto instances = load_instances(testutil::fixture_instances());

  std::size_t pos_hits = 0, pos_derived = 0, neg_derived = 0;
  bool acronyms_ok = true;
  for (const auto& inst : instances) {
    const auto hits = extract_short_forms(inst.statement, inv);
    for (auto mode : {AcronymMode::Positive, AcronymMode::Negative}) {
      const auto derived = perturb_acronyms(inst, inv, mode, scorer);
      const auto rows = acronym_review_rows(inst, inv, mode, scorer);
      std::size_t chosen = 0;
      for (const auto& r : rows) chosen += r.chosen ? 1 : 0;

      if (derived.empty()) {
        acronyms_ok = acronyms_ok && chosen == 0;
        continue;
      }
      acronyms_ok = acronyms_ok && derived.size() == 1;
      const auto& p = derived.front();
      if (mode == AcronymMode::Positive) {
        pos_hits += hits.size();
        ++pos_derived;
        acronyms_ok = acronyms_ok &&
                      p.label_action == LabelAction::Preserve &&
                      p.label == *inst.label && chosen == hits.size();
      } else {
        ++neg_derived;
        acronyms_ok = acronyms_ok && p.label_action == LabelAction::Flip &&
                      p.label == opposite(*inst.label);
      }
      acronyms_ok =
          acronyms_ok && p.hypothesis == expected_expansion(inst, hits, rows);
    }
  }
  acronyms_ok = acronyms_ok && pos_derived > 0 && neg_derived > 0;

  // Comparator flipping is an involution on sentences drawn from every pair.
  const auto lex = ComparatorLexicon::defaults();
  bool involution_ok = true;
  std::size_t sentences = 0;
  const std::vector<std::string> slots = {"dose", "rate", "score", "count"};
  for (const auto& [a, b] : lex.pairs) {
    for (const auto& slot : slots) {
      for (const std::string& phrase : {a, b}) {
        const std::string text =
            "The " + slot + " was " + phrase + " than before.";
        auto [once, n1] = flip_comparators(text, lex);
        auto [twice, n2] = flip_comparators(once, lex);
        involution_ok = involution_ok && twice == text && n1 == n2 && n1 > 0;
        ++sentences;
      }
    }
  }
  involution_ok = involution_ok && sentences >= 50;

  // Every numeric perturbation flips the label of its source.
  std::map<std::string, Label> gold;
  for (const auto& inst : instances) gold[inst.uuid] = *inst.label;
  const auto numeric = perturb_numeric_all(instances, lex,
                                           DeltaPolicy::add_percent(10.0), 0);
  bool numeric_ok = !numeric.empty();
  for (const auto& p : numeric) {
    numeric_ok = numeric_ok && p.label_action == LabelAction::Flip &&
                 p.label == opposite(gold.at(p.source_uuid));
  }

  report(5, "perturbation invariants",
         acronyms_ok && involution_ok && numeric_ok,
         std::to_string(pos_derived) + " positive / " +
             std::to_string(neg_derived) + " negative expansions, " +
             std::to_string(sentences) + " involution sentences, " +
             std::to_string(numeric.size()) + " numeric edits");
}

// --------------------------------------------------------------------------
// 6. Metric fixtures with hand-worked values.

void criterion_metric_fixtures() {
  const Label E = Label::Entailment, C = Label::Contradiction;

  const std::map<std::string, Label> gold{
      {"a", E}, {"b", E}, {"c", C}, {"d", C}};
  const std::map<std::string, Label> pred{
      {"a", E}, {"b", C}, {"c", C}, {"d", C}};
  const double macro = macro_f1(gold, pred).macro;
  const bool macro_ok = std::abs(macro - 11.0 / 15.0) <= 1e-10;

  const std::vector<InterventionLink> preserving{
      {"i1", "s1", InterventionKind::Paraphrase},
      {"i2", "s2", InterventionKind::Paraphrase},
      {"i3", "s3", InterventionKind::Definitions},
      {"i4", "s4", InterventionKind::TextAppended}};
  const std::map<std::string, Label> base{{"s1", E}, {"s2", C}, {"s3", E},
                                          {"s4", C}};
  const std::map<std::string, Label> intervened{
      {"i1", E}, {"i2", C}, {"i3", C}, {"i4", C}};
  const auto cons = consistency(base, intervened, preserving);
  const bool cons_ok = cons.has_value() && *cons == 0.75;

  const std::vector<InterventionLink> altering{
      {"j1", "t1", InterventionKind::Contradiction},
      {"j2", "t2", InterventionKind::NumericalContradiction},
      {"j3", "t3", InterventionKind::Contradiction}};
  const std::map<std::string, Label> gold_base{{"t1", E}, {"t2", E},
                                               {"t3", C}};
  const std::map<std::string, Label> base_pred{{"t1", E}, {"t2", E},
                                               {"t3", E}};
  const std::map<std::string, Label> gold_int{{"j1", C}, {"j2", C},
                                              {"j3", E}};
  const std::map<std::string, Label> int_pred{{"j1", C}, {"j2", E},
                                              {"j3", E}};
  const auto faith =
      faithfulness(base_pred, gold_base, int_pred, gold_int, altering);
  const bool faith_ok = faith.has_value() && *faith == 0.5;

  const bool vote_ok = majority_label({E, C, E}) == E;

  report(6, "metric fixtures", macro_ok && cons_ok && faith_ok && vote_ok,
         "macro " + fmt(macro) + ", consistency " +
             (cons ? fmt(*cons) : "n/a") + ", faithfulness " +
             (faith ? fmt(*faith) : "n/a"));
}

// --------------------------------------------------------------------------
// 7. Mean-split difficulty classification, both methods.

void criterion_mean_split() {
  const std::vector<DynamicsSummary> summaries{
      {"a", 0.9, 0.0, 1.0},
      {"b", 0.7, 0.0, 1.0},
      {"c", 0.4, 0.0, 0.0},
      {"d", 0.2, 0.0, 0.0}};
  const std::map<std::string, double> weights{
      {"a", 0.2}, {"b", 0.4}, {"c", 0.7}, {"d", 0.9}};
  const std::map<std::string, bool> correct{
      {"a", true}, {"b", true}, {"c", false}, {"d", false}};

  const auto by_weight = classify_difficulty(summaries, weights, correct,
                                             DifficultyMethod::MinMaxWeights);
  const auto by_conf = classify_difficulty(summaries, weights, correct,
                                           DifficultyMethod::Cartography);
  const std::set<std::string> easy{"a"}, hard{"d"};
  const bool ok = by_weight.easy == easy && by_weight.hard == hard &&
                  by_conf.easy == easy && by_conf.hard == hard;
  report(7, "mean-split difficulty", ok,
         "weight split {a}/{d}, confidence split {a}/{d}");
}

// --------------------------------------------------------------------------
// 8. End-to-end CLI pipeline on the bundled fixture corpus.

bool run_step(const std::string& args, const std::string& log) {
  const std::string cmd =
      testutil::cli_bin() + " " + args + " >> " + log + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) && WEXITSTATUS(raw) == 0;
}

void criterion_pipeline() {
  const auto t0 = std::chrono::steady_clock::now();
  testutil::TempDir tmp;
  const std::string out = tmp.file("out");
  const std::string log = tmp.file("pipeline.log");
  const std::string corpus = " --corpus " + testutil::fixture_dir();
  const std::string inventory =
      " --inventory " + testutil::data_dir() + "/inventory.csv";

  bool ok = true;
  std::string failed_step;
  auto step = [&](const std::string& name, const std::string& args) {
    if (!ok) return;
    if (!run_step(args + " --out-dir " + out, log)) {
      ok = false;
      failed_step = name;
    }
  };

  step("ingest", "ingest" + corpus);
  step("stats", "stats" + corpus);
  step("render-prompts", "render-prompts" + corpus);
  step("perturb-acronym", "perturb-acronym" + corpus + inventory);
  step("perturb-acronym --review",
       "perturb-acronym" + corpus + inventory + " --review");
  step("perturb-numeric", "perturb-numeric" + corpus + " --seed 3");
  step("train",
       "train" + corpus +
           " --epochs 3 --batch-size 8 --dim 2048 --hidden1 16 --hidden2 8"
           " --augment " + out + "/perturbed_acronym.jsonl --seed 3");
  step("predict",
       "predict" + corpus + " --checkpoint " + out +
           "/checkpoint.bin --runs 5 --perturbed " + out +
           "/perturbed_acronym.jsonl --perturbed " + out +
           "/perturbed_numeric.jsonl --seed 3");
  step("analyze", "analyze --dynamics " + out + "/dynamics.jsonl");
  step("evaluate",
       "evaluate --gold " + testutil::fixture_instances() + " --pred " + out +
           "/predictions.json --perturbed " + out +
           "/perturbed_acronym.jsonl --perturbed " + out +
           "/perturbed_numeric.jsonl --intervened-pred " + out +
           "/predictions.json");

  std::vector<std::string> missing;
  if (ok) {
    for (const char* name :
         {"resolved_pairs.jsonl", "stats.csv", "acronym_review.csv",
          "perturbed_acronym.jsonl", "links_acronym.jsonl",
          "perturbed_numeric.jsonl", "links_numeric.jsonl", "checkpoint.bin",
          "dynamics.jsonl", "predictions.json", "data_map.csv",
          "weight_histogram.csv", "difficulty_minmax.json",
          "difficulty_cartography.json", "difficulty_intersection.json",
          "report.json", "per_section.csv", "per_intervention.csv"}) {
      if (!fs::is_regular_file(out + "/" + name)) missing.push_back(name);
    }
    if (!fs::is_directory(out + "/prompts") ||
        fs::is_empty(out + "/prompts")) {
      missing.push_back("prompts/");
    }
  }

  const double dt = seconds_since(t0);
  std::string detail;
  if (!ok) {
    detail = "step '" + failed_step + "' failed, log: " + log;
  } else if (!missing.empty()) {
    detail = "missing artifacts:";
    for (const auto& m : missing) detail += " " + m;
  } else {
    detail = "18 artifacts + prompts in " + fmt(dt) + "s";
  }
  report(8, "end-to-end pipeline", ok && missing.empty() && dt < 60.0,
         detail);
}

// --------------------------------------------------------------------------
// 9. Composition of the real train split, when supplied.

void criterion_real_corpus() {
  const char* env = std::getenv("CTNLI_NLI4CT_TRAIN");
  const std::string path =
      env != nullptr ? std::string(env)
                     : testutil::data_dir() + "/nli4ct/train.json";
  if (!fs::is_regular_file(path)) {
    report_skip(9, "reference corpus composition",
                "no train split at " + path +
                    " (set CTNLI_NLI4CT_TRAIN to check)");
    return;
  }

  CorpusStats stats;
  try {
    stats = corpus_stats(load_instances(path));
  } catch (const std::exception& e) {
    report(9, "reference corpus composition", false, e.what());
    return;
  }

  const auto S = InstanceType::Single, K = InstanceType::Comparison;
  const std::size_t iE = static_cast<std::size_t>(Label::Entailment);
  const std::size_t iC = static_cast<std::size_t>(Label::Contradiction);
  auto type_label = [&](InstanceType t, std::size_t cell) {
    std::uint64_t n = 0;
    for (std::size_t s = 0; s < 4; ++s) {
      n += stats.counts[static_cast<std::size_t>(t)][s][cell];
    }
    return n;
  };

  struct Expectation {
    const char* what;
    std::uint64_t got;
    std::uint64_t want;
  };
  const std::vector<Expectation> table{
      {"total", stats.total, 1700},
      {"single", stats.by_type(S), 1035},
      {"comparison", stats.by_type(K), 665},
      {"entailment", stats.by_label(Label::Entailment), 850},
      {"contradiction", stats.by_label(Label::Contradiction), 850},
      {"single/Intervention", stats.cell(S, Section::Intervention), 155},
      {"single/Eligibility", stats.cell(S, Section::Eligibility), 317},
      {"single/Adverse Events", stats.cell(S, Section::AdverseEvents), 309},
      {"single/Results", stats.cell(S, Section::Results), 254},
      {"comparison/Intervention", stats.cell(K, Section::Intervention), 241},
      {"comparison/Eligibility", stats.cell(K, Section::Eligibility), 169},
      {"comparison/Adverse Events", stats.cell(K, Section::AdverseEvents),
       187},
      {"comparison/Results", stats.cell(K, Section::Results), 68},
      {"single entailment", type_label(S, iE), 533},
      {"single contradiction", type_label(S, iC), 502},
      {"comparison entailment", type_label(K, iE), 317},
      {"comparison contradiction", type_label(K, iC), 348},
  };

  std::string detail;
  bool ok = true;
  for (const auto& e : table) {
    if (e.got != e.want) {
      ok = false;
      detail += std::string(detail.empty() ? "" : "; ") + e.what + " " +
                std::to_string(e.got) + " != " + std::to_string(e.want);
    }
  }
  if (ok) detail = "all 17 cells match";
  report(9, "reference corpus composition", ok, detail);
}

}  // namespace

int main() {
  criterion_gradients();
  criterion_noise_separation();
  criterion_objective_identity();
  criterion_cartography_oracle();
  criterion_perturbations();
  criterion_metric_fixtures();
  criterion_mean_split();
  criterion_pipeline();
  criterion_real_corpus();

  std::cout << (9 - g_failures - g_skips) << " passed, " << g_failures
            << " failed, " << g_skips << " skipped\n";
  return g_failures == 0 ? 0 : 1;
}

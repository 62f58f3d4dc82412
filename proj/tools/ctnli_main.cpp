// ctnli: command-line driver for the clinical-NLI robustness toolkit.
//
// Subcommands compose into a pipeline: ingest -> perturb-* -> train ->
// predict -> analyze -> evaluate. Every run is deterministic given the same
// inputs and --seed, so artifacts are byte-identical across reruns.
//
// Exit codes: 0 success; 1 runtime failure; 2 usage, invalid config, or
// missing inputs.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctnli/acronym.hpp"
#include "ctnli/batch.hpp"
#include "ctnli/cartography.hpp"
#include "ctnli/checkpoint.hpp"
#include "ctnli/corpus.hpp"
#include "ctnli/io.hpp"
#include "ctnli/metrics.hpp"
#include "ctnli/minmax.hpp"
#include "ctnli/numeric.hpp"
#include "ctnli/perturb.hpp"
#include "ctnli/prompt.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace ctnli;

// Input/configuration problems (exit 2), as opposed to runtime failures
// (exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) {
    throw UsageError("missing " + what + ": " + path);
  }
}

void require_dir(const std::string& path, const std::string& what) {
  if (!fs::is_directory(path)) {
    throw UsageError("missing " + what + ": " + path);
  }
}

// Applies config-file values to options the command line left unset. Every
// key is validated against the set of registered option names.
class ConfigBinder {
 public:
  template <typename T>
  void bind(CLI::Option* opt, T* target, std::string key) {
    known_.insert(key);
    appliers_.push_back([opt, target, key](const json& cfg) {
      if (opt->count() > 0 || !cfg.contains(key)) return;
      const json& v = cfg.at(key);
      try {
        *target = v.get<T>();
      } catch (const json::exception&) {
        throw UsageError("config key \"" + key + "\" has the wrong type");
      }
    });
  }

  void apply(const std::string& config_path) const {
    if (config_path.empty()) return;
    require_file(config_path, "config file");
    json cfg;
    try {
      cfg = json::parse(io::read_file(config_path));
    } catch (const json::exception& e) {
      throw UsageError("config file " + config_path + ": " + e.what());
    }
    if (!cfg.is_object()) {
      throw UsageError("config file " + config_path +
                       ": expected a JSON object");
    }
    for (const auto& [key, value] : cfg.items()) {
      (void)value;
      if (!known_.count(key)) {
        throw UsageError("config file " + config_path + ": unknown key \"" +
                         key + "\"");
      }
    }
    for (const auto& apply : appliers_) apply(cfg);
  }

 private:
  std::set<std::string> known_;
  std::vector<std::function<void(const json&)>> appliers_;
};

// --corpus DIR is shorthand for --instances DIR/instances.json and
// --ctr-dir DIR/ctrs; explicit flags win.
struct CorpusArgs {
  std::string corpus_dir;
  std::string instances;
  std::string ctr_dir;

  void add_options(CLI::App* cmd, ConfigBinder& binder) {
    binder.bind(cmd->add_option("--corpus", corpus_dir,
                                "Corpus directory (instances.json + ctrs/)"),
                &corpus_dir, "corpus");
    binder.bind(
        cmd->add_option("--instances", instances, "Instance JSON file"),
        &instances, "instances");
    binder.bind(cmd->add_option("--ctr-dir", ctr_dir,
                                "Directory of per-trial JSON files"),
                &ctr_dir, "ctr-dir");
  }

  std::string instances_path() const {
    std::string path = instances;
    if (path.empty() && !corpus_dir.empty()) {
      path = (fs::path(corpus_dir) / "instances.json").string();
    }
    if (path.empty()) throw UsageError("missing --instances (or --corpus)");
    require_file(path, "instance file");
    return path;
  }

  std::string ctr_dir_path() const {
    std::string path = ctr_dir;
    if (path.empty() && !corpus_dir.empty()) {
      path = (fs::path(corpus_dir) / "ctrs").string();
    }
    if (path.empty()) throw UsageError("missing --ctr-dir (or --corpus)");
    require_dir(path, "trial directory");
    return path;
  }

  Corpus load() const { return load_corpus(instances_path(), ctr_dir_path()); }
};

std::string out_path(const std::string& out_dir, const std::string& name) {
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / name).string();
}

void require_labels(const std::vector<NliInstance>& instances,
                    const std::string& purpose) {
  for (const auto& inst : instances) {
    if (!inst.label.has_value()) {
      throw UsageError("instance " + inst.uuid + " has no label; " + purpose +
                       " requires labeled instances");
    }
  }
}

std::vector<ResolvedPair> resolve_all(const Corpus& corpus) {
  std::vector<ResolvedPair> pairs;
  pairs.reserve(corpus.instances.size());
  for (const auto& inst : corpus.instances) {
    pairs.push_back(resolve_premise(inst, corpus.ctrs));
  }
  return pairs;
}

std::map<std::string, Label> gold_map(
    const std::vector<NliInstance>& instances) {
  std::map<std::string, Label> gold;
  for (const auto& inst : instances) {
    if (!inst.label.has_value()) {
      throw UsageError("instance " + inst.uuid +
                       " has no label; gold inputs must be fully labeled");
    }
    gold[inst.uuid] = *inst.label;
  }
  return gold;
}

// ---------------------------------------------------------------------------
// Subcommand argument bundles.

struct IngestArgs {
  CorpusArgs corpus;
};

struct StatsArgs {
  CorpusArgs corpus;
};

struct RenderArgs {
  CorpusArgs corpus;
  std::size_t max_tokens = 0;  // 0: no budget
  std::string truncate_mode = "truncate";
  bool include_answer = false;
};

struct AcronymArgs {
  CorpusArgs corpus;
  std::string inventory;
  std::string mode = "both";
  std::string scorer = "trigram";
  bool review = false;
};

struct NumericArgs {
  CorpusArgs corpus;
  std::string lexicon;
  std::string spans;
  double delta_percent = 10.0;
  double delta_absolute = 0.0;
  CLI::Option* absolute_opt = nullptr;
};

struct TrainArgs {
  CorpusArgs corpus;
  std::vector<std::string> augment;
  std::string warm_start;
  TrainConfig cfg;
};

struct PredictArgs {
  CorpusArgs corpus;
  std::string checkpoint;
  std::vector<std::string> perturbed;
  std::uint32_t runs = 5;
};

struct AnalyzeArgs {
  CorpusArgs corpus;  // optional, for word-overlap reporting
  std::string dynamics;
  std::string method = "both";
  std::size_t bins = 10;
};

struct EvaluateArgs {
  std::string gold;
  std::string pred;
  std::string links;
  std::string intervened_gold;
  std::string intervened_pred;
  std::vector<std::string> perturbed;
};

// ---------------------------------------------------------------------------
// Subcommand bodies.

int run_ingest(const IngestArgs& a, const std::string& out_dir) {
  Corpus corpus = a.corpus.load();
  std::string out;
  for (const auto& inst : corpus.instances) {
    ResolvedPair pair = resolve_premise(inst, corpus.ctrs);
    json j;
    j["uuid"] = pair.uuid;
    j["premise"] = pair.premise;
    j["hypothesis"] = pair.hypothesis;
    j["label"] = pair.label ? json(std::string(label_name(*pair.label)))
                            : json(nullptr);
    out += j.dump();
    out.push_back('\n');
  }
  const std::string path = out_path(out_dir, "resolved_pairs.jsonl");
  io::write_file(path, out);
  std::cout << "ingested " << corpus.instances.size() << " instances across "
            << corpus.ctrs.size() << " trials -> " << path << "\n";
  return 0;
}

int run_stats(const StatsArgs& a, const std::string& out_dir) {
  // Stats need only the instance file; trial records are not consulted.
  auto instances = load_instances(a.corpus.instances_path());
  const std::string csv = corpus_stats(instances).to_csv();
  io::write_file(out_path(out_dir, "stats.csv"), csv);
  std::cout << csv;
  return 0;
}

int run_render(const RenderArgs& a, const std::string& out_dir) {
  Corpus corpus = a.corpus.load();
  if (a.include_answer) require_labels(corpus.instances, "--include-answer");
  if (a.truncate_mode != "truncate" && a.truncate_mode != "remove") {
    throw UsageError("--truncate-mode must be truncate or remove");
  }
  const TruncateMode mode = a.truncate_mode == "remove"
                                ? TruncateMode::Remove
                                : TruncateMode::Truncate;
  const std::string prompt_dir = out_path(out_dir, "prompts");
  fs::create_directories(prompt_dir);
  std::size_t written = 0, removed = 0;
  for (const auto& inst : corpus.instances) {
    ResolvedPair pair = resolve_premise(inst, corpus.ctrs);
    std::optional<ResolvedPair> fitted = pair;
    if (a.max_tokens > 0) fitted = truncate_pair(pair, a.max_tokens, mode);
    if (!fitted) {
      ++removed;
      continue;
    }
    io::write_file((fs::path(prompt_dir) / (inst.uuid + ".txt")).string(),
                   render_prompt(*fitted, a.include_answer));
    ++written;
  }
  std::cout << "rendered " << written << " prompts";
  if (removed > 0) std::cout << " (" << removed << " over budget, removed)";
  std::cout << " -> " << prompt_dir << "\n";
  return 0;
}

std::vector<InterventionLink> links_for(
    const std::vector<PerturbedInstance>& perturbed) {
  std::vector<InterventionLink> links;
  links.reserve(perturbed.size());
  for (const auto& p : perturbed) {
    links.push_back(
        {p.new_uuid, p.source_uuid, intervention_kind_for(p.kind)});
  }
  return links;
}

int run_perturb_acronym(const AcronymArgs& a, const std::string& out_dir) {
  if (a.mode != "positive" && a.mode != "negative" && a.mode != "both") {
    throw UsageError("--mode must be positive, negative, or both");
  }
  if (a.scorer != "trigram" && a.scorer != "embedding") {
    throw UsageError("--scorer must be trigram or embedding");
  }
  if (a.inventory.empty()) throw UsageError("missing --inventory");
  require_file(a.inventory, "acronym inventory");
  auto instances = load_instances(a.corpus.instances_path());
  require_labels(instances, "perturbation");
  AcronymInventory inv = AcronymInventory::from_csv(a.inventory);

  std::unique_ptr<SimilarityScorer> scorer;
  if (a.scorer == "embedding") {
    scorer = std::make_unique<EmbeddingScorer>(inv);
  } else {
    scorer = std::make_unique<TrigramCosineScorer>();
  }

  std::vector<AcronymMode> modes;
  if (a.mode != "negative") modes.push_back(AcronymMode::Positive);
  if (a.mode != "positive") modes.push_back(AcronymMode::Negative);

  if (a.review) {
    std::string csv =
        "uuid,mode,short_form,char_offset,long_form,score,rank,chosen\n";
    for (AcronymMode mode : modes) {
      const char* mode_name =
          mode == AcronymMode::Positive ? "positive" : "negative";
      for (const auto& inst : instances) {
        for (const auto& row : acronym_review_rows(inst, inv, mode, *scorer)) {
          csv += io::csv_escape(row.uuid) + "," + mode_name + "," +
                 io::csv_escape(row.short_form) + "," +
                 std::to_string(row.char_offset) + "," +
                 io::csv_escape(row.long_form) + "," +
                 io::format_double(row.score) + "," +
                 std::to_string(row.rank) + "," +
                 (row.chosen ? "true" : "false") + "\n";
        }
      }
    }
    const std::string path = out_path(out_dir, "acronym_review.csv");
    io::write_file(path, csv);
    std::cout << "review rows -> " << path << "\n";
    return 0;
  }

  std::vector<PerturbedInstance> all;
  for (AcronymMode mode : modes) {
    auto batch = perturb_acronyms_all(instances, inv, mode, *scorer);
    std::cout << (mode == AcronymMode::Positive ? "positive: " : "negative: ")
              << batch.size() << " perturbed instances\n";
    all.insert(all.end(), batch.begin(), batch.end());
  }
  const std::string jsonl = out_path(out_dir, "perturbed_acronym.jsonl");
  write_perturbed_jsonl(jsonl, all);
  write_intervention_links(out_path(out_dir, "links_acronym.jsonl"),
                           links_for(all));
  std::cout << "wrote " << all.size() << " instances -> " << jsonl << "\n";
  return 0;
}

int run_perturb_numeric(const NumericArgs& a, std::uint64_t seed,
                        const std::string& out_dir) {
  auto instances = load_instances(a.corpus.instances_path());
  require_labels(instances, "perturbation");

  ComparatorLexicon lex = ComparatorLexicon::defaults();
  if (!a.lexicon.empty()) {
    require_file(a.lexicon, "comparator lexicon");
    lex = ComparatorLexicon::from_csv(a.lexicon);
  }
  DeltaPolicy policy = a.absolute_opt->count() > 0
                           ? DeltaPolicy::add_absolute(a.delta_absolute)
                           : DeltaPolicy::add_percent(a.delta_percent);

  std::optional<std::unordered_map<std::string, std::vector<EntitySpan>>>
      spans;
  if (!a.spans.empty()) {
    require_file(a.spans, "span file");
    spans = read_spans_jsonl(a.spans);
  }

  auto all = perturb_numeric_all(instances, lex, policy, seed,
                                 spans ? &*spans : nullptr);
  std::size_t values = 0, comparators = 0;
  for (const auto& p : all) {
    (p.kind == PerturbKind::NumericValue ? values : comparators) += 1;
  }
  const std::string jsonl = out_path(out_dir, "perturbed_numeric.jsonl");
  write_perturbed_jsonl(jsonl, all);
  write_intervention_links(out_path(out_dir, "links_numeric.jsonl"),
                           links_for(all));
  std::cout << "value edits: " << values
            << ", comparator flips: " << comparators << " -> " << jsonl
            << "\n";
  return 0;
}

// Base pairs plus any --augment perturbation files, resolved against the
// same trial records. Duplicate uuids are rejected up front because the
// dynamics log is keyed by uuid.
std::vector<ResolvedPair> training_pairs(
    const Corpus& corpus, const std::vector<std::string>& augment_paths) {
  std::vector<ResolvedPair> pairs = resolve_all(corpus);
  for (const auto& path : augment_paths) {
    require_file(path, "augmentation file");
    auto derived =
        apply_perturbations(corpus.instances, read_perturbed_jsonl(path));
    for (const auto& inst : derived) {
      pairs.push_back(resolve_premise(inst, corpus.ctrs));
    }
  }
  std::set<std::string> seen;
  for (const auto& pair : pairs) {
    if (!seen.insert(pair.uuid).second) {
      throw UsageError("duplicate uuid in training inputs: " + pair.uuid);
    }
    if (!pair.label.has_value()) {
      throw UsageError("instance " + pair.uuid +
                       " has no label; training requires labels");
    }
  }
  return pairs;
}

int run_train(TrainArgs& a, std::uint64_t seed, const std::string& out_dir) {
  Corpus corpus = a.corpus.load();
  std::vector<ResolvedPair> pairs = training_pairs(corpus, a.augment);

  a.cfg.seed = seed;
  a.cfg.dynamics_path = out_path(out_dir, "dynamics.jsonl");
  try {
    a.cfg.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  std::optional<LearnerParams> warm;
  if (!a.warm_start.empty()) {
    require_file(a.warm_start, "warm-start checkpoint");
    Checkpoint ck = load_checkpoint(a.warm_start);
    if (ck.theta.dim != a.cfg.dim) {
      throw UsageError("warm-start dimension " + std::to_string(ck.theta.dim) +
                       " does not match --dim " + std::to_string(a.cfg.dim));
    }
    warm = std::move(ck.theta);
  }

  auto [theta, phi, dynamics] = train(pairs, a.cfg, warm);
  const std::string ck_path = out_path(out_dir, "checkpoint.bin");
  save_checkpoint(ck_path, {std::move(theta), std::move(phi), a.cfg});
  std::cout << "trained on " << pairs.size() << " instances for "
            << a.cfg.epochs << " epochs\n"
            << "checkpoint -> " << ck_path << "\n"
            << "dynamics -> " << a.cfg.dynamics_path << "\n";
  (void)dynamics;
  return 0;
}

int run_predict(const PredictArgs& a, std::uint64_t seed,
                const std::string& out_dir) {
  if (a.runs == 0 || a.runs % 2 == 0) {
    throw UsageError("--runs must be odd and positive");
  }
  if (a.checkpoint.empty()) throw UsageError("missing --checkpoint");
  require_file(a.checkpoint, "checkpoint");
  Checkpoint ck = load_checkpoint(a.checkpoint);
  Corpus corpus = a.corpus.load();

  std::vector<ResolvedPair> pairs = resolve_all(corpus);
  for (const auto& path : a.perturbed) {
    require_file(path, "perturbation file");
    auto derived =
        apply_perturbations(corpus.instances, read_perturbed_jsonl(path));
    for (const auto& inst : derived) {
      pairs.push_back(resolve_premise(inst, corpus.ctrs));
    }
  }

  auto labels = predict_majority(ck.theta, pairs, a.runs, seed);
  std::map<std::string, Label> preds(labels.begin(), labels.end());
  if (preds.size() != labels.size()) {
    throw UsageError("duplicate uuid across prediction inputs");
  }
  const std::string path = out_path(out_dir, "predictions.json");
  write_predictions(path, preds);
  std::cout << "predicted " << preds.size() << " instances (" << a.runs
            << " runs) -> " << path << "\n";
  return 0;
}

int run_analyze(const AnalyzeArgs& a, const std::string& out_dir) {
  if (a.method != "minmax" && a.method != "cartography" &&
      a.method != "both") {
    throw UsageError("--method must be minmax, cartography, or both");
  }
  if (a.bins == 0) throw UsageError("--bins must be positive");
  if (a.dynamics.empty()) throw UsageError("missing --dynamics");
  require_file(a.dynamics, "dynamics log");

  TrainingDynamics dyn = read_dynamics_jsonl(a.dynamics);
  auto summaries = summarize_dynamics(dyn);
  auto weights = final_weights_from_dynamics(dyn);
  auto correct = predicted_correctly_from_dynamics(dyn);

  export_data_map(summaries, a.bins, out_path(out_dir, "data_map.csv"));
  export_weight_histogram(weights, a.bins,
                          out_path(out_dir, "weight_histogram.csv"));

  std::vector<DifficultySets> sets;
  if (a.method != "cartography") {
    sets.push_back(classify_difficulty(summaries, weights, correct,
                                       DifficultyMethod::MinMaxWeights));
    io::write_file(out_path(out_dir, "difficulty_minmax.json"),
                   difficulty_to_json(sets.back()) + "\n");
  }
  if (a.method != "minmax") {
    sets.push_back(classify_difficulty(summaries, weights, correct,
                                       DifficultyMethod::Cartography));
    io::write_file(out_path(out_dir, "difficulty_cartography.json"),
                   difficulty_to_json(sets.back()) + "\n");
  }
  for (const auto& s : sets) {
    std::cout << difficulty_method_name(s.method) << ": " << s.easy.size()
              << " easy, " << s.hard.size() << " hard\n";
  }
  if (sets.size() == 2) {
    auto [easy, hard] = intersect_difficulty(sets[0], sets[1]);
    json j;
    j["method"] = "Intersection";
    j["easy"] = easy;
    j["hard"] = hard;
    io::write_file(out_path(out_dir, "difficulty_intersection.json"),
                   j.dump(2) + "\n");
    std::cout << "intersection: " << easy.size() << " easy, " << hard.size()
              << " hard\n";
  }

  // With a corpus at hand, report the premise/hypothesis word overlap of the
  // easy and hard sets (lexical-shortcut diagnostic).
  if (!a.corpus.corpus_dir.empty() || !a.corpus.instances.empty()) {
    Corpus corpus = a.corpus.load();
    std::map<std::string, double> overlap_of;
    for (const auto& pair : resolve_all(corpus)) {
      overlap_of[pair.uuid] = word_overlap(pair).overlap;
    }
    auto mean_overlap = [&](const std::set<std::string>& uuids) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& uuid : uuids) {
        auto it = overlap_of.find(uuid);
        if (it == overlap_of.end()) continue;
        sum += it->second;
        ++n;
      }
      return n == 0 ? 0.0 : sum / static_cast<double>(n);
    };
    for (const auto& s : sets) {
      std::cout << difficulty_method_name(s.method) << " mean word overlap: "
                << "easy " << io::format_double(mean_overlap(s.easy))
                << ", hard " << io::format_double(mean_overlap(s.hard))
                << "\n";
    }
  }
  return 0;
}

int run_evaluate(const EvaluateArgs& a, const std::string& out_dir) {
  if (a.gold.empty()) throw UsageError("missing --gold");
  if (a.pred.empty()) throw UsageError("missing --pred");
  require_file(a.gold, "gold instance file");
  require_file(a.pred, "prediction file");

  auto gold_instances = load_instances(a.gold);
  std::map<std::string, Label> gold = gold_map(gold_instances);
  std::map<std::string, std::string> section_of;
  for (const auto& inst : gold_instances) {
    section_of[inst.uuid] = std::string(section_name(inst.section));
  }

  std::map<std::string, Label> pred_all = read_predictions(a.pred);
  std::map<std::string, Label> pred;
  for (const auto& [uuid, label] : gold) {
    (void)label;
    auto it = pred_all.find(uuid);
    if (it == pred_all.end()) {
      throw UsageError("prediction file lacks an entry for uuid " + uuid);
    }
    pred[uuid] = it->second;
  }

  std::optional<InterventionInputs> interventions;
  const bool links_given = !a.links.empty();
  const bool perturbed_given = !a.perturbed.empty();
  if (links_given || perturbed_given) {
    if (a.intervened_pred.empty()) {
      throw UsageError("--links/--perturbed require --intervened-pred");
    }
    require_file(a.intervened_pred, "intervened prediction file");
    InterventionInputs in;
    in.predictions = read_predictions(a.intervened_pred);
    if (links_given) {
      if (a.intervened_gold.empty()) {
        throw UsageError("--links requires --intervened-gold");
      }
      require_file(a.links, "intervention links");
      require_file(a.intervened_gold, "intervened gold file");
      in.links = read_intervention_links(a.links);
      in.gold = gold_map(load_instances(a.intervened_gold));
    }
    for (const auto& path : a.perturbed) {
      require_file(path, "perturbation file");
      for (const auto& p : read_perturbed_jsonl(path)) {
        in.links.push_back(
            {p.new_uuid, p.source_uuid, intervention_kind_for(p.kind)});
        in.gold[p.new_uuid] = p.label;
      }
    }
    interventions = std::move(in);
  }

  MetricsReport report = build_report(gold, pred, section_of, interventions);
  const std::string report_path = out_path(out_dir, "report.json");
  io::write_file(report_path, report_to_json(report) + "\n");
  io::write_file(out_path(out_dir, "per_section.csv"),
                 group_f1_to_csv(report.per_section));
  if (interventions) {
    io::write_file(out_path(out_dir, "per_intervention.csv"),
                   group_f1_to_csv(report.per_intervention));
  }

  std::cout << "macro F1: " << io::format_double(report.overall.macro) << "\n";
  std::cout << "consistency: "
            << (report.consistency ? io::format_double(*report.consistency)
                                   : std::string("n/a"))
            << "\n";
  std::cout << "faithfulness: "
            << (report.faithfulness ? io::format_double(*report.faithfulness)
                                    : std::string("n/a"))
            << "\n";
  std::cout << "report -> " << report_path << "\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Robustness toolkit for clinical trial NLI corpora"};
  app.require_subcommand(1);
  // Inherited by every subcommand, so --seed/--out-dir/--config may follow
  // the subcommand name.
  app.fallthrough();
  ConfigBinder binder;

  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_path;
  binder.bind(app.add_option("--seed", seed, "Seed for all stochastic stages"),
              &seed, "seed");
  binder.bind(app.add_option("--out-dir", out_dir, "Artifact directory"),
              &out_dir, "out-dir");
  app.add_option("--config", config_path,
                 "JSON config file; flags override its values");

  IngestArgs ingest;
  auto* cmd_ingest = app.add_subcommand(
      "ingest", "Validate a corpus and emit resolved premise/hypothesis pairs");
  ingest.corpus.add_options(cmd_ingest, binder);

  StatsArgs stats;
  auto* cmd_stats =
      app.add_subcommand("stats", "Corpus composition table as CSV");
  stats.corpus.add_options(cmd_stats, binder);

  RenderArgs render;
  auto* cmd_render = app.add_subcommand(
      "render-prompts", "Write one binary-question prompt file per instance");
  render.corpus.add_options(cmd_render, binder);
  binder.bind(cmd_render->add_option("--max-tokens", render.max_tokens,
                                     "Whitespace-token budget (0 = none)"),
              &render.max_tokens, "max-tokens");
  binder.bind(
      cmd_render->add_option("--truncate-mode", render.truncate_mode,
                             "Over-budget handling: truncate or remove"),
      &render.truncate_mode, "truncate-mode");
  binder.bind(cmd_render->add_flag("--include-answer", render.include_answer,
                                   "Append the gold answer"),
              &render.include_answer, "include-answer");

  AcronymArgs acr;
  auto* cmd_acr = app.add_subcommand(
      "perturb-acronym", "Expand acronyms into long forms (positive/negative)");
  acr.corpus.add_options(cmd_acr, binder);
  binder.bind(cmd_acr->add_option("--inventory", acr.inventory,
                                  "Acronym inventory CSV"),
              &acr.inventory, "inventory");
  binder.bind(cmd_acr->add_option("--mode", acr.mode,
                                  "positive, negative, or both"),
              &acr.mode, "mode");
  binder.bind(cmd_acr->add_option("--scorer", acr.scorer,
                                  "Similarity scorer: trigram or embedding"),
              &acr.scorer, "scorer");
  binder.bind(cmd_acr->add_flag("--review", acr.review,
                                "Emit the human-verification CSV instead of "
                                "perturbed instances"),
              &acr.review, "review");

  NumericArgs num;
  auto* cmd_num = app.add_subcommand(
      "perturb-numeric", "Shift numeric values and flip comparator phrases");
  num.corpus.add_options(cmd_num, binder);
  binder.bind(cmd_num->add_option("--lexicon", num.lexicon,
                                  "Comparator antonym CSV (default built-in)"),
              &num.lexicon, "lexicon");
  binder.bind(cmd_num->add_option("--spans", num.spans,
                                  "External entity spans JSONL"),
              &num.spans, "spans");
  auto* pct = cmd_num->add_option("--delta-percent", num.delta_percent,
                                  "Shift values by this percentage");
  num.absolute_opt = cmd_num->add_option(
      "--delta-absolute", num.delta_absolute, "Shift values by this amount");
  num.absolute_opt->excludes(pct);
  binder.bind(pct, &num.delta_percent, "delta-percent");

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand(
      "train", "Alternating minimax training of learner and auxiliary");
  tr.corpus.add_options(cmd_train, binder);
  binder.bind(cmd_train->add_option("--augment", tr.augment,
                                    "Perturbed JSONL to add as training data "
                                    "(repeatable)"),
              &tr.augment, "augment");
  binder.bind(cmd_train->add_option("--warm-start", tr.warm_start,
                                    "Checkpoint whose learner seeds training"),
              &tr.warm_start, "warm-start");
  binder.bind(cmd_train->add_option("--epochs", tr.cfg.epochs, "Epochs"),
              &tr.cfg.epochs, "epochs");
  binder.bind(
      cmd_train->add_option("--batch-size", tr.cfg.batch_size, "Batch size"),
      &tr.cfg.batch_size, "batch-size");
  binder.bind(cmd_train->add_option("--learner-lr", tr.cfg.learner_lr,
                                    "Learner learning rate"),
              &tr.cfg.learner_lr, "learner-lr");
  binder.bind(cmd_train->add_option("--aux-lr", tr.cfg.aux_lr,
                                    "Auxiliary learning rate"),
              &tr.cfg.aux_lr, "aux-lr");
  binder.bind(cmd_train->add_option("--weight-decay", tr.cfg.weight_decay,
                                    "Decoupled weight decay"),
              &tr.cfg.weight_decay, "weight-decay");
  binder.bind(
      cmd_train->add_option("--dim", tr.cfg.dim, "Feature hash dimension"),
      &tr.cfg.dim, "dim");
  binder.bind(cmd_train->add_option("--hidden1", tr.cfg.hidden1,
                                    "First auxiliary hidden width"),
              &tr.cfg.hidden1, "hidden1");
  binder.bind(cmd_train->add_option("--hidden2", tr.cfg.hidden2,
                                    "Second auxiliary hidden width"),
              &tr.cfg.hidden2, "hidden2");

  PredictArgs pr;
  auto* cmd_pred = app.add_subcommand(
      "predict", "Majority-vote prediction under feature dropout");
  pr.corpus.add_options(cmd_pred, binder);
  binder.bind(
      cmd_pred->add_option("--checkpoint", pr.checkpoint, "Trained model"),
      &pr.checkpoint, "checkpoint");
  binder.bind(cmd_pred->add_option("--perturbed", pr.perturbed,
                                   "Perturbed JSONL to also predict on "
                                   "(repeatable)"),
              &pr.perturbed, "perturbed");
  binder.bind(cmd_pred->add_option("--runs", pr.runs,
                                   "Stochastic forward passes (odd)"),
              &pr.runs, "runs");

  AnalyzeArgs an;
  auto* cmd_an = app.add_subcommand(
      "analyze", "Training-dynamics cartography and difficulty splits");
  an.corpus.add_options(cmd_an, binder);
  binder.bind(
      cmd_an->add_option("--dynamics", an.dynamics, "Dynamics JSONL from train"),
      &an.dynamics, "dynamics");
  binder.bind(cmd_an->add_option("--method", an.method,
                                 "minmax, cartography, or both"),
              &an.method, "method");
  binder.bind(cmd_an->add_option("--bins", an.bins, "Histogram/data-map bins"),
              &an.bins, "bins");

  EvaluateArgs ev;
  auto* cmd_ev = app.add_subcommand(
      "evaluate", "Macro F1, consistency, faithfulness, per-group tables");
  binder.bind(cmd_ev->add_option("--gold", ev.gold, "Gold instance JSON"),
              &ev.gold, "gold");
  binder.bind(cmd_ev->add_option("--pred", ev.pred, "Prediction JSON"),
              &ev.pred, "pred");
  binder.bind(cmd_ev->add_option("--links", ev.links,
                                 "Intervention links JSONL"),
              &ev.links, "links");
  binder.bind(cmd_ev->add_option("--intervened-gold", ev.intervened_gold,
                                 "Gold instance JSON for intervened uuids"),
              &ev.intervened_gold, "intervened-gold");
  binder.bind(cmd_ev->add_option("--intervened-pred", ev.intervened_pred,
                                 "Prediction JSON for intervened uuids"),
              &ev.intervened_pred, "intervened-pred");
  binder.bind(cmd_ev->add_option("--perturbed", ev.perturbed,
                                 "Perturbed JSONL supplying links and gold "
                                 "(repeatable)"),
              &ev.perturbed, "perturbed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << app.help();
    return 2;
  }

  binder.apply(config_path);

  if (cmd_ingest->parsed()) return run_ingest(ingest, out_dir);
  if (cmd_stats->parsed()) return run_stats(stats, out_dir);
  if (cmd_render->parsed()) return run_render(render, out_dir);
  if (cmd_acr->parsed()) return run_perturb_acronym(acr, out_dir);
  if (cmd_num->parsed()) return run_perturb_numeric(num, seed, out_dir);
  if (cmd_train->parsed()) return run_train(tr, seed, out_dir);
  if (cmd_pred->parsed()) return run_predict(pr, seed, out_dir);
  if (cmd_an->parsed()) return run_analyze(an, out_dir);
  if (cmd_ev->parsed()) return run_evaluate(ev, out_dir);
  throw std::logic_error("no subcommand dispatched");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

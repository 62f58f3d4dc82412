#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctnli/batch.hpp"
#include "ctnli/corpus.hpp"
#include "ctnli/features.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ctnli;

namespace {

std::vector<ResolvedPair> fixture_pairs() {
  auto corpus = load_corpus(testutil::fixture_instances(),
                            testutil::fixture_ctrs());
  std::vector<ResolvedPair> pairs;
  pairs.reserve(corpus.instances.size());
  for (const auto& inst : corpus.instances) {
    pairs.push_back(resolve_premise(inst, corpus.ctrs));
  }
  return pairs;
}

LearnerParams dense_learner(std::uint32_t dim) {
  auto theta = LearnerParams::zeros(dim);
  for (std::size_t i = 0; i < theta.w.size(); ++i) {
    theta.w[i] = 0.01 * (static_cast<double>(i % 13) - 6.0);
  }
  theta.b = {0.2, -0.1};
  return theta;
}

bool same_perturbed(const PerturbedInstance& a, const PerturbedInstance& b) {
  return a.new_uuid == b.new_uuid && a.source_uuid == b.source_uuid &&
         a.kind == b.kind && a.label_action == b.label_action &&
         a.hypothesis == b.hypothesis && a.label == b.label;
}

bool same_perturbed(const std::vector<PerturbedInstance>& a,
                    const std::vector<PerturbedInstance>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_perturbed(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parallel featurization matches the serial twin and the scalar call") {
  auto pairs = fixture_pairs();
  REQUIRE(pairs.size() > 10);
  const std::uint32_t dim = 1 << 12;

  auto par = featurize_all(pairs, dim);
  auto ser = featurize_all_serial(pairs, dim);
  REQUIRE(par.size() == pairs.size());
  CHECK(par == ser);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(par[i] == featurize(pairs[i], dim));
  }
}

TEST_CASE("featurization failures surface through both kernels") {
  auto pairs = fixture_pairs();
  CHECK_THROWS_AS((void)featurize_all(pairs, 0), std::runtime_error);
  CHECK_THROWS_AS((void)featurize_all_serial(pairs, 0), std::runtime_error);
}

TEST_CASE("gold probabilities agree between kernels and the scalar path") {
  auto pairs = fixture_pairs();
  const std::uint32_t dim = 1 << 10;
  auto xs = featurize_all_serial(pairs, dim);
  std::vector<Label> golds;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    golds.push_back(i % 2 == 0 ? Label::Entailment : Label::Contradiction);
  }
  auto theta = dense_learner(dim);

  auto par = gold_probs_all(theta, xs, golds);
  auto ser = gold_probs_all_serial(theta, xs, golds);
  REQUIRE(par.size() == xs.size());
  CHECK(par == ser);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto probs = learner_predict_proba(theta, xs[i]);
    CHECK(par[i] == probs[golds[i] == Label::Entailment ? 0 : 1]);
  }

  SUBCASE("a feature/label length mismatch is rejected") {
    golds.pop_back();
    CHECK_THROWS_WITH_AS((void)gold_probs_all(theta, xs, golds),
                         doctest::Contains("size mismatch"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS((void)gold_probs_all_serial(theta, xs, golds),
                         doctest::Contains("size mismatch"),
                         std::runtime_error);
  }
}

TEST_CASE("auxiliary weights agree between kernels and the scalar path") {
  auto pairs = fixture_pairs();
  const std::uint32_t dim = 512;
  auto xs = featurize_all_serial(pairs, dim);
  std::vector<Label> golds;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    golds.push_back(i % 3 == 0 ? Label::Contradiction : Label::Entailment);
  }
  auto phi = AuxiliaryParams::random_init(dim, 16, 8, 99);

  auto par = aux_weights_all(phi, xs, golds);
  auto ser = aux_weights_all_serial(phi, xs, golds);
  REQUIRE(par.size() == xs.size());
  CHECK(par == ser);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(par[i] == aux_weight(phi, xs[i], golds[i]));
  }

  SUBCASE("a feature/label length mismatch is rejected") {
    xs.pop_back();
    CHECK_THROWS_WITH_AS((void)aux_weights_all(phi, xs, golds),
                         doctest::Contains("size mismatch"),
                         std::runtime_error);
  }
}

TEST_CASE("batched majority prediction matches the sequential predictor") {
  auto pairs = fixture_pairs();
  const std::uint32_t dim = 1 << 10;
  auto theta = dense_learner(dim);

  for (std::uint32_t runs : {1u, 5u}) {
    CAPTURE(runs);
    auto batched = predict_majority(theta, pairs, runs, 42);
    auto direct = predict(theta, pairs, runs, 42);
    REQUIRE(batched.size() == direct.size());
    for (std::size_t i = 0; i < batched.size(); ++i) {
      CHECK(batched[i].first == direct[i].first);
      CHECK(batched[i].second == direct[i].second);
    }
  }

  SUBCASE("even or zero run counts are rejected") {
    CHECK_THROWS_WITH_AS((void)predict_majority(theta, pairs, 0, 42),
                         doctest::Contains("odd"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)predict_majority(theta, pairs, 4, 42),
                         doctest::Contains("odd"), std::runtime_error);
  }
}

TEST_CASE("word overlap kernels agree and rethrow the lowest failing index") {
  auto pairs = fixture_pairs();
  auto par = word_overlap_all(pairs);
  auto ser = word_overlap_all_serial(pairs);
  REQUIRE(par.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto one = word_overlap(pairs[i]);
    CHECK(par[i].uuid == one.uuid);
    CHECK(par[i].overlap == one.overlap);
    CHECK(ser[i].uuid == one.uuid);
    CHECK(ser[i].overlap == one.overlap);
  }

  SUBCASE("two failures report the earlier instance") {
    std::vector<ResolvedPair> bad{
        testutil::make_pair("u0", "platelet counts rose", "counts rose"),
        testutil::make_pair("u1", "platelet counts rose", "..."),
        testutil::make_pair("u2", "platelet counts rose", "counts"),
        testutil::make_pair("u3", "platelet counts rose", "!!!"),
    };
    CHECK_THROWS_WITH_AS((void)word_overlap_all(bad), doctest::Contains("u1"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS((void)word_overlap_all_serial(bad),
                         doctest::Contains("u1"), std::runtime_error);
  }
}

TEST_CASE("acronym perturbation kernels match per-instance calls in order") {
  AcronymInventory inv =
      AcronymInventory::from_csv(testutil::data_dir() + "/inventory.csv");
  TrigramCosineScorer scorer;
  std::vector<NliInstance> instances{
      testutil::make_instance("b1", "ER status was recorded at baseline.",
                              Label::Entailment),
      testutil::make_instance("b2", "No acronyms occur here.",
                              Label::Contradiction),
      testutil::make_instance("b3", "AE and WBC were monitored.",
                              Label::Contradiction),
  };

  for (auto mode : {AcronymMode::Positive, AcronymMode::Negative}) {
    CAPTURE(mode == AcronymMode::Positive);
    auto par = perturb_acronyms_all(instances, inv, mode, scorer);
    auto ser = perturb_acronyms_all_serial(instances, inv, mode, scorer);
    CHECK(same_perturbed(par, ser));

    std::vector<PerturbedInstance> expected;
    for (const auto& inst : instances) {
      auto one = perturb_acronyms(inst, inv, mode, scorer);
      expected.insert(expected.end(), one.begin(), one.end());
    }
    CHECK(same_perturbed(par, expected));
  }

  SUBCASE("an unlabeled instance fails both kernels") {
    instances[1].label.reset();
    instances[1].statement = "ER visits were tracked.";
    CHECK_THROWS_WITH_AS((void)perturb_acronyms_all(instances, inv,
                                                    AcronymMode::Positive,
                                                    scorer),
                         doctest::Contains("b2"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)perturb_acronyms_all_serial(instances, inv,
                                                           AcronymMode::Positive,
                                                           scorer),
                         doctest::Contains("b2"), std::runtime_error);
  }
}

TEST_CASE("numeric perturbation kernels match per-instance calls") {
  auto lex = ComparatorLexicon::defaults();
  auto policy = DeltaPolicy::add_percent(10.0);
  std::vector<NliInstance> instances{
      testutil::make_instance("n1", "patients received 50 mg daily",
                              Label::Entailment),
      testutil::make_instance("n2", "a lower dose was given for 6 weeks",
                              Label::Contradiction),
      testutil::make_instance("n3", "no numbers and no comparators",
                              Label::Entailment),
  };

  auto par = perturb_numeric_all(instances, lex, policy, 7);
  auto ser = perturb_numeric_all_serial(instances, lex, policy, 7);
  CHECK(same_perturbed(par, ser));

  std::vector<PerturbedInstance> expected;
  for (const auto& inst : instances) {
    auto one = perturb_numeric_instance(inst, lex, policy, 7, std::nullopt);
    expected.insert(expected.end(), one.begin(), one.end());
  }
  CHECK(same_perturbed(par, expected));
  CHECK(!expected.empty());

  SUBCASE("external spans are routed to the matching instance only") {
    std::unordered_map<std::string, std::vector<EntitySpan>> spans;
    EntitySpan sp;
    sp.kind = EntityKind::Dosage;
    sp.start = 18;
    sp.end = 20;
    sp.value = 50.0;
    spans["n1"] = {sp};

    auto with = perturb_numeric_all(instances, lex, policy, 7, &spans);
    auto with_ser = perturb_numeric_all_serial(instances, lex, policy, 7,
                                               &spans);
    CHECK(same_perturbed(with, with_ser));

    std::vector<PerturbedInstance> routed;
    for (const auto& inst : instances) {
      std::optional<std::vector<EntitySpan>> s;
      if (inst.uuid == "n1") s = spans["n1"];
      auto one = perturb_numeric_instance(inst, lex, policy, 7, s);
      routed.insert(routed.end(), one.begin(), one.end());
    }
    CHECK(same_perturbed(with, routed));
  }
}

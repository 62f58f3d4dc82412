#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctnli/corpus.hpp"
#include "ctnli/features.hpp"

namespace ctnli {

// Portable deterministic generator (splitmix64). Identical streams on every
// platform for a given state, unlike <random> distributions.
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // Uniform double in [-r, r].
  double symmetric(double r) { return (2.0 * uniform() - 1.0) * r; }
};

// Linear softmax classifier over hashed features. Class order everywhere:
// index 0 = Entailment, index 1 = Contradiction.
struct LearnerParams {
  std::uint32_t dim = kDefaultFeatureDim;
  std::vector<double> w;  // dim x 2, row-major: w[i * 2 + c]
  std::array<double, 2> b{0.0, 0.0};

  static LearnerParams zeros(std::uint32_t dim);
};

// Two hidden rectifier layers and a scalar logistic head over the input
// [x || one-hot(gold)], so the input width is dim + 2.
struct AuxiliaryParams {
  std::uint32_t dim = kDefaultFeatureDim;
  std::uint32_t h1 = 64;
  std::uint32_t h2 = 16;
  std::vector<double> w1;  // h1 x (dim + 2), row-major
  std::vector<double> b1;  // h1
  std::vector<double> w2;  // h2 x h1, row-major
  std::vector<double> b2;  // h2
  std::vector<double> w3;  // h2
  double b3 = 0.0;

  static AuxiliaryParams zeros(std::uint32_t dim, std::uint32_t h1,
                               std::uint32_t h2);
  // Uniform [-0.1, 0.1] init. Zero init would leave every rectifier unit
  // dead, so the head bias alone would train.
  static AuxiliaryParams random_init(std::uint32_t dim, std::uint32_t h1,
                                     std::uint32_t h2, std::uint64_t seed);
};

struct TrainConfig {
  std::uint32_t epochs = 3;
  std::uint32_t batch_size = 4;
  double learner_lr = 3.3e-3;  // transformer-scale 3.3e-5, x100 for this model size
  double aux_lr = 5.8e-3;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
  std::uint32_t dim = kDefaultFeatureDim;
  std::uint32_t hidden1 = 64;
  std::uint32_t hidden2 = 16;
  std::string dynamics_path;  // empty: no log file

  void validate() const;
};

struct InstanceDynamics {
  std::vector<double> gold_probs;   // one entry per epoch
  std::vector<double> aux_weights;  // one entry per epoch, each in (0,1)
  Label final_prediction = Label::Entailment;
};

struct TrainingDynamics {
  std::uint32_t epochs = 0;
  std::map<std::string, InstanceDynamics> per_instance;  // keyed by uuid
};

// Softmax probabilities (Entailment, Contradiction); they sum to 1.
std::array<double, 2> learner_predict_proba(const LearnerParams& theta,
                                            const FeatureVector& x);

// -ln(prob of gold), with the probability floored at 1e-12.
double cross_entropy_loss(const std::array<double, 2>& probs, Label gold);

// Logistic output of the auxiliary network; strictly inside (0,1).
double aux_weight(const AuxiliaryParams& phi, const FeatureVector& x, Label gold);

// Mean over the batch of aux_weight x cross-entropy.
double minmax_objective(const LearnerParams& theta, const AuxiliaryParams& phi,
                        const std::vector<FeatureVector>& xs,
                        const std::vector<Label>& golds);

// Alternating optimization: per mini-batch one ascent step on phi, then one
// descent step on theta, both AdamW. Logs full-corpus gold probabilities and
// auxiliary weights at each epoch end. warm_start replaces the zero-init
// learner.
std::tuple<LearnerParams, AuxiliaryParams, TrainingDynamics> train(
    const std::vector<ResolvedPair>& corpus, const TrainConfig& cfg,
    const std::optional<LearnerParams>& warm_start = std::nullopt);

// The deterministic per-run dropout stream for (seed, uuid, run).
SplitMix64 dropout_rng(std::uint64_t seed, std::string_view uuid,
                       std::uint32_t run);

// Feature dropout: each entry dropped independently with probability p.
FeatureVector apply_feature_dropout(const FeatureVector& x, double p,
                                    SplitMix64& rng);

inline constexpr double kFeatureDropout = 0.05;

Label majority_label(const std::vector<Label>& votes);

// K stochastic forward passes per pair (feature dropout 0.05), majority
// label. K must be odd; K = 1 is a single deterministic pass.
std::vector<std::pair<std::string, Label>> predict(
    const LearnerParams& theta, const std::vector<ResolvedPair>& pairs,
    std::uint32_t runs, std::uint64_t seed);

// Max relative error between analytic gradients and central finite
// differences on at least 50 sampled coordinates of theta and phi.
double gradient_check(const LearnerParams& theta, const AuxiliaryParams& phi,
                      const std::vector<FeatureVector>& xs,
                      const std::vector<Label>& golds, double h = 1e-5);

namespace detail {

// Analytic gradients of the objective for one batch, dense layouts matching
// the parameter structs. Exposed for the finite-difference tests.
struct LearnerGrads {
  std::vector<double> w;
  std::array<double, 2> b{0.0, 0.0};
};
struct AuxiliaryGrads {
  std::vector<double> w1, b1, w2, b2, w3;
  double b3 = 0.0;
};

LearnerGrads learner_gradients(const LearnerParams& theta,
                               const AuxiliaryParams& phi,
                               const std::vector<FeatureVector>& xs,
                               const std::vector<Label>& golds);
AuxiliaryGrads auxiliary_gradients(const LearnerParams& theta,
                                   const AuxiliaryParams& phi,
                                   const std::vector<FeatureVector>& xs,
                                   const std::vector<Label>& golds);

// Decoupled-weight-decay adaptive-moment update on one parameter tensor;
// direction +1 ascends, -1 descends. The decay always shrinks toward zero.
struct AdamSlot {
  std::vector<double> m, v;
  std::uint64_t t = 0;
};
void adamw_step(double* params, const double* grads, std::size_t n,
                AdamSlot& slot, double lr, double weight_decay,
                double direction);

// Single ascent step on every phi tensor with fresh optimizer state.
void ascend_auxiliary(AuxiliaryParams& phi, const AuxiliaryGrads& g, double lr,
                      double weight_decay);

}  // namespace detail

}  // namespace ctnli

#include "ctnli/minmax.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <tuple>

#include "ctnli/checkpoint.hpp"

namespace ctnli {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kLossFloor = 1e-12;
constexpr double kAuxInitRange = 0.1;

std::size_t label_index(Label y) { return y == Label::Entailment ? 0 : 1; }

struct AuxActivations {
  std::vector<double> z1, a1, z2, a2;
  double z3 = 0.0;
  double g = 0.5;
};

AuxActivations aux_forward(const AuxiliaryParams& phi, const FeatureVector& x,
                           Label gold) {
  const std::size_t in = static_cast<std::size_t>(phi.dim) + 2;
  AuxActivations act;
  act.z1.resize(phi.h1);
  act.a1.resize(phi.h1);
  for (std::size_t j = 0; j < phi.h1; ++j) {
    const double* row = &phi.w1[j * in];
    double s = phi.b1[j];
    for (const auto& [i, v] : x.entries) s += row[i] * v;
    s += row[phi.dim + label_index(gold)];
    act.z1[j] = s;
    act.a1[j] = s > 0.0 ? s : 0.0;
  }
  act.z2.resize(phi.h2);
  act.a2.resize(phi.h2);
  for (std::size_t k = 0; k < phi.h2; ++k) {
    const double* row = &phi.w2[k * phi.h1];
    double s = phi.b2[k];
    for (std::size_t j = 0; j < phi.h1; ++j) s += row[j] * act.a1[j];
    act.z2[k] = s;
    act.a2[k] = s > 0.0 ? s : 0.0;
  }
  double z3 = phi.b3;
  for (std::size_t k = 0; k < phi.h2; ++k) z3 += phi.w3[k] * act.a2[k];
  act.z3 = z3;
  act.g = 1.0 / (1.0 + std::exp(-z3));
  return act;
}

void check_batch(const std::vector<FeatureVector>& xs,
                 const std::vector<Label>& golds) {
  if (xs.empty()) throw std::runtime_error("empty batch");
  if (xs.size() != golds.size()) {
    throw std::runtime_error("batch feature/label size mismatch");
  }
}

}  // namespace

LearnerParams LearnerParams::zeros(std::uint32_t dim) {
  LearnerParams p;
  p.dim = dim;
  p.w.assign(static_cast<std::size_t>(dim) * 2, 0.0);
  return p;
}

AuxiliaryParams AuxiliaryParams::zeros(std::uint32_t dim, std::uint32_t h1,
                                       std::uint32_t h2) {
  AuxiliaryParams p;
  p.dim = dim;
  p.h1 = h1;
  p.h2 = h2;
  p.w1.assign(static_cast<std::size_t>(h1) * (dim + 2), 0.0);
  p.b1.assign(h1, 0.0);
  p.w2.assign(static_cast<std::size_t>(h2) * h1, 0.0);
  p.b2.assign(h2, 0.0);
  p.w3.assign(h2, 0.0);
  return p;
}

AuxiliaryParams AuxiliaryParams::random_init(std::uint32_t dim, std::uint32_t h1,
                                             std::uint32_t h2,
                                             std::uint64_t seed) {
  AuxiliaryParams p = zeros(dim, h1, h2);
  SplitMix64 rng{seed ^ 0xA5A5A5A5A5A5A5A5ull};
  for (double& w : p.w1) w = rng.symmetric(kAuxInitRange);
  for (double& w : p.b1) w = rng.symmetric(kAuxInitRange);
  for (double& w : p.w2) w = rng.symmetric(kAuxInitRange);
  for (double& w : p.b2) w = rng.symmetric(kAuxInitRange);
  for (double& w : p.w3) w = rng.symmetric(kAuxInitRange);
  p.b3 = rng.symmetric(kAuxInitRange);
  return p;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::runtime_error("epochs must be at least 1");
  if (batch_size < 1) throw std::runtime_error("batch size must be at least 1");
  if (learner_lr <= 0.0 || aux_lr <= 0.0) {
    throw std::runtime_error("learning rates must be positive");
  }
  if (weight_decay < 0.0) throw std::runtime_error("weight decay must be >= 0");
  if (dim == 0 || hidden1 == 0 || hidden2 == 0) {
    throw std::runtime_error("model dimensions must be positive");
  }
}

std::array<double, 2> learner_predict_proba(const LearnerParams& theta,
                                            const FeatureVector& x) {
  std::array<double, 2> z{theta.b[0], theta.b[1]};
  for (const auto& [i, v] : x.entries) {
    z[0] += theta.w[static_cast<std::size_t>(i) * 2] * v;
    z[1] += theta.w[static_cast<std::size_t>(i) * 2 + 1] * v;
  }
  double m = std::max(z[0], z[1]);
  double e0 = std::exp(z[0] - m);
  double e1 = std::exp(z[1] - m);
  double s = e0 + e1;
  return {e0 / s, e1 / s};
}

double cross_entropy_loss(const std::array<double, 2>& probs, Label gold) {
  return -std::log(std::max(probs[label_index(gold)], kLossFloor));
}

double aux_weight(const AuxiliaryParams& phi, const FeatureVector& x,
                  Label gold) {
  return aux_forward(phi, x, gold).g;
}

double minmax_objective(const LearnerParams& theta, const AuxiliaryParams& phi,
                        const std::vector<FeatureVector>& xs,
                        const std::vector<Label>& golds) {
  check_batch(xs, golds);
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double loss = cross_entropy_loss(learner_predict_proba(theta, xs[i]), golds[i]);
    sum += aux_weight(phi, xs[i], golds[i]) * loss;
  }
  return sum / static_cast<double>(xs.size());
}

namespace detail {

LearnerGrads learner_gradients(const LearnerParams& theta,
                               const AuxiliaryParams& phi,
                               const std::vector<FeatureVector>& xs,
                               const std::vector<Label>& golds) {
  check_batch(xs, golds);
  LearnerGrads g;
  g.w.assign(theta.w.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto probs = learner_predict_proba(theta, xs[i]);
    // The loss floor flattens the gradient once prob(gold) hits it.
    if (probs[label_index(golds[i])] <= kLossFloor) continue;
    double weight = aux_weight(phi, xs[i], golds[i]) * inv_n;
    for (std::size_t c = 0; c < 2; ++c) {
      double d = weight * (probs[c] - (c == label_index(golds[i]) ? 1.0 : 0.0));
      g.b[c] += d;
      for (const auto& [idx, v] : xs[i].entries) {
        g.w[static_cast<std::size_t>(idx) * 2 + c] += d * v;
      }
    }
  }
  return g;
}

AuxiliaryGrads auxiliary_gradients(const LearnerParams& theta,
                                   const AuxiliaryParams& phi,
                                   const std::vector<FeatureVector>& xs,
                                   const std::vector<Label>& golds) {
  check_batch(xs, golds);
  AuxiliaryGrads g;
  g.w1.assign(phi.w1.size(), 0.0);
  g.b1.assign(phi.b1.size(), 0.0);
  g.w2.assign(phi.w2.size(), 0.0);
  g.b2.assign(phi.b2.size(), 0.0);
  g.w3.assign(phi.w3.size(), 0.0);
  const std::size_t in = static_cast<std::size_t>(phi.dim) + 2;
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  std::vector<double> da1(phi.h1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double loss = cross_entropy_loss(learner_predict_proba(theta, xs[i]), golds[i]);
    AuxActivations act = aux_forward(phi, xs[i], golds[i]);
    double dz3 = inv_n * loss * act.g * (1.0 - act.g);
    g.b3 += dz3;
    std::fill(da1.begin(), da1.end(), 0.0);
    for (std::size_t k = 0; k < phi.h2; ++k) {
      g.w3[k] += dz3 * act.a2[k];
      if (act.z2[k] <= 0.0) continue;
      double dz2 = phi.w3[k] * dz3;
      g.b2[k] += dz2;
      const double* row = &phi.w2[k * phi.h1];
      double* grow = &g.w2[k * phi.h1];
      for (std::size_t j = 0; j < phi.h1; ++j) {
        grow[j] += dz2 * act.a1[j];
        da1[j] += row[j] * dz2;
      }
    }
    for (std::size_t j = 0; j < phi.h1; ++j) {
      if (act.z1[j] <= 0.0 || da1[j] == 0.0) continue;
      double dz1 = da1[j];
      g.b1[j] += dz1;
      double* grow = &g.w1[j * in];
      for (const auto& [idx, v] : xs[i].entries) grow[idx] += dz1 * v;
      grow[phi.dim + label_index(golds[i])] += dz1;
    }
  }
  return g;
}

void adamw_step(double* params, const double* grads, std::size_t n,
                AdamSlot& slot, double lr, double weight_decay,
                double direction) {
  if (slot.m.size() != n) {
    slot.m.assign(n, 0.0);
    slot.v.assign(n, 0.0);
    slot.t = 0;
  }
  slot.t += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(slot.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(slot.t));
  for (std::size_t i = 0; i < n; ++i) {
    slot.m[i] = kBeta1 * slot.m[i] + (1.0 - kBeta1) * grads[i];
    slot.v[i] = kBeta2 * slot.v[i] + (1.0 - kBeta2) * grads[i] * grads[i];
    double step = (slot.m[i] / bc1) / (std::sqrt(slot.v[i] / bc2) + kAdamEps);
    params[i] += direction * lr * step - lr * weight_decay * params[i];
  }
}

void ascend_auxiliary(AuxiliaryParams& phi, const AuxiliaryGrads& g, double lr,
                      double weight_decay) {
  AdamSlot s1, s2, s3, s4, s5, s6;
  adamw_step(phi.w1.data(), g.w1.data(), phi.w1.size(), s1, lr, weight_decay, 1.0);
  adamw_step(phi.b1.data(), g.b1.data(), phi.b1.size(), s2, lr, weight_decay, 1.0);
  adamw_step(phi.w2.data(), g.w2.data(), phi.w2.size(), s3, lr, weight_decay, 1.0);
  adamw_step(phi.b2.data(), g.b2.data(), phi.b2.size(), s4, lr, weight_decay, 1.0);
  adamw_step(phi.w3.data(), g.w3.data(), phi.w3.size(), s5, lr, weight_decay, 1.0);
  adamw_step(&phi.b3, &g.b3, 1, s6, lr, weight_decay, 1.0);
}

}  // namespace detail

std::tuple<LearnerParams, AuxiliaryParams, TrainingDynamics> train(
    const std::vector<ResolvedPair>& corpus, const TrainConfig& cfg,
    const std::optional<LearnerParams>& warm_start) {
  cfg.validate();
  if (corpus.size() < 2) {
    throw std::runtime_error("training needs at least 2 labeled instances");
  }
  std::vector<FeatureVector> xs;
  std::vector<Label> golds;
  xs.reserve(corpus.size());
  golds.reserve(corpus.size());
  std::set<Label> seen;
  for (const auto& p : corpus) {
    if (!p.label) {
      throw std::runtime_error("instance " + p.uuid + " has no label");
    }
    xs.push_back(featurize(p, cfg.dim));
    golds.push_back(*p.label);
    seen.insert(*p.label);
  }
  if (seen.size() < 2) {
    throw std::runtime_error("training corpus contains a single label only");
  }

  LearnerParams theta;
  if (warm_start) {
    if (warm_start->dim != cfg.dim) {
      throw std::runtime_error("warm start dimension mismatch");
    }
    theta = *warm_start;
  } else {
    theta = LearnerParams::zeros(cfg.dim);
  }
  AuxiliaryParams phi =
      AuxiliaryParams::random_init(cfg.dim, cfg.hidden1, cfg.hidden2, cfg.seed);

  detail::AdamSlot tw, tb, aw1, ab1, aw2, ab2, aw3, ab3;
  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  TrainingDynamics dyn;
  dyn.epochs = cfg.epochs;
  for (const auto& p : corpus) dyn.per_instance[p.uuid] = InstanceDynamics{};

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    SplitMix64 rng{cfg.seed + 0x9E3779B97F4A7C15ull * (epoch + 1)};
    for (std::size_t i = n - 1; i > 0; --i) {
      std::size_t j = rng.next() % (i + 1);
      std::swap(order[i], order[j]);
    }
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      std::size_t stop = std::min(n, start + cfg.batch_size);
      std::vector<FeatureVector> bx;
      std::vector<Label> by;
      for (std::size_t i = start; i < stop; ++i) {
        bx.push_back(xs[order[i]]);
        by.push_back(golds[order[i]]);
      }
      double j0 = minmax_objective(theta, phi, bx, by);
      if (!std::isfinite(j0)) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "non-finite objective %g at epoch %u batch %zu", j0,
                      epoch + 1, start / cfg.batch_size);
        throw std::runtime_error(msg);
      }
      auto ag = detail::auxiliary_gradients(theta, phi, bx, by);
      detail::adamw_step(phi.w1.data(), ag.w1.data(), phi.w1.size(), aw1,
                         cfg.aux_lr, cfg.weight_decay, 1.0);
      detail::adamw_step(phi.b1.data(), ag.b1.data(), phi.b1.size(), ab1,
                         cfg.aux_lr, cfg.weight_decay, 1.0);
      detail::adamw_step(phi.w2.data(), ag.w2.data(), phi.w2.size(), aw2,
                         cfg.aux_lr, cfg.weight_decay, 1.0);
      detail::adamw_step(phi.b2.data(), ag.b2.data(), phi.b2.size(), ab2,
                         cfg.aux_lr, cfg.weight_decay, 1.0);
      detail::adamw_step(phi.w3.data(), ag.w3.data(), phi.w3.size(), aw3,
                         cfg.aux_lr, cfg.weight_decay, 1.0);
      detail::adamw_step(&phi.b3, &ag.b3, 1, ab3, cfg.aux_lr, cfg.weight_decay,
                         1.0);

      auto lg = detail::learner_gradients(theta, phi, bx, by);
      detail::adamw_step(theta.w.data(), lg.w.data(), theta.w.size(), tw,
                         cfg.learner_lr, cfg.weight_decay, -1.0);
      detail::adamw_step(theta.b.data(), lg.b.data(), theta.b.size(), tb,
                         cfg.learner_lr, cfg.weight_decay, -1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto& slot = dyn.per_instance[corpus[i].uuid];
      auto probs = learner_predict_proba(theta, xs[i]);
      slot.gold_probs.push_back(probs[label_index(golds[i])]);
      slot.aux_weights.push_back(aux_weight(phi, xs[i], golds[i]));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto probs = learner_predict_proba(theta, xs[i]);
    dyn.per_instance[corpus[i].uuid].final_prediction =
        probs[0] >= probs[1] ? Label::Entailment : Label::Contradiction;
  }

  if (!cfg.dynamics_path.empty()) {
    write_dynamics_jsonl(cfg.dynamics_path, dyn);
  }
  return {std::move(theta), std::move(phi), std::move(dyn)};
}

SplitMix64 dropout_rng(std::uint64_t seed, std::string_view uuid,
                       std::uint32_t run) {
  SplitMix64 rng{fnv1a64(uuid)};
  rng.state ^= 0xD1B54A32D192ED03ull * (seed + 1);
  rng.state += 0x8CB92BA72F3D8DD7ull * (static_cast<std::uint64_t>(run) + 1);
  rng.next();
  return rng;
}

FeatureVector apply_feature_dropout(const FeatureVector& x, double p,
                                    SplitMix64& rng) {
  FeatureVector out;
  out.dim = x.dim;
  out.entries.reserve(x.entries.size());
  for (const auto& e : x.entries) {
    if (rng.uniform() >= p) out.entries.push_back(e);
  }
  return out;
}

Label majority_label(const std::vector<Label>& votes) {
  if (votes.empty()) throw std::runtime_error("majority vote over no runs");
  if (votes.size() % 2 == 0) {
    throw std::runtime_error("majority vote needs an odd run count");
  }
  std::size_t e = 0;
  for (Label v : votes) {
    if (v == Label::Entailment) ++e;
  }
  return 2 * e > votes.size() ? Label::Entailment : Label::Contradiction;
}

std::vector<std::pair<std::string, Label>> predict(
    const LearnerParams& theta, const std::vector<ResolvedPair>& pairs,
    std::uint32_t runs, std::uint64_t seed) {
  if (runs == 0 || runs % 2 == 0) {
    throw std::runtime_error("prediction run count must be odd");
  }
  std::vector<std::pair<std::string, Label>> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    FeatureVector x = featurize(pair, theta.dim);
    std::vector<Label> votes;
    votes.reserve(runs);
    for (std::uint32_t r = 0; r < runs; ++r) {
      FeatureVector xr = x;
      if (runs > 1) {
        SplitMix64 rng = dropout_rng(seed, pair.uuid, r);
        xr = apply_feature_dropout(x, kFeatureDropout, rng);
      }
      auto probs = learner_predict_proba(theta, xr);
      votes.push_back(probs[0] >= probs[1] ? Label::Entailment
                                           : Label::Contradiction);
    }
    out.emplace_back(pair.uuid, majority_label(votes));
  }
  return out;
}

double gradient_check(const LearnerParams& theta, const AuxiliaryParams& phi,
                      const std::vector<FeatureVector>& xs,
                      const std::vector<Label>& golds, double h) {
  check_batch(xs, golds);
  LearnerParams th = theta;
  AuxiliaryParams ph = phi;
  auto lg = detail::learner_gradients(th, ph, xs, golds);
  auto ag = detail::auxiliary_gradients(th, ph, xs, golds);

  std::set<std::uint32_t> support;
  for (const auto& x : xs) {
    for (const auto& [i, v] : x.entries) support.insert(i);
  }

  // (mutable parameter slot, analytic gradient) pairs.
  std::vector<std::pair<double*, double>> coords;
  for (std::uint32_t i : support) {
    for (std::size_t c = 0; c < 2; ++c) {
      std::size_t k = static_cast<std::size_t>(i) * 2 + c;
      coords.emplace_back(&th.w[k], lg.w[k]);
    }
  }
  coords.emplace_back(&th.b[0], lg.b[0]);
  coords.emplace_back(&th.b[1], lg.b[1]);
  const std::size_t in = static_cast<std::size_t>(ph.dim) + 2;
  std::vector<std::uint32_t> aux_cols(support.begin(), support.end());
  aux_cols.push_back(ph.dim);
  aux_cols.push_back(ph.dim + 1);
  for (std::size_t j = 0; j < ph.h1; ++j) {
    for (std::uint32_t i : aux_cols) {
      std::size_t k = j * in + i;
      coords.emplace_back(&ph.w1[k], ag.w1[k]);
    }
    coords.emplace_back(&ph.b1[j], ag.b1[j]);
  }
  for (std::size_t k = 0; k < ph.w2.size(); ++k) {
    coords.emplace_back(&ph.w2[k], ag.w2[k]);
  }
  for (std::size_t k = 0; k < ph.h2; ++k) {
    coords.emplace_back(&ph.b2[k], ag.b2[k]);
    coords.emplace_back(&ph.w3[k], ag.w3[k]);
  }
  coords.emplace_back(&ph.b3, ag.b3);

  std::size_t samples = std::min<std::size_t>(coords.size(), 100);
  SplitMix64 rng{0xC0FFEE5EEDull};
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    auto& [slot, analytic] = coords[rng.next() % coords.size()];
    double saved = *slot;
    *slot = saved + h;
    double j_plus = minmax_objective(th, ph, xs, golds);
    *slot = saved - h;
    double j_minus = minmax_objective(th, ph, xs, golds);
    *slot = saved;
    double numeric = (j_plus - j_minus) / (2.0 * h);
    double rel = std::fabs(analytic - numeric) /
                 std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace ctnli

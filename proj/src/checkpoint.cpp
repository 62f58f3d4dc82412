#include "ctnli/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ctnli/io.hpp"
#include "json.hpp"

namespace ctnli {

namespace {

using json = nlohmann::ordered_json;

constexpr char kMagic[8] = {'C', 'T', 'N', 'L', 'I', 'C', 'K', '\n'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
  std::ofstream out;
  std::string path;

  Writer(const std::string& p) : out(p, std::ios::binary), path(p) {
    if (!out) throw std::runtime_error("cannot open checkpoint for write: " + p);
  }
  void raw(const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
};

struct Reader {
  std::ifstream in;
  std::string path;

  Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw std::runtime_error("cannot open checkpoint: " + p);
  }
  void raw(void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
      throw std::runtime_error("truncated checkpoint: " + path);
    }
  }
  std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
  double f64() { double v; raw(&v, sizeof v); return v; }
  std::vector<double> doubles(std::uint64_t expected) {
    std::uint64_t n = u64();
    if (n != expected) {
      throw std::runtime_error("checkpoint tensor size mismatch: " + path);
    }
    std::vector<double> v(n);
    raw(v.data(), n * sizeof(double));
    return v;
  }
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  Writer w(path);
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u64(ck.config.seed);
  w.u32(ck.config.epochs);
  w.u32(ck.config.batch_size);
  w.f64(ck.config.learner_lr);
  w.f64(ck.config.aux_lr);
  w.f64(ck.config.weight_decay);
  w.u32(ck.config.dim);
  w.u32(ck.config.hidden1);
  w.u32(ck.config.hidden2);
  w.u32(ck.theta.dim);
  w.doubles(ck.theta.w);
  w.f64(ck.theta.b[0]);
  w.f64(ck.theta.b[1]);
  w.u32(ck.phi.dim);
  w.u32(ck.phi.h1);
  w.u32(ck.phi.h2);
  w.doubles(ck.phi.w1);
  w.doubles(ck.phi.b1);
  w.doubles(ck.phi.w2);
  w.doubles(ck.phi.b2);
  w.doubles(ck.phi.w3);
  w.f64(ck.phi.b3);
  if (!w.out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }
  Checkpoint ck;
  ck.config.seed = r.u64();
  ck.config.epochs = r.u32();
  ck.config.batch_size = r.u32();
  ck.config.learner_lr = r.f64();
  ck.config.aux_lr = r.f64();
  ck.config.weight_decay = r.f64();
  ck.config.dim = r.u32();
  ck.config.hidden1 = r.u32();
  ck.config.hidden2 = r.u32();
  ck.theta.dim = r.u32();
  ck.theta.w = r.doubles(static_cast<std::uint64_t>(ck.theta.dim) * 2);
  ck.theta.b[0] = r.f64();
  ck.theta.b[1] = r.f64();
  ck.phi.dim = r.u32();
  ck.phi.h1 = r.u32();
  ck.phi.h2 = r.u32();
  ck.phi.w1 = r.doubles(static_cast<std::uint64_t>(ck.phi.h1) * (ck.phi.dim + 2));
  ck.phi.b1 = r.doubles(ck.phi.h1);
  ck.phi.w2 = r.doubles(static_cast<std::uint64_t>(ck.phi.h2) * ck.phi.h1);
  ck.phi.b2 = r.doubles(ck.phi.h2);
  ck.phi.w3 = r.doubles(ck.phi.h2);
  ck.phi.b3 = r.f64();
  return ck;
}

void write_dynamics_jsonl(const std::string& path, const TrainingDynamics& dyn) {
  std::string body;
  for (const auto& [uuid, inst] : dyn.per_instance) {
    if (inst.gold_probs.size() != dyn.epochs ||
        inst.aux_weights.size() != dyn.epochs) {
      throw std::runtime_error("dynamics list length mismatch for " + uuid);
    }
    for (std::uint32_t e = 0; e < dyn.epochs; ++e) {
      json j;
      j["uuid"] = uuid;
      j["epoch"] = e + 1;
      j["gold_prob"] = inst.gold_probs[e];
      j["aux_weight"] = inst.aux_weights[e];
      body += j.dump();
      body.push_back('\n');
    }
  }
  io::write_file(path, body);
}

TrainingDynamics read_dynamics_jsonl(const std::string& path) {
  TrainingDynamics dyn;
  for (const auto& line : io::read_lines(path)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    auto& inst = dyn.per_instance[j.at("uuid").get<std::string>()];
    std::uint32_t epoch = j.at("epoch").get<std::uint32_t>();
    if (epoch != inst.gold_probs.size() + 1) {
      throw std::runtime_error("dynamics log out of order in " + path);
    }
    inst.gold_probs.push_back(j.at("gold_prob").get<double>());
    inst.aux_weights.push_back(j.at("aux_weight").get<double>());
  }
  for (const auto& [uuid, inst] : dyn.per_instance) {
    if (dyn.epochs == 0) dyn.epochs = static_cast<std::uint32_t>(inst.gold_probs.size());
    if (inst.gold_probs.size() != dyn.epochs) {
      throw std::runtime_error("uneven epoch counts in " + path + " at " + uuid);
    }
  }
  return dyn;
}

std::map<std::string, bool> predicted_correctly_from_dynamics(
    const TrainingDynamics& dyn) {
  std::map<std::string, bool> out;
  for (const auto& [uuid, inst] : dyn.per_instance) {
    if (inst.gold_probs.empty()) {
      throw std::runtime_error("no epochs logged for " + uuid);
    }
    out[uuid] = inst.gold_probs.back() > 0.5;
  }
  return out;
}

std::map<std::string, double> final_weights_from_dynamics(
    const TrainingDynamics& dyn) {
  std::map<std::string, double> out;
  for (const auto& [uuid, inst] : dyn.per_instance) {
    if (inst.aux_weights.empty()) {
      throw std::runtime_error("no epochs logged for " + uuid);
    }
    out[uuid] = inst.aux_weights.back();
  }
  return out;
}

}  // namespace ctnli

#pragma once

#include <map>
#include <string>

#include "ctnli/minmax.hpp"

namespace ctnli {

// Versioned little-endian binary snapshot of a training run.
struct Checkpoint {
  LearnerParams theta;
  AuxiliaryParams phi;
  TrainConfig config;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Dynamics log, one JSON object per line: {uuid, epoch, gold_prob,
// aux_weight}, epochs 1-based, ordered by uuid then epoch. The final
// prediction is not part of the log.
void write_dynamics_jsonl(const std::string& path, const TrainingDynamics& dyn);
TrainingDynamics read_dynamics_jsonl(const std::string& path);

// Correctness per uuid from the last epoch's gold probability, strict > 0.5.
std::map<std::string, bool> predicted_correctly_from_dynamics(
    const TrainingDynamics& dyn);

// Final-epoch auxiliary weight per uuid.
std::map<std::string, double> final_weights_from_dynamics(
    const TrainingDynamics& dyn);

}  // namespace ctnli

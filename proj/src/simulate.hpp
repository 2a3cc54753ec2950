#pragma once

#include <cstdint>
#include <vector>

#include "model.hpp"

namespace gibbsfit {

struct SimConfig {
  std::vector<double> theta;
  Window window;
  long long steps = 200000;
  long long burn_in = 100000;
  std::uint64_t seed = 0;
  double p_birth = 0.45;
  double p_death = 0.45;
  double p_move = 0.10;
};

struct SimResult {
  PointPattern pattern;
  long long proposals[3] = {0, 0, 0};  // birth, death, move
  long long accepted[3] = {0, 0, 0};
};

/// Birth/death/move Metropolis-Hastings chain targeting the Gibbs law with
/// Papangelou intensity exp(-V(x^m | phi; theta)) relative to a unit-rate
/// Poisson process on the window. Starts empty and returns the state after
/// config.steps proposals; byte-identical output for identical configs.
SimResult simulate_mh(const ModelSpec& model, const SimConfig& config);

}  // namespace gibbsfit

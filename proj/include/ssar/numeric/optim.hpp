#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssar/numeric/mlp.hpp"

namespace ssar::numeric {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Adam moments for one network; m and v share the parameter shapes.
struct AdamState {
  AdamConfig config;
  MlpParams m;
  MlpParams v;
  std::uint64_t t = 0;
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

AdamState make_adam(const MlpParams& params, AdamConfig config = {});

/// One bias-corrected Adam step on every parameter buffer.
void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads);

/// Adam over a loose vector of scalars (e.g. the log entropy temperature).
struct ScalarAdam {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  explicit ScalarAdam(std::size_t n = 1, AdamConfig c = {}) : config(c), m(n, 0.0), v(n, 0.0) {}
  void step(std::span<double> params, std::span<const double> grads);
};

/// target <- (1 - tau) * target + tau * online, elementwise.
void polyak_update(MlpParams& target, const MlpParams& online, double tau);

}  // namespace ssar::numeric

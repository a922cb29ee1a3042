#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ssar/numeric/mlp.hpp"

namespace ssar::policy {

/// tanh actor over the normalized action box. delta is the exploration
/// noise scale that lets pi(s) be read as the mean of N(pi(s), delta^2 I).
struct DeterministicHead {
  numeric::MlpParams net;
  double delta = 0.1;

  std::size_t obs_dim() const { return net.input_dim(); }
  std::size_t act_dim() const { return net.output_dim(); }
};

DeterministicHead make_deterministic_head(std::size_t obs_dim, std::size_t act_dim,
                                          const std::vector<std::size_t>& hidden, double delta,
                                          Rng& rng);

numeric::Matrix act(const DeterministicHead& head, const numeric::Matrix& obs);

/// d n^2 delta^2 - |a - pi|^2 for a d-dimensional action. Positive inside
/// the trust region. For d = 1 this is the familiar n^2 delta^2 - (a - pi)^2;
/// the factor d is what keeps it equal to 2 delta^2 (log N(a; pi, delta) - C_n)
/// under joint displacement in higher dimensions.
double deterministic_margin(std::span<const double> pi, std::span<const double> a, double n,
                            double delta);
std::vector<double> deterministic_margin(const DeterministicHead& head, const numeric::Matrix& obs,
                                         const numeric::Matrix& actions, double n);
std::vector<double> deterministic_margin(const numeric::Matrix& pi, const numeric::Matrix& actions,
                                         double n, double delta);

}  // namespace ssar::policy

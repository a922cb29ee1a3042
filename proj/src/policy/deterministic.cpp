#include "ssar/policy/deterministic.hpp"

#include <string>

#include "ssar/error.hpp"

namespace ssar::policy {

DeterministicHead make_deterministic_head(std::size_t obs_dim, std::size_t act_dim,
                                          const std::vector<std::size_t>& hidden, double delta,
                                          Rng& rng) {
  if (!(delta > 0.0)) throw UserError("bad_delta", "exploration scale delta must be positive");
  numeric::MlpSpec spec;
  spec.input = obs_dim;
  spec.hidden = hidden;
  spec.output = act_dim;
  spec.squash.kind = numeric::SquashKind::Tanh;
  spec.final_layer_scale = 1e-2;
  return DeterministicHead{numeric::make_mlp(spec, rng), delta};
}

numeric::Matrix act(const DeterministicHead& head, const numeric::Matrix& obs) {
  return numeric::forward(head.net, obs);
}

double deterministic_margin(std::span<const double> pi, std::span<const double> a, double n,
                            double delta) {
  double dist2 = 0.0;
  for (std::size_t c = 0; c < pi.size(); ++c) dist2 += (a[c] - pi[c]) * (a[c] - pi[c]);
  return static_cast<double>(pi.size()) * n * n * delta * delta - dist2;
}

std::vector<double> deterministic_margin(const numeric::Matrix& pi, const numeric::Matrix& actions,
                                         double n, double delta) {
  if (pi.rows() != actions.rows() || pi.cols() != actions.cols())
    throw Error("dimension_mismatch", "action batch does not match policy output",
                {{"rows", std::to_string(actions.rows())}, {"cols", std::to_string(actions.cols())}});
  std::vector<double> out(pi.rows());
  for (std::size_t r = 0; r < pi.rows(); ++r) out[r] = deterministic_margin(pi.row(r), actions.row(r), n, delta);
  return out;
}

std::vector<double> deterministic_margin(const DeterministicHead& head, const numeric::Matrix& obs,
                                         const numeric::Matrix& actions, double n) {
  return deterministic_margin(act(head, obs), actions, n, head.delta);
}

}  // namespace ssar::policy

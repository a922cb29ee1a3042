#include "ssar/regularizer/coefficient.hpp"

#include <algorithm>
#include <string>

#include "ssar/error.hpp"

namespace ssar::regularizer {

CoefficientNet make_coefficient_net(std::size_t obs_dim, const std::vector<std::size_t>& hidden,
                                    double beta_init, Rng& rng) {
  if (!(beta_init > 0.0))
    throw UserError("bad_beta_init", "beta_init must be positive", {{"beta_init", std::to_string(beta_init)}});
  numeric::MlpSpec spec;
  spec.input = obs_dim;
  spec.hidden = hidden;
  spec.output = 1;
  spec.squash = {numeric::SquashKind::SigmoidScaled, 0.0, 1.5 * beta_init};
  spec.final_layer_scale = 1e-2;
  return CoefficientNet{numeric::make_mlp(spec, rng), beta_init};
}

std::vector<double> beta(const CoefficientNet& c, const Matrix& obs) {
  const Matrix out = numeric::forward(c.net, obs);
  return {out.values().begin(), out.values().end()};
}

double beta(const CoefficientNet& c, std::span<const double> s) { return numeric::mlp_forward(c.net, s)[0]; }

double beta_loss(const CoefficientNet& c, const Matrix& obs, std::span<const double> stat,
                 numeric::MlpParams* grads) {
  const std::size_t n = obs.rows();
  if (stat.size() != n)
    throw Error("dimension_mismatch", "statistic length differs from batch size",
                {{"stat", std::to_string(stat.size())}, {"batch", std::to_string(n)}});
  if (n == 0) return 0.0;
  numeric::GradTape tape;
  const Matrix b = numeric::forward(c.net, obs, tape);
  double loss = 0.0;
  Matrix d(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    loss += stat[i] * b(i, 0);
    d(i, 0) = stat[i] / static_cast<double>(n);
  }
  if (grads) numeric::backward(c.net, tape, d, grads, nullptr);
  return loss / static_cast<double>(n);
}

std::vector<double> stochastic_statistic(const policy::GaussianHead& head, const data::Batch& b, double n) {
  const policy::Distribution dist = policy::distribution(head, b.obs);
  auto stat = policy::log_prob(head, dist, b.actions);
  const auto cn = policy::threshold_cn(head, dist, n);
  for (std::size_t i = 0; i < stat.size(); ++i) stat[i] -= cn[i];
  return stat;
}

std::vector<double> deterministic_statistic(const policy::DeterministicHead& head, const data::Batch& b,
                                            double n) {
  return policy::deterministic_margin(head, b.obs, b.actions, n);
}

double beta_loss_stochastic(const CoefficientNet& c, const data::Batch& b, const policy::GaussianHead& head,
                            double n, numeric::MlpParams* grads) {
  return beta_loss(c, b.obs, stochastic_statistic(head, b, n), grads);
}

double beta_loss_deterministic(const CoefficientNet& c, const data::Batch& b,
                               const policy::DeterministicHead& head, double n, numeric::MlpParams* grads) {
  return beta_loss(c, b.obs, deterministic_statistic(head, b, n), grads);
}

BetaSummary summarize(std::span<const double> betas) {
  BetaSummary s;
  if (betas.empty()) return s;
  auto [lo, hi] = std::minmax_element(betas.begin(), betas.end());
  s.min = *lo;
  s.max = *hi;
  for (double v : betas) s.mean += v;
  s.mean /= static_cast<double>(betas.size());
  return s;
}

}  // namespace ssar::regularizer

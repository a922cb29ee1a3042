#include "ssar/policy/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssar/error.hpp"

namespace ssar::policy {
namespace {

Distribution split(const GaussianHead& head, const Matrix& out) {
  Distribution d;
  d.mu = numeric::columns(out, 0, head.act_dim);
  d.raw_log_std = numeric::columns(out, head.act_dim, head.act_dim);
  d.log_std = d.raw_log_std;
  for (double& v : d.log_std.values()) v = std::clamp(v, kLogStdMin, kLogStdMax);
  return d;
}

void check_obs(const GaussianHead& head, const Matrix& obs) {
  if (obs.cols() != head.obs_dim())
    throw Error("dimension_mismatch", "observation width does not match the policy input",
                {{"expected", std::to_string(head.obs_dim())}, {"actual", std::to_string(obs.cols())}});
}

// log pi of one action given one row of distribution parameters.
double row_log_prob(bool squashed, std::span<const double> mu, std::span<const double> log_std,
                    std::span<const double> a) {
  double lp = 0.0;
  for (std::size_t c = 0; c < mu.size(); ++c) {
    double x = a[c];
    double jac = 0.0;
    if (squashed) {
      x = std::clamp(x, -1.0 + kAtanhEps, 1.0 - kAtanhEps);
      jac = std::log(1.0 - x * x + kJacobianEps);
      x = std::atanh(x);
    }
    const double z = (x - mu[c]) * std::exp(-log_std[c]);
    lp += -0.5 * z * z - log_std[c] - kHalfLogTwoPi - jac;
  }
  return lp;
}

}  // namespace

GaussianHead make_gaussian_head(std::size_t obs_dim, std::size_t act_dim,
                                const std::vector<std::size_t>& hidden, bool squashed, Rng& rng) {
  if (obs_dim == 0 || act_dim == 0)
    throw UserError("bad_dimensions", "policy needs positive observation and action widths");
  numeric::MlpSpec spec;
  spec.input = obs_dim;
  spec.hidden = hidden;
  spec.output = 2 * act_dim;
  spec.final_layer_scale = 1e-2;
  return GaussianHead{numeric::make_mlp(spec, rng), act_dim, squashed};
}

Distribution distribution(const GaussianHead& head, const Matrix& obs) {
  check_obs(head, obs);
  return split(head, numeric::forward(head.net, obs));
}

Distribution distribution(const GaussianHead& head, const Matrix& obs, numeric::GradTape& tape) {
  check_obs(head, obs);
  return split(head, numeric::forward(head.net, obs, tape));
}

double gaussian_log_density(std::span<const double> mu, std::span<const double> log_std,
                            std::span<const double> x) {
  return row_log_prob(false, mu, log_std, x);
}

std::vector<double> log_prob(const GaussianHead& head, const Distribution& dist, const Matrix& actions) {
  if (actions.rows() != dist.mu.rows() || actions.cols() != head.act_dim)
    throw Error("dimension_mismatch", "action batch does not match the policy",
                {{"rows", std::to_string(actions.rows())}, {"cols", std::to_string(actions.cols())}});
  std::vector<double> out(actions.rows());
  for (std::size_t r = 0; r < actions.rows(); ++r)
    out[r] = row_log_prob(head.squashed, dist.mu.row(r), dist.log_std.row(r), actions.row(r));
  return out;
}

std::vector<double> log_prob(const GaussianHead& head, const Matrix& obs, const Matrix& actions) {
  return log_prob(head, distribution(head, obs), actions);
}

double log_prob(const GaussianHead& head, std::span<const double> s, std::span<const double> a) {
  Matrix obs(1, s.size());
  std::copy(s.begin(), s.end(), obs.data());
  Matrix act(1, a.size());
  std::copy(a.begin(), a.end(), act.data());
  return log_prob(head, obs, act)[0];
}

std::vector<double> threshold_cn(const GaussianHead& head, const Distribution& dist, double n) {
  if (!(n >= 0.0)) throw Error("bad_n", "trust-region width n must be non-negative");
  const std::size_t d = head.act_dim;
  std::vector<double> out(dist.mu.rows());
  std::vector<double> up(d), down(d);
  for (std::size_t r = 0; r < dist.mu.rows(); ++r) {
    const auto mu = dist.mu.row(r);
    const auto ls = dist.log_std.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      const double step = n * std::exp(ls[c]);
      up[c] = mu[c] + step;
      down[c] = mu[c] - step;
      if (head.squashed) {
        up[c] = std::tanh(up[c]);
        down[c] = std::tanh(down[c]);
      }
    }
    out[r] = std::min(row_log_prob(head.squashed, mu, ls, up), row_log_prob(head.squashed, mu, ls, down));
  }
  return out;
}

std::vector<double> threshold_cn(const GaussianHead& head, const Matrix& obs, double n) {
  return threshold_cn(head, distribution(head, obs), n);
}

Sample sample(const GaussianHead& head, const Matrix& obs, Rng& rng) {
  Sample s;
  s.dist = distribution(head, obs, s.tape);
  const std::size_t rows = obs.rows(), d = head.act_dim;
  s.z.resize(rows, d);
  s.pre_squash.resize(rows, d);
  s.actions.resize(rows, d);
  s.log_prob.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double lp = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double z = standard_normal(rng);
      const double ls = s.dist.log_std(r, c);
      const double u = s.dist.mu(r, c) + std::exp(ls) * z;
      s.z(r, c) = z;
      s.pre_squash(r, c) = u;
      lp += -0.5 * z * z - ls - kHalfLogTwoPi;
      if (head.squashed) {
        // Far tails round tanh to exactly +-1; keep samples strictly inside.
        const double a = std::clamp(std::tanh(u), -1.0 + kAtanhEps, 1.0 - kAtanhEps);
        s.actions(r, c) = a;
        lp -= std::log(1.0 - a * a + kJacobianEps);
      } else {
        s.actions(r, c) = u;
      }
    }
    s.log_prob[r] = lp;
  }
  return s;
}

Sample sample(const GaussianHead& head, const Matrix& obs, std::uint64_t seed) {
  Rng rng(seed);
  return sample(head, obs, rng);
}

void sample_backward(const GaussianHead& head, const Sample& s, const Matrix& d_actions,
                     std::span<const double> d_log_prob, numeric::MlpParams& grads) {
  const std::size_t rows = s.actions.rows(), d = head.act_dim;
  Matrix d_out(rows, 2 * d);
  for (std::size_t r = 0; r < rows; ++r) {
    const double dlp = d_log_prob.empty() ? 0.0 : d_log_prob[r];
    for (std::size_t c = 0; c < d; ++c) {
      const double da = d_actions.empty() ? 0.0 : d_actions(r, c);
      double du = da;
      if (head.squashed) {
        const double a = s.actions(r, c);
        const double one_minus = 1.0 - a * a;
        const bool saturated = std::abs(std::tanh(s.pre_squash(r, c))) > 1.0 - kAtanhEps;
        // d/du of -log(1 - tanh(u)^2 + eps); the clamp is flat beyond saturation
        du = saturated ? 0.0 : da * one_minus + dlp * 2.0 * a * one_minus / (one_minus + kJacobianEps);
      }
      const double ls = s.dist.log_std(r, c);
      d_out(r, c) = du;
      const double raw = s.dist.raw_log_std(r, c);
      const bool inside = raw >= kLogStdMin && raw <= kLogStdMax;
      d_out(r, d + c) = inside ? du * std::exp(ls) * s.z(r, c) - dlp : 0.0;
    }
  }
  numeric::backward(head.net, s.tape, d_out, &grads, nullptr);
}

Matrix mean_action(const GaussianHead& head, const Matrix& obs) {
  Matrix mu = distribution(head, obs).mu;
  if (head.squashed)
    for (double& v : mu.values()) v = std::tanh(v);
  return mu;
}

}  // namespace ssar::policy

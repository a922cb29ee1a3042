#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssar/numeric/mlp.hpp"

namespace ssar::policy {

using numeric::Matrix;

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
/// Actions are pulled to (-1 + eps, 1 - eps) before atanh.
inline constexpr double kAtanhEps = 1e-6;
/// Added inside log(1 - a^2 + eps) of the tanh Jacobian.
inline constexpr double kJacobianEps = 1e-6;
inline constexpr double kHalfLogTwoPi = 0.91893853320467274178;

/// Diagonal Gaussian policy. The trunk emits [mu | raw log sigma]; raw log
/// sigma is clamped to [kLogStdMin, kLogStdMax]. Actions live in the
/// normalized box [-1, 1]^act_dim; the squashed head maps through tanh.
struct GaussianHead {
  numeric::MlpParams net;
  std::size_t act_dim = 0;
  bool squashed = true;

  std::size_t obs_dim() const { return net.input_dim(); }
};

GaussianHead make_gaussian_head(std::size_t obs_dim, std::size_t act_dim,
                                const std::vector<std::size_t>& hidden, bool squashed, Rng& rng);

/// Per-state distribution parameters for a batch.
struct Distribution {
  Matrix mu;
  Matrix log_std;  // clamped
  Matrix raw_log_std;
};

Distribution distribution(const GaussianHead& head, const Matrix& obs);
Distribution distribution(const GaussianHead& head, const Matrix& obs, numeric::GradTape& tape);

/// log N(x; mu, exp(log_std)^2 I), summed over coordinates.
double gaussian_log_density(std::span<const double> mu, std::span<const double> log_std,
                            std::span<const double> x);

/// log pi(a|s) of given actions. Squashed heads clamp a into the open box,
/// invert tanh, and subtract sum log(1 - a^2 + eps).
std::vector<double> log_prob(const GaussianHead& head, const Distribution& dist, const Matrix& actions);
std::vector<double> log_prob(const GaussianHead& head, const Matrix& obs, const Matrix& actions);
double log_prob(const GaussianHead& head, std::span<const double> s, std::span<const double> a);

/// C_n(s) = min of log pi at the two joint displacements mu +- n sigma
/// (pushed through tanh for squashed heads).
std::vector<double> threshold_cn(const GaussianHead& head, const Distribution& dist, double n);
std::vector<double> threshold_cn(const GaussianHead& head, const Matrix& obs, double n);

/// Reparameterized draw a = squash(mu + sigma z). Keeps what the reverse
/// pass needs.
struct Sample {
  Distribution dist;
  numeric::GradTape tape;
  Matrix z;
  Matrix pre_squash;
  Matrix actions;
  std::vector<double> log_prob;
};

Sample sample(const GaussianHead& head, const Matrix& obs, Rng& rng);
Sample sample(const GaussianHead& head, const Matrix& obs, std::uint64_t seed);

/// Accumulates into `grads` the gradient of a loss whose partials with
/// respect to the sampled actions and their log-probabilities are given,
/// with z held fixed.
void sample_backward(const GaussianHead& head, const Sample& s, const Matrix& d_actions,
                     std::span<const double> d_log_prob, numeric::MlpParams& grads);

/// Deterministic evaluation action squash(mu).
Matrix mean_action(const GaussianHead& head, const Matrix& obs);

}  // namespace ssar::policy

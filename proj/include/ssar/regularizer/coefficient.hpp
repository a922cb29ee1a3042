#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssar/data/batch.hpp"
#include "ssar/numeric/mlp.hpp"
#include "ssar/policy/deterministic.hpp"
#include "ssar/policy/gaussian.hpp"
#include "ssar/policy/trust_region.hpp"

namespace ssar::regularizer {

using numeric::Matrix;

inline constexpr double kBetaInitCql = 5.0;
inline constexpr double kBetaInitTd3 = 2.5;

/// beta_phi(s) = 1.5 beta_init sigmoid(raw(s)), so beta lies in (0, 1.5 beta_init).
struct CoefficientNet {
  numeric::MlpParams net;
  double beta_init = kBetaInitCql;

  double upper() const { return 1.5 * beta_init; }
};

CoefficientNet make_coefficient_net(std::size_t obs_dim, const std::vector<std::size_t>& hidden,
                                    double beta_init, Rng& rng);

std::vector<double> beta(const CoefficientNet& c, const Matrix& obs);
double beta(const CoefficientNet& c, std::span<const double> s);

/// mean_i stat_i * beta(s_i), with stat held constant. Gradient (if
/// requested) is accumulated into `grads` and touches phi only.
double beta_loss(const CoefficientNet& c, const Matrix& obs, std::span<const double> stat,
                 numeric::MlpParams* grads);

/// log pi(a|s) - C_n(s) per row (constants for the coefficient update).
std::vector<double> stochastic_statistic(const policy::GaussianHead& head, const data::Batch& b, double n);
/// The deterministic margin per row.
std::vector<double> deterministic_statistic(const policy::DeterministicHead& head, const data::Batch& b,
                                            double n);

/// Coefficient losses on a batch drawn from the sub-dataset. Policy enters
/// by const reference: nothing flows back into it.
double beta_loss_stochastic(const CoefficientNet& c, const data::Batch& b, const policy::GaussianHead& head,
                            double n, numeric::MlpParams* grads);
double beta_loss_deterministic(const CoefficientNet& c, const data::Batch& b,
                               const policy::DeterministicHead& head, double n, numeric::MlpParams* grads);

struct BetaSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};
BetaSummary summarize(std::span<const double> betas);

}  // namespace ssar::regularizer

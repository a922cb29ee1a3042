#pragma once

#include <cstddef>
#include <vector>

#include "ssar/numeric/mlp.hpp"

namespace ssar::value {

using numeric::Matrix;
using numeric::MlpParams;

/// Twin Q-networks over [s, a] with LayerNorm on every hidden layer, plus
/// target copies that move only through soft_update().
struct CriticPair {
  MlpParams q1, q2;
  MlpParams target1, target2;
  double tau_polyak = 0.005;
};

CriticPair make_critic_pair(std::size_t obs_dim, std::size_t act_dim, const std::vector<std::size_t>& hidden,
                            Rng& rng, double tau_polyak = 0.005);

/// Q(s, a) for each row.
std::vector<double> q_value(const MlpParams& q, const Matrix& obs, const Matrix& actions);

/// Elementwise min of the two target critics.
std::vector<double> min_target_q(const CriticPair& c, const Matrix& obs, const Matrix& actions);
std::vector<double> min_q(const CriticPair& c, const Matrix& obs, const Matrix& actions);

void soft_update(CriticPair& c);

/// True when every hidden layer is LayerNorm-ed and targets mirror the online shapes.
bool well_formed(const CriticPair& c);

}  // namespace ssar::value

#include "ssar/value/critic.hpp"

#include <algorithm>

#include "ssar/numeric/optim.hpp"

namespace ssar::value {

CriticPair make_critic_pair(std::size_t obs_dim, std::size_t act_dim, const std::vector<std::size_t>& hidden,
                            Rng& rng, double tau_polyak) {
  numeric::MlpSpec spec;
  spec.input = obs_dim + act_dim;
  spec.hidden = hidden;
  spec.output = 1;
  spec.hidden_norm = numeric::Norm::LayerNorm;
  CriticPair c;
  c.q1 = numeric::make_mlp(spec, rng);
  c.q2 = numeric::make_mlp(spec, rng);
  c.target1 = c.q1;
  c.target2 = c.q2;
  c.tau_polyak = tau_polyak;
  return c;
}

std::vector<double> q_value(const MlpParams& q, const Matrix& obs, const Matrix& actions) {
  const Matrix out = numeric::forward(q, numeric::hconcat(obs, actions));
  return {out.values().begin(), out.values().end()};
}

namespace {
std::vector<double> pair_min(const MlpParams& a, const MlpParams& b, const Matrix& obs, const Matrix& actions) {
  const Matrix x = numeric::hconcat(obs, actions);
  const Matrix qa = numeric::forward(a, x), qb = numeric::forward(b, x);
  std::vector<double> out(qa.rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = std::min(qa(r, 0), qb(r, 0));
  return out;
}
}  // namespace

std::vector<double> min_target_q(const CriticPair& c, const Matrix& obs, const Matrix& actions) {
  return pair_min(c.target1, c.target2, obs, actions);
}

std::vector<double> min_q(const CriticPair& c, const Matrix& obs, const Matrix& actions) {
  return pair_min(c.q1, c.q2, obs, actions);
}

void soft_update(CriticPair& c) {
  numeric::polyak_update(c.target1, c.q1, c.tau_polyak);
  numeric::polyak_update(c.target2, c.q2, c.tau_polyak);
}

bool well_formed(const CriticPair& c) {
  for (const MlpParams* q : {&c.q1, &c.q2}) {
    if (q->layers.empty()) return false;
    for (std::size_t l = 0; l + 1 < q->layers.size(); ++l)
      if (q->layers[l].norm != numeric::Norm::LayerNorm) return false;
  }
  return numeric::same_shape(c.q1, c.target1) && numeric::same_shape(c.q2, c.target2) &&
         numeric::same_shape(c.q1, c.q2);
}

}  // namespace ssar::value

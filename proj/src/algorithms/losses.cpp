#include "ssar/algorithms/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ssar/error.hpp"

namespace ssar::algorithms {

CriticGrads zero_critic_grads(const value::CriticPair& c) {
  return {numeric::zeros_like(c.q1), numeric::zeros_like(c.q2)};
}

namespace {

// Rows of each matrix stacked top to bottom; all share a column count.
Matrix vstack(std::initializer_list<const Matrix*> parts) {
  std::size_t rows = 0, cols = 0;
  for (const Matrix* m : parts) {
    rows += m->rows();
    if (m->rows()) cols = m->cols();
  }
  Matrix out(rows, cols);
  double* dst = out.data();
  for (const Matrix* m : parts) dst = std::copy_n(m->data(), m->size(), dst);
  return out;
}

Matrix repeat_rows(const Matrix& m, std::span<const std::size_t> rows, std::size_t times) {
  Matrix out(rows.size() * times, m.cols());
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t t = 0; t < times; ++t) std::copy_n(m.row(rows[j]).data(), m.cols(), out.row(j * times + t).data());
  return out;
}

void check_target(const data::Batch& b, std::span<const double> target) {
  if (target.size() != b.size())
    throw Error("dimension_mismatch", "target length differs from batch size",
                {{"target", std::to_string(target.size())}, {"batch", std::to_string(b.size())}});
}

// d loss / d action columns of a critic input gradient.
void add_action_columns(const Matrix& d_input, std::size_t obs_dim, Matrix& d_actions) {
  for (std::size_t r = 0; r < d_actions.rows(); ++r)
    for (std::size_t c = 0; c < d_actions.cols(); ++c) d_actions(r, c) += d_input(r, obs_dim + c);
}

}  // namespace

Matrix td3_target_noise(Rng& rng, std::size_t rows, std::size_t cols, double sigma, double clip) {
  Matrix n(rows, cols);
  for (double& v : n.values()) v = std::clamp(sigma * standard_normal(rng), -clip, clip);
  return n;
}

std::vector<double> td3_target(const value::CriticPair& c, const policy::DeterministicHead& actor_target,
                               const data::Batch& b, double gamma, const Matrix& noise) {
  Matrix a = policy::act(actor_target, b.next_obs);
  if (noise.rows() != a.rows() || noise.cols() != a.cols())
    throw Error("dimension_mismatch", "target noise shape differs from action batch");
  for (std::size_t i = 0; i < a.size(); ++i) a.values()[i] = std::clamp(a.values()[i] + noise.values()[i], -1.0, 1.0);
  const auto q = value::min_target_q(c, b.next_obs, a);
  std::vector<double> y(b.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = b.rewards[i] + gamma * b.not_done[i] * q[i];
  return y;
}

double td3_critic_loss(const value::CriticPair& c, const data::Batch& b, std::span<const double> target,
                       CriticGrads* grads) {
  check_target(b, target);
  const std::size_t n = b.size();
  if (n == 0) return 0.0;
  const Matrix x = numeric::hconcat(b.obs, b.actions);
  double loss = 0.0;
  for (int k = 0; k < 2; ++k) {
    const MlpParams& q = k == 0 ? c.q1 : c.q2;
    numeric::GradTape tape;
    const Matrix out = numeric::forward(q, x, tape);
    Matrix d(n, 1);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = out(i, 0) - target[i];
      sq += e * e;
      d(i, 0) = e / static_cast<double>(n);
    }
    loss += 0.5 * sq / static_cast<double>(n);
    if (grads) numeric::backward(q, tape, d, k == 0 ? &grads->q1 : &grads->q2, nullptr);
  }
  return loss;
}

double td3bc_actor_loss(const policy::DeterministicHead& actor, const value::CriticPair& c,
                        const data::Batch& b, std::span<const double> beta, MlpParams* grads, Td3bcTerms* terms) {
  const std::size_t n = b.size();
  if (beta.size() != n)
    throw Error("dimension_mismatch", "beta length differs from batch size",
                {{"beta", std::to_string(beta.size())}, {"batch", std::to_string(n)}});
  if (n == 0) return 0.0;
  const double nd = static_cast<double>(n);

  const auto q_data = value::q_value(c.q1, b.obs, b.actions);
  double abs_mean = 0.0;
  for (double v : q_data) abs_mean += std::abs(v);
  abs_mean /= nd;
  const double q_scale = 1.0 / std::max(abs_mean, 1e-8);

  numeric::GradTape tape_pi;
  const Matrix pi = numeric::forward(actor.net, b.obs, tape_pi);
  numeric::GradTape tape_q;
  const Matrix q_pi = numeric::forward(c.q1, numeric::hconcat(b.obs, pi), tape_q);

  double q_term = 0.0, bc_term = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    q_term -= q_scale * q_pi(i, 0) / nd;
    if (!b.in_subset[i]) continue;
    double d2 = 0.0;
    for (std::size_t j = 0; j < pi.cols(); ++j) {
      const double e = pi(i, j) - b.actions(i, j);
      d2 += e * e;
    }
    bc_term += beta[i] * d2 / nd;
  }

  if (grads) {
    Matrix dq(n, 1, -q_scale / nd);
    Matrix dx;
    numeric::backward(c.q1, tape_q, dq, nullptr, &dx);
    Matrix d_pi(n, pi.cols());
    add_action_columns(dx, b.obs.cols(), d_pi);
    for (std::size_t i = 0; i < n; ++i) {
      if (!b.in_subset[i]) continue;
      for (std::size_t j = 0; j < pi.cols(); ++j) d_pi(i, j) += 2.0 * beta[i] * (pi(i, j) - b.actions(i, j)) / nd;
    }
    numeric::backward(actor.net, tape_pi, d_pi, grads, nullptr);
  }
  if (terms) *terms = {q_scale, q_term, bc_term};
  return q_term + bc_term;
}

double sampled_logsumexp(std::span<const double> v) {
  if (v.empty()) throw Error("empty_samples", "log-sum-exp needs at least one sample");
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s) - std::log(static_cast<double>(v.size()));
}

CqlSamples draw_cql_samples(const policy::GaussianHead& actor, const data::Batch& b, std::size_t per_state,
                            Rng& rng, std::size_t max_states) {
  CqlSamples s;
  s.per_state = per_state;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.in_subset[i]) s.rows.push_back(i);
  if (max_states > 0 && s.rows.size() > max_states) {
    // partial Fisher-Yates, then restore batch order
    for (std::size_t k = 0; k < max_states; ++k) {
      const std::size_t j = std::uniform_int_distribution<std::size_t>(k, s.rows.size() - 1)(rng);
      std::swap(s.rows[k], s.rows[j]);
    }
    s.rows.resize(max_states);
    std::sort(s.rows.begin(), s.rows.end());
  }
  s.obs = repeat_rows(b.obs, s.rows, per_state);
  const Matrix next_obs = repeat_rows(b.next_obs, s.rows, per_state);
  s.uniform.resize(s.obs.rows(), actor.act_dim);
  for (double& v : s.uniform.values()) v = uniform(rng, -1.0, 1.0);
  if (s.rows.empty()) {
    s.current.resize(0, actor.act_dim);
    s.next.resize(0, actor.act_dim);
    return s;
  }
  policy::Sample cur = policy::sample(actor, s.obs, rng);
  s.current = std::move(cur.actions);
  s.current_logp = std::move(cur.log_prob);
  policy::Sample nxt = policy::sample(actor, next_obs, rng);
  s.next = std::move(nxt.actions);
  s.next_logp = std::move(nxt.log_prob);
  return s;
}

std::vector<double> cql_target(const value::CriticPair& c, const policy::GaussianHead& actor,
                               const data::Batch& b, double gamma, Rng& rng) {
  const policy::Sample next = policy::sample(actor, b.next_obs, rng);
  const auto q = value::min_target_q(c, b.next_obs, next.actions);
  std::vector<double> y(b.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = b.rewards[i] + gamma * b.not_done[i] * q[i];
  return y;
}

double cql_critic_loss(const value::CriticPair& c, const data::Batch& b, std::span<const double> target,
                       std::span<const double> beta, const CqlSamples& s, CriticGrads* grads, CqlTerms* terms) {
  check_target(b, target);
  const std::size_t n = b.size();
  if (beta.size() != n)
    throw Error("dimension_mismatch", "beta length differs from batch size",
                {{"beta", std::to_string(beta.size())}, {"batch", std::to_string(n)}});
  if (n == 0) return 0.0;
  const std::size_t R = s.rows.size(), N = s.per_state, RN = R * N;
  const double act_dim = static_cast<double>(b.actions.cols());
  const double log_uniform_density = -act_dim * std::numbers::ln2;

  const Matrix x_data = numeric::hconcat(b.obs, b.actions);
  Matrix x_unif, x_cur, x_next;
  if (R) {
    x_unif = numeric::hconcat(s.obs, s.uniform);
    x_cur = numeric::hconcat(s.obs, s.current);
    x_next = numeric::hconcat(s.obs, s.next);
  }
  const Matrix x = vstack({&x_data, &x_unif, &x_cur, &x_next});

  CqlTerms t;
  double loss = 0.0;
  std::vector<double> v(3 * N);
  for (int k = 0; k < 2; ++k) {
    const MlpParams& q = k == 0 ? c.q1 : c.q2;
    numeric::GradTape tape;
    const Matrix out = numeric::forward(q, x, tape);
    Matrix d(out.rows(), 1);

    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = out(i, 0) - target[i];
      sq += e * e;
      d(i, 0) = e / static_cast<double>(n);
    }
    const double bellman = 0.5 * sq / static_cast<double>(n);

    double penalty = 0.0, lse_sum = 0.0;
    for (std::size_t j = 0; j < R; ++j) {
      const std::size_t i = s.rows[j];
      for (std::size_t m = 0; m < N; ++m) {
        v[m] = out(n + j * N + m, 0) - log_uniform_density;
        v[N + m] = out(n + RN + j * N + m, 0) - s.current_logp[j * N + m];
        v[2 * N + m] = out(n + 2 * RN + j * N + m, 0) - s.next_logp[j * N + m];
      }
      const double lse = sampled_logsumexp(v);
      lse_sum += lse;
      const double w = beta[i] / static_cast<double>(R);
      penalty += w * (lse - out(i, 0));
      d(i, 0) -= w;
      // d lse / d v_j = softmax(v)_j; the +log K shift does not move it
      for (std::size_t g = 0; g < 3; ++g)
        for (std::size_t m = 0; m < N; ++m)
          d(n + g * RN + j * N + m, 0) += w * std::exp(v[g * N + m] - lse - std::log(static_cast<double>(3 * N)));
    }
    t.bellman += bellman;
    t.penalty += penalty;
    if (k == 0 && R) t.logsumexp = lse_sum / static_cast<double>(R);
    loss += bellman + penalty;
    if (grads) numeric::backward(q, tape, d, k == 0 ? &grads->q1 : &grads->q2, nullptr);
  }
  if (terms) *terms = t;
  return loss;
}

double cql_actor_loss(const policy::GaussianHead& actor, const value::CriticPair& c, const data::Batch& b,
                      double alpha, bool bc, std::uint64_t seed, MlpParams* grads, CqlActorTerms* terms) {
  const std::size_t n = b.size();
  if (n == 0) return 0.0;
  const double nd = static_cast<double>(n);
  const policy::Sample s = policy::sample(actor, b.obs, seed);
  const Matrix x = numeric::hconcat(b.obs, s.actions);
  numeric::GradTape t1, t2;
  const Matrix q1 = numeric::forward(c.q1, x, t1);
  const Matrix q2 = numeric::forward(c.q2, x, t2);

  CqlActorTerms t;
  Matrix d1(n, 1), d2(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    t.mean_log_prob += s.log_prob[i] / nd;
    if (q1(i, 0) <= q2(i, 0)) {
      t.q_term -= q1(i, 0) / nd;
      d1(i, 0) = -1.0 / nd;
    } else {
      t.q_term -= q2(i, 0) / nd;
      d2(i, 0) = -1.0 / nd;
    }
    if (bc) {
      for (std::size_t j = 0; j < actor.act_dim; ++j) {
        const double e = s.actions(i, j) - b.actions(i, j);
        t.bc_term += 0.5 * e * e / nd;
      }
    }
  }
  const double loss = alpha * t.mean_log_prob + t.q_term + t.bc_term;

  if (grads) {
    Matrix d_actions(n, actor.act_dim);
    Matrix dx;
    numeric::backward(c.q1, t1, d1, nullptr, &dx);
    add_action_columns(dx, b.obs.cols(), d_actions);
    numeric::backward(c.q2, t2, d2, nullptr, &dx);
    add_action_columns(dx, b.obs.cols(), d_actions);
    if (bc)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < actor.act_dim; ++j) d_actions(i, j) += (s.actions(i, j) - b.actions(i, j)) / nd;
    const std::vector<double> d_logp(n, alpha / nd);
    policy::sample_backward(actor, s, d_actions, d_logp, *grads);
  }
  if (terms) *terms = t;
  return loss;
}

double alpha_loss(double log_alpha, double mean_log_prob, double target_entropy, double* grad) {
  const double gap = mean_log_prob + target_entropy;
  if (grad) *grad = -gap;
  return -log_alpha * gap;
}

}  // namespace ssar::algorithms

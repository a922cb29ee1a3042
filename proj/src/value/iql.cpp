#include "ssar/value/iql.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssar/error.hpp"

namespace ssar::value {

using numeric::Matrix;

double expectile_loss(double u, double tau) {
  const double w = u < 0.0 ? 1.0 - tau : tau;
  return w * u * u;
}

double scalar_expectile(std::span<const double> samples, double tau) {
  if (samples.empty()) throw Error("empty_samples", "scalar_expectile needs at least one sample");
  if (!(tau > 0.0 && tau < 1.0)) throw Error("bad_tau", "expectile tau must lie in (0, 1)");
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *lo_it, hi = *hi_it;
  // Sign of f(c) - f(d), summed per sample in the factored form when both
  // points fall on the same side of the sample, so the comparison stays
  // exact near the flat bottom of the objective.
  auto compare = [&](double c, double d) {
    double diff = 0.0;
    for (double x : samples) {
      const double wc = x - c < 0.0 ? 1.0 - tau : tau;
      const double wd = x - d < 0.0 ? 1.0 - tau : tau;
      diff += wc == wd ? wc * (d - c) * (2.0 * x - c - d) : wc * (x - c) * (x - c) - wd * (x - d) * (x - d);
    }
    return diff;
  };
  for (int it = 0; it < 400 && hi > lo; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (m1 == lo || m2 == hi || m1 >= m2) break;
    if (compare(m1, m2) < 0.0)
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

void IqlConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw UserError("bad_tau", "expectile tau must lie in (0, 1)", {{"tau", std::to_string(tau)}});
  if (!(gamma >= 0.0 && gamma < 1.0)) throw UserError("bad_gamma", "gamma must lie in [0, 1)");
  if (batch_size == 0) throw UserError("bad_batch_size", "batch size must be positive");
  if (!(lr > 0.0)) throw UserError("bad_lr", "learning rate must be positive");
}

IqlPair make_iql_pair(std::size_t obs_dim, std::size_t act_dim, const IqlConfig& cfg, Rng& rng) {
  numeric::MlpSpec q;
  q.input = obs_dim + act_dim;
  q.hidden = cfg.hidden;
  q.output = 1;
  numeric::MlpSpec v = q;
  v.input = obs_dim;
  IqlPair p;
  p.q = numeric::make_mlp(q, rng);
  p.v = numeric::make_mlp(v, rng);
  p.tau = cfg.tau;
  return p;
}

IqlTrainer make_iql_trainer(IqlPair pair, const IqlConfig& cfg) {
  numeric::AdamConfig adam;
  adam.lr = cfg.lr;
  IqlTrainer t;
  t.q_opt = numeric::make_adam(pair.q, adam);
  t.v_opt = numeric::make_adam(pair.v, adam);
  t.pair = std::move(pair);
  t.gamma = cfg.gamma;
  return t;
}

double iql_v_loss(const IqlPair& p, const data::Batch& b, numeric::MlpParams* grads) {
  const std::size_t n = b.size();
  const Matrix q = numeric::forward(p.q, numeric::hconcat(b.obs, b.actions));
  numeric::GradTape tape;
  const Matrix v = numeric::forward(p.v, b.obs, tape);
  Matrix d(n, 1);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = q(i, 0) - v(i, 0);
    const double w = u < 0.0 ? 1.0 - p.tau : p.tau;
    loss += w * u * u;
    d(i, 0) = -2.0 * w * u / static_cast<double>(n);
  }
  if (grads) numeric::backward(p.v, tape, d, grads, nullptr);
  return loss / static_cast<double>(n);
}

double iql_q_loss(const IqlPair& p, const data::Batch& b, double gamma, numeric::MlpParams* grads) {
  const std::size_t n = b.size();
  const Matrix v_next = numeric::forward(p.v, b.next_obs);
  numeric::GradTape tape;
  const Matrix q = numeric::forward(p.q, numeric::hconcat(b.obs, b.actions), tape);
  Matrix d(n, 1);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = b.rewards[i] + gamma * b.not_done[i] * v_next(i, 0);
    const double err = q(i, 0) - target;
    loss += err * err;
    d(i, 0) = 2.0 * err / static_cast<double>(n);
  }
  if (grads) numeric::backward(p.q, tape, d, grads, nullptr);
  return loss / static_cast<double>(n);
}

double iql_v_step(IqlTrainer& t, const data::Batch& b) {
  auto grads = numeric::zeros_like(t.pair.v);
  const double loss = iql_v_loss(t.pair, b, &grads);
  numeric::adam_step(t.v_opt, t.pair.v, grads);
  return loss;
}

double iql_q_step(IqlTrainer& t, const data::Batch& b) {
  auto grads = numeric::zeros_like(t.pair.q);
  const double loss = iql_q_loss(t.pair, b, t.gamma, &grads);
  numeric::adam_step(t.q_opt, t.pair.q, grads);
  ++t.steps;
  return loss;
}

IqlPair iql_pretrain(const data::Dataset& d, const IqlConfig& cfg, IqlReport* report) {
  cfg.validate();
  if (d.size() == 0) throw UserError("empty_dataset", "cannot pretrain on an empty dataset");
  Rng rng(mix_seed(cfg.seed, 0x1a1));
  IqlTrainer t = make_iql_trainer(make_iql_pair(d.obs_dim, d.act_dim, cfg, rng), cfg);

  double max_r = 0.0;
  for (double r : d.rewards) max_r = std::max(max_r, std::abs(r));
  const double bound = 10.0 * std::max(max_r, 1.0) / (1.0 - cfg.gamma);

  std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
  std::vector<std::size_t> idx(cfg.batch_size);
  IqlReport rep;
  for (std::uint64_t step = 0; step < cfg.steps; ++step) {
    for (auto& i : idx) i = pick(rng);
    const data::Batch b = data::gather(d, idx);
    if (cfg.cosine_lr) {
      const double lr = 0.5 * cfg.lr * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(cfg.steps)));
      t.q_opt.config.lr = lr;
      t.v_opt.config.lr = lr;
    }
    rep.final_v_loss = iql_v_step(t, b);
    rep.final_q_loss = iql_q_step(t, b);
    if (step % 1000 == 0 || step + 1 == cfg.steps) {
      const Matrix v = numeric::forward(t.pair.v, b.obs);
      double mean = 0.0;
      for (double x : v.values()) mean += x;
      mean /= static_cast<double>(v.rows());
      if (!std::isfinite(mean) || std::abs(mean) > bound)
        throw Error("divergence", "IQL value estimate left the achievable return range",
                    {{"step", std::to_string(step)}, {"mean_v", std::to_string(mean)},
                     {"bound", std::to_string(bound)}});
    }
  }
  rep.policy_calls = t.policy_calls;
  if (report) *report = rep;
  return t.pair;
}

data::SubDatasetMask advantage_mask(const data::Dataset& d, const IqlPair& iql) {
  const data::Batch all = data::gather_all(d);
  const Matrix q = numeric::forward(iql.q, numeric::hconcat(all.obs, all.actions));
  const Matrix v = numeric::forward(iql.v, all.obs);
  return data::select_by_advantage(d, q.values(), v.values(), iql.tau);
}

}  // namespace ssar::value

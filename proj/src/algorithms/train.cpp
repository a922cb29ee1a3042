#include "ssar/algorithms/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssar/algorithms/losses.hpp"
#include "ssar/algorithms/replay.hpp"
#include "ssar/envs/behavior.hpp"
#include "ssar/error.hpp"

namespace ssar::algorithms {

namespace {

// Seed streams derived from config.seed.
constexpr std::uint64_t kActorStream = 1;
constexpr std::uint64_t kCriticStream = 2;
constexpr std::uint64_t kCoefStream = 3;
constexpr std::uint64_t kSampleStream = 4;
constexpr std::uint64_t kEvalBatchStream = 5;
constexpr std::uint64_t kEvalStream = 0xe7a1;
constexpr std::uint64_t kEnvStream = 0x0a11;
constexpr std::size_t kEvalBatchRows = 1024;

void finite_or_throw(const TrainState& st, double loss, const char* which) {
  if (std::isfinite(loss)) return;
  throw Error("non_finite_loss", std::string("non-finite ") + which + " loss",
              {{"loss", which},
               {"phase", st.online ? "online" : "offline"},
               {"offline_step", std::to_string(st.offline_step)},
               {"online_step", std::to_string(st.online_step)},
               {"last_actor_loss", std::to_string(st.losses.actor)},
               {"last_critic_loss", std::to_string(st.losses.critic)},
               {"last_beta_loss", std::to_string(st.losses.beta)},
               {"n", std::to_string(st.schedule.n())}});
}

void mark(TrainState& st, char c) {
  if (st.record_trace) st.trace.push_back(c);
}

std::vector<std::size_t> draw_indices(Rng& rng, std::size_t population, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, population - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

Matrix one_row(std::span<const double> v) {
  Matrix m(1, v.size());
  std::copy(v.begin(), v.end(), m.data());
  return m;
}

}  // namespace

double TrainState::alpha() const { return std::exp(log_alpha); }

TrainState make_train_state(const AlgoConfig& config, envs::EnvKind env, const data::Dataset& d) {
  config.validate();
  const envs::Environment e(env);
  if (d.obs_dim != e.obs_dim() || d.act_dim != e.act_dim())
    throw UserError("dataset_env_mismatch", "dataset shape does not match the environment",
                    {{"env", std::string(envs::env_name(env))},
                     {"obs_dim", std::to_string(d.obs_dim)},
                     {"act_dim", std::to_string(d.act_dim)}});
  if (d.size() == 0) throw UserError("empty_dataset", "offline dataset has no transitions");

  TrainState st;
  st.config = config;
  st.env = env;
  st.obs_dim = d.obs_dim;
  st.act_dim = d.act_dim;
  st.action_low = d.action_low;
  st.action_high = d.action_high;

  Rng actor_rng(mix_seed(config.seed, kActorStream));
  if (config.backbone == Backbone::CqlSa) {
    st.stochastic = policy::make_gaussian_head(d.obs_dim, d.act_dim, config.actor_hidden, true, actor_rng);
    st.actor_opt = numeric::make_adam(st.stochastic.net, {.lr = config.actor_lr});
  } else {
    st.deterministic = policy::make_deterministic_head(d.obs_dim, d.act_dim, config.actor_hidden, config.delta, actor_rng);
    st.deterministic_target = st.deterministic;
    st.actor_opt = numeric::make_adam(st.deterministic.net, {.lr = config.actor_lr});
  }

  Rng critic_rng(mix_seed(config.seed, kCriticStream));
  st.critics = value::make_critic_pair(d.obs_dim, d.act_dim, config.critic_hidden, critic_rng, config.tau_polyak);
  st.q1_opt = numeric::make_adam(st.critics.q1, {.lr = config.critic_lr});
  st.q2_opt = numeric::make_adam(st.critics.q2, {.lr = config.critic_lr});

  Rng coef_rng(mix_seed(config.seed, kCoefStream));
  st.coef = regularizer::make_coefficient_net(d.obs_dim, config.beta_hidden, config.beta_init, coef_rng);
  st.coef_opt = numeric::make_adam(st.coef.net, {.lr = config.beta_lr});
  // T = 0 is legal (no updates); the schedule still needs a positive horizon
  st.schedule = regularizer::make_schedule(
      policy::make_trust_region(config.n_start, config.n_end, config.t_inc, std::max<std::uint64_t>(config.steps, 1)));

  st.log_alpha = std::log(config.init_alpha);
  st.alpha_opt = numeric::ScalarAdam(1, {.lr = config.alpha_lr});
  st.rng.seed(mix_seed(config.seed, kSampleStream));

  Rng eval_rng(mix_seed(config.seed, kEvalBatchStream));
  st.eval_batch = data::gather(d, draw_indices(eval_rng, d.size(), kEvalBatchRows));
  return st;
}

std::vector<double> batch_beta(const TrainState& st, const Matrix& obs) {
  std::vector<double> b = st.config.adaptive_beta ? regularizer::beta(st.coef, obs)
                                                  : std::vector<double>(obs.rows(), st.config.beta_init);
  if (st.beta_scale != 1.0)
    for (double& v : b) v *= st.beta_scale;
  return b;
}

void cql_q_update(TrainState& st, const data::Batch& b) {
  const auto beta = batch_beta(st, b.obs);
  const auto y = cql_target(st.critics, st.stochastic, b, st.config.gamma, st.rng);
  const CqlSamples samples = draw_cql_samples(st.stochastic, b, st.config.cql_samples, st.rng, st.config.cql_penalty_states);
  CriticGrads g = zero_critic_grads(st.critics);
  const double loss = cql_critic_loss(st.critics, b, y, beta, samples, &g);
  finite_or_throw(st, loss, "critic");
  numeric::adam_step(st.q1_opt, st.critics.q1, g.q1);
  numeric::adam_step(st.q2_opt, st.critics.q2, g.q2);
  value::soft_update(st.critics);
  st.losses.critic = loss;
  ++st.counters.critic_updates;
  mark(st, 'Q');
}

void cql_policy_update(TrainState& st, const data::Batch& b) {
  MlpParams g = numeric::zeros_like(st.stochastic.net);
  CqlActorTerms terms;
  const double loss = cql_actor_loss(st.stochastic, st.critics, b, st.alpha(), st.config.sparse, st.rng(), &g, &terms);
  finite_or_throw(st, loss, "actor");
  numeric::adam_step(st.actor_opt, st.stochastic.net, g);
  double ga = 0.0;
  alpha_loss(st.log_alpha, terms.mean_log_prob, -static_cast<double>(st.act_dim), &ga);
  st.alpha_opt.step(std::span(&st.log_alpha, 1), std::span(&ga, 1));
  st.losses.actor = loss;
  ++st.counters.policy_updates;
  mark(st, 'P');
}

void td3_q_update(TrainState& st, const data::Batch& b) {
  const Matrix noise = td3_target_noise(st.rng, b.size(), st.act_dim, st.config.target_noise, st.config.noise_clip);
  const auto y = td3_target(st.critics, st.deterministic_target, b, st.config.gamma, noise);
  CriticGrads g = zero_critic_grads(st.critics);
  const double loss = td3_critic_loss(st.critics, b, y, &g);
  finite_or_throw(st, loss, "critic");
  numeric::adam_step(st.q1_opt, st.critics.q1, g.q1);
  numeric::adam_step(st.q2_opt, st.critics.q2, g.q2);
  st.losses.critic = loss;
  ++st.counters.critic_updates;
  mark(st, 'Q');
}

void td3bc_policy_update(TrainState& st, const data::Batch& b) {
  const auto beta = batch_beta(st, b.obs);
  MlpParams g = numeric::zeros_like(st.deterministic.net);
  const double loss = td3bc_actor_loss(st.deterministic, st.critics, b, beta, &g);
  finite_or_throw(st, loss, "actor");
  numeric::adam_step(st.actor_opt, st.deterministic.net, g);
  // TD3 moves every target at the delayed cadence
  numeric::polyak_update(st.deterministic_target.net, st.deterministic.net, st.config.tau_polyak);
  value::soft_update(st.critics);
  st.losses.actor = loss;
  ++st.counters.policy_updates;
  mark(st, 'P');
}

void beta_update(TrainState& st, const data::Batch& dhat) {
  if (!st.config.adaptive_beta || st.online) return;
  MlpParams g = numeric::zeros_like(st.coef.net);
  const double n = st.schedule.n();
  const double loss = st.stochastic_backbone()
                          ? regularizer::beta_loss_stochastic(st.coef, dhat, st.stochastic, n, &g)
                          : regularizer::beta_loss_deterministic(st.coef, dhat, st.deterministic, n, &g);
  finite_or_throw(st, loss, "beta");
  numeric::adam_step(st.coef_opt, st.coef.net, g);
  st.losses.beta = loss;
  ++st.counters.beta_updates;
  mark(st, 'B');
}

void offline_iteration(TrainState& st, const data::Dataset& d, const data::SubDatasetMask& mask) {
  const std::uint64_t i = st.offline_step;
  const data::Batch b = data::gather(d, draw_indices(st.rng, d.size(), st.config.batch_size), mask.member);
  if (st.stochastic_backbone()) {
    cql_policy_update(st, b);
    cql_q_update(st, b);
  } else {
    if (i % st.config.policy_delay == 0) td3bc_policy_update(st, b);
    td3_q_update(st, b);
  }
  if (st.config.adaptive_beta) {
    std::vector<std::size_t> idx = draw_indices(st.rng, mask.count(), st.config.batch_size);
    for (auto& k : idx) k = mask.indices[k];
    beta_update(st, data::gather(d, idx, mask.member));

    const double n = st.schedule.n();
    const auto stat = st.stochastic_backbone() ? regularizer::stochastic_statistic(st.stochastic, b, n)
                                               : regularizer::deterministic_statistic(st.deterministic, b, n);
    double mean = 0.0;
    for (double v : stat) mean += v;
    regularizer::observe_statistic(st.schedule, mean / static_cast<double>(stat.size()));
    regularizer::schedule_step(st.schedule, i + 1);
  }
  st.offline_step = i + 1;
}

envs::EvalResult evaluate(const TrainState& st, std::size_t episodes) {
  const envs::Policy pol = [&](std::span<const double> obs) {
    const Matrix a = st.stochastic_backbone() ? policy::mean_action(st.stochastic, one_row(obs))
                                              : policy::act(st.deterministic, one_row(obs));
    return data::denormalize_action(a.row(0), st.action_low, st.action_high);
  };
  return envs::evaluate_policy(st.env, pol, episodes, mix_seed(st.config.seed, kEvalStream));
}

MetricRecord snapshot(const TrainState& st, const std::string& phase, std::uint64_t step,
                      const envs::EvalResult& eval) {
  MetricRecord r;
  r.step = step;
  r.phase = phase;
  r.eval_return_mean = eval.mean;
  r.eval_return_std = eval.std;
  r.normalized_score = envs::normalized_score(st.env, eval.mean);
  const auto q = value::q_value(st.critics.q1, st.eval_batch.obs, st.eval_batch.actions);
  for (double v : q) r.q_mean += v;
  r.q_mean /= static_cast<double>(q.size());
  const auto betas = batch_beta(st, st.eval_batch.obs);
  const auto s = regularizer::summarize(betas);
  r.beta_mean = s.mean;
  r.beta_min = s.min;
  r.beta_max = s.max;
  r.beta_scale = st.beta_scale;
  r.n = st.schedule.n();
  r.frozen = st.schedule.frozen();
  r.termination_stat = st.schedule.termination_stat;
  r.loss_actor = st.losses.actor;
  r.loss_critic = st.losses.critic;
  r.loss_beta = st.losses.beta;
  r.alpha = st.stochastic_backbone() ? st.alpha() : 0.0;
  r.phi_hash = numeric::parameter_hash(st.coef.net);
  return r;
}

namespace {

void emit(std::vector<MetricRecord>& out, const MetricSink& sink, MetricRecord r) {
  if (sink) sink(r);
  out.push_back(std::move(r));
}

// Re-raise a component failure with the loop position attached.
[[noreturn]] void rethrow_with_step(const Error& e, const char* phase, std::uint64_t step) {
  auto details = e.details();
  details.emplace_back("phase", phase);
  details.emplace_back("step", std::to_string(step));
  if (dynamic_cast<const UserError*>(&e)) throw UserError(e.code(), e.what(), std::move(details));
  throw Error(e.code(), e.what(), std::move(details));
}

}  // namespace

std::vector<MetricRecord> offline_train(TrainState& st, const data::Dataset& d, const data::SubDatasetMask& mask,
                                        const MetricSink& sink) {
  if (mask.size() != d.size())
    throw Error("dimension_mismatch", "sub-dataset mask does not cover the dataset",
                {{"mask", std::to_string(mask.size())}, {"dataset", std::to_string(d.size())}});
  if (mask.count() == 0) throw UserError("empty_selection", "the regularized sub-dataset is empty");
  std::vector<MetricRecord> out;
  const std::size_t eps = st.config.eval_episodes;
  emit(out, sink, snapshot(st, "offline", st.offline_step, evaluate(st, eps)));
  while (st.offline_step < st.config.steps) {
    try {
      offline_iteration(st, d, mask);
    } catch (const Error& e) {
      rethrow_with_step(e, "offline", st.offline_step);
    }
    if (st.offline_step % st.config.eval_every == 0 || st.offline_step == st.config.steps)
      emit(out, sink, snapshot(st, "offline", st.offline_step, evaluate(st, eps)));
  }
  return out;
}

std::vector<MetricRecord> online_finetune(TrainState& st, const data::Dataset& d,
                                          const data::SubDatasetMask& mask, const MetricSink& sink) {
  const AlgoConfig& cfg = st.config;
  ReplayBuffer buffer = make_replay_buffer(cfg.strategy, d, mask);
  st.online = true;
  st.online_step = 0;
  st.beta_scale = regularizer::anneal_scale(0, cfg.anneal_steps);

  std::vector<MetricRecord> out;
  emit(out, sink, snapshot(st, "online", 0, evaluate(st, cfg.eval_episodes)));

  envs::Environment env(st.env);
  Rng env_rng(mix_seed(cfg.seed, kEnvStream));
  std::vector<double> obs = env.reset(env_rng);
  std::uint64_t updates = 0;

  for (std::uint64_t N = 0; N < cfg.online_steps; ++N) {
    st.online_step = N;
    st.beta_scale = regularizer::anneal_scale(N, cfg.anneal_steps);

    Matrix a;
    if (st.stochastic_backbone()) {
      a = policy::sample(st.stochastic, one_row(obs), st.rng).actions;
    } else {
      a = policy::act(st.deterministic, one_row(obs));
      for (double& v : a.values()) v = std::clamp(v + cfg.delta * standard_normal(st.rng), -1.0, 1.0);
    }
    const auto a_env = data::denormalize_action(a.row(0), st.action_low, st.action_high);
    envs::StepResult res = env.step(a_env);
    ++st.counters.env_steps;

    data::Transition t;
    t.s = obs;
    t.a = a_env;
    t.r = res.reward;
    t.s_next = res.obs;
    t.terminal = res.terminal;
    t.timeout = res.timeout;
    buffer.add_online(t);
    obs = (res.terminal || res.timeout) ? env.reset(env_rng) : std::move(res.obs);

    if (N >= cfg.warmup_steps) {
      if (st.counters.first_update_step == 0) st.counters.first_update_step = N + 1;
      try {
        const data::Batch b = buffer.sample(st.rng, cfg.batch_size);
        if (st.stochastic_backbone()) {
          cql_policy_update(st, b);
          cql_q_update(st, b);
        } else {
          if (updates % cfg.online_policy_delay == 0) td3bc_policy_update(st, b);
          td3_q_update(st, b);
        }
      } catch (const Error& e) {
        rethrow_with_step(e, "online", N + 1);
      }
      ++updates;
    }

    if ((N + 1) % cfg.online_eval_every == 0 || N + 1 == cfg.online_steps) {
      st.online_step = N + 1;
      emit(out, sink, snapshot(st, "online", N + 1, evaluate(st, cfg.eval_episodes)));
    }
  }
  st.online_step = cfg.online_steps;
  return out;
}

numeric::Checkpoint to_checkpoint(const TrainState& st) {
  numeric::Checkpoint c;
  if (st.stochastic_backbone()) {
    c.networks.emplace_back("actor", st.stochastic.net);
  } else {
    c.networks.emplace_back("actor", st.deterministic.net);
    c.networks.emplace_back("actor_target", st.deterministic_target.net);
  }
  c.networks.emplace_back("q1", st.critics.q1);
  c.networks.emplace_back("q2", st.critics.q2);
  c.networks.emplace_back("q1_target", st.critics.target1);
  c.networks.emplace_back("q2_target", st.critics.target2);
  c.networks.emplace_back("beta", st.coef.net);
  c.optimizers.emplace_back("actor", st.actor_opt);
  c.optimizers.emplace_back("q1", st.q1_opt);
  c.optimizers.emplace_back("q2", st.q2_opt);
  c.optimizers.emplace_back("beta", st.coef_opt);
  auto put = [&](const char* k, double v) { c.scalars.emplace_back(k, v); };
  put("log_alpha", st.log_alpha);
  put("alpha_m", st.alpha_opt.m[0]);
  put("alpha_v", st.alpha_opt.v[0]);
  put("alpha_t", static_cast<double>(st.alpha_opt.t));
  put("n", st.schedule.trust.n);
  put("frozen", st.schedule.trust.frozen ? 1.0 : 0.0);
  put("termination_stat", st.schedule.termination_stat);
  put("stat_seen", st.schedule.stat_seen ? 1.0 : 0.0);
  put("offline_step", static_cast<double>(st.offline_step));
  put("online_step", static_cast<double>(st.online_step));
  put("policy_updates", static_cast<double>(st.counters.policy_updates));
  put("critic_updates", static_cast<double>(st.counters.critic_updates));
  put("beta_updates", static_cast<double>(st.counters.beta_updates));
  put("env_steps", static_cast<double>(st.counters.env_steps));
  put("beta_scale", st.beta_scale);
  return c;
}

void restore(TrainState& st, const numeric::Checkpoint& c) {
  auto net = [&](const char* name, MlpParams& into) {
    const MlpParams& p = c.network(name);
    if (!numeric::same_shape(p, into))
      throw UserError("checkpoint_mismatch", "checkpoint network shape differs from config", {{"network", name}});
    into = p;
  };
  if (st.stochastic_backbone()) {
    net("actor", st.stochastic.net);
  } else {
    net("actor", st.deterministic.net);
    net("actor_target", st.deterministic_target.net);
  }
  net("q1", st.critics.q1);
  net("q2", st.critics.q2);
  net("q1_target", st.critics.target1);
  net("q2_target", st.critics.target2);
  net("beta", st.coef.net);
  st.actor_opt = c.optimizer("actor");
  st.q1_opt = c.optimizer("q1");
  st.q2_opt = c.optimizer("q2");
  st.coef_opt = c.optimizer("beta");
  auto u64 = [&](const char* k) { return static_cast<std::uint64_t>(c.scalar(k)); };
  st.log_alpha = c.scalar("log_alpha");
  st.alpha_opt.m[0] = c.scalar("alpha_m");
  st.alpha_opt.v[0] = c.scalar("alpha_v");
  st.alpha_opt.t = u64("alpha_t");
  st.schedule.trust.n = c.scalar("n");
  st.schedule.trust.frozen = c.scalar("frozen") != 0.0;
  st.schedule.termination_stat = c.scalar("termination_stat");
  st.schedule.stat_seen = c.scalar("stat_seen") != 0.0;
  st.offline_step = u64("offline_step");
  st.online_step = u64("online_step");
  st.counters.policy_updates = u64("policy_updates");
  st.counters.critic_updates = u64("critic_updates");
  st.counters.beta_updates = u64("beta_updates");
  st.counters.env_steps = u64("env_steps");
  st.beta_scale = c.scalar("beta_scale");
  st.rng.seed(mix_seed(mix_seed(st.config.seed, kSampleStream), st.offline_step + (st.online_step << 32)));
}

}  // namespace ssar::algorithms

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ssar/algorithms/config.hpp"
#include "ssar/algorithms/metrics.hpp"
#include "ssar/data/batch.hpp"
#include "ssar/data/dataset.hpp"
#include "ssar/data/selection.hpp"
#include "ssar/envs/behavior.hpp"
#include "ssar/envs/env.hpp"
#include "ssar/numeric/checkpoint.hpp"
#include "ssar/numeric/optim.hpp"
#include "ssar/policy/deterministic.hpp"
#include "ssar/policy/gaussian.hpp"
#include "ssar/regularizer/coefficient.hpp"
#include "ssar/regularizer/schedule.hpp"
#include "ssar/value/critic.hpp"

namespace ssar::algorithms {

using numeric::Matrix;
using numeric::MlpParams;

struct Counters {
  std::uint64_t policy_updates = 0;
  std::uint64_t critic_updates = 0;
  std::uint64_t beta_updates = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t first_update_step = 0;  // 1-based online step of the first update, 0 if none
};

struct LastLosses {
  double actor = 0.0;
  double critic = 0.0;
  double beta = 0.0;
};

/// Everything the training loops mutate. Only the head matching the
/// backbone is populated.
struct TrainState {
  AlgoConfig config;
  envs::EnvKind env = envs::EnvKind::Pendulum;
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  std::vector<double> action_low, action_high;

  policy::GaussianHead stochastic;  // CQL(SA)
  policy::DeterministicHead deterministic, deterministic_target;  // TD3+BC(SA)
  numeric::AdamState actor_opt;

  value::CriticPair critics;
  numeric::AdamState q1_opt, q2_opt;

  regularizer::CoefficientNet coef;
  numeric::AdamState coef_opt;
  regularizer::ScheduleState schedule;

  double log_alpha = 0.0;
  numeric::ScalarAdam alpha_opt;

  std::uint64_t offline_step = 0;
  std::uint64_t online_step = 0;
  bool online = false;
  double beta_scale = 1.0;  // anneal factor online, 1 offline

  Counters counters;
  LastLosses losses;
  Rng rng;

  data::Batch eval_batch;  // fixed states for beta and Q summaries

  /// When set, every update appends 'P' (policy), 'Q' (critic) or 'B' (beta).
  bool record_trace = false;
  std::string trace;

  bool stochastic_backbone() const { return config.backbone == Backbone::CqlSa; }
  double alpha() const;
};

/// Networks seeded from mix_seed(config.seed, k); the eval batch is 1024
/// rows of `d` chosen from a fixed stream.
TrainState make_train_state(const AlgoConfig& config, envs::EnvKind env, const data::Dataset& d);

/// Per-row beta used by the losses: beta_phi(s) (or beta_init when the
/// coefficient is fixed) times the current anneal factor.
std::vector<double> batch_beta(const TrainState& st, const Matrix& obs);

// Single updates. Each increments its counter and throws
// Error("non_finite_loss") with the step index on a NaN/inf loss.
void cql_q_update(TrainState& st, const data::Batch& b);
void cql_policy_update(TrainState& st, const data::Batch& b);
void td3_q_update(TrainState& st, const data::Batch& b);
void td3bc_policy_update(TrainState& st, const data::Batch& b);
/// Coefficient step on a D-hat batch; no-op for fixed beta.
void beta_update(TrainState& st, const data::Batch& dhat);

/// One offline iteration: policy update (every policy_delay steps for
/// TD3+BC), critic update, beta update on a separate D-hat batch, then the
/// termination statistic and the n schedule.
void offline_iteration(TrainState& st, const data::Dataset& d, const data::SubDatasetMask& mask);

/// Deterministic-action evaluation with a fixed seed.
envs::EvalResult evaluate(const TrainState& st, std::size_t episodes);

MetricRecord snapshot(const TrainState& st, const std::string& phase, std::uint64_t step,
                      const envs::EvalResult& eval);

using MetricSink = std::function<void(const MetricRecord&)>;

/// Runs config.steps offline iterations, recording metrics at step 0, every
/// eval_every steps and at the end.
std::vector<MetricRecord> offline_train(TrainState& st, const data::Dataset& d, const data::SubDatasetMask& mask,
                                        const MetricSink& sink = {});

/// Fine-tunes online for config.online_steps environment steps with the
/// configured buffer strategy. The coefficient network and n are frozen;
/// beta is annealed over config.anneal_steps.
std::vector<MetricRecord> online_finetune(TrainState& st, const data::Dataset& d,
                                          const data::SubDatasetMask& mask, const MetricSink& sink = {});

/// Networks, optimizer moments, schedule, temperature, and counters. The
/// sampling RNG is not stored; restore() reseeds it from the step counters.
numeric::Checkpoint to_checkpoint(const TrainState& st);
void restore(TrainState& st, const numeric::Checkpoint& ckpt);

}  // namespace ssar::algorithms

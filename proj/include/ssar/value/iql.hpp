#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssar/data/batch.hpp"
#include "ssar/data/selection.hpp"
#include "ssar/numeric/mlp.hpp"
#include "ssar/numeric/optim.hpp"

namespace ssar::value {

/// |tau - 1(u < 0)| u^2
double expectile_loss(double u, double tau);

/// argmin_c sum_i L_tau(x_i - c), by ternary search on the convex objective.
double scalar_expectile(std::span<const double> samples, double tau);

/// In-sample value pair: Q(s, a) and V(s) fit by expectile regression.
struct IqlPair {
  numeric::MlpParams q;
  numeric::MlpParams v;
  double tau = 0.7;
};

struct IqlConfig {
  double tau = 0.7;
  double gamma = 0.99;
  std::uint64_t steps = 100'000;
  std::size_t batch_size = 256;
  std::vector<std::size_t> hidden{64, 64};
  double lr = 3e-4;
  /// Cosine decay of both learning rates to zero over `steps`. With the
  /// current V inside the Q target, constant-rate Adam keeps the pair
  /// drifting around the fixed point; the decay lets it settle.
  bool cosine_lr = true;
  std::uint64_t seed = 0;

  void validate() const;
};

IqlPair make_iql_pair(std::size_t obs_dim, std::size_t act_dim, const IqlConfig& cfg, Rng& rng);

/// Optimizer state and counters for a pretraining run.
struct IqlTrainer {
  IqlPair pair;
  numeric::AdamState q_opt;
  numeric::AdamState v_opt;
  double gamma = 0.99;
  std::uint64_t steps = 0;
  /// Incremented whenever a learned policy would be queried. Expectile
  /// regression only uses dataset actions, so this stays 0.
  std::uint64_t policy_calls = 0;
};

IqlTrainer make_iql_trainer(IqlPair pair, const IqlConfig& cfg);

/// L_V = mean L_tau(Q(s,a) - V(s)); gradient w.r.t. V only (+= into grads).
double iql_v_loss(const IqlPair& p, const data::Batch& b, numeric::MlpParams* grads);
/// L_Q = mean (r + gamma (1 - terminal) V(s') - Q(s,a))^2; gradient w.r.t. Q only.
double iql_q_loss(const IqlPair& p, const data::Batch& b, double gamma, numeric::MlpParams* grads);

/// One step on L_V = mean L_tau(Q(s,a) - V(s)) with Q held fixed; returns L_V.
double iql_v_step(IqlTrainer& t, const data::Batch& b);
/// One step on L_Q = mean (r + gamma (1 - terminal) V(s') - Q(s,a))^2 with V fixed; returns L_Q.
double iql_q_step(IqlTrainer& t, const data::Batch& b);

struct IqlReport {
  std::uint64_t policy_calls = 0;
  double final_v_loss = 0.0;
  double final_q_loss = 0.0;
};

/// Alternating V then Q steps on uniform mini-batches. Throws "divergence"
/// when |mean V| over a batch exceeds 10x the return bound
/// max(max|r|, 1) / (1 - gamma).
IqlPair iql_pretrain(const data::Dataset& d, const IqlConfig& cfg, IqlReport* report = nullptr);

/// Q(s,a) and V(s) on every transition, then the strict Q - V > 0 mask.
data::SubDatasetMask advantage_mask(const data::Dataset& d, const IqlPair& iql);

}  // namespace ssar::value

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace ssar::algorithms {

enum class Backbone : std::uint8_t { CqlSa, Td3BcSa };
enum class BufferStrategy : std::uint8_t { All, Half, Part, None };

std::string_view backbone_name(Backbone b);
Backbone parse_backbone(std::string_view name);
std::string_view strategy_name(BufferStrategy s);
BufferStrategy parse_strategy(std::string_view name);

/// Every knob of the two backbones, the coefficient machinery, and the
/// online phase. Widths default to the desk preset; see README for the
/// provenance of each default.
struct AlgoConfig {
  Backbone backbone = Backbone::Td3BcSa;
  double gamma = 0.99;
  std::size_t batch_size = 256;
  std::vector<std::size_t> actor_hidden{64, 64};
  std::vector<std::size_t> critic_hidden{64, 64};
  std::vector<std::size_t> beta_hidden{64, 64};
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double beta_lr = 1e-4;
  double alpha_lr = 3e-4;
  double tau_polyak = 0.005;

  // TD3+BC side
  std::uint64_t policy_delay = 2;
  double target_noise = 0.2;
  double noise_clip = 0.5;
  double delta = 0.1;  // exploration noise scale, normalized action units

  // CQL side
  std::size_t cql_samples = 10;  // per proposal: uniform, pi(.|s), pi(.|s')
  std::size_t cql_penalty_states = 64;  // D-hat states per batch carrying the penalty; 0 = all
  double init_alpha = 1.0;       // entropy temperature
  bool sparse = false;           // adds the BC term to the CQL actor

  // state-adaptive coefficient
  double beta_init = 2.5;
  bool adaptive_beta = true;  // false: beta == beta_init, no coefficient updates
  double n_start = 1.0;
  double n_end = 3.0;
  std::uint64_t t_inc = 1000;
  std::uint64_t steps = 100'000;  // offline iterations T

  std::uint64_t eval_every = 5000;
  std::size_t eval_episodes = 10;
  std::uint64_t seed = 0;

  // online phase
  std::uint64_t online_steps = 25'000;
  std::uint64_t warmup_steps = 5000;
  std::uint64_t anneal_steps = 400'000;  // N_end
  std::uint64_t online_eval_every = 2500;
  std::uint64_t online_policy_delay = 2;
  BufferStrategy strategy = BufferStrategy::Part;

  /// Throws UserError naming the first invalid field.
  void validate() const;

  friend bool operator==(const AlgoConfig&, const AlgoConfig&) = default;
};

/// Backbone defaults: beta_init 5.0 for CQL(SA), 2.5 for TD3+BC(SA).
AlgoConfig default_config(Backbone b);

}  // namespace ssar::algorithms

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssar/data/dataset.hpp"
#include "ssar/envs/env.hpp"

namespace ssar::envs {

/// Scripted controllers. The expert needs no learning: energy shaping plus
/// a PD stabilizer for the pendulum, waypoint PD for the maze.
std::vector<double> expert_action(EnvKind kind, std::span<const double> obs);

enum class ControllerKind : std::uint8_t { Expert, Noisy, Random };

struct MixtureComponent {
  ControllerKind kind = ControllerKind::Expert;
  double sigma = 0.0;  // Gaussian action noise for Noisy, in action units
  double weight = 1.0;
  friend bool operator==(const MixtureComponent&, const MixtureComponent&) = default;
};

struct BehaviorSpec {
  std::vector<MixtureComponent> mixture;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;

  /// Throws unless weights are positive and sum to 1 (within 1e-9).
  void validate() const;
};

/// Parses "expert:0.5,random:0.5" or "noisy@0.3:1" style lists, or one of
/// the named presets (expert, medium, random, mixed, medium-replay,
/// medium-expert). Component order is kept.
std::vector<MixtureComponent> parse_mixture(std::string_view text);
std::string format_mixture(const std::vector<MixtureComponent>& mix);

/// Number of episodes given to each component (largest-remainder rounding).
std::vector<std::size_t> episode_counts(const BehaviorSpec& spec);

/// Per-step action of a mixture component; `rng` drives noise.
std::vector<double> behavior_action(const Environment& env, const MixtureComponent& c,
                                    std::span<const double> obs, Rng& rng);

/// Rolls out the mixture. Episodes are laid out component by component in
/// mixture order; episode k uses the seed stream mix_seed(spec.seed, k).
/// `labels`, when given, receives the component index of every transition.
data::Dataset generate_dataset(EnvKind kind, const BehaviorSpec& spec, std::vector<std::uint32_t>* labels = nullptr);

using Policy = std::function<std::vector<double>(std::span<const double> obs)>;

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;  // population std over episodes
  std::vector<double> returns;
};

/// Deterministic-action rollouts; episode k resets from mix_seed(seed, k).
EvalResult evaluate_policy(EnvKind kind, const Policy& policy, std::size_t episodes, std::uint64_t seed);

struct ReferenceReturns {
  double random = 0.0;
  double expert = 0.0;
};

/// Mean returns of the uniform-random and expert controllers over 100
/// fixed-seed episodes; used for normalized scores.
ReferenceReturns reference_returns(EnvKind kind);

/// 100 * (R - random) / (expert - random).
double normalized_score(EnvKind kind, double ret);

}  // namespace ssar::envs

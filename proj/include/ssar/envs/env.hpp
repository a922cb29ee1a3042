#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ssar/numeric/random.hpp"

namespace ssar::envs {

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool terminal = false;
  bool timeout = false;  // episode length limit reached without termination
};

/// Swing-up pendulum. theta = 0 is upright; observation (cos, sin, omega).
class Pendulum {
 public:
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr std::size_t kMaxSteps = 200;

  static constexpr std::size_t obs_dim() { return 3; }
  static constexpr std::size_t act_dim() { return 1; }

  std::vector<double> reset(Rng& rng);
  void set_state(double theta, double omega);
  StepResult step(std::span<const double> action);
  std::vector<double> observation() const;

  double theta() const { return theta_; }
  double omega() const { return omega_; }
  std::size_t steps() const { return t_; }

 private:
  double theta_ = 0.0;
  double omega_ = 0.0;
  std::size_t t_ = 0;
};

/// Point mass in a 5x5 maze. A wall fills cells x in [0,4), y in [2,3), so
/// the only route from the start (bottom left) to the goal (top left) runs
/// through the gap on the right. Observation (x, y, vx, vy).
class PointMaze {
 public:
  static constexpr double kSize = 5.0;
  static constexpr double kDt = 0.1;
  static constexpr double kAccel = 5.0;
  static constexpr double kMaxSpeed = 2.0;
  static constexpr double kGoalX = 0.5;
  static constexpr double kGoalY = 4.5;
  static constexpr double kGoalRadius = 0.3;
  static constexpr double kStartX = 0.5;
  static constexpr double kStartY = 0.5;
  static constexpr std::size_t kMaxSteps = 300;

  static constexpr std::size_t obs_dim() { return 4; }
  static constexpr std::size_t act_dim() { return 2; }

  static bool blocked(double x, double y);

  std::vector<double> reset(Rng& rng);
  void set_state(double x, double y, double vx, double vy);
  StepResult step(std::span<const double> action);
  std::vector<double> observation() const;

  bool in_goal() const;

 private:
  double x_ = kStartX, y_ = kStartY, vx_ = 0.0, vy_ = 0.0;
  std::size_t t_ = 0;
};

enum class EnvKind { Pendulum, PointMaze };

EnvKind parse_env_kind(std::string_view name);
std::string_view env_name(EnvKind kind);

/// Value-semantic wrapper over the concrete environments.
class Environment {
 public:
  explicit Environment(EnvKind kind);

  EnvKind kind() const { return kind_; }
  std::size_t obs_dim() const;
  std::size_t act_dim() const;
  std::vector<double> action_low() const;
  std::vector<double> action_high() const;
  std::size_t max_steps() const;
  /// Sparse-reward task (goal reaching) with a success criterion.
  bool sparse() const { return kind_ == EnvKind::PointMaze; }

  std::vector<double> reset(Rng& rng);
  /// Clips the action into the box; throws "non_finite" on NaN/inf input.
  StepResult step(std::span<const double> action);

  Pendulum* pendulum() { return std::get_if<Pendulum>(&env_); }
  PointMaze* pointmaze() { return std::get_if<PointMaze>(&env_); }

 private:
  EnvKind kind_;
  std::variant<Pendulum, PointMaze> env_;
};

}  // namespace ssar::envs

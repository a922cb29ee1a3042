#include "ssar/envs/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssar/error.hpp"

namespace ssar::envs {
namespace {

double wrap_angle(double th) {
  th = std::fmod(th + std::numbers::pi, 2.0 * std::numbers::pi);
  if (th < 0.0) th += 2.0 * std::numbers::pi;
  return th - std::numbers::pi;
}

void require_finite(std::span<const double> a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i]))
      throw Error("non_finite", "non-finite action passed to env step", {{"dim", std::to_string(i)}});
}

}  // namespace

std::vector<double> Pendulum::reset(Rng& rng) {
  theta_ = uniform(rng, -std::numbers::pi, std::numbers::pi);
  omega_ = uniform(rng, -1.0, 1.0);
  t_ = 0;
  return observation();
}

void Pendulum::set_state(double theta, double omega) {
  theta_ = wrap_angle(theta);
  omega_ = omega;
  t_ = 0;
}

std::vector<double> Pendulum::observation() const { return {std::cos(theta_), std::sin(theta_), omega_}; }

StepResult Pendulum::step(std::span<const double> action) {
  if (!std::isfinite(theta_) || !std::isfinite(omega_))
    throw Error("non_finite", "pendulum state is not finite");
  const double u = std::clamp(action[0], -kMaxTorque, kMaxTorque);
  const double reward = -(theta_ * theta_ + 0.1 * omega_ * omega_ + 0.001 * u * u);
  // Semi-implicit Euler as in the classic swing-up task.
  const double acc = 3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) + 3.0 / (kMass * kLength * kLength) * u;
  omega_ = std::clamp(omega_ + acc * kDt, -kMaxSpeed, kMaxSpeed);
  theta_ = wrap_angle(theta_ + omega_ * kDt);
  ++t_;
  return {observation(), reward, false, t_ >= kMaxSteps};
}

bool PointMaze::blocked(double x, double y) {
  if (x < 0.0 || x > kSize || y < 0.0 || y > kSize) return true;
  return x < 4.0 && y >= 2.0 && y < 3.0;
}

std::vector<double> PointMaze::reset(Rng& rng) {
  x_ = kStartX + uniform(rng, -0.1, 0.1);
  y_ = kStartY + uniform(rng, -0.1, 0.1);
  vx_ = vy_ = 0.0;
  t_ = 0;
  return observation();
}

void PointMaze::set_state(double x, double y, double vx, double vy) {
  x_ = x;
  y_ = y;
  vx_ = vx;
  vy_ = vy;
  t_ = 0;
}

std::vector<double> PointMaze::observation() const { return {x_, y_, vx_, vy_}; }

bool PointMaze::in_goal() const {
  const double dx = x_ - kGoalX, dy = y_ - kGoalY;
  return dx * dx + dy * dy <= kGoalRadius * kGoalRadius;
}

StepResult PointMaze::step(std::span<const double> action) {
  if (!std::isfinite(x_) || !std::isfinite(y_) || !std::isfinite(vx_) || !std::isfinite(vy_))
    throw Error("non_finite", "point-maze state is not finite");
  const double ax = std::clamp(action[0], -1.0, 1.0);
  const double ay = std::clamp(action[1], -1.0, 1.0);
  vx_ = std::clamp(vx_ + kAccel * ax * kDt, -kMaxSpeed, kMaxSpeed);
  vy_ = std::clamp(vy_ + kAccel * ay * kDt, -kMaxSpeed, kMaxSpeed);
  // Resolve each axis separately: a blocked move is undone and that
  // velocity component is zeroed.
  const double nx = x_ + vx_ * kDt;
  if (blocked(nx, y_)) {
    vx_ = 0.0;
  } else {
    x_ = nx;
  }
  const double ny = y_ + vy_ * kDt;
  if (blocked(x_, ny)) {
    vy_ = 0.0;
  } else {
    y_ = ny;
  }
  ++t_;
  const bool goal = in_goal();
  return {observation(), goal ? 1.0 : 0.0, goal, !goal && t_ >= kMaxSteps};
}

EnvKind parse_env_kind(std::string_view name) {
  if (name == "pendulum") return EnvKind::Pendulum;
  if (name == "pointmaze") return EnvKind::PointMaze;
  throw UserError("unknown_env", "unknown environment", {{"env", std::string(name)}});
}

std::string_view env_name(EnvKind kind) { return kind == EnvKind::Pendulum ? "pendulum" : "pointmaze"; }

Environment::Environment(EnvKind kind) : kind_(kind) {
  if (kind == EnvKind::Pendulum)
    env_ = Pendulum{};
  else
    env_ = PointMaze{};
}

std::size_t Environment::obs_dim() const {
  return kind_ == EnvKind::Pendulum ? Pendulum::obs_dim() : PointMaze::obs_dim();
}
std::size_t Environment::act_dim() const {
  return kind_ == EnvKind::Pendulum ? Pendulum::act_dim() : PointMaze::act_dim();
}
std::vector<double> Environment::action_low() const {
  return kind_ == EnvKind::Pendulum ? std::vector<double>{-Pendulum::kMaxTorque} : std::vector<double>{-1.0, -1.0};
}
std::vector<double> Environment::action_high() const {
  return kind_ == EnvKind::Pendulum ? std::vector<double>{Pendulum::kMaxTorque} : std::vector<double>{1.0, 1.0};
}
std::size_t Environment::max_steps() const {
  return kind_ == EnvKind::Pendulum ? Pendulum::kMaxSteps : PointMaze::kMaxSteps;
}

std::vector<double> Environment::reset(Rng& rng) {
  return std::visit([&](auto& e) { return e.reset(rng); }, env_);
}

StepResult Environment::step(std::span<const double> action) {
  if (action.size() != act_dim())
    throw Error("dimension_mismatch", "action has the wrong dimension",
                {{"expected", std::to_string(act_dim())}, {"actual", std::to_string(action.size())}});
  require_finite(action);
  return std::visit([&](auto& e) { return e.step(action); }, env_);
}

}  // namespace ssar::envs

#include "ssar/envs/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "ssar/error.hpp"

namespace ssar::envs {
namespace {

std::vector<double> pendulum_expert(std::span<const double> obs) {
  const double theta = std::atan2(obs[1], obs[0]);
  const double omega = obs[2];
  double u;
  if (std::cos(theta) > std::cos(0.35)) {
    u = -(10.0 * theta + 2.0 * omega);
  } else {
    // Pump energy towards the upright level E = 15.
    const double energy = 0.5 * omega * omega + 15.0 * std::cos(theta);
    const double push = omega == 0.0 ? 1.0 : omega;
    u = 0.5 * (15.0 - energy) * push;
  }
  return {std::clamp(u, -Pendulum::kMaxTorque, Pendulum::kMaxTorque)};
}

std::vector<double> maze_expert(std::span<const double> obs) {
  const double x = obs[0], y = obs[1], vx = obs[2], vy = obs[3];
  double tx, ty;
  if (y < 3.0 && x < 4.0) {
    tx = 4.5;  // along the bottom corridor towards the gap
    ty = 1.0;
  } else if (y < 3.6) {
    tx = 4.5;  // up through the gap
    ty = 4.5;
  } else {
    tx = PointMaze::kGoalX;
    ty = PointMaze::kGoalY;
  }
  const double kp = 2.0, kd = 1.2;
  return {std::clamp(kp * (tx - x) - kd * vx, -1.0, 1.0), std::clamp(kp * (ty - y) - kd * vy, -1.0, 1.0)};
}

const std::map<std::string, std::string, std::less<>>& presets() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"expert", "expert:1"},
      {"random", "random:1"},
      {"medium", "noisy@2.0:1"},
      {"mixed", "expert:0.5,random:0.5"},
      {"medium-expert", "expert:0.5,noisy@2.0:0.5"},
      {"medium-replay", "random:0.25,noisy@3.0:0.25,noisy@2.0:0.25,noisy@1.0:0.25"},
  };
  return table;
}

double parse_number(std::string_view s, std::string_view whole) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UserError("bad_mixture", "cannot parse number in mixture", {{"mix", std::string(whole)}});
  }
}

}  // namespace

std::vector<double> expert_action(EnvKind kind, std::span<const double> obs) {
  return kind == EnvKind::Pendulum ? pendulum_expert(obs) : maze_expert(obs);
}

void BehaviorSpec::validate() const {
  if (mixture.empty()) throw UserError("bad_mixture", "behavior mixture is empty");
  double total = 0.0;
  for (const auto& c : mixture) {
    if (!(c.weight > 0.0)) throw UserError("bad_mixture", "mixture weights must be positive");
    if (c.kind == ControllerKind::Noisy && !(c.sigma >= 0.0))
      throw UserError("bad_mixture", "noise scale must be non-negative");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw UserError("bad_mixture", "mixture weights must sum to 1", {{"sum", std::to_string(total)}});
}

std::vector<MixtureComponent> parse_mixture(std::string_view text) {
  if (auto it = presets().find(text); it != presets().end()) return parse_mixture(it->second);
  std::vector<MixtureComponent> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, comma - start);
    const std::size_t colon = item.rfind(':');
    if (colon == std::string_view::npos)
      throw UserError("bad_mixture", "mixture items look like name:weight", {{"mix", std::string(text)}});
    const std::string_view name = item.substr(0, colon);
    MixtureComponent c;
    c.weight = parse_number(item.substr(colon + 1), text);
    if (name == "expert") {
      c.kind = ControllerKind::Expert;
    } else if (name == "random") {
      c.kind = ControllerKind::Random;
    } else if (name.substr(0, 6) == "noisy@") {
      c.kind = ControllerKind::Noisy;
      c.sigma = parse_number(name.substr(6), text);
    } else {
      throw UserError("bad_mixture", "unknown controller in mixture", {{"controller", std::string(name)}});
    }
    out.push_back(c);
    start = comma + 1;
  }
  return out;
}

std::string format_mixture(const std::vector<MixtureComponent>& mix) {
  std::ostringstream os;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (i) os << ',';
    switch (mix[i].kind) {
      case ControllerKind::Expert:
        os << "expert";
        break;
      case ControllerKind::Random:
        os << "random";
        break;
      case ControllerKind::Noisy:
        os << "noisy@" << mix[i].sigma;
        break;
    }
    os << ':' << mix[i].weight;
  }
  return os.str();
}

std::vector<std::size_t> episode_counts(const BehaviorSpec& spec) {
  const std::size_t k = spec.mixture.size();
  std::vector<std::size_t> counts(k);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double exact = spec.mixture[i].weight * static_cast<double>(spec.episodes);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    used += counts[i];
    rem.push_back({exact - std::floor(exact), i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; used < spec.episodes; ++j, ++used) ++counts[rem[j % k].second];
  return counts;
}

std::vector<double> behavior_action(const Environment& env, const MixtureComponent& c,
                                    std::span<const double> obs, Rng& rng) {
  const auto lo = env.action_low(), hi = env.action_high();
  std::vector<double> a;
  if (c.kind == ControllerKind::Random) {
    for (std::size_t j = 0; j < lo.size(); ++j) a.push_back(uniform(rng, lo[j], hi[j]));
    return a;
  }
  a = expert_action(env.kind(), obs);
  if (c.kind == ControllerKind::Noisy)
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::clamp(a[j] + c.sigma * standard_normal(rng), lo[j], hi[j]);
  return a;
}

data::Dataset generate_dataset(EnvKind kind, const BehaviorSpec& spec, std::vector<std::uint32_t>* labels) {
  spec.validate();
  if (spec.episodes == 0) throw UserError("bad_episodes", "episode count must be positive");
  Environment env(kind);
  auto d = data::make_dataset(env.obs_dim(), env.act_dim(), env.action_low(), env.action_high(),
                              std::string(env_name(kind)) + " " + format_mixture(spec.mixture) +
                                  " episodes=" + std::to_string(spec.episodes) + " seed=" + std::to_string(spec.seed));
  if (labels) labels->clear();
  const auto counts = episode_counts(spec);
  std::uint64_t episode = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::size_t e = 0; e < counts[c]; ++e, ++episode) {
      Rng rng(mix_seed(spec.seed, episode));
      auto obs = env.reset(rng);
      for (;;) {
        const auto a = behavior_action(env, spec.mixture[c], obs, rng);
        auto res = env.step(a);
        d.push_back({obs, a, res.reward, res.obs, res.terminal, res.timeout});
        if (labels) labels->push_back(static_cast<std::uint32_t>(c));
        if (res.terminal || res.timeout) break;
        obs = std::move(res.obs);
      }
    }
  }
  d.validate();
  return d;
}

EvalResult evaluate_policy(EnvKind kind, const Policy& policy, std::size_t episodes, std::uint64_t seed) {
  if (episodes == 0) throw UserError("bad_episodes", "evaluation needs at least one episode");
  Environment env(kind);
  EvalResult out;
  for (std::size_t k = 0; k < episodes; ++k) {
    Rng rng(mix_seed(seed, k));
    auto obs = env.reset(rng);
    double ret = 0.0;
    for (;;) {
      auto res = env.step(policy(obs));
      ret += res.reward;
      if (res.terminal || res.timeout) break;
      obs = std::move(res.obs);
    }
    out.returns.push_back(ret);
  }
  const double n = static_cast<double>(episodes);
  out.mean = std::accumulate(out.returns.begin(), out.returns.end(), 0.0) / n;
  double var = 0.0;
  for (double r : out.returns) var += (r - out.mean) * (r - out.mean);
  out.std = std::sqrt(var / n);
  return out;
}

ReferenceReturns reference_returns(EnvKind kind) {
  static const auto compute = [](EnvKind k) {
    constexpr std::uint64_t kSeed = 0x5eed;
    const Environment env(k);
    const auto lo = env.action_low(), hi = env.action_high();
    Rng noise(kSeed);
    const Policy random = [&](std::span<const double>) {
      std::vector<double> a;
      for (std::size_t j = 0; j < lo.size(); ++j) a.push_back(uniform(noise, lo[j], hi[j]));
      return a;
    };
    const Policy expert = [k](std::span<const double> obs) { return expert_action(k, obs); };
    return ReferenceReturns{evaluate_policy(k, random, 100, kSeed).mean, evaluate_policy(k, expert, 100, kSeed).mean};
  };
  static const ReferenceReturns pendulum = compute(EnvKind::Pendulum);
  static const ReferenceReturns maze = compute(EnvKind::PointMaze);
  return kind == EnvKind::Pendulum ? pendulum : maze;
}

double normalized_score(EnvKind kind, double ret) {
  const auto ref = reference_returns(kind);
  return 100.0 * (ret - ref.random) / (ref.expert - ref.random);
}

}  // namespace ssar::envs

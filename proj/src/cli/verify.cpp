#include "ssar/cli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "ssar/algorithms/losses.hpp"
#include "ssar/algorithms/proposition.hpp"
#include "ssar/numeric/gradcheck.hpp"
#include "ssar/policy/deterministic.hpp"
#include "ssar/policy/gaussian.hpp"
#include "ssar/regularizer/coefficient.hpp"
#include "ssar/value/critic.hpp"
#include "ssar/value/iql.hpp"

namespace ssar::cli {

using namespace ssar::numeric::gradcheck;
using numeric::Matrix;

namespace {

using Clock = std::chrono::steady_clock;

CheckResult timed(std::string suite, std::string check, double tolerance, const std::function<double()>& run) {
  const auto t0 = Clock::now();
  CheckResult r{std::move(suite), std::move(check), 0.0, tolerance, false, 0.0};
  r.value = run();
  r.passed = std::isfinite(r.value) && r.value < tolerance;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

data::Batch random_batch(Rng& rng, std::size_t n, std::size_t obs_dim, std::size_t act_dim) {
  data::Batch b;
  b.obs = random_matrix(rng, n, obs_dim, -1.5, 1.5);
  b.actions = random_matrix(rng, n, act_dim, -0.9, 0.9);
  b.next_obs = random_matrix(rng, n, obs_dim, -1.5, 1.5);
  for (std::size_t i = 0; i < n; ++i) {
    b.rewards.push_back(uniform(rng, -1.0, 1.0));
    b.not_done.push_back(uniform(rng, 0.0, 1.0) < 0.8 ? 1.0 : 0.0);
    b.in_subset.push_back(uniform(rng, 0.0, 1.0) < 0.6 ? 1 : 0);
  }
  return b;
}

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

// Analytic gradient (accumulated into zeros) vs. central differences.
double param_error(numeric::MlpParams& p, const std::function<double(numeric::MlpParams*)>& loss,
                   double floor = 1e-6) {
  auto g = numeric::zeros_like(p);
  loss(&g);
  const auto fd = central_difference(p, [&] { return loss(nullptr); });
  return max_relative_error(numeric::flatten(g), fd, floor);
}

constexpr std::size_t kBatch = 16;
constexpr int kTrials = 3;
constexpr double kGradTol = 1e-3;

}  // namespace

std::vector<CheckResult> verify_proposition_suite() {
  std::vector<CheckResult> out;
  out.push_back(timed("proposition", "penalty vs NLL gradient, 1000 instances", 1e-9, [] {
    return algorithms::verify_proposition1(1000, 20240).max_discrepancy;
  }));
  out.push_back(timed("proposition", "uniform Q gives 1/|A| - e_a", 1e-12, [] {
    const std::vector<double> flat(6, -0.3);
    return algorithms::proposition1_discrepancy(flat, 2, 0.7);
  }));
  return out;
}

std::vector<CheckResult> verify_margin_suite() {
  std::vector<CheckResult> out;
  out.push_back(timed("margin", "margin = 2 delta^2 (log N - C_n), 10000 inputs", 1e-10, [] {
    Rng rng(31);
    double worst = 0.0;
    for (int k = 0; k < 10'000; ++k) {
      const std::size_t d = 1 + k % 4;
      const double delta = uniform(rng, 0.01, 1.0), n = uniform(rng, 0.0, 5.0);
      // Zero-weight affine head: every state maps to N(pi, delta^2 I).
      policy::GaussianHead h;
      numeric::DenseLayer l;
      l.in = 2;
      l.out = 2 * d;
      l.weight.assign(l.in * l.out, 0.0);
      l.bias.assign(2 * d, std::log(delta));
      h.act_dim = d;
      h.squashed = false;
      std::vector<double> pi(d), a(d);
      for (std::size_t c = 0; c < d; ++c) {
        pi[c] = l.bias[c] = uniform(rng, -1, 1);
        a[c] = uniform(rng, -1, 1);
      }
      h.net.layers.push_back(l);
      const Matrix s(1, 2);
      const double gap = policy::log_prob(h, s.row(0), a) - policy::threshold_cn(h, s, n)[0];
      worst = std::max(worst, std::abs(policy::deterministic_margin(pi, a, n, delta) - 2.0 * delta * delta * gap));
    }
    return worst;
  }));
  return out;
}

std::vector<CheckResult> verify_gradient_suite() {
  using namespace ssar::algorithms;
  std::vector<CheckResult> out;
  const auto check = [&](const std::string& name, const std::function<double(Rng&)>& one_trial) {
    out.push_back(timed("gradient", name, kGradTol, [&] {
      Rng rng(15);
      double worst = 0.0;
      for (int t = 0; t < kTrials; ++t) worst = std::max(worst, one_trial(rng));
      return worst;
    }));
  };

  check("twin Bellman critic loss", [](Rng& rng) {
    const auto b = random_batch(rng, kBatch, 3, 2);
    auto c = value::make_critic_pair(3, 2, {8, 8}, rng);
    const auto y = random_vector(rng, kBatch, -2, 2);
    auto g = zero_critic_grads(c);
    td3_critic_loss(c, b, y, &g);
    const auto loss = [&] { return td3_critic_loss(c, b, y, nullptr); };
    return std::max(max_relative_error(numeric::flatten(g.q1), central_difference(c.q1, loss)),
                    max_relative_error(numeric::flatten(g.q2), central_difference(c.q2, loss)));
  });
  check("conservative critic loss", [](Rng& rng) {
    const auto b = random_batch(rng, kBatch, 3, 2);
    auto c = value::make_critic_pair(3, 2, {8, 8}, rng);
    const auto y = random_vector(rng, kBatch, -2, 2);
    const auto beta = random_vector(rng, kBatch, 0.1, 4.0);
    const auto actor = policy::make_gaussian_head(3, 2, {8}, true, rng);
    const auto s = draw_cql_samples(actor, b, 10, rng);
    auto g = zero_critic_grads(c);
    cql_critic_loss(c, b, y, beta, s, &g);
    const auto loss = [&] { return cql_critic_loss(c, b, y, beta, s, nullptr); };
    return std::max(max_relative_error(numeric::flatten(g.q1), central_difference(c.q1, loss)),
                    max_relative_error(numeric::flatten(g.q2), central_difference(c.q2, loss)));
  });
  check("TD3+BC(SA) actor loss", [](Rng& rng) {
    const auto b = random_batch(rng, kBatch, 3, 2);
    const auto c = value::make_critic_pair(3, 2, {8, 8}, rng);
    const auto beta = random_vector(rng, kBatch, 0.1, 4.0);
    auto actor = policy::make_deterministic_head(3, 2, {8}, 0.1, rng);
    return param_error(actor.net, [&](MlpParams* g) { return td3bc_actor_loss(actor, c, b, beta, g); });
  });
  for (bool bc : {false, true}) {
    check(bc ? "CQL(SA) actor loss with BC term" : "CQL(SA) actor loss", [bc](Rng& rng) {
      const auto b = random_batch(rng, kBatch, 3, 2);
      const auto c = value::make_critic_pair(3, 2, {8, 8}, rng);
      auto actor = policy::make_gaussian_head(3, 2, {8}, true, rng);
      return param_error(actor.net, [&](MlpParams* g) { return cql_actor_loss(actor, c, b, 0.2, bc, 77, g); });
    });
  }
  check("temperature loss", [](Rng& rng) {
    const double la = uniform(rng, -2, 1), mlp = uniform(rng, -3, 1);
    double g = 0.0;
    alpha_loss(la, mlp, -2.0, &g);
    const double fd = (alpha_loss(la + 1e-6, mlp, -2.0, nullptr) - alpha_loss(la - 1e-6, mlp, -2.0, nullptr)) / 2e-6;
    return relative_error(g, fd);
  });
  check("coefficient loss, stochastic statistic", [](Rng& rng) {
    const auto b = random_batch(rng, kBatch, 3, 2);
    const auto head = policy::make_gaussian_head(3, 2, {8}, true, rng);
    auto c = regularizer::make_coefficient_net(3, {8, 8}, 5.0, rng);
    return param_error(c.net, [&](MlpParams* g) { return regularizer::beta_loss_stochastic(c, b, head, 2.0, g); });
  });
  check("coefficient loss, deterministic margin", [](Rng& rng) {
    const auto b = random_batch(rng, kBatch, 3, 2);
    const auto head = policy::make_deterministic_head(3, 2, {8}, 0.1, rng);
    auto c = regularizer::make_coefficient_net(3, {8, 8}, 2.5, rng);
    return param_error(c.net,
                       [&](MlpParams* g) { return regularizer::beta_loss_deterministic(c, b, head, 2.0, g); });
  });
  check("IQL expectile value loss", [](Rng& rng) {
    const auto b = random_batch(rng, kBatch, 3, 2);
    value::IqlConfig cfg;
    cfg.hidden = {8, 8};
    auto p = value::make_iql_pair(3, 2, cfg, rng);
    return param_error(p.v, [&](MlpParams* g) { return value::iql_v_loss(p, b, g); });
  });
  check("IQL Q regression loss", [](Rng& rng) {
    const auto b = random_batch(rng, kBatch, 3, 2);
    value::IqlConfig cfg;
    cfg.hidden = {8, 8};
    auto p = value::make_iql_pair(3, 2, cfg, rng);
    return param_error(p.q, [&](MlpParams* g) { return value::iql_q_loss(p, b, 0.99, g); });
  });
  check("squashed Gaussian reparameterized sample", [](Rng& rng) {
    auto h = policy::make_gaussian_head(3, 2, {16, 16}, true, rng);
    const Matrix s = random_matrix(rng, kBatch, 3);
    const Matrix wa = random_matrix(rng, kBatch, 2);
    const auto wl = random_vector(rng, kBatch, -1, 1);
    const auto loss = [&](MlpParams* g) {
      const policy::Sample smp = policy::sample(h, s, 123u);
      if (g) policy::sample_backward(h, smp, wa, wl, *g);
      double l = 0.0;
      for (std::size_t r = 0; r < kBatch; ++r) {
        l += wl[r] * smp.log_prob[r];
        for (std::size_t c = 0; c < 2; ++c) l += wa(r, c) * smp.actions(r, c);
      }
      return l;
    };
    return param_error(h.net, loss);
  });
  return out;
}

std::vector<CheckResult> verify_expectile_suite() {
  std::vector<CheckResult> out;
  out.push_back(timed("expectile", "IQL V on the two-state chain vs tabular solve", 1e-2, [] {
    // s0 -> s1 with reward 1, s1 -> s0 with reward 0, forever.
    auto d = data::make_dataset(2, 1, {-1.0}, {1.0}, "two-state chain");
    for (int k = 0; k < 50; ++k) {
      d.push_back({{1.0, 0.0}, {0.0}, 1.0, {0.0, 1.0}, false, false});
      d.push_back({{0.0, 1.0}, {0.0}, 0.0, {1.0, 0.0}, false, false});
    }
    value::IqlConfig cfg;
    cfg.tau = 0.5;
    cfg.gamma = 0.9;
    cfg.steps = 30'000;
    cfg.batch_size = 64;
    cfg.hidden = {32, 32};
    cfg.lr = 1e-3;
    cfg.seed = 4;
    const auto p = value::iql_pretrain(d, cfg);
    const double v0 = 1.0 / (1.0 - cfg.gamma * cfg.gamma), v1 = cfg.gamma * v0;
    const double e0 = std::abs(numeric::mlp_forward(p.v, std::vector<double>{1.0, 0.0})[0] - v0);
    const double e1 = std::abs(numeric::mlp_forward(p.v, std::vector<double>{0.0, 1.0})[0] - v1);
    return std::max(e0, e1);
  }));
  out.push_back(timed("expectile", "scalar expectile at tau 0.5 equals the mean", 1e-9, [] {
    Rng rng(8);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const auto x = random_vector(rng, 1 + t % 37, -10, 10);
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= static_cast<double>(x.size());
      worst = std::max(worst, std::abs(value::scalar_expectile(x, 0.5) - mean));
    }
    return worst;
  }));
  // Reported as the number of violations; passes at 0.
  out.push_back(timed("expectile", "scalar expectile is monotone in tau (violations)", 0.5, [] {
    Rng rng(9);
    double violations = 0.0;
    for (int t = 0; t < 100; ++t) {
      const auto x = random_vector(rng, 2 + t % 23, -5, 5);
      double prev = -1e300;
      for (double tau = 0.05; tau < 0.96; tau += 0.05) {
        const double e = value::scalar_expectile(x, tau);
        if (e < prev - 1e-12) violations += 1.0;
        prev = e;
      }
    }
    return violations;
  }));
  return out;
}

std::vector<CheckResult> verify_all() {
  std::vector<CheckResult> rows;
  for (const auto& suite : {verify_proposition_suite, verify_margin_suite, verify_gradient_suite,
                            verify_expectile_suite}) {
    auto r = suite();
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

std::string format_table(const std::vector<CheckResult>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-50s %12s %10s %8s  %s\n", "suite", "check", "value", "tolerance",
                "seconds", "result");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-12s %-50s %12.3e %10.1e %8.2f  %s\n", r.suite.c_str(), r.check.c_str(),
                  r.value, r.tolerance, r.seconds, r.passed ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

bool all_passed(const std::vector<CheckResult>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace ssar::cli

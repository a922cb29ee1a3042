#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "ssar/algorithms/config.hpp"
#include "ssar/algorithms/losses.hpp"
#include "ssar/algorithms/metrics.hpp"
#include "ssar/algorithms/proposition.hpp"
#include "ssar/algorithms/replay.hpp"
#include "ssar/algorithms/train.hpp"
#include "ssar/envs/behavior.hpp"
#include "ssar/error.hpp"
#include "ssar/numeric/optim.hpp"
#include "ssar/regularizer/schedule.hpp"
#include "support/fd.hpp"

using namespace ssar;
using namespace ssar::algorithms;
using ssar::testing::central_difference;
using ssar::testing::max_relative_error;
using ssar::testing::random_matrix;

TEST_SUITE_BEGIN("algorithms");

namespace {

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

// Gaussian head whose distribution ignores the state.
policy::GaussianHead constant_head(std::size_t act_dim, double mu, double log_std) {
  Rng rng(1);
  auto h = policy::make_gaussian_head(1, act_dim, {4}, true, rng);
  auto& last = h.net.layers.back();
  std::fill(last.weight.begin(), last.weight.end(), 0.0);
  for (std::size_t j = 0; j < act_dim; ++j) {
    last.bias[j] = mu;
    last.bias[act_dim + j] = log_std;
  }
  return h;
}

// Critic pair returning `c` everywhere.
value::CriticPair constant_critics(std::size_t obs_dim, std::size_t act_dim, double c1, double c2) {
  Rng rng(2);
  auto cp = value::make_critic_pair(obs_dim, act_dim, {8}, rng);
  for (auto* q : {&cp.q1, &cp.q2}) {
    auto& last = q->layers.back();
    std::fill(last.weight.begin(), last.weight.end(), 0.0);
  }
  cp.q1.layers.back().bias[0] = c1;
  cp.q2.layers.back().bias[0] = c2;
  cp.target1 = cp.q1;
  cp.target2 = cp.q2;
  return cp;
}

double l2(const MlpParams& p) {
  double s = 0.0;
  for (double v : numeric::flatten(p)) s += v * v;
  return std::sqrt(s);
}

const data::Dataset& small_dataset() {
  static const data::Dataset d = [] {
    envs::BehaviorSpec spec;
    spec.mixture = envs::parse_mixture("medium");
    spec.episodes = 5;
    spec.seed = 11;
    return envs::generate_dataset(envs::EnvKind::Pendulum, spec);
  }();
  return d;
}

AlgoConfig small_config(Backbone b) {
  auto c = default_config(b);
  c.actor_hidden = {16, 16};
  c.critic_hidden = {16, 16};
  c.beta_hidden = {16, 16};
  c.batch_size = 32;
  c.eval_episodes = 2;
  c.t_inc = 5;
  return c;
}

}  // namespace

// ---- critic losses -----------------------------------------------------

TEST_CASE("conservative critic loss with zero coefficient is the twin Bellman loss") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto b = random_batch(rng, 32, 3, 2);
    const auto c = value::make_critic_pair(3, 2, {16, 16}, rng);
    const auto actor = policy::make_gaussian_head(3, 2, {16}, true, rng);
    const auto samples = draw_cql_samples(actor, b, 10, rng);
    const auto y = random_vector(rng, 32, -2, 2);
    const std::vector<double> zero(32, 0.0);
    auto g_cql = zero_critic_grads(c), g_td3 = zero_critic_grads(c);
    const double l_cql = cql_critic_loss(c, b, y, zero, samples, &g_cql);
    const double l_td3 = td3_critic_loss(c, b, y, &g_td3);
    CHECK(std::abs(l_cql - l_td3) < 1e-12);
    const auto f1 = numeric::flatten(g_cql.q1), f2 = numeric::flatten(g_td3.q1);
    for (std::size_t i = 0; i < f1.size(); ++i) CHECK(std::abs(f1[i] - f2[i]) < 1e-12);
  }
}

TEST_CASE("tabular conservative loss on four enumerated actions") {
  const std::vector<double> q{1.0, 2.0, 0.5, -1.0};
  // log(e + e^2 + e^0.5 + e^-1) = 2.495181898085856
  CHECK(logsumexp(q) == doctest::Approx(2.495181898085856).epsilon(1e-15));
  CHECK(cql_tabular_loss(q, 1, 5.0, 1.5) == doctest::Approx(2.60090949042928).epsilon(1e-14));
  // beta = 0 leaves the squared error only
  CHECK(cql_tabular_loss(q, 0, 0.0, 3.0) == doctest::Approx(2.0));
}

namespace {

// log of the integral of exp(Q) over [-1, 1] by the midpoint rule.
double quadrature_log_integral(const std::function<double(double)>& q) {
  constexpr int kCells = 200000;
  const double h = 2.0 / kCells;
  double m = -1e300;
  std::vector<double> v(kCells);
  for (int k = 0; k < kCells; ++k) {
    v[k] = q(-1.0 + (k + 0.5) * h);
    m = std::max(m, v[k]);
  }
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s * h);
}

// Sampled estimate with `n` uniform and `n` policy draws.
double sampled_log_integral(const std::function<double(double)>& q, const policy::GaussianHead& head, std::size_t n,
                            Rng& rng) {
  std::vector<double> v;
  for (std::size_t k = 0; k < n; ++k) v.push_back(q(uniform(rng, -1.0, 1.0)) + std::numbers::ln2);
  const auto s = policy::sample(head, Matrix(n, 1), rng);
  for (std::size_t k = 0; k < n; ++k) v.push_back(q(s.actions(k, 0)) - s.log_prob[k]);
  return sampled_logsumexp(v);
}

}  // namespace

TEST_CASE("sampled log-sum-exp tracks quadrature and improves with samples") {
  const auto q = [](double a) { return 2.0 * std::sin(3.0 * a) + a * a; };
  const double truth = quadrature_log_integral(q);
  const auto head = constant_head(1, 0.3, std::log(0.5));
  Rng rng(5);
  double prev = 1e300;
  for (std::size_t n : {10, 100, 1000}) {
    double err = 0.0;
    constexpr int kReps = 200;
    for (int r = 0; r < kReps; ++r) err += std::abs(sampled_log_integral(q, head, n, rng) - truth);
    err /= kReps;
    CHECK(err < prev);
    prev = err;
    if (n == 1000) CHECK(err < 0.05);
  }
}

TEST_CASE("TD3 target ignores bootstrap at terminals and at gamma zero") {
  Rng rng(6);
  auto b = random_batch(rng, 16, 3, 1);
  const auto c = value::make_critic_pair(3, 1, {16}, rng);
  const auto actor = policy::make_deterministic_head(3, 1, {16}, 0.1, rng);
  const Matrix noise = td3_target_noise(rng, 16, 1, 0.2, 0.5);
  for (double v : noise.values()) CHECK(std::abs(v) <= 0.5);
  const auto y0 = td3_target(c, actor, b, 0.0, noise);
  for (std::size_t i = 0; i < 16; ++i) CHECK(y0[i] == b.rewards[i]);
  std::fill(b.not_done.begin(), b.not_done.end(), 0.0);
  const auto yt = td3_target(c, actor, b, 0.99, noise);
  for (std::size_t i = 0; i < 16; ++i) CHECK(yt[i] == b.rewards[i]);
}

namespace {

// Adam on both critics toward the TD3 target, with the targets tracking.
void fit_critics(value::CriticPair& c, const policy::DeterministicHead& actor, const data::Batch& b, double gamma,
                 int steps, double lr) {
  auto o1 = numeric::make_adam(c.q1, {.lr = lr});
  auto o2 = numeric::make_adam(c.q2, {.lr = lr});
  const Matrix zero(b.size(), actor.act_dim());
  for (int t = 0; t < steps; ++t) {
    const double frac = static_cast<double>(t) / steps;
    o1.config.lr = o2.config.lr = lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
    const auto y = td3_target(c, actor, b, gamma, zero);
    auto g = zero_critic_grads(c);
    td3_critic_loss(c, b, y, &g);
    numeric::adam_step(o1, c.q1, g.q1);
    numeric::adam_step(o2, c.q2, g.q2);
    value::soft_update(c);
  }
}

}  // namespace

TEST_CASE("TD3 critic regresses onto rewards when gamma is zero") {
  Rng rng(7);
  const auto b = random_batch(rng, 32, 3, 1);
  auto c = value::make_critic_pair(3, 1, {32, 32}, rng);
  const auto actor = policy::make_deterministic_head(3, 1, {16}, 0.1, rng);
  fit_critics(c, actor, b, 0.0, 6000, 3e-3);
  const auto q1 = value::q_value(c.q1, b.obs, b.actions);
  const auto q2 = value::q_value(c.q2, b.obs, b.actions);
  double worst = 0.0;
  for (std::size_t i = 0; i < 32; ++i) worst = std::max({worst, std::abs(q1[i] - b.rewards[i]), std::abs(q2[i] - b.rewards[i])});
  CHECK(worst < 1e-3);
}

TEST_CASE("TD3 critic matches the two-state value iteration oracle") {
  // s0 -> s1 with reward 1, s1 -> s0 with reward 0, action fixed at 0.3 by a
  // constant actor. Q(s0) = 1 / (1 - g^2), Q(s1) = g / (1 - g^2).
  constexpr double g = 0.9;
  data::Batch b;
  b.obs = Matrix(2, 1);
  b.obs(1, 0) = 1.0;
  b.next_obs = Matrix(2, 1);
  b.next_obs(0, 0) = 1.0;
  b.actions = Matrix(2, 1, 0.3);
  b.rewards = {1.0, 0.0};
  b.not_done = {1.0, 1.0};
  b.in_subset = {1, 1};
  Rng rng(8);
  auto actor = policy::make_deterministic_head(1, 1, {4}, 0.1, rng);
  std::fill(actor.net.layers.back().weight.begin(), actor.net.layers.back().weight.end(), 0.0);
  actor.net.layers.back().bias[0] = std::atanh(0.3);
  auto c = value::make_critic_pair(1, 1, {32, 32}, rng, 0.05);
  fit_critics(c, actor, b, g, 20000, 3e-3);
  const auto q = value::q_value(c.q1, b.obs, b.actions);
  CHECK(std::abs(q[0] - 1.0 / (1.0 - g * g)) < 1e-2);
  CHECK(std::abs(q[1] - g / (1.0 - g * g)) < 1e-2);
}

// ---- actor losses ------------------------------------------------------

TEST_CASE("TD3+BC actor outside the sub-dataset is pure normalized Q ascent") {
  Rng rng(9);
  auto b = random_batch(rng, 16, 3, 2);
  const auto c = value::make_critic_pair(3, 2, {16}, rng);
  const auto actor = policy::make_deterministic_head(3, 2, {16}, 0.1, rng);
  const auto beta = random_vector(rng, 16, 0.5, 3.0);
  std::fill(b.in_subset.begin(), b.in_subset.end(), 0);
  auto g_out = numeric::zeros_like(actor.net);
  Td3bcTerms t;
  td3bc_actor_loss(actor, c, b, beta, &g_out, &t);
  CHECK(t.bc_term == 0.0);
  std::fill(b.in_subset.begin(), b.in_subset.end(), 1);
  const std::vector<double> zero(16, 0.0);
  auto g_q = numeric::zeros_like(actor.net);
  td3bc_actor_loss(actor, c, b, zero, &g_q);
  CHECK(numeric::flatten(g_out) == numeric::flatten(g_q));
}

TEST_CASE("TD3+BC actor with huge coefficient moves every state toward its action") {
  // Shared weights couple the states of one batch, so each state gets its
  // own one-row batch and its own step from the same starting actor.
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    auto b = random_batch(rng, 8, 3, 1);
    std::fill(b.in_subset.begin(), b.in_subset.end(), 1);
    const auto c = value::make_critic_pair(3, 1, {16}, rng);
    const auto start = policy::make_deterministic_head(3, 1, {16}, 0.1, rng);
    const std::vector<double> beta(1, 1e6);
    for (std::size_t i = 0; i < 8; ++i) {
      const auto row = data::slice(b, i, i + 1);
      auto actor = start;
      auto g = numeric::zeros_like(actor.net);
      td3bc_actor_loss(actor, c, row, beta, &g);
      const double before = policy::act(actor, row.obs)(0, 0);
      auto opt = numeric::make_adam(actor.net, {.lr = 1e-4});
      numeric::adam_step(opt, actor.net, g);
      const double after = policy::act(actor, row.obs)(0, 0);
      CHECK(std::abs(after - row.actions(0, 0)) < std::abs(before - row.actions(0, 0)));
    }
  }
}

TEST_CASE("TD3+BC actor under a constant critic follows the BC gradient") {
  Rng rng(11);
  const auto b = random_batch(rng, 16, 3, 2);
  const auto c = constant_critics(3, 2, -4.0, -4.0);
  const auto actor = policy::make_deterministic_head(3, 2, {16}, 0.1, rng);
  const auto beta = random_vector(rng, 16, 0.5, 3.0);
  auto g = numeric::zeros_like(actor.net);
  Td3bcTerms t;
  td3bc_actor_loss(actor, c, b, beta, &g, &t);
  CHECK(t.q_scale == doctest::Approx(0.25));

  numeric::GradTape tape;
  const Matrix pi = numeric::forward(actor.net, b.obs, tape);
  Matrix d(16, 2);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      d(i, j) = b.in_subset[i] ? 2.0 * beta[i] * (pi(i, j) - b.actions(i, j)) / 16.0 : 0.0;
  auto expect = numeric::zeros_like(actor.net);
  numeric::backward(actor.net, tape, d, &expect, nullptr);
  const auto a = numeric::flatten(g), e = numeric::flatten(expect);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(e[k]).epsilon(1e-12));
}

TEST_CASE("CQL actor under a constant critic sees only the entropy gradient") {
  Rng rng(12);
  const auto b = random_batch(rng, 16, 3, 2);
  const auto actor = policy::make_gaussian_head(3, 2, {16}, true, rng);
  const auto c1 = constant_critics(3, 2, 1.0, 2.0), c2 = constant_critics(3, 2, -7.0, 3.0);
  auto g1 = numeric::zeros_like(actor.net), g2 = numeric::zeros_like(actor.net);
  cql_actor_loss(actor, c1, b, 0.3, false, 99, &g1);
  cql_actor_loss(actor, c2, b, 0.3, false, 99, &g2);
  const auto f1 = numeric::flatten(g1), f2 = numeric::flatten(g2);
  for (std::size_t k = 0; k < f1.size(); ++k) CHECK(f1[k] == doctest::Approx(f2[k]).epsilon(1e-12));
  CHECK(l2(g1) > 0.0);
  auto g0 = numeric::zeros_like(actor.net);
  cql_actor_loss(actor, c1, b, 0.0, false, 99, &g0);
  CHECK(l2(g0) == 0.0);
}

TEST_CASE("CQL BC term vanishes when the policy sits on the data action") {
  Rng rng(13);
  auto b = random_batch(rng, 16, 1, 1);
  const auto actor = constant_head(1, std::atanh(0.4), -20.0);  // clamped to the narrowest sigma
  for (std::size_t i = 0; i < 16; ++i) b.actions(i, 0) = 0.4;
  CqlActorTerms t;
  cql_actor_loss(actor, constant_critics(1, 1, 0, 0), b, 0.1, true, 5, nullptr, &t);
  const double sigma = std::exp(policy::kLogStdMin) * (1.0 - 0.16);
  CHECK(t.bc_term < 4.0 * sigma * sigma);
  CqlActorTerms off;
  cql_actor_loss(actor, constant_critics(1, 1, 0, 0), b, 0.1, false, 5, nullptr, &off);
  CHECK(off.bc_term == 0.0);
}

TEST_CASE("CQL actor converges to the maximizer of a quadratic critic") {
  constexpr double a_star = 0.4;
  Rng rng(14);
  // fit both critics to -(a - a*)^2 on random (s, a)
  auto c = value::make_critic_pair(1, 1, {32, 32}, rng);
  {
    auto o1 = numeric::make_adam(c.q1, {.lr = 3e-3});
    auto o2 = numeric::make_adam(c.q2, {.lr = 3e-3});
    for (int t = 0; t < 4000; ++t) {
      data::Batch b = random_batch(rng, 128, 1, 1);
      for (std::size_t i = 0; i < 128; ++i) b.actions(i, 0) = uniform(rng, -1.0, 1.0);
      std::vector<double> y(128);
      for (std::size_t i = 0; i < 128; ++i) y[i] = -(b.actions(i, 0) - a_star) * (b.actions(i, 0) - a_star);
      auto g = zero_critic_grads(c);
      td3_critic_loss(c, b, y, &g);
      numeric::adam_step(o1, c.q1, g.q1);
      numeric::adam_step(o2, c.q2, g.q2);
    }
  }
  auto actor = policy::make_gaussian_head(1, 1, {16}, true, rng);
  auto opt = numeric::make_adam(actor.net, {.lr = 3e-3});
  for (int t = 0; t < 5000; ++t) {
    const auto b = random_batch(rng, 64, 1, 1);
    auto g = numeric::zeros_like(actor.net);
    cql_actor_loss(actor, c, b, 1e-3, false, rng(), &g);
    numeric::adam_step(opt, actor.net, g);
  }
  const Matrix probe = random_matrix(rng, 32, 1, -1.5, 1.5);
  const Matrix mean = policy::mean_action(actor, probe);
  for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(mean(i, 0) - a_star) < 0.05);
}

TEST_CASE("temperature objective pushes entropy toward its target") {
  double g = 0.0;
  alpha_loss(0.0, -0.5, -2.0, &g);  // entropy 0.5 above target -> lower alpha
  CHECK(g > 0.0);
  alpha_loss(0.0, 3.0, -2.0, &g);  // entropy too low -> raise alpha
  CHECK(g < 0.0);
}

// ---- gradient suite ----------------------------------------------------

TEST_CASE("every backbone loss matches central differences") {
  Rng rng(15);
  for (int trial = 0; trial < 3; ++trial) {
    const auto b = random_batch(rng, 16, 3, 2);
    auto c = value::make_critic_pair(3, 2, {8, 8}, rng);
    const auto y = random_vector(rng, 16, -2, 2);
    const auto beta = random_vector(rng, 16, 0.1, 4.0);

    SUBCASE("twin Bellman loss") {
      auto g = zero_critic_grads(c);
      td3_critic_loss(c, b, y, &g);
      const auto fd1 = central_difference(c.q1, [&] { return td3_critic_loss(c, b, y, nullptr); });
      const auto fd2 = central_difference(c.q2, [&] { return td3_critic_loss(c, b, y, nullptr); });
      CHECK(max_relative_error(numeric::flatten(g.q1), fd1) < 1e-3);
      CHECK(max_relative_error(numeric::flatten(g.q2), fd2) < 1e-3);
    }
    SUBCASE("conservative critic loss") {
      const auto actor = policy::make_gaussian_head(3, 2, {8}, true, rng);
      const auto s = draw_cql_samples(actor, b, 10, rng);
      auto g = zero_critic_grads(c);
      cql_critic_loss(c, b, y, beta, s, &g);
      const auto loss = [&] { return cql_critic_loss(c, b, y, beta, s, nullptr); };
      CHECK(max_relative_error(numeric::flatten(g.q1), central_difference(c.q1, loss)) < 1e-3);
      CHECK(max_relative_error(numeric::flatten(g.q2), central_difference(c.q2, loss)) < 1e-3);
    }
    SUBCASE("TD3+BC actor loss") {
      auto actor = policy::make_deterministic_head(3, 2, {8}, 0.1, rng);
      auto g = numeric::zeros_like(actor.net);
      td3bc_actor_loss(actor, c, b, beta, &g);
      const auto fd = central_difference(actor.net, [&] { return td3bc_actor_loss(actor, c, b, beta, nullptr); });
      CHECK(max_relative_error(numeric::flatten(g), fd) < 1e-3);
    }
    SUBCASE("CQL actor loss, with and without BC") {
      auto actor = policy::make_gaussian_head(3, 2, {8}, true, rng);
      for (bool bc : {false, true}) {
        auto g = numeric::zeros_like(actor.net);
        cql_actor_loss(actor, c, b, 0.2, bc, 77, &g);
        const auto fd =
            central_difference(actor.net, [&] { return cql_actor_loss(actor, c, b, 0.2, bc, 77, nullptr); });
        CHECK(max_relative_error(numeric::flatten(g), fd) < 1e-3);
      }
    }
    SUBCASE("temperature loss") {
      double la = uniform(rng, -2, 1), g = 0.0;
      alpha_loss(la, -0.7, -2.0, &g);
      const double fd = (alpha_loss(la + 1e-6, -0.7, -2.0, nullptr) - alpha_loss(la - 1e-6, -0.7, -2.0, nullptr)) / 2e-6;
      CHECK(g == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

// ---- tabular equivalence -----------------------------------------------

TEST_CASE("penalty and negative log-likelihood gradients coincide") {
  const auto r = verify_proposition1(1000, 21);
  CHECK(r.instances == 1000);
  CHECK(r.max_discrepancy < 1e-10);
  Rng rng(22);
  for (double alpha : {0.1, 1.0, 10.0}) {
    const auto q = random_vector(rng, 4, -5, 5);
    CHECK(proposition1_discrepancy(q, 2, alpha) < 1e-9);
  }
  const std::vector<double> flat(5, 1.7);
  const auto g = penalty_gradient(flat, 3, 0.5);
  for (std::size_t j = 0; j < 5; ++j) CHECK(g[j] == doctest::Approx(0.2 - (j == 3 ? 1.0 : 0.0)).epsilon(1e-15));
  CHECK(proposition1_discrepancy(flat, 3, 0.5) < 1e-15);
  CHECK_THROWS_AS(penalty_gradient(flat, 5, 1.0), UserError);
}

// ---- replay --------------------------------------------------------------

TEST_CASE("replay strategies and symmetric sampling") {
  const auto& d = small_dataset();
  std::vector<std::uint8_t> member(d.size(), 0);
  for (std::size_t i = 0; i < d.size(); i += 3) member[i] = 1;
  const auto mask = data::make_mask(member, data::SelectionMode::Return, 0.0, "");

  auto none = make_replay_buffer(BufferStrategy::None, d, mask);
  CHECK(none.offline_size() == 0);
  auto part = make_replay_buffer(BufferStrategy::Part, d, mask);
  CHECK(part.offline_size() == mask.count());
  auto all = make_replay_buffer(BufferStrategy::All, d, mask);
  CHECK(all.offline_size() == d.size());
  CHECK(all.mode() == SamplingMode::Uniform);
  auto half = make_replay_buffer(BufferStrategy::Half, d, mask);
  CHECK(half.mode() == SamplingMode::Symmetric);

  // tag online rows with reward 1e3 so they can be counted
  for (int k = 0; k < 10; ++k) {
    data::Transition t = d.at(k);
    t.r = 1e3;
    for (auto* b : {&none, &part, &all, &half}) b->add_online(t);
  }
  Rng rng(23);
  for (std::size_t n : {7, 8, 255}) {
    const auto b = half.sample(rng, n);
    const auto online = std::count(b.rewards.begin(), b.rewards.end(), 1e3);
    CHECK(static_cast<std::size_t>(online) == (n + 1) / 2);
  }
  for (auto* buf : {&none, &part, &all, &half}) {
    const auto b = buf->sample(rng, 256);
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b.rewards[i] == 1e3) CHECK(b.in_subset[i] == 1);
  }
  const auto b = none.sample(rng, 64);
  CHECK(std::count(b.rewards.begin(), b.rewards.end(), 1e3) == 64);
  const auto bp = part.sample(rng, 256);
  for (auto f : bp.in_subset) CHECK(f == 1);
}

// ---- training loops -----------------------------------------------------

TEST_CASE("offline iterations follow policy, critic, coefficient order") {
  const auto& d = small_dataset();
  const auto mask = data::select_all(d);
  auto st = make_train_state(small_config(Backbone::CqlSa), envs::EnvKind::Pendulum, d);
  st.record_trace = true;
  for (int i = 0; i < 6; ++i) offline_iteration(st, d, mask);
  CHECK(st.trace == "PQBPQBPQBPQBPQBPQB");
  CHECK(st.counters.policy_updates == 6);
  CHECK(st.counters.critic_updates == 6);
  CHECK(st.counters.beta_updates == 6);

  auto td = make_train_state(small_config(Backbone::Td3BcSa), envs::EnvKind::Pendulum, d);
  td.record_trace = true;
  for (int i = 0; i < 4; ++i) offline_iteration(td, d, mask);
  CHECK(td.trace == "PQBQBPQBQB");  // delayed actor, every other iteration

  auto fixed_cfg = small_config(Backbone::Td3BcSa);
  fixed_cfg.adaptive_beta = false;
  auto fx = make_train_state(fixed_cfg, envs::EnvKind::Pendulum, d);
  fx.record_trace = true;
  for (int i = 0; i < 2; ++i) offline_iteration(fx, d, mask);
  CHECK(fx.trace == "PQQ");
  const auto betas = batch_beta(fx, fx.eval_batch.obs);
  for (double v : betas) CHECK(v == fixed_cfg.beta_init);
}

TEST_CASE("schedule advances during offline training") {
  const auto& d = small_dataset();
  auto cfg = small_config(Backbone::Td3BcSa);
  cfg.steps = 20;
  cfg.eval_every = 10;
  auto st = make_train_state(cfg, envs::EnvKind::Pendulum, d);
  offline_train(st, d, data::select_all(d));
  CHECK(st.schedule.stat_seen);
  // four intervals of T_inc = 5 over T = 20; either all increments landed or n froze early
  if (!st.schedule.frozen()) CHECK(st.schedule.n() == doctest::Approx(cfg.n_end));
  else CHECK(st.schedule.n() <= cfg.n_end);
}

TEST_CASE("zero offline steps leave the initial state untouched") {
  const auto& d = small_dataset();
  auto cfg = small_config(Backbone::CqlSa);
  cfg.steps = 0;
  const auto fresh = make_train_state(cfg, envs::EnvKind::Pendulum, d);
  auto st = fresh;
  const auto m = offline_train(st, d, data::select_all(d));
  CHECK(m.size() == 1);
  CHECK(m[0].step == 0);
  CHECK(st.stochastic.net == fresh.stochastic.net);
  CHECK(st.critics.q1 == fresh.critics.q1);
  CHECK(st.coef.net == fresh.coef.net);
  CHECK(st.counters.critic_updates == 0);
}

TEST_CASE("identical seeds give identical metric streams") {
  const auto& d = small_dataset();
  const auto mask = data::select_all(d);
  for (Backbone bb : {Backbone::Td3BcSa, Backbone::CqlSa}) {
    auto cfg = small_config(bb);
    cfg.steps = 40;
    cfg.eval_every = 20;
    std::vector<std::string> lines[2];
    for (auto& out : lines) {
      auto st = make_train_state(cfg, envs::EnvKind::Pendulum, d);
      for (const auto& r : offline_train(st, d, mask)) out.push_back(to_json_line(r));
    }
    CHECK(lines[0] == lines[1]);
    cfg.seed = 1;
    auto other = make_train_state(cfg, envs::EnvKind::Pendulum, d);
    const auto m = offline_train(other, d, mask);
    CHECK(to_json_line(m.back()) != lines[0].back());
  }
}

TEST_CASE("online phase with an empty buffer waits out the warm-up") {
  const auto& d = small_dataset();
  const auto mask = data::select_all(d);
  auto cfg = small_config(Backbone::Td3BcSa);
  cfg.steps = 10;
  cfg.eval_every = 10;
  cfg.strategy = BufferStrategy::None;
  cfg.online_steps = 5010;
  auto st = make_train_state(cfg, envs::EnvKind::Pendulum, d);
  offline_train(st, d, mask);
  const auto hash = numeric::parameter_hash(st.coef.net);
  const auto before = st.counters;
  const auto m = online_finetune(st, d, mask);
  CHECK(st.counters.first_update_step == 5001);
  CHECK(st.counters.critic_updates - before.critic_updates == 10);
  CHECK(st.counters.beta_updates == before.beta_updates);
  CHECK(st.counters.env_steps == 5010);
  for (const auto& r : m) {
    CHECK(r.phase == "online");
    CHECK(r.phi_hash == hash);
  }
  CHECK(m.back().step == 5010);
  CHECK(m.back().beta_scale == doctest::Approx(1.0 - 5009.0 / 400000.0));
  CHECK(regularizer::anneal_scale(250000, 400000) == doctest::Approx(0.375));
}

TEST_CASE("online CQL fine-tuning freezes the coefficient network") {
  const auto& d = small_dataset();
  const auto mask = data::select_all(d);
  auto cfg = small_config(Backbone::CqlSa);
  cfg.steps = 10;
  cfg.eval_every = 10;
  cfg.strategy = BufferStrategy::Half;
  cfg.warmup_steps = 20;
  cfg.online_steps = 60;
  cfg.online_eval_every = 20;
  auto st = make_train_state(cfg, envs::EnvKind::Pendulum, d);
  offline_train(st, d, mask);
  const auto phi = st.coef.net;
  const auto n = st.schedule.n();
  const auto m = online_finetune(st, d, mask);
  CHECK(st.coef.net == phi);
  CHECK(st.schedule.n() == n);
  CHECK(m.size() == 4);
  CHECK(st.counters.first_update_step == 21);
}

// ---- persistence --------------------------------------------------------

TEST_CASE("metric records round-trip through JSON lines") {
  Rng rng(24);
  MetricRecord r;
  r.step = 12345;
  r.phase = "offline";
  r.eval_return_mean = uniform(rng, -1000, 0);
  r.eval_return_std = uniform(rng, 0, 100);
  r.normalized_score = 1.0 / 3.0;
  r.q_mean = -std::numbers::pi;
  r.beta_mean = 2.5;
  r.frozen = true;
  r.phi_hash = 0xfedcba9876543210ULL;
  const std::string line = to_json_line(r);
  CHECK(line.find("\"step\":12345") == 1);
  CHECK(parse_json_line(line) == r);
  CHECK_THROWS_AS(parse_json_line("{oops"), Error);
}

TEST_CASE("checkpoint restores networks, optimizers and schedule") {
  const auto& d = small_dataset();
  auto cfg = small_config(Backbone::CqlSa);
  cfg.steps = 12;
  auto st = make_train_state(cfg, envs::EnvKind::Pendulum, d);
  offline_train(st, d, data::select_all(d));
  const auto path = std::filesystem::temp_directory_path() / "ssar_algo_ckpt.bin";
  numeric::save_checkpoint(path, to_checkpoint(st));
  auto fresh = make_train_state(cfg, envs::EnvKind::Pendulum, d);
  restore(fresh, numeric::load_checkpoint(path));
  std::filesystem::remove(path);
  CHECK(fresh.stochastic.net == st.stochastic.net);
  CHECK(fresh.critics.target2 == st.critics.target2);
  CHECK(fresh.coef_opt == st.coef_opt);
  CHECK(fresh.log_alpha == st.log_alpha);
  CHECK(fresh.schedule.n() == st.schedule.n());
  CHECK(fresh.offline_step == 12);
  CHECK(fresh.counters.critic_updates == st.counters.critic_updates);

  auto other = make_train_state(small_config(Backbone::Td3BcSa), envs::EnvKind::Pendulum, d);
  CHECK_THROWS_AS(restore(other, to_checkpoint(st)), Error);
}

TEST_CASE("configuration validation and names") {
  auto c = default_config(Backbone::CqlSa);
  CHECK(c.beta_init == 5.0);
  CHECK(default_config(Backbone::Td3BcSa).beta_init == 2.5);
  CHECK_NOTHROW(c.validate());
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), UserError);
  c = default_config(Backbone::CqlSa);
  c.critic_hidden = {};
  CHECK_THROWS_AS(c.validate(), UserError);
  CHECK(parse_backbone(backbone_name(Backbone::CqlSa)) == Backbone::CqlSa);
  for (auto s : {BufferStrategy::All, BufferStrategy::Half, BufferStrategy::Part, BufferStrategy::None})
    CHECK(parse_strategy(strategy_name(s)) == s);
  CHECK_THROWS_AS(parse_strategy("most"), UserError);

  envs::BehaviorSpec spec;
  spec.mixture = envs::parse_mixture("random");
  spec.episodes = 1;
  const auto maze = envs::generate_dataset(envs::EnvKind::PointMaze, spec);
  CHECK_THROWS_AS(make_train_state(default_config(Backbone::CqlSa), envs::EnvKind::Pendulum, maze), UserError);
}

TEST_SUITE_END();

#include "ssar/algorithms/proposition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssar/error.hpp"
#include "ssar/numeric/random.hpp"

namespace ssar::algorithms {

double logsumexp(std::span<const double> q) {
  if (q.empty()) throw Error("empty_samples", "log-sum-exp of an empty set");
  const double m = *std::max_element(q.begin(), q.end());
  double s = 0.0;
  for (double x : q) s += std::exp(x - m);
  return m + std::log(s);
}

double cql_tabular_loss(std::span<const double> q, std::size_t a, double beta, double y) {
  const double e = q[a] - y;
  return beta * (logsumexp(q) - q[a]) + 0.5 * e * e;
}

namespace {

void check(std::span<const double> q, std::size_t a, double alpha) {
  if (q.empty() || a >= q.size())
    throw UserError("bad_action", "action index outside the action set", {{"a", std::to_string(a)}});
  if (!(alpha > 0.0)) throw UserError("bad_alpha", "temperature must be positive");
}

std::vector<double> softmax(std::span<const double> q, double alpha) {
  std::vector<double> z(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) z[j] = q[j] / alpha;
  const double lse = logsumexp(z);
  for (double& v : z) v = std::exp(v - lse);
  return z;
}

}  // namespace

std::vector<double> penalty_gradient(std::span<const double> q, std::size_t a, double alpha) {
  check(q, a, alpha);
  auto g = softmax(q, alpha);
  g[a] -= 1.0;
  return g;
}

std::vector<double> nll_gradient(std::span<const double> q, std::size_t a, double alpha) {
  check(q, a, alpha);
  const auto p = softmax(q, alpha);
  // d(-log p_a)/dq_j = -(1/p_a) dp_a/dq_j, with dp_a/dq_j = p_a (1[a=j] - p_j) / alpha
  std::vector<double> g(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double dp = p[a] * ((j == a ? 1.0 : 0.0) - p[j]) / alpha;
    g[j] = alpha * (-dp / p[a]);
  }
  return g;
}

double proposition1_discrepancy(std::span<const double> q, std::size_t a, double alpha) {
  const auto g1 = penalty_gradient(q, a, alpha);
  const auto g2 = nll_gradient(q, a, alpha);
  double worst = 0.0;
  for (std::size_t j = 0; j < g1.size(); ++j) worst = std::max(worst, std::abs(g1[j] - g2[j]));
  return worst;
}

PropositionReport verify_proposition1(std::size_t instances, std::uint64_t seed) {
  Rng rng(seed);
  PropositionReport r;
  std::uniform_int_distribution<std::size_t> size_pick(2, 8);
  std::vector<double> q;
  for (std::size_t k = 0; k < instances; ++k) {
    q.resize(size_pick(rng));
    for (double& v : q) v = uniform(rng, -5.0, 5.0);
    const std::size_t a = std::uniform_int_distribution<std::size_t>(0, q.size() - 1)(rng);
    const double alpha = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
    r.max_discrepancy = std::max(r.max_discrepancy, proposition1_discrepancy(q, a, alpha));
    ++r.instances;
  }
  return r;
}

}  // namespace ssar::algorithms

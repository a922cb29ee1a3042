#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ssar::algorithms {

/// log sum_j exp(q_j), shifted by the max.
double logsumexp(std::span<const double> q);

/// Conservative penalty on one tabular state with an enumerable action set:
/// beta * (logsumexp(q) - q[a]) + 1/2 (q[a] - y)^2.
double cql_tabular_loss(std::span<const double> q, std::size_t a, double beta, double y);

/// Gradient of alpha * [logsumexp(q / alpha) - q[a] / alpha] with respect to
/// q, written in closed form: softmax(q / alpha) - e_a.
std::vector<double> penalty_gradient(std::span<const double> q, std::size_t a, double alpha);

/// Gradient of -log softmax(q / alpha)[a], obtained independently by the
/// chain rule through the softmax Jacobian, rescaled by alpha so both
/// routes measure the same objective scale.
std::vector<double> nll_gradient(std::span<const double> q, std::size_t a, double alpha);

struct PropositionReport {
  std::size_t instances = 0;
  double max_discrepancy = 0.0;
};

/// Random tabular instances: |A| uniform in [2, 8], q ~ U(-5, 5), alpha
/// log-uniform in [0.1, 10].
PropositionReport verify_proposition1(std::size_t instances, std::uint64_t seed);

/// One explicit instance.
double proposition1_discrepancy(std::span<const double> q, std::size_t a, double alpha);

}  // namespace ssar::algorithms

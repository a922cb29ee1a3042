#pragma once

// Central-difference gradient checks, shared by the test suites and the
// verify subcommand.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "ssar/numeric/mlp.hpp"
#include "ssar/numeric/random.hpp"

namespace ssar::numeric::gradcheck {

/// Central differences of `loss` with respect to every entry of `x`.
inline std::vector<double> central_difference(std::span<double> x, const std::function<double()>& loss,
                                              double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = loss();
    x[i] = keep - h;
    const double down = loss();
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Same, over every parameter of a network, in flatten() order.
inline std::vector<double> central_difference(numeric::MlpParams& p, const std::function<double()>& loss,
                                              double h = 1e-5) {
  std::vector<double> g;
  numeric::for_each_buffer(p, [&](std::span<double> b) {
    const auto part = central_difference(b, loss, h);
    g.insert(g.end(), part.begin(), part.end());
  });
  return g;
}

// Entries below `floor` in magnitude are compared on an absolute scale,
// otherwise roundoff in the difference quotient dominates.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, relative_error(a[i], b[i], floor));
  return worst;
}

inline numeric::Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                                     double hi = 1.0) {
  numeric::Matrix m(rows, cols);
  for (double& v : m.values()) v = uniform(rng, lo, hi);
  return m;
}

}  // namespace ssar::numeric::gradcheck

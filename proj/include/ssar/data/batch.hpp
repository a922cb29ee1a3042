#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssar/data/dataset.hpp"
#include "ssar/numeric/matrix.hpp"

namespace ssar::data {

/// A mini-batch in learner coordinates: actions mapped affinely from the
/// dataset's action box onto [-1, 1].
struct Batch {
  numeric::Matrix obs;
  numeric::Matrix actions;
  numeric::Matrix next_obs;
  std::vector<double> rewards;
  std::vector<double> not_done;  // 1 - terminal; timeouts still bootstrap
  std::vector<std::uint8_t> in_subset;

  std::size_t size() const { return rewards.size(); }
  std::size_t subset_count() const;
};

double normalize_action(double a, double low, double high);
double denormalize_action(double a, double low, double high);
std::vector<double> denormalize_action(std::span<const double> a, std::span<const double> low,
                                       std::span<const double> high);

/// Rows `indices` of `d`. `subset` (may be empty) supplies D-hat membership;
/// without it every row counts as a member.
Batch gather(const Dataset& d, std::span<const std::size_t> indices,
             std::span<const std::uint8_t> subset = {});

/// Whole dataset as one batch.
Batch gather_all(const Dataset& d, std::span<const std::uint8_t> subset = {});

/// Rows [begin, end) of `b`.
Batch slice(const Batch& b, std::size_t begin, std::size_t end);

/// Rows of `tail` appended to `head`.
void append(Batch& head, const Batch& tail);

}  // namespace ssar::data

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ssar/data/dataset.hpp"

namespace ssar::data {

/// A maximal run of transitions ending at a terminal, a timeout, or the end
/// of the dataset. Indices are [begin, end).
struct Trajectory {
  std::size_t begin = 0;
  std::size_t end = 0;
  double ret = 0.0;  // undiscounted
  bool success = false;

  std::size_t length() const { return end - begin; }
};

/// Success means the trajectory ends in a terminal transition with positive
/// reward (reaching the goal in the sparse environments).
std::vector<Trajectory> segment_trajectories(const Dataset& d);

enum class SelectionMode : std::uint8_t { All, Return, Advantage, Success };

std::string_view selection_mode_name(SelectionMode m);

/// Membership of each transition in the regularized sub-dataset, with the
/// member indices materialized for direct sampling.
struct SubDatasetMask {
  std::vector<std::uint8_t> member;
  std::vector<std::size_t> indices;
  SelectionMode mode = SelectionMode::All;
  double parameter = 0.0;  // G_T for Return, expectile tau for Advantage

  std::size_t size() const { return member.size(); }
  std::size_t count() const { return indices.size(); }
  bool contains(std::size_t i) const { return member[i] != 0; }
};

/// Builds the index list from `member`; throws "empty_selection" if no
/// transition is selected.
SubDatasetMask make_mask(std::vector<std::uint8_t> member, SelectionMode mode, double parameter,
                         std::string_view advice);

SubDatasetMask select_all(const Dataset& d);
SubDatasetMask select_by_return(const Dataset& d, double threshold);
SubDatasetMask select_by_success(const Dataset& d);

/// Strict Q(s,a) - V(s) > 0 per transition. `tau` is recorded only.
SubDatasetMask select_by_advantage(const Dataset& d, std::span<const double> q, std::span<const double> v,
                                   double tau);

}  // namespace ssar::data

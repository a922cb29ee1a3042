#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ssar::data {

struct Transition {
  std::vector<double> s;
  std::vector<double> a;
  double r = 0.0;
  std::vector<double> s_next;
  bool terminal = false;
  bool timeout = false;
};

/// Columnar offline experience. Observations and actions are row-major,
/// one row per transition.
struct Dataset {
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  std::vector<double> observations;
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<double> next_observations;
  std::vector<std::uint8_t> terminals;
  std::vector<std::uint8_t> timeouts;
  std::vector<double> action_low;
  std::vector<double> action_high;
  std::string provenance;

  std::size_t size() const { return rewards.size(); }

  std::span<const double> obs(std::size_t i) const { return {observations.data() + i * obs_dim, obs_dim}; }
  std::span<const double> action(std::size_t i) const { return {actions.data() + i * act_dim, act_dim}; }
  std::span<const double> next_obs(std::size_t i) const {
    return {next_observations.data() + i * obs_dim, obs_dim};
  }
  bool terminal(std::size_t i) const { return terminals[i] != 0; }
  bool timeout(std::size_t i) const { return timeouts[i] != 0; }

  void push_back(const Transition& t);
  Transition at(std::size_t i) const;

  /// Checks every Dataset/Transition invariant; throws ssar::Error naming
  /// the offending index.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Empty dataset with the given shape and action box.
Dataset make_dataset(std::size_t obs_dim, std::size_t act_dim, std::vector<double> action_low,
                     std::vector<double> action_high, std::string provenance = {});

/// Appends `tail` to `head`; shapes and action boxes must agree.
void append(Dataset& head, const Dataset& tail);

inline constexpr char kDatasetMagic[8] = {'S', 'S', 'A', 'R', 'D', 'A', 'T', 'A'};
inline constexpr std::uint32_t kDatasetVersion = 1;

void save_dataset(const std::filesystem::path& path, const Dataset& d);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace ssar::data

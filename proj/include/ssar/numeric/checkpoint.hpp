#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ssar/numeric/mlp.hpp"
#include "ssar/numeric/optim.hpp"

namespace ssar::numeric {

inline constexpr char kCheckpointMagic[8] = {'S', 'S', 'A', 'R', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Named networks, their optimizer states, and loose named scalars
/// (schedule state, counters, temperatures).
struct Checkpoint {
  std::vector<std::pair<std::string, MlpParams>> networks;
  std::vector<std::pair<std::string, AdamState>> optimizers;
  std::vector<std::pair<std::string, double>> scalars;

  const MlpParams& network(const std::string& name) const;
  const AdamState& optimizer(const std::string& name) const;
  double scalar(const std::string& name) const;
  bool has_network(const std::string& name) const;
  bool has_scalar(const std::string& name) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ssar::numeric

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ssar::algorithms {

/// One evaluation point. Serialized as a single JSON line with fields in
/// declaration order.
struct MetricRecord {
  std::uint64_t step = 0;
  std::string phase;  // "offline" | "online"
  double eval_return_mean = 0.0;
  double eval_return_std = 0.0;
  double normalized_score = 0.0;
  double q_mean = 0.0;
  double beta_mean = 0.0;
  double beta_min = 0.0;
  double beta_max = 0.0;
  double beta_scale = 1.0;
  double n = 0.0;
  bool frozen = false;
  double termination_stat = 0.0;
  double loss_actor = 0.0;
  double loss_critic = 0.0;
  double loss_beta = 0.0;
  double alpha = 0.0;
  std::uint64_t phi_hash = 0;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

std::string to_json_line(const MetricRecord& r);
MetricRecord parse_json_line(const std::string& line);

void write_metrics(const std::filesystem::path& path, std::span<const MetricRecord> records);
std::vector<MetricRecord> read_metrics(const std::filesystem::path& path);

}  // namespace ssar::algorithms

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "ssar/algorithms/metrics.hpp"
#include "ssar/cli/run_config.hpp"
#include "ssar/data/dataset.hpp"
#include "ssar/data/selection.hpp"
#include "ssar/error.hpp"

// The subcommands as library calls. The binary only parses flags and maps
// exceptions to exit codes; the acceptance harness calls these directly.

namespace ssar::cli {

struct GenDataOptions {
  std::string env = "pendulum";
  std::string mix = "medium";
  std::size_t episodes = 100;
  std::uint64_t seed = 0;
  std::string out;
};

/// Writes the dataset and prints a one-line JSON summary.
void gen_data(const GenDataOptions& o, std::ostream& log);

struct PretrainIqlOptions {
  std::string data;
  double tau = 0.7;
  std::uint64_t steps = 100'000;
  std::uint64_t seed = 0;
  double gamma = 0.99;
  std::string out;
};

/// Checkpoint with networks "iql_q", "iql_v" and scalars tau, gamma,
/// steps, seed; prints the losses and the advantage-mask size as JSON.
void pretrain_iql(const PretrainIqlOptions& o, std::ostream& log);

struct RunOptions {
  std::string config;
  std::string out;                   // overrides SSAR_OUT and run.output
  std::vector<std::uint64_t> seeds;  // overrides run.seeds when non-empty
  std::string from;                  // finetune: offline run directory, default the output directory
};

/// D-hat for one seed. Advantage selection loads the configured IQL
/// checkpoint or pretrains one with `seed`.
data::SubDatasetMask build_selection(const RunConfig& c, const data::Dataset& d, std::uint64_t seed);

/// Per seed: seed_<s>/metrics.jsonl, checkpoint.bin, beta_hist.jsonl,
/// selection.json. Then resolved_config.toml and plots/*.svg. Returns the
/// output directory.
std::filesystem::path train_offline(const RunOptions& o, std::ostream& log);

/// Restores seed_<s>/checkpoint.bin and fine-tunes online: writes
/// seed_<s>/online_metrics.jsonl, online_checkpoint.bin, and the online
/// return plot.
std::filesystem::path finetune(const RunOptions& o, std::ostream& log);

/// Runs every verify suite, prints the table; true iff all pass.
bool run_verify(std::ostream& log);

struct PlotOptions {
  std::vector<std::string> series;  // "label=path[,path...]"
  std::string kind = "return";
  std::string out;
  std::string title;
};

void plot(const PlotOptions& o);

/// {"error": code, "message": ..., <details>} on one line.
std::string error_json(const Error& e);
std::string error_json(const std::string& code, const std::string& message);

}  // namespace ssar::cli

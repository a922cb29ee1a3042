#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ssar/algorithms/config.hpp"
#include "ssar/data/selection.hpp"
#include "ssar/envs/env.hpp"

namespace ssar::cli {

/// How D-hat is built. return_threshold is G_T; tau and iql_steps only
/// matter for the advantage mode, which needs an IQL pair: loaded from
/// iql_checkpoint when set, otherwise pretrained with the run seed.
struct SelectionConfig {
  data::SelectionMode mode = data::SelectionMode::All;
  double return_threshold = 0.0;
  double tau = 0.7;
  std::uint64_t iql_steps = 100'000;
  std::string iql_checkpoint;

  friend bool operator==(const SelectionConfig&, const SelectionConfig&) = default;
};

struct RunConfig {
  std::string name = "run";
  envs::EnvKind env = envs::EnvKind::Pendulum;
  std::string dataset;
  std::string output = "runs";
  std::vector<std::uint64_t> seeds{0};
  SelectionConfig selection;
  algorithms::AlgoConfig algo;  // algo.seed is set per run

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Defaults before any key is applied: backbone defaults, then the sparse
/// environment overrides (CQL BC term, n_end 5, online delay 4, success
/// selection).
RunConfig default_run_config(algorithms::Backbone b, envs::EnvKind env);

/// run.backbone and run.env are read first to pick the defaults, then every
/// key is applied. Unknown sections or keys, wrong types, and invalid values
/// throw UserError before anything runs.
RunConfig parse_run_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Every field, defaults included, in a fixed order. parse_run_config of
/// this text returns an equal config and formats to the same bytes.
std::string format_run_config(const RunConfig& c);

void validate(const RunConfig& c);

/// --out beats SSAR_OUT beats the config's output; the run name is appended.
std::filesystem::path resolve_output_dir(const RunConfig& c, const std::string& cli_out);

/// Markdown table of every key with its default (pendulum / TD3+BC(SA)
/// unless noted) and where the value comes from. Pasted into README.
std::string provenance_table();

}  // namespace ssar::cli

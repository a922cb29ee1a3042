// ssar: data generation, IQL pretraining, offline training, online
// fine-tuning, verification and plotting. Exit codes: 0 success, 1 internal
// failure, 2 user or configuration error; failures print one JSON line on
// stderr.

#include <iostream>

#include <CLI11.hpp>

#include "ssar/cli/pipeline.hpp"

namespace {

using namespace ssar::cli;

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config, "run configuration file")->required();
  cmd->add_option("--out", o.out, "output root (beats SSAR_OUT and run.output)");
  cmd->add_option("--seeds", o.seeds, "override run.seeds");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline and offline-to-online RL with per-state regularization"};
  app.require_subcommand(1);

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "roll out a behavior mixture into a dataset");
  gen_cmd->add_option("--env", gen.env, "pendulum | pointmaze")->required();
  gen_cmd->add_option("--mix", gen.mix, "preset name or \"expert:0.5,random:0.5\"")->capture_default_str();
  gen_cmd->add_option("--episodes", gen.episodes)->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output .ssardata path")->required();

  PretrainIqlOptions iql;
  auto* iql_cmd = app.add_subcommand("pretrain-iql", "fit IQL Q and V for advantage-based selection");
  iql_cmd->add_option("--data", iql.data)->required();
  iql_cmd->add_option("--tau", iql.tau, "expectile")->capture_default_str();
  iql_cmd->add_option("--steps", iql.steps)->capture_default_str();
  iql_cmd->add_option("--seed", iql.seed)->capture_default_str();
  iql_cmd->add_option("--gamma", iql.gamma)->capture_default_str();
  iql_cmd->add_option("--out", iql.out, "checkpoint path")->required();

  RunOptions train;
  auto* train_cmd = app.add_subcommand("train-offline", "offline training, one run per seed");
  add_run_options(train_cmd, train);

  RunOptions tune;
  auto* tune_cmd = app.add_subcommand("finetune", "online fine-tuning from the offline checkpoints");
  add_run_options(tune_cmd, tune);
  tune_cmd->add_option("--from", tune.from, "offline run directory (default: this run's output directory)");

  auto* verify_cmd = app.add_subcommand("verify", "identity, oracle and gradient checks");

  PlotOptions plt;
  auto* plot_cmd = app.add_subcommand("plot", "seed-aggregated SVG curves from metrics files");
  plot_cmd->add_option("--series", plt.series, "label=path[,path...]; repeat for overlays")->required();
  plot_cmd->add_option("--kind", plt.kind, "return | score | q | beta | n")->capture_default_str();
  plot_cmd->add_option("--title", plt.title);
  plot_cmd->add_option("--out", plt.out, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("bad_arguments", e.what()) << "\n";
    return 2;
  }

  try {
    if (gen_cmd->parsed()) gen_data(gen, std::cout);
    if (iql_cmd->parsed()) pretrain_iql(iql, std::cout);
    if (train_cmd->parsed()) train_offline(train, std::cout);
    if (tune_cmd->parsed()) finetune(tune, std::cout);
    if (verify_cmd->parsed()) return run_verify(std::cout) ? 0 : 1;
    if (plot_cmd->parsed()) plot(plt);
    return 0;
  } catch (const ssar::UserError& e) {
    std::cerr << error_json(e) << "\n";
    return 2;
  } catch (const ssar::Error& e) {
    std::cerr << error_json(e) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal", e.what()) << "\n";
    return 1;
  }
}

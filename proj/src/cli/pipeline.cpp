#include "ssar/cli/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ssar/algorithms/train.hpp"
#include "ssar/cli/plot.hpp"
#include "ssar/cli/verify.hpp"
#include "ssar/envs/behavior.hpp"
#include "ssar/numeric/checkpoint.hpp"
#include "ssar/value/iql.hpp"

namespace ssar::cli {

namespace fs = std::filesystem;
using algorithms::MetricRecord;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kHistogramBins = 30;

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw UserError("output_not_writable", "cannot create output directory", {{"path", p.string()}});
}

fs::path seed_dir(const fs::path& root, std::uint64_t seed) { return root / ("seed_" + std::to_string(seed)); }

std::string progress_line(std::uint64_t seed, const MetricRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "seed %llu %-7s step %7llu  return %9.2f +- %7.2f  beta %.3f [%.3f, %.3f]  n %.3f%s",
                static_cast<unsigned long long>(seed), r.phase.c_str(), static_cast<unsigned long long>(r.step),
                r.eval_return_mean, r.eval_return_std, r.beta_mean, r.beta_min, r.beta_max, r.n,
                r.frozen ? " frozen" : "");
  return buf;
}

// Opens a JSONL file for line-by-line appends (truncating).
std::ofstream open_lines(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_error", "cannot write file", {{"path", p.string()}});
  return out;
}

struct Loaded {
  RunConfig config;
  fs::path dir;
  data::Dataset dataset;
  std::vector<std::uint64_t> seeds;
};

// Everything is validated and loaded before any output is written.
Loaded load_run(const RunOptions& o) {
  if (o.config.empty()) throw UserError("bad_arguments", "--config is required");
  Loaded l;
  l.config = load_run_config(o.config);
  l.dir = resolve_output_dir(l.config, o.out);
  l.seeds = o.seeds.empty() ? l.config.seeds : o.seeds;
  l.dataset = data::load_dataset(l.config.dataset);
  const envs::Environment env(l.config.env);
  if (l.dataset.obs_dim != env.obs_dim() || l.dataset.act_dim != env.act_dim())
    throw UserError("dataset_env_mismatch", "dataset shape does not match the environment",
                    {{"path", l.config.dataset}, {"env", std::string(envs::env_name(l.config.env))}});
  if (l.config.selection.mode == data::SelectionMode::Advantage && !l.config.selection.iql_checkpoint.empty() &&
      !fs::exists(l.config.selection.iql_checkpoint))
    throw UserError("checkpoint_not_found", "IQL checkpoint does not exist",
                    {{"path", l.config.selection.iql_checkpoint}});
  return l;
}

algorithms::AlgoConfig seeded(const RunConfig& c, std::uint64_t seed) {
  auto a = c.algo;
  a.seed = seed;
  return a;
}

std::vector<std::vector<MetricRecord>> read_all(const fs::path& dir, const std::vector<std::uint64_t>& seeds,
                                                const char* file) {
  std::vector<std::vector<MetricRecord>> runs;
  for (auto s : seeds) runs.push_back(algorithms::read_metrics(seed_dir(dir, s) / file));
  return runs;
}

void write_selection_summary(const fs::path& p, const data::SubDatasetMask& m) {
  ordered_json j;
  j["mode"] = std::string(data::selection_mode_name(m.mode));
  j["parameter"] = m.parameter;
  j["selected"] = m.count();
  j["total"] = m.size();
  write_text(p, j.dump() + "\n");
}

}  // namespace

void gen_data(const GenDataOptions& o, std::ostream& log) {
  if (o.out.empty()) throw UserError("bad_arguments", "--out is required");
  const auto kind = envs::parse_env_kind(o.env);
  envs::BehaviorSpec spec;
  spec.mixture = envs::parse_mixture(o.mix);
  spec.episodes = o.episodes;
  spec.seed = o.seed;
  spec.validate();
  const auto d = envs::generate_dataset(kind, spec);
  const fs::path out(o.out);
  if (out.has_parent_path()) make_dirs(out.parent_path());
  data::save_dataset(out, d);
  const auto trajs = data::segment_trajectories(d);
  double mean = 0.0;
  std::size_t successes = 0;
  for (const auto& t : trajs) {
    mean += t.ret;
    successes += t.success ? 1 : 0;
  }
  mean /= static_cast<double>(trajs.size());
  ordered_json j;
  j["path"] = out.string();
  j["env"] = o.env;
  j["mixture"] = envs::format_mixture(spec.mixture);
  j["episodes"] = trajs.size();
  j["transitions"] = d.size();
  j["mean_return"] = mean;
  j["success_rate"] = static_cast<double>(successes) / static_cast<double>(trajs.size());
  log << j.dump() << "\n";
}

void pretrain_iql(const PretrainIqlOptions& o, std::ostream& log) {
  if (o.out.empty()) throw UserError("bad_arguments", "--out is required");
  if (o.data.empty()) throw UserError("bad_arguments", "--data is required");
  const auto d = data::load_dataset(o.data);
  value::IqlConfig cfg;
  cfg.tau = o.tau;
  cfg.steps = o.steps;
  cfg.seed = o.seed;
  cfg.gamma = o.gamma;
  cfg.validate();
  value::IqlReport rep;
  const auto pair = value::iql_pretrain(d, cfg, &rep);
  numeric::Checkpoint ck;
  ck.networks = {{"iql_q", pair.q}, {"iql_v", pair.v}};
  ck.scalars = {{"tau", cfg.tau},
                {"gamma", cfg.gamma},
                {"steps", static_cast<double>(cfg.steps)},
                {"seed", static_cast<double>(cfg.seed)}};
  const fs::path out(o.out);
  if (out.has_parent_path()) make_dirs(out.parent_path());
  numeric::save_checkpoint(out, ck);
  const auto mask = value::advantage_mask(d, pair);
  ordered_json j;
  j["path"] = out.string();
  j["tau"] = cfg.tau;
  j["steps"] = cfg.steps;
  j["final_v_loss"] = rep.final_v_loss;
  j["final_q_loss"] = rep.final_q_loss;
  j["positive_advantage"] = mask.count();
  j["total"] = mask.size();
  log << j.dump() << "\n";
}

data::SubDatasetMask build_selection(const RunConfig& c, const data::Dataset& d, std::uint64_t seed) {
  const auto& s = c.selection;
  switch (s.mode) {
    case data::SelectionMode::All: return data::select_all(d);
    case data::SelectionMode::Return: return data::select_by_return(d, s.return_threshold);
    case data::SelectionMode::Success: return data::select_by_success(d);
    case data::SelectionMode::Advantage: {
      value::IqlPair pair;
      if (!s.iql_checkpoint.empty()) {
        const auto ck = numeric::load_checkpoint(s.iql_checkpoint);
        if (!ck.has_network("iql_q") || !ck.has_network("iql_v"))
          throw UserError("checkpoint_mismatch", "not an IQL checkpoint", {{"path", s.iql_checkpoint}});
        pair.q = ck.network("iql_q");
        pair.v = ck.network("iql_v");
        pair.tau = ck.scalar("tau");
      } else {
        value::IqlConfig cfg;
        cfg.tau = s.tau;
        cfg.steps = s.iql_steps;
        cfg.gamma = c.algo.gamma;
        cfg.seed = seed;
        pair = value::iql_pretrain(d, cfg);
      }
      return value::advantage_mask(d, pair);
    }
  }
  throw Error("internal", "unhandled selection mode");
}

fs::path train_offline(const RunOptions& o, std::ostream& log) {
  const Loaded l = load_run(o);
  make_dirs(l.dir);
  write_text(l.dir / "resolved_config.toml", format_run_config(l.config));
  const double beta_hi = 1.5 * l.config.algo.beta_init;

  for (auto seed : l.seeds) {
    const fs::path sd = seed_dir(l.dir, seed);
    make_dirs(sd);
    const auto mask = build_selection(l.config, l.dataset, seed);
    write_selection_summary(sd / "selection.json", mask);
    log << "seed " << seed << ": |D| = " << mask.size() << ", |D-hat| = " << mask.count() << "\n";

    auto st = algorithms::make_train_state(seeded(l.config, seed), l.config.env, l.dataset);
    auto metrics = open_lines(sd / "metrics.jsonl");
    auto hist = open_lines(sd / "beta_hist.jsonl");
    algorithms::offline_train(st, l.dataset, mask, [&](const MetricRecord& r) {
      metrics << algorithms::to_json_line(r) << "\n" << std::flush;
      const auto betas = algorithms::batch_beta(st, st.eval_batch.obs);
      hist << histogram_json_line(make_histogram(r.step, r.phase, betas, 0.0, beta_hi, kHistogramBins)) << "\n"
           << std::flush;
      log << progress_line(seed, r) << "\n" << std::flush;
    });
    numeric::save_checkpoint(sd / "checkpoint.bin", algorithms::to_checkpoint(st));
  }

  const fs::path plots = l.dir / "plots";
  make_dirs(plots);
  const auto runs = read_all(l.dir, l.seeds, "metrics.jsonl");
  const std::string tag = l.config.name + " (" + std::to_string(l.seeds.size()) + " seeds)";
  write_text(plots / "return.svg", render_curves({aggregate(l.config.name, runs, PlotKind::Return)},
                                                 "evaluation return, " + tag, "offline step", "return"));
  write_text(plots / "beta.svg", render_curves({aggregate(l.config.name, runs, PlotKind::Beta)},
                                               "mean beta over evaluation states, " + tag, "offline step", "beta"));
  write_text(plots / "n_schedule.svg",
             render_curves({aggregate(l.config.name, runs, PlotKind::N)}, "trust-region width n, " + tag,
                           "offline step", "n"));
  for (auto seed : l.seeds)
    write_text(plots / ("beta_hist_seed_" + std::to_string(seed) + ".svg"),
               render_heatmap(read_histograms(seed_dir(l.dir, seed) / "beta_hist.jsonl"),
                              "beta distribution over training, seed " + std::to_string(seed)));
  return l.dir;
}

fs::path finetune(const RunOptions& o, std::ostream& log) {
  const Loaded l = load_run(o);
  const fs::path from = o.from.empty() ? l.dir : fs::path(o.from);
  for (auto seed : l.seeds) {
    const fs::path ck = seed_dir(from, seed) / "checkpoint.bin";
    if (!fs::exists(ck))
      throw UserError("checkpoint_not_found", "offline checkpoint does not exist; run train-offline first",
                      {{"path", ck.string()}});
  }
  make_dirs(l.dir);
  write_text(l.dir / "resolved_config.toml", format_run_config(l.config));

  for (auto seed : l.seeds) {
    const fs::path sd = seed_dir(l.dir, seed);
    make_dirs(sd);
    const auto mask = build_selection(l.config, l.dataset, seed);
    auto st = algorithms::make_train_state(seeded(l.config, seed), l.config.env, l.dataset);
    algorithms::restore(st, numeric::load_checkpoint(seed_dir(from, seed) / "checkpoint.bin"));
    auto metrics = open_lines(sd / "online_metrics.jsonl");
    algorithms::online_finetune(st, l.dataset, mask, [&](const MetricRecord& r) {
      metrics << algorithms::to_json_line(r) << "\n" << std::flush;
      log << progress_line(seed, r) << "\n" << std::flush;
    });
    numeric::save_checkpoint(sd / "online_checkpoint.bin", algorithms::to_checkpoint(st));
  }

  const fs::path plots = l.dir / "plots";
  make_dirs(plots);
  const auto runs = read_all(l.dir, l.seeds, "online_metrics.jsonl");
  write_text(plots / "online_return.svg",
             render_curves({aggregate(std::string(algorithms::strategy_name(l.config.algo.strategy)), runs,
                                      PlotKind::Return)},
                           "online fine-tuning return, " + l.config.name, "online step", "return"));
  return l.dir;
}

bool run_verify(std::ostream& log) {
  const auto rows = verify_all();
  log << format_table(rows);
  const bool ok = all_passed(rows);
  log << (ok ? "all checks passed" : "some checks FAILED") << "\n";
  return ok;
}

void plot(const PlotOptions& o) {
  if (o.series.empty()) throw UserError("bad_arguments", "at least one --series label=path[,path...] is required");
  if (o.out.empty()) throw UserError("bad_arguments", "--out is required");
  const auto kind = parse_plot_kind(o.kind);
  std::vector<Curve> curves;
  for (const auto& spec : o.series) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw UserError("bad_arguments", "series must look like label=path[,path...]", {{"series", spec}});
    const std::string label = spec.substr(0, eq);
    std::vector<std::vector<MetricRecord>> runs;
    std::size_t pos = eq + 1;
    while (pos <= spec.size()) {
      const auto comma = spec.find(',', pos);
      const std::string path = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!path.empty()) runs.push_back(algorithms::read_metrics(path));
      pos = comma == std::string::npos ? spec.size() + 1 : comma + 1;
    }
    curves.push_back(aggregate(label, runs, kind));
  }
  const std::string title = o.title.empty() ? std::string(plot_kind_name(kind)) : o.title;
  const fs::path out(o.out);
  if (out.has_parent_path()) make_dirs(out.parent_path());
  write_text(out, render_curves(curves, title, "step", std::string(plot_kind_name(kind))));
}

std::string error_json(const Error& e) {
  ordered_json j;
  j["error"] = e.code();
  j["message"] = e.what();
  for (const auto& [k, v] : e.details())
    if (k != "error" && k != "message") j[k] = v;
  return j.dump();
}

std::string error_json(const std::string& code, const std::string& message) {
  ordered_json j;
  j["error"] = code;
  j["message"] = message;
  return j.dump();
}

}  // namespace ssar::cli

// Acceptance harness: one PASS/FAIL line per criterion.
//
//   ssar_acceptance [--only 1,5,9] [--quick] [--workdir dir]
//
// --quick shrinks every training budget so the harness itself can be smoke
// tested; its verdicts on criteria 8-11 mean nothing. Runs and overlay
// plots land in the work directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "ssar/algorithms/losses.hpp"
#include "ssar/algorithms/metrics.hpp"
#include "ssar/algorithms/train.hpp"
#include "ssar/cli/pipeline.hpp"
#include "ssar/cli/plot.hpp"
#include "ssar/cli/verify.hpp"
#include "ssar/envs/behavior.hpp"
#include "ssar/numeric/gradcheck.hpp"
#include "ssar/numeric/mlp.hpp"
#include "ssar/numeric/optim.hpp"
#include "ssar/regularizer/coefficient.hpp"
#include "ssar/regularizer/schedule.hpp"

using namespace ssar;
using algorithms::AlgoConfig;
using algorithms::Backbone;
using algorithms::MetricRecord;
using numeric::Matrix;
using numeric::gradcheck::random_matrix;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string summary;
};

struct Options {
  bool quick = false;
  fs::path workdir = "acceptance_runs";
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string join(const std::vector<double>& xs, const char* f = "%.1f") {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + fmt(f, xs[i]);
  return s;
}

// ---- criteria 1-4: the verify suites, with their runtime budgets ------------

Verdict from_checks(const std::vector<cli::CheckResult>& rows, double budget_s) {
  double worst_ratio = 0.0, secs = 0.0;
  bool ok = true;
  std::string failed;
  for (const auto& r : rows) {
    ok = ok && r.passed;
    if (!r.passed) failed += " [" + r.check + "]";
    worst_ratio = std::max(worst_ratio, r.value / r.tolerance);
    secs += r.seconds;
  }
  const bool fast = secs < budget_s;
  std::string s = std::to_string(rows.size()) + " checks, worst value/tolerance " + fmt("%.2e", worst_ratio) +
                  ", " + fmt("%.2f", secs) + " s (budget " + fmt("%.0f", budget_s) + " s)" + failed;
  if (!fast) s += " [over budget]";
  return {ok && fast, s};
}

// ---- criterion 5 ---------------------------------------------------------

template <class Stat>
data::Batch signed_batch(Rng& rng, std::size_t obs_dim, std::size_t act_dim, std::size_t rows, bool violated,
                         Stat&& stat) {
  data::Batch out;
  while (out.size() < rows) {
    data::Batch b;
    b.obs = random_matrix(rng, 64, obs_dim, -2, 2);
    b.actions = random_matrix(rng, 64, act_dim, -0.999, 0.999);
    b.next_obs = b.obs;
    b.rewards.assign(64, 0.0);
    b.not_done.assign(64, 1.0);
    b.in_subset.assign(64, 1);
    const auto s = stat(b);
    for (std::size_t i = 0; i < 64 && out.size() < rows; ++i)
      if ((s[i] < 0) == violated && s[i] != 0.0) data::append(out, data::slice(b, i, i + 1));
  }
  return out;
}

// One Adam step on the backbone's coefficient loss; counts states whose beta
// moved the wrong way.
template <class Loss>
std::size_t wrong_direction(regularizer::CoefficientNet& c, const data::Batch& b, bool violated, Loss&& loss) {
  const auto before = regularizer::beta(c, b.obs);
  numeric::AdamConfig cfg;
  cfg.lr = 1e-4;
  auto opt = numeric::make_adam(c.net, cfg);
  auto g = numeric::zeros_like(c.net);
  loss(&g);
  numeric::adam_step(opt, c.net, g);
  const auto after = regularizer::beta(c, b.obs);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < before.size(); ++i) wrong += violated ? !(after[i] > before[i]) : !(after[i] < before[i]);
  return wrong;
}

Verdict criterion5(const Options&) {
  const auto t0 = Clock::now();
  Rng rng(505);
  std::size_t wrong = 0, states = 0, batches = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t act_dim = 1 + trial % 2;
    const double n = uniform(rng, 0.5, 3.0);
    // CQL(SA): log pi - C_n under a Gaussian policy
    auto sh = policy::make_gaussian_head(3, act_dim, {32, 32}, true, rng);
    for (double& w : sh.net.layers.back().weight) w *= 40.0;
    // TD3+BC(SA): deterministic margin
    auto dh = policy::make_deterministic_head(3, act_dim, {32, 32}, 0.1, rng);
    for (double& w : dh.net.layers.back().weight) w *= 40.0;
    for (bool violated : {true, false}) {
      const auto sb = signed_batch(rng, 3, act_dim, 64, violated,
                                   [&](const data::Batch& b) { return regularizer::stochastic_statistic(sh, b, n); });
      auto sc = regularizer::make_coefficient_net(3, {64, 64}, regularizer::kBetaInitCql, rng);
      wrong += wrong_direction(sc, sb, violated,
                               [&](numeric::MlpParams* g) { return regularizer::beta_loss_stochastic(sc, sb, sh, n, g); });
      data::Batch db = signed_batch(rng, 3, act_dim, 64, true, [&](const data::Batch& b) {
        return regularizer::deterministic_statistic(dh, b, n);
      });
      if (!violated) db.actions = policy::act(dh, db.obs);  // on the policy: inside the region
      auto dc = regularizer::make_coefficient_net(3, {64, 64}, regularizer::kBetaInitTd3, rng);
      wrong += wrong_direction(dc, db, violated,
                               [&](numeric::MlpParams* g) { return regularizer::beta_loss_deterministic(dc, db, dh, n, g); });
      states += sb.size() + db.size();
      batches += 2;
    }
  }
  // range over a million random states for each backbone's beta_init
  std::size_t out_of_range = 0, checked = 0;
  for (double beta_init : {regularizer::kBetaInitCql, regularizer::kBetaInitTd3}) {
    for (int net = 0; net < 5; ++net) {
      auto c = regularizer::make_coefficient_net(4, {32, 32}, beta_init, rng);
      const double gain = std::pow(10.0, net);
      for (double& w : c.net.layers.back().weight) w *= gain;
      for (int chunk = 0; chunk < 20; ++chunk) {
        for (double v : regularizer::beta(c, random_matrix(rng, 10'000, 4, -100, 100))) {
          out_of_range += !(v > 0.0 && v < c.upper() && std::isfinite(v));
          ++checked;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = wrong == 0 && out_of_range == 0 && checked >= 1'000'000 && secs < 60.0;
  return {pass, std::to_string(batches) + " batches / " + std::to_string(states) + " states, " +
                    std::to_string(wrong) + " moved the wrong way; " + std::to_string(checked) + " random states, " +
                    std::to_string(out_of_range) + " outside (0, 1.5 beta_init); " + fmt("%.1f", secs) + " s"};
}

// ---- criterion 6 ---------------------------------------------------------

Verdict criterion6(const Options&) {
  const auto t0 = Clock::now();
  std::size_t bad = 0;
  // T = 100k, T_inc = 1k, n 1 -> 3: a hundred increments of 0.02
  {
    auto s = regularizer::make_schedule(policy::make_trust_region(1.0, 3.0, 1000, 100'000));
    const double dn = s.trust.delta_n();
    bad += std::abs(dn - 0.02) > 1e-15;
    double prev = s.n();
    for (std::uint64_t step = 1; step <= 100'000; ++step) {
      const bool hit = regularizer::schedule_step(s, step, -0.5);
      const double now = s.n();
      if (now < prev) ++bad;
      if (hit && std::abs(now - std::min(prev + dn, 3.0)) > 1e-12) ++bad;
      if (!hit && now != prev) ++bad;
      prev = now;
    }
    bad += std::abs(s.n() - 3.0) > 1e-9;
  }
  // freeze on a positive statistic, permanently
  {
    auto s = regularizer::make_schedule(policy::make_trust_region(1.0, 3.0, 1000, 100'000));
    double frozen_n = 0.0;
    for (std::uint64_t step = 1; step <= 100'000; ++step) {
      const double stat = step == 23'000 ? 0.3 : -0.5;
      regularizer::schedule_step(s, step, stat);
      if (step == 23'000) {
        frozen_n = s.n();
        bad += !s.frozen();
      }
      if (step > 23'000) bad += s.n() != frozen_n || !s.frozen();
    }
    bad += std::abs(frozen_n - 1.44) > 1e-12;
  }
  // anneal: linear decay to zero over N_end = 400k
  constexpr std::uint64_t kNEnd = 400'000;
  const double beta = 5.0;
  bad += regularizer::anneal(beta, 0, kNEnd) != beta;
  bad += std::abs(regularizer::anneal(beta, kNEnd / 2, kNEnd) - beta / 2) > 1e-12;
  bad += regularizer::anneal(beta, kNEnd, kNEnd) != 0.0;
  bad += regularizer::anneal(beta, kNEnd + 17, kNEnd) != 0.0;
  for (std::uint64_t n = 0; n + 2000 <= kNEnd; n += 1000) {
    const double a = regularizer::anneal(beta, n, kNEnd), b = regularizer::anneal(beta, n + 1000, kNEnd),
                 c = regularizer::anneal(beta, n + 2000, kNEnd);
    bad += std::abs((c - b) - (b - a)) > 1e-12 || !(b < a);
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 5.0, std::to_string(bad) + " violations (monotone trace, exact delta n = 0.02, " +
                                      "permanent freeze, anneal midpoint " +
                                      fmt("%.4f", regularizer::anneal(beta, kNEnd / 2, kNEnd)) + " of " +
                                      fmt("%.1f", beta) + "); " + fmt("%.2f", secs) + " s"};
}

// ---- criterion 7 ---------------------------------------------------------

Verdict criterion7(const Options&) {
  const auto t0 = Clock::now();
  const auto q = [](double a) { return 2.0 * std::sin(3.0 * a) + a * a; };
  // midpoint quadrature of log of the integral of exp Q over [-1, 1]
  constexpr int kCells = 200'000;
  double m = -1e300;
  std::vector<double> cells(kCells);
  for (int k = 0; k < kCells; ++k) m = std::max(m, cells[k] = q(-1.0 + (k + 0.5) * 2.0 / kCells));
  double acc = 0.0;
  for (double v : cells) acc += std::exp(v - m);
  const double truth = m + std::log(acc * 2.0 / kCells);

  // policy proposal: squashed N(0.3, 0.5^2), independent of the state
  Rng hrng(1);
  auto head = policy::make_gaussian_head(1, 1, {4}, true, hrng);
  auto& last = head.net.layers.back();
  std::fill(last.weight.begin(), last.weight.end(), 0.0);
  last.bias = {0.3, std::log(0.5)};

  Rng rng(707);
  std::vector<double> errs;
  for (std::size_t n : {10, 100, 1000}) {
    double err = 0.0;
    constexpr int kReps = 200;
    for (int r = 0; r < kReps; ++r) {
      std::vector<double> v;
      for (std::size_t k = 0; k < n; ++k) v.push_back(q(uniform(rng, -1.0, 1.0)) + std::numbers::ln2);
      const auto s = policy::sample(head, Matrix(n, 1), rng);
      for (std::size_t k = 0; k < n; ++k) v.push_back(q(s.actions(k, 0)) - s.log_prob[k]);
      err += std::abs(algorithms::sampled_logsumexp(v) - truth);
    }
    errs.push_back(err / kReps);
  }
  const double secs = seconds_since(t0);
  const bool pass = errs[1] < errs[0] && errs[2] < errs[1] && errs[2] < 0.05 && secs < 60.0;
  return {pass, "mean |error| at 10/100/1000 samples: " + join(errs, "%.4f") + " nats; " + fmt("%.1f", secs) + " s"};
}

// ---- training-based criteria --------------------------------------------

data::Dataset pendulum_dataset(const std::string& mix, std::size_t episodes) {
  envs::BehaviorSpec spec;
  spec.mixture = envs::parse_mixture(mix);
  spec.episodes = episodes;
  spec.seed = 7;
  return envs::generate_dataset(envs::EnvKind::Pendulum, spec);
}

double behavior_mean(const data::Dataset& d) {
  const auto trajs = data::segment_trajectories(d);
  double s = 0.0;
  for (const auto& t : trajs) s += t.ret;
  return s / static_cast<double>(trajs.size());
}

double median_return(const data::Dataset& d) {
  std::vector<double> r;
  for (const auto& t : data::segment_trajectories(d)) r.push_back(t.ret);
  std::sort(r.begin(), r.end());
  const std::size_t k = r.size() / 2;
  return r.size() % 2 ? r[k] : 0.5 * (r[k - 1] + r[k]);
}

AlgoConfig desk_config(Backbone b, std::uint64_t steps, std::uint64_t seed, const Options& o) {
  auto c = algorithms::default_config(b);
  c.steps = o.quick ? std::min<std::uint64_t>(steps, 2000) : steps;
  c.eval_every = o.quick ? 1000 : 5000;
  c.eval_episodes = o.quick ? 3 : 10;
  c.seed = seed;
  return c;
}

struct Run {
  std::vector<MetricRecord> records;
  algorithms::TrainState state;
  double final_return() const { return records.back().eval_return_mean; }
};

// Trains and keeps the metrics under workdir/<tag>/seed_<s>.jsonl.
Run train(const AlgoConfig& c, const data::Dataset& d, const data::SubDatasetMask& mask, const fs::path& dir) {
  fs::create_directories(dir);
  Run r{{}, algorithms::make_train_state(c, envs::EnvKind::Pendulum, d)};
  r.records = algorithms::offline_train(r.state, d, mask);
  algorithms::write_metrics(dir / ("seed_" + std::to_string(c.seed) + ".jsonl"), r.records);
  return r;
}

std::vector<std::vector<MetricRecord>> read_runs(const fs::path& dir, std::size_t seeds) {
  std::vector<std::vector<MetricRecord>> runs;
  for (std::size_t s = 0; s < seeds; ++s) runs.push_back(algorithms::read_metrics(dir / ("seed_" + std::to_string(s) + ".jsonl")));
  return runs;
}

void overlay(const fs::path& out, const std::vector<std::pair<std::string, fs::path>>& series, std::size_t seeds,
             const std::string& title) {
  std::vector<cli::Curve> curves;
  for (const auto& [label, dir] : series) curves.push_back(cli::aggregate(label, read_runs(dir, seeds), cli::PlotKind::Return));
  cli::write_text(out, cli::render_curves(curves, title, "offline step", "evaluation return"));
}

constexpr std::size_t kSeeds = 4;

Verdict criterion8(const Options& o) {
  const auto d = pendulum_dataset("medium", 100);
  const double behavior = behavior_mean(d);
  const auto mask = data::select_all(d);
  std::string summary = "behavior mean " + fmt("%.1f", behavior) + ";";
  bool pass = true;
  for (Backbone b : {Backbone::Td3BcSa, Backbone::CqlSa}) {
    const auto t0 = Clock::now();
    std::vector<double> finals;
    std::size_t wins = 0;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      auto c = desk_config(b, 100'000, seed, o);
      if (b == Backbone::CqlSa) c.actor_hidden = c.critic_hidden = c.beta_hidden = {32, 32};
      const auto r = train(c, d, mask, o.workdir / "c8" / std::string(algorithms::backbone_name(b)));
      finals.push_back(r.final_return());
      wins += r.final_return() > behavior;
    }
    const double minutes = seconds_since(t0) / 60.0;
    // "~30 min" read with a 25% margin
    const bool ok = wins >= 3 && minutes <= 37.5;
    pass = pass && ok;
    summary += " " + std::string(algorithms::backbone_name(b)) + " finals [" + join(finals) + "] " +
               std::to_string(wins) + "/4 above, " + fmt("%.1f", minutes) + " min" + (ok ? "" : " (FAIL)") + ";";
  }
  return {pass, summary};
}

Verdict criterion9(const Options& o) {
  const auto d = pendulum_dataset("expert:0.5,random:0.5", 100);
  const double g_t = median_return(d);
  const auto selective = data::select_by_return(d, g_t);
  const auto uniform_mask = data::select_all(d);
  std::vector<double> sel, uni;
  std::size_t wins = 0;
  const fs::path root = o.workdir / "c9";
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto c = desk_config(Backbone::Td3BcSa, 30'000, seed, o);
    sel.push_back(train(c, d, selective, root / "selective").final_return());
    uni.push_back(train(c, d, uniform_mask, root / "uniform").final_return());
    wins += sel.back() > uni.back();
  }
  overlay(root / "selective_vs_uniform.svg", {{"selective", root / "selective"}, {"uniform", root / "uniform"}},
          kSeeds, "selective vs uniform regularization (expert/random 50/50)");
  return {wins >= 3, "G_T " + fmt("%.1f", g_t) + " selects " + std::to_string(selective.count()) + "/" +
                         std::to_string(d.size()) + "; selective [" + join(sel) + "] vs uniform [" + join(uni) +
                         "]; " + std::to_string(wins) + "/4 seeds"};
}

Verdict criterion10(const Options& o) {
  // both variants keep the selective D-hat; only the coefficient differs
  const auto d = pendulum_dataset("mixed", 100);
  const auto mask = data::select_by_return(d, median_return(d));
  std::vector<double> ad, fx;
  std::size_t wins = 0;
  const fs::path root = o.workdir / "c10";
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    auto c = desk_config(Backbone::Td3BcSa, 30'000, seed, o);
    ad.push_back(train(c, d, mask, root / "adaptive").final_return());
    c.adaptive_beta = false;
    fx.push_back(train(c, d, mask, root / "fixed").final_return());
    wins += ad.back() > fx.back();
  }
  overlay(root / "adaptive_vs_fixed.svg", {{"state-adaptive", root / "adaptive"}, {"fixed", root / "fixed"}}, kSeeds,
          "state-adaptive vs fixed coefficient (mixed)");
  return {wins >= 3, "adaptive [" + join(ad) + "] vs fixed [" + join(fx) + "]; " + std::to_string(wins) + "/4 seeds"};
}

Verdict criterion11(const Options& o) {
  // selective D-hat, so part keeps a strict subset of the offline data
  const auto d = pendulum_dataset("medium", 100);
  const auto mask = data::select_by_return(d, median_return(d));
  const fs::path root = o.workdir / "c11";
  fs::create_directories(root);
  std::vector<numeric::Checkpoint> offline;
  std::vector<double> offline_score;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto r = train(desk_config(Backbone::Td3BcSa, 30'000, seed, o), d, mask, root / "offline");
    offline.push_back(algorithms::to_checkpoint(r.state));
    offline_score.push_back(r.records.back().normalized_score);
  }
  bool pass = true;
  std::string summary = "D-hat " + std::to_string(mask.count()) + "/" + std::to_string(d.size()) +
                        "; offline-final scores [" + join(offline_score) + "];";
  std::vector<std::pair<std::string, fs::path>> series;
  for (auto strategy : {algorithms::BufferStrategy::All, algorithms::BufferStrategy::Half,
                        algorithms::BufferStrategy::Part, algorithms::BufferStrategy::None}) {
    const std::string name(algorithms::strategy_name(strategy));
    std::size_t held = 0, completed = 0, hash_ok = 0;
    std::vector<double> worst;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      auto c = desk_config(Backbone::Td3BcSa, 30'000, seed, o);
      c.strategy = strategy;
      if (o.quick) {
        c.online_steps = 3000;
        c.warmup_steps = 1000;
        c.online_eval_every = 1000;
      }
      auto st = algorithms::make_train_state(c, envs::EnvKind::Pendulum, d);
      algorithms::restore(st, offline[seed]);
      const auto phi = numeric::parameter_hash(st.coef.net);
      const auto recs = algorithms::online_finetune(st, d, mask);
      fs::create_directories(root / name);
      algorithms::write_metrics(root / name / ("seed_" + std::to_string(seed) + ".jsonl"), recs);
      completed += st.online_step == c.online_steps;
      bool same = numeric::parameter_hash(st.coef.net) == phi;
      double low = 1e300;
      for (const auto& r : recs) {
        same = same && r.phi_hash == phi;
        low = std::min(low, r.normalized_score);
      }
      hash_ok += same;
      worst.push_back(low);
      held += low >= 0.8 * offline_score[seed];
    }
    series.emplace_back(name, root / name);
    const bool ok = completed == kSeeds && hash_ok == kSeeds &&
                    (strategy != algorithms::BufferStrategy::Part || held >= 3);
    pass = pass && ok;
    summary += " " + name + ": min online scores [" + join(worst) + "], " + std::to_string(held) +
               "/4 held 80%, phi constant " + std::to_string(hash_ok) + "/4" + (ok ? "" : " (FAIL)") + ";";
  }
  std::vector<cli::Curve> curves;
  for (const auto& [label, dir] : series)
    curves.push_back(cli::aggregate(label, read_runs(dir, kSeeds), cli::PlotKind::Score));
  cli::write_text(root / "strategies.svg",
                  cli::render_curves(curves, "online fine-tuning by buffer strategy", "online step", "normalized score"));
  return {pass, summary};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion12(const Options& o) {
  const fs::path root = o.workdir / "c12";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ostringstream log;
  cli::gen_data({"pendulum", "mixed", 10, 3, (root / "d.ssardata").string()}, log);
  std::size_t identical = 0, compared = 0;
  for (const char* backbone : {"td3bc-sa", "cql-sa"}) {
    const fs::path cfg = root / (std::string(backbone) + ".toml");
    std::ofstream(cfg) << "[run]\nname = \"" << backbone << "\"\nenv = \"pendulum\"\nbackbone = \"" << backbone
                       << "\"\ndataset = \"" << (root / "d.ssardata").string()
                       << "\"\nseeds = [5]\n[algorithm]\nactor_hidden = [32, 32]\ncritic_hidden = [32, 32]\n"
                          "beta_hidden = [32, 32]\n[coefficient]\nsteps = 2000\nt_inc = 100\n[evaluation]\n"
                          "eval_every = 500\neval_episodes = 3\n[online]\nsteps = 1500\nwarmup_steps = 500\n"
                          "eval_every = 500\nstrategy = \"half\"\n";
    for (const char* rep : {"a", "b"}) {
      const cli::RunOptions ro{cfg.string(), (root / rep).string(), {}, ""};
      cli::train_offline(ro, log);
      cli::finetune(ro, log);
    }
    for (const char* f : {"seed_5/metrics.jsonl", "seed_5/online_metrics.jsonl"}) {
      const auto a = slurp(root / "a" / backbone / f), b = slurp(root / "b" / backbone / f);
      identical += !a.empty() && a == b;
      ++compared;
    }
  }
  return {identical == compared, std::to_string(identical) + "/" + std::to_string(compared) +
                                     " metrics files byte-identical across repeated runs (both backbones, "
                                     "offline and online)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  Options o;
  std::string workdir = o.workdir.string();
  app.add_option("--only", only, "criteria to run (default all)")->delimiter(',');
  app.add_flag("--quick", o.quick, "tiny budgets for smoke testing the harness");
  app.add_option("--workdir", workdir);
  CLI11_PARSE(app, argc, argv);
  o.workdir = workdir;
  fs::create_directories(o.workdir);

  const std::vector<std::pair<int, std::function<Verdict(const Options&)>>> criteria = {
      {1, [](const Options&) { return from_checks(cli::verify_proposition_suite(), 5.0); }},
      {2, [](const Options&) { return from_checks(cli::verify_margin_suite(), 5.0); }},
      {3, [](const Options&) { return from_checks(cli::verify_gradient_suite(), 60.0); }},
      {4, [](const Options&) { return from_checks(cli::verify_expectile_suite(), 60.0); }},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, criterion8},
      {9, criterion9},
      {10, criterion10},
      {11, criterion11},
      {12, criterion12},
  };
  const std::set<int> wanted(only.begin(), only.end());
  bool all = true;
  for (const auto& [id, run] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    Verdict v;
    try {
      v = run(o);
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("criterion %2d %s%s  %s\n", id, v.pass ? "PASS" : "FAIL", o.quick ? " (quick)" : "", v.summary.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}

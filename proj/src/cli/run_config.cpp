#include "ssar/cli/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "ssar/cli/toml.hpp"
#include "ssar/error.hpp"

namespace ssar::cli {

using algorithms::AlgoConfig;
using algorithms::Backbone;

namespace {

[[noreturn]] void type_error(const std::string& key, const Value& v, const char* want) {
  throw UserError("config_parse", key + ": expected " + want + ", got " + v.kind_name(),
                  {{"key", key}, {"line", std::to_string(v.line)}});
}

[[noreturn]] void bad_value(const std::string& key, const Value& v, const std::string& why) {
  throw UserError("bad_config", key + ": " + why, {{"key", key}, {"line", std::to_string(v.line)}});
}

double as_float(const std::string& key, const Value& v) {
  if (v.kind == Value::Kind::Float) return v.f;
  if (v.kind == Value::Kind::Int) return static_cast<double>(v.i);
  type_error(key, v, "a number");
}

std::uint64_t as_count(const std::string& key, const Value& v) {
  if (v.kind != Value::Kind::Int) type_error(key, v, "an integer");
  if (v.i < 0) bad_value(key, v, "must be non-negative");
  return static_cast<std::uint64_t>(v.i);
}

bool as_bool(const std::string& key, const Value& v) {
  if (v.kind != Value::Kind::Bool) type_error(key, v, "true or false");
  return v.b;
}

const std::string& as_string(const std::string& key, const Value& v) {
  if (v.kind != Value::Kind::String) type_error(key, v, "a string");
  return v.s;
}

std::vector<std::uint64_t> as_count_list(const std::string& key, const Value& v) {
  if (v.kind != Value::Kind::Array) type_error(key, v, "an array of integers");
  std::vector<std::uint64_t> out;
  for (const auto& item : v.items) out.push_back(as_count(key, item));
  return out;
}

std::vector<std::size_t> as_widths(const std::string& key, const Value& v) {
  std::vector<std::size_t> out;
  for (auto w : as_count_list(key, v)) out.push_back(static_cast<std::size_t>(w));
  return out;
}

template <typename T>
std::string format_list(const std::vector<T>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
  return s + "]";
}

data::SelectionMode parse_selection_mode(const std::string& key, const Value& v) {
  const auto& s = as_string(key, v);
  for (auto m : {data::SelectionMode::All, data::SelectionMode::Return, data::SelectionMode::Advantage,
                 data::SelectionMode::Success})
    if (s == data::selection_mode_name(m)) return m;
  bad_value(key, v, "unknown selection mode '" + s + "' (all, return, advantage, success)");
}

struct Field {
  const char* section;
  const char* key;
  const char* algo_name;  // AlgoConfig member reported by its validate(), or ""
  std::function<void(RunConfig&, const std::string&, const Value&)> set;
  std::function<std::string(const RunConfig&)> get;
  const char* provenance;
};

#define FLOAT_FIELD(sec, k, member, algo, prov)                                                          \
  Field{sec, k, algo, [](RunConfig& c, const std::string& key, const Value& v) { c.member = as_float(key, v); }, \
        [](const RunConfig& c) { return format_float(c.member); }, prov}
#define COUNT_FIELD(sec, k, member, algo, prov)                                                          \
  Field{sec, k, algo,                                                                                    \
        [](RunConfig& c, const std::string& key, const Value& v) {                                       \
          c.member = static_cast<decltype(c.member)>(as_count(key, v));                                  \
        },                                                                                               \
        [](const RunConfig& c) { return std::to_string(c.member); }, prov}
#define BOOL_FIELD(sec, k, member, algo, prov)                                                           \
  Field{sec, k, algo, [](RunConfig& c, const std::string& key, const Value& v) { c.member = as_bool(key, v); }, \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }, prov}
#define WIDTH_FIELD(sec, k, member, algo, prov)                                                          \
  Field{sec, k, algo, [](RunConfig& c, const std::string& key, const Value& v) { c.member = as_widths(key, v); }, \
        [](const RunConfig& c) { return format_list(c.member); }, prov}
#define STRING_FIELD(sec, k, member, prov)                                                               \
  Field{sec, k, "", [](RunConfig& c, const std::string& key, const Value& v) { c.member = as_string(key, v); }, \
        [](const RunConfig& c) { return quote(c.member); }, prov}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"run", "backbone", "",
            [](RunConfig& c, const std::string& key, const Value& v) {
              c.algo.backbone = algorithms::parse_backbone(as_string(key, v));
            },
            [](const RunConfig& c) { return quote(algorithms::backbone_name(c.algo.backbone)); },
            "required"},
      Field{"run", "env", "",
            [](RunConfig& c, const std::string& key, const Value& v) { c.env = envs::parse_env_kind(as_string(key, v)); },
            [](const RunConfig& c) { return quote(envs::env_name(c.env)); }, "required"},
      STRING_FIELD("run", "name", name, "output subdirectory name"),
      STRING_FIELD("run", "dataset", dataset, "required; a gen-data output"),
      STRING_FIELD("run", "output", output, "output root; SSAR_OUT and --out take precedence"),
      Field{"run", "seeds", "",
            [](RunConfig& c, const std::string& key, const Value& v) { c.seeds = as_count_list(key, v); },
            [](const RunConfig& c) { return format_list(c.seeds); }, "desk choice; acceptance uses 4 seeds"},

      Field{"selection", "mode", "",
            [](RunConfig& c, const std::string& key, const Value& v) {
              c.selection.mode = parse_selection_mode(key, v);
            },
            [](const RunConfig& c) { return quote(data::selection_mode_name(c.selection.mode)); },
            "all on dense tasks, success on the sparse maze (trajectory success defines D-hat there)"},
      FLOAT_FIELD("selection", "return_threshold", selection.return_threshold, "",
                  "G_T; dataset dependent, no universal default"),
      FLOAT_FIELD("selection", "tau", selection.tau, "", "IQL expectile 0.7, the value IQL itself uses"),
      COUNT_FIELD("selection", "iql_steps", selection.iql_steps, "", "desk-scale pretraining budget"),
      STRING_FIELD("selection", "iql_checkpoint", selection.iql_checkpoint,
                   "empty: pretrain IQL inline with the run seed"),

      FLOAT_FIELD("algorithm", "gamma", algo.gamma, "gamma", "backbone convention"),
      COUNT_FIELD("algorithm", "batch_size", algo.batch_size, "batch_size", "backbone convention (256)"),
      WIDTH_FIELD("algorithm", "actor_hidden", algo.actor_hidden, "actor_hidden",
                  "desk width; backbones use 256 wide layers"),
      WIDTH_FIELD("algorithm", "critic_hidden", algo.critic_hidden, "critic_hidden", "desk width"),
      WIDTH_FIELD("algorithm", "beta_hidden", algo.beta_hidden, "beta_hidden", "desk width"),
      FLOAT_FIELD("algorithm", "actor_lr", algo.actor_lr, "actor_lr", "backbone convention"),
      FLOAT_FIELD("algorithm", "critic_lr", algo.critic_lr, "critic_lr", "backbone convention"),
      FLOAT_FIELD("algorithm", "beta_lr", algo.beta_lr, "beta_lr",
                  "coefficient network step size, slower than the actor"),
      FLOAT_FIELD("algorithm", "alpha_lr", algo.alpha_lr, "alpha_lr", "SAC/CQL temperature convention"),
      FLOAT_FIELD("algorithm", "tau_polyak", algo.tau_polyak, "tau_polyak", "backbone convention"),
      COUNT_FIELD("algorithm", "policy_delay", algo.policy_delay, "policy_delay", "TD3 convention"),
      FLOAT_FIELD("algorithm", "target_noise", algo.target_noise, "target_noise", "TD3 convention"),
      FLOAT_FIELD("algorithm", "noise_clip", algo.noise_clip, "noise_clip", "TD3 convention"),
      FLOAT_FIELD("algorithm", "delta", algo.delta, "delta",
                  "TD3 exploration noise, read as the std of the Gaussian around pi(s)"),
      COUNT_FIELD("algorithm", "cql_samples", algo.cql_samples, "cql_samples", "CQL(H) convention (10 per proposal)"),
      COUNT_FIELD("algorithm", "cql_penalty_states", algo.cql_penalty_states, "cql_penalty_states",
                  "desk runtime cap on penalty states per batch; 0 uses all"),
      FLOAT_FIELD("algorithm", "init_alpha", algo.init_alpha, "init_alpha", "SAC convention"),
      BOOL_FIELD("algorithm", "sparse", algo.sparse, "sparse", "true on the sparse maze: CQL actor adds the BC term"),

      FLOAT_FIELD("coefficient", "beta_init", algo.beta_init, "beta_init",
                  "CQL(SA) 5.0, TD3+BC(SA) 2.5 (the backbones' fixed coefficients)"),
      BOOL_FIELD("coefficient", "adaptive", algo.adaptive_beta, "adaptive_beta",
                 "false gives the fixed-coefficient ablation"),
      FLOAT_FIELD("coefficient", "n_start", algo.n_start, "n_start", "n_start = 1"),
      FLOAT_FIELD("coefficient", "n_end", algo.n_end, "n_end", "3 dense, 1.5 expert-like data, 5 sparse"),
      COUNT_FIELD("coefficient", "t_inc", algo.t_inc, "t_inc", "desk scale (T / 100)"),
      COUNT_FIELD("coefficient", "steps", algo.steps, "steps", "desk scale offline budget T"),

      COUNT_FIELD("evaluation", "eval_every", algo.eval_every, "eval_every", "desk cadence"),
      COUNT_FIELD("evaluation", "eval_episodes", algo.eval_episodes, "eval_episodes", "desk cadence"),

      Field{"online", "strategy", "",
            [](RunConfig& c, const std::string& key, const Value& v) {
              c.algo.strategy = algorithms::parse_strategy(as_string(key, v));
            },
            [](const RunConfig& c) { return quote(algorithms::strategy_name(c.algo.strategy)); },
            "part: the fine-tuning buffer keeps D-hat"},
      COUNT_FIELD("online", "steps", algo.online_steps, "online_steps", "desk scale online budget"),
      COUNT_FIELD("online", "warmup_steps", algo.warmup_steps, "warmup_steps", "5000 warm-up steps"),
      COUNT_FIELD("online", "anneal_steps", algo.anneal_steps, "anneal_steps", "N_end = 400000"),
      COUNT_FIELD("online", "eval_every", algo.online_eval_every, "online_eval_every", "desk cadence"),
      COUNT_FIELD("online", "policy_delay", algo.online_policy_delay, "online_policy_delay",
                  "2 dense, 4 sparse (larger policy interval on sparse tasks)"),
  };
  return table;
}

#undef FLOAT_FIELD
#undef COUNT_FIELD
#undef BOOL_FIELD
#undef WIDTH_FIELD
#undef STRING_FIELD

const Value* find(const Document& doc, std::string_view section, std::string_view key) {
  for (const auto& s : doc.sections)
    if (s.name == section)
      for (const auto& e : s.entries)
        if (e.key == key) return &e.value;
  return nullptr;
}

std::string full_key(const Field& f) { return std::string(f.section) + "." + f.key; }

}  // namespace

RunConfig default_run_config(Backbone b, envs::EnvKind env) {
  RunConfig c;
  c.env = env;
  c.algo = algorithms::default_config(b);
  if (env == envs::EnvKind::PointMaze) {
    c.algo.sparse = true;
    c.algo.n_end = 5.0;
    c.algo.online_policy_delay = 4;
    c.selection.mode = data::SelectionMode::Success;
  }
  return c;
}

RunConfig parse_run_config(std::string_view text, const std::string& source) {
  const Document doc = parse_document(text, source);
  const Value* backbone = find(doc, "run", "backbone");
  const Value* env = find(doc, "run", "env");
  if (!backbone) throw UserError("bad_config", "run.backbone is required", {{"key", "run.backbone"}});
  if (!env) throw UserError("bad_config", "run.env is required", {{"key", "run.env"}});
  RunConfig c = default_run_config(algorithms::parse_backbone(as_string("run.backbone", *backbone)),
                                   envs::parse_env_kind(as_string("run.env", *env)));

  std::map<std::string, const Field*> by_key;
  std::set<std::string> sections;
  for (const auto& f : fields()) {
    by_key[full_key(f)] = &f;
    sections.insert(f.section);
  }
  for (const auto& s : doc.sections) {
    if (!sections.count(s.name))
      throw UserError("bad_config", "unknown section [" + s.name + "]",
                      {{"section", s.name}, {"line", std::to_string(s.line)}});
    for (const auto& e : s.entries) {
      const std::string key = s.name + "." + e.key;
      const auto it = by_key.find(key);
      if (it == by_key.end())
        throw UserError("bad_config", "unknown key " + key, {{"key", key}, {"line", std::to_string(e.value.line)}});
      it->second->set(c, key, e.value);
    }
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("config_not_found", "cannot open config file", {{"path", path.string()}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

std::string format_run_config(const RunConfig& c) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(c) + "\n";
  }
  return out;
}

void validate(const RunConfig& c) {
  if (c.name.empty() || c.name.find('/') != std::string::npos || c.name == "." || c.name == "..")
    throw UserError("bad_config", "run.name must be a plain directory name", {{"key", "run.name"}});
  if (c.dataset.empty()) throw UserError("bad_config", "run.dataset is required", {{"key", "run.dataset"}});
  if (c.seeds.empty()) throw UserError("bad_config", "run.seeds must list at least one seed", {{"key", "run.seeds"}});
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
    throw UserError("bad_config", "run.seeds has duplicates", {{"key", "run.seeds"}});
  if (!(c.selection.tau > 0.0 && c.selection.tau < 1.0))
    throw UserError("bad_config", "selection.tau must lie in (0, 1)", {{"key", "selection.tau"}});
  if (c.selection.mode == data::SelectionMode::Advantage && c.selection.iql_checkpoint.empty() &&
      c.selection.iql_steps == 0)
    throw UserError("bad_config", "selection.iql_steps must be positive for advantage selection",
                    {{"key", "selection.iql_steps"}});
  try {
    c.algo.validate();
  } catch (const UserError& e) {
    std::string field;
    for (const auto& [k, v] : e.details())
      if (k == "field") field = v;
    for (const auto& f : fields())
      if (!field.empty() && field == f.algo_name)
        throw UserError("bad_config", full_key(f) + ": " + e.what(), {{"key", full_key(f)}});
    throw;
  }
}

std::filesystem::path resolve_output_dir(const RunConfig& c, const std::string& cli_out) {
  std::filesystem::path root = c.output;
  if (const char* env = std::getenv("SSAR_OUT"); env && *env) root = env;
  if (!cli_out.empty()) root = cli_out;
  return root / c.name;
}

std::string provenance_table() {
  const RunConfig pend = default_run_config(Backbone::Td3BcSa, envs::EnvKind::Pendulum);
  const RunConfig cql = default_run_config(Backbone::CqlSa, envs::EnvKind::Pendulum);
  const RunConfig maze = default_run_config(Backbone::CqlSa, envs::EnvKind::PointMaze);
  std::string out = "| key | default | maze / CQL(SA) override | source |\n|---|---|---|---|\n";
  for (const auto& f : fields()) {
    const std::string base = f.get(pend);
    std::string over;
    if (f.get(cql) != base) over += "CQL(SA): `" + f.get(cql) + "`";
    if (f.get(maze) != f.get(cql)) over += std::string(over.empty() ? "" : "; ") + "maze: `" + f.get(maze) + "`";
    out += "| `" + full_key(f) + "` | `" + base + "` | " + over + " | " + f.provenance + " |\n";
  }
  return out;
}

}  // namespace ssar::cli

#include "ssar/algorithms/config.hpp"

#include <cmath>
#include <string>

#include "ssar/error.hpp"
#include "ssar/regularizer/coefficient.hpp"

namespace ssar::algorithms {

std::string_view backbone_name(Backbone b) { return b == Backbone::CqlSa ? "cql-sa" : "td3bc-sa"; }

Backbone parse_backbone(std::string_view name) {
  if (name == "cql-sa") return Backbone::CqlSa;
  if (name == "td3bc-sa") return Backbone::Td3BcSa;
  throw UserError("bad_backbone", "unknown backbone (expected cql-sa or td3bc-sa)", {{"value", std::string(name)}});
}

std::string_view strategy_name(BufferStrategy s) {
  switch (s) {
    case BufferStrategy::All: return "all";
    case BufferStrategy::Half: return "half";
    case BufferStrategy::Part: return "part";
    case BufferStrategy::None: return "none";
  }
  return "?";
}

BufferStrategy parse_strategy(std::string_view name) {
  if (name == "all") return BufferStrategy::All;
  if (name == "half") return BufferStrategy::Half;
  if (name == "part") return BufferStrategy::Part;
  if (name == "none") return BufferStrategy::None;
  throw UserError("bad_strategy", "unknown buffer strategy (expected all, half, part or none)",
                  {{"value", std::string(name)}});
}

namespace {

[[noreturn]] void bad(const char* field, const std::string& why) {
  throw UserError("bad_config", std::string(field) + ": " + why, {{"field", field}});
}

void positive(const char* field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) bad(field, "must be positive and finite");
}

void widths(const char* field, const std::vector<std::size_t>& w) {
  if (w.empty()) bad(field, "needs at least one hidden layer");
  for (auto x : w)
    if (x == 0) bad(field, "hidden widths must be positive");
}

}  // namespace

void AlgoConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) bad("gamma", "must lie in [0, 1)");
  if (batch_size == 0) bad("batch_size", "must be positive");
  widths("actor_hidden", actor_hidden);
  widths("critic_hidden", critic_hidden);
  widths("beta_hidden", beta_hidden);
  positive("actor_lr", actor_lr);
  positive("critic_lr", critic_lr);
  positive("beta_lr", beta_lr);
  positive("alpha_lr", alpha_lr);
  if (!(tau_polyak > 0.0 && tau_polyak <= 1.0)) bad("tau_polyak", "must lie in (0, 1]");
  if (policy_delay == 0) bad("policy_delay", "must be positive");
  if (online_policy_delay == 0) bad("online_policy_delay", "must be positive");
  if (!(target_noise >= 0.0)) bad("target_noise", "must be non-negative");
  if (!(noise_clip >= 0.0)) bad("noise_clip", "must be non-negative");
  positive("delta", delta);
  if (cql_samples == 0) bad("cql_samples", "must be positive");
  positive("init_alpha", init_alpha);
  positive("beta_init", beta_init);
  if (!(n_start >= 0.0)) bad("n_start", "must be non-negative");
  if (!(n_end >= n_start)) bad("n_end", "must be at least n_start");
  if (t_inc == 0) bad("t_inc", "must be positive");
  if (eval_every == 0) bad("eval_every", "must be positive");
  if (eval_episodes == 0) bad("eval_episodes", "must be positive");
  if (anneal_steps == 0) bad("anneal_steps", "must be positive");
  if (online_eval_every == 0) bad("online_eval_every", "must be positive");
}

AlgoConfig default_config(Backbone b) {
  AlgoConfig c;
  c.backbone = b;
  c.beta_init = b == Backbone::CqlSa ? regularizer::kBetaInitCql : regularizer::kBetaInitTd3;
  return c;
}

}  // namespace ssar::algorithms

#pragma once

// Pure backbone losses. Each takes parameters by const reference and, when
// a gradient buffer is passed, accumulates d loss / d parameters into it.
// Update functions in train.hpp wrap these with the optimizers; tests
// compare them against central finite differences.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssar/data/batch.hpp"
#include "ssar/policy/deterministic.hpp"
#include "ssar/policy/gaussian.hpp"
#include "ssar/value/critic.hpp"

namespace ssar::algorithms {

using numeric::Matrix;
using numeric::MlpParams;

struct CriticGrads {
  MlpParams q1, q2;
};
CriticGrads zero_critic_grads(const value::CriticPair& c);

// ---- TD3 ---------------------------------------------------------------

/// Target-policy smoothing noise: clip(sigma * eps, -clip, clip).
Matrix td3_target_noise(Rng& rng, std::size_t rows, std::size_t cols, double sigma, double clip);

/// y = r + gamma * not_done * min_k Qtarg_k(s', clip(pi_targ(s') + noise, -1, 1)).
std::vector<double> td3_target(const value::CriticPair& c, const policy::DeterministicHead& actor_target,
                               const data::Batch& b, double gamma, const Matrix& noise);

/// Sum over both critics of 1/2 mean (Q_k(s,a) - y)^2.
double td3_critic_loss(const value::CriticPair& c, const data::Batch& b, std::span<const double> target,
                       CriticGrads* grads);

/// -q_scale * mean Q1(s, pi(s)) + mean 1[D-hat] beta_i |pi(s_i) - a_i|^2, with
/// q_scale = 1 / mean |Q1(s_i, a_i)| and beta both held constant.
struct Td3bcTerms {
  double q_scale = 0.0;
  double q_term = 0.0;
  double bc_term = 0.0;
};
double td3bc_actor_loss(const policy::DeterministicHead& actor, const value::CriticPair& c,
                        const data::Batch& b, std::span<const double> beta, MlpParams* grads,
                        Td3bcTerms* terms = nullptr);

// ---- CQL ---------------------------------------------------------------

/// log-mean-exp of importance-weighted values: LSE(v) - log(v.size()).
/// Each v_j is Q(s, a_j) - log q(a_j) for a proposal density q.
double sampled_logsumexp(std::span<const double> v);

/// Proposal draws for the penalty. Only rows in D-hat receive it, so only
/// those states are sampled; with `max_states` > 0 a uniform subset of at
/// most that many D-hat rows is kept (an unbiased estimate of the mean over
/// all of them). Matrices stack `per_state` rows per regularized state, in
/// order.
struct CqlSamples {
  std::size_t per_state = 0;
  std::vector<std::size_t> rows;  // batch rows carrying the penalty
  Matrix obs;                     // s repeated per_state times
  Matrix uniform;
  Matrix current;
  std::vector<double> current_logp;
  Matrix next;
  std::vector<double> next_logp;
};
CqlSamples draw_cql_samples(const policy::GaussianHead& actor, const data::Batch& b, std::size_t per_state,
                            Rng& rng, std::size_t max_states = 0);

/// y = r + gamma * not_done * min_k Qtarg_k(s', a'), a' ~ pi(.|s').
std::vector<double> cql_target(const value::CriticPair& c, const policy::GaussianHead& actor,
                               const data::Batch& b, double gamma, Rng& rng);

struct CqlTerms {
  double bellman = 0.0;  // summed over both critics
  double penalty = 0.0;  // summed over both critics, already weighted by beta
  double logsumexp = 0.0;  // mean estimate over regularized states, critic 1
};

/// Sum over k of mean_{i in D-hat} beta_i (LSE_k(s_i) - Q_k(s_i, a_i)) plus
/// 1/2 mean (Q_k - y)^2 over the whole batch. `beta` is per batch row.
double cql_critic_loss(const value::CriticPair& c, const data::Batch& b, std::span<const double> target,
                       std::span<const double> beta, const CqlSamples& samples, CriticGrads* grads,
                       CqlTerms* terms = nullptr);

/// mean[alpha log pi(a|s) - min_k Q_k(s, a)] over a reparameterized draw,
/// plus 1/2 mean |a - a_data|^2 when `bc` is set. Reports mean log pi for
/// the temperature update.
struct CqlActorTerms {
  double mean_log_prob = 0.0;
  double q_term = 0.0;
  double bc_term = 0.0;
};
double cql_actor_loss(const policy::GaussianHead& actor, const value::CriticPair& c, const data::Batch& b,
                      double alpha, bool bc, std::uint64_t seed, MlpParams* grads,
                      CqlActorTerms* terms = nullptr);

/// d/d log(alpha) of -log(alpha) * (mean log pi + target_entropy), i.e. the
/// automatic temperature objective.
double alpha_loss(double log_alpha, double mean_log_prob, double target_entropy, double* grad);

}  // namespace ssar::algorithms

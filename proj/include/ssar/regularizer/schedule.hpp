#pragma once

#include <cstdint>

#include "ssar/policy/trust_region.hpp"

namespace ssar::regularizer {

inline constexpr double kTerminationDecay = 0.99;

/// The n schedule plus a running estimate of E_D[log pi - C_n] (or the
/// deterministic margin), updated from full-dataset batches.
struct ScheduleState {
  policy::TrustRegionParam trust;
  double termination_stat = 0.0;
  bool stat_seen = false;

  bool frozen() const { return trust.frozen; }
  double n() const { return trust.n; }
};

ScheduleState make_schedule(const policy::TrustRegionParam& trust);

/// Exponential moving average (decay 0.99) of per-batch statistic means;
/// the first observation initializes it.
void observe_statistic(ScheduleState& s, double batch_mean);

/// At positive multiples of T_inc: freeze permanently if the statistic is
/// positive, otherwise n <- min(n + delta n, n_end). No-op elsewhere and
/// once frozen. Returns true when the call fell on an interval.
bool schedule_step(ScheduleState& s, std::uint64_t global_step, double termination_stat);
bool schedule_step(ScheduleState& s, std::uint64_t global_step);

/// clamp(1 - N / N_end, 0, 1) * beta.
double anneal(double beta, std::uint64_t online_steps, std::uint64_t n_end);
double anneal_scale(std::uint64_t online_steps, std::uint64_t n_end);

}  // namespace ssar::regularizer

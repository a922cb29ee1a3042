#include "ssar/regularizer/schedule.hpp"

#include <algorithm>

#include "ssar/error.hpp"

namespace ssar::regularizer {

ScheduleState make_schedule(const policy::TrustRegionParam& trust) {
  trust.validate();
  ScheduleState s;
  s.trust = trust;
  return s;
}

void observe_statistic(ScheduleState& s, double batch_mean) {
  s.termination_stat = s.stat_seen ? kTerminationDecay * s.termination_stat + (1.0 - kTerminationDecay) * batch_mean
                                   : batch_mean;
  s.stat_seen = true;
}

bool schedule_step(ScheduleState& s, std::uint64_t global_step, double termination_stat) {
  if (global_step == 0 || global_step % s.trust.t_inc != 0) return false;
  if (s.trust.frozen) return true;
  if (termination_stat > 0.0) {
    s.trust.frozen = true;
    return true;
  }
  s.trust.n = std::min(s.trust.n + s.trust.delta_n(), s.trust.n_end);
  return true;
}

bool schedule_step(ScheduleState& s, std::uint64_t global_step) {
  return schedule_step(s, global_step, s.termination_stat);
}

double anneal_scale(std::uint64_t online_steps, std::uint64_t n_end) {
  if (n_end == 0) throw UserError("bad_anneal", "annealing horizon N_end must be positive");
  return std::clamp(1.0 - static_cast<double>(online_steps) / static_cast<double>(n_end), 0.0, 1.0);
}

double anneal(double beta, std::uint64_t online_steps, std::uint64_t n_end) {
  return anneal_scale(online_steps, n_end) * beta;
}

}  // namespace ssar::regularizer

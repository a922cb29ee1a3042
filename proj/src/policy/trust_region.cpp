#include "ssar/policy/trust_region.hpp"

#include <cmath>
#include <string>

#include "ssar/error.hpp"

namespace ssar::policy {

double TrustRegionParam::delta_n() const {
  return (n_end - n_start) * static_cast<double>(t_inc) / static_cast<double>(total_steps);
}

void TrustRegionParam::validate() const {
  if (!std::isfinite(n_start) || !std::isfinite(n_end) || n_start < 0.0 || n_end < n_start)
    throw UserError("bad_trust_region", "need 0 <= n_start <= n_end",
                    {{"n_start", std::to_string(n_start)}, {"n_end", std::to_string(n_end)}});
  if (t_inc == 0 || total_steps == 0)
    throw UserError("bad_trust_region", "T_inc and T must be positive",
                    {{"t_inc", std::to_string(t_inc)}, {"total_steps", std::to_string(total_steps)}});
  if (!(n >= n_start && n <= n_end))
    throw UserError("bad_trust_region", "n outside [n_start, n_end]", {{"n", std::to_string(n)}});
}

TrustRegionParam make_trust_region(double n_start, double n_end, std::uint64_t t_inc,
                                   std::uint64_t total_steps) {
  TrustRegionParam p{n_start, n_start, n_end, t_inc, total_steps, false};
  p.validate();
  return p;
}

}  // namespace ssar::policy

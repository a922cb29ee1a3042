#pragma once

#include <cstdint>

namespace ssar::policy {

/// Width of the trust region mu +- n sigma and its linear schedule.
struct TrustRegionParam {
  double n = 1.0;
  double n_start = 1.0;
  double n_end = 3.0;
  std::uint64_t t_inc = 10'000;
  std::uint64_t total_steps = 1'000'000;
  bool frozen = false;

  /// (n_end - n_start) * T_inc / T.
  double delta_n() const;
  /// Throws UserError when the endpoints or intervals are inconsistent.
  void validate() const;

  friend bool operator==(const TrustRegionParam&, const TrustRegionParam&) = default;
};

TrustRegionParam make_trust_region(double n_start, double n_end, std::uint64_t t_inc,
                                   std::uint64_t total_steps);

}  // namespace ssar::policy

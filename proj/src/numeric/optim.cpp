#include "ssar/numeric/optim.hpp"

#include <cmath>
#include <string>

#include "ssar/error.hpp"
#include "ssar/numeric/kernels.hpp"

namespace ssar::numeric {
namespace {

kernels::AdamCoefficients coefficients(const AdamConfig& c, std::uint64_t t) {
  const double td = static_cast<double>(t);
  return {c.lr, c.beta1, c.beta2, c.eps, 1.0 - std::pow(c.beta1, td), 1.0 - std::pow(c.beta2, td)};
}

}  // namespace

AdamState make_adam(const MlpParams& params, AdamConfig config) {
  return AdamState{config, zeros_like(params), zeros_like(params), 0};
}

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads) {
  if (!same_shape(params, grads) || !same_shape(params, state.m))
    throw Error("dimension_mismatch", "adam_step: parameter, gradient and moment shapes differ");
  ++state.t;
  const auto k = coefficients(state.config, state.t);
  const auto& table = kernels::table(kernels::active_backend());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    auto& m = state.m.layers[l];
    auto& v = state.v.layers[l];
    table.adam(p.weight.size(), k, g.weight.data(), p.weight.data(), m.weight.data(), v.weight.data());
    table.adam(p.bias.size(), k, g.bias.data(), p.bias.data(), m.bias.data(), v.bias.data());
    table.adam(p.ln_scale.size(), k, g.ln_scale.data(), p.ln_scale.data(), m.ln_scale.data(),
               v.ln_scale.data());
    table.adam(p.ln_shift.size(), k, g.ln_shift.data(), p.ln_shift.data(), m.ln_shift.data(),
               v.ln_shift.data());
  }
}

void ScalarAdam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m.size() || grads.size() != m.size())
    throw Error("dimension_mismatch", "ScalarAdam: size mismatch");
  ++t;
  const auto k = coefficients(config, t);
  kernels::table(kernels::active_backend())
      .adam(params.size(), k, grads.data(), params.data(), m.data(), v.data());
}

void polyak_update(MlpParams& target, const MlpParams& online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0))
    throw Error("invalid_argument", "polyak rate must lie in (0, 1]", {{"tau", std::to_string(tau)}});
  if (!same_shape(target, online))
    throw Error("dimension_mismatch", "polyak_update: target and online shapes differ");
  zip_buffers(target, online, [&](std::span<double> t, std::span<const double> o) {
    kernels::axpby(tau, o, 1.0 - tau, t);
  });
}

}  // namespace ssar::numeric

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssar/numeric/matrix.hpp"
#include "ssar/numeric/random.hpp"

namespace ssar::numeric {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1, Tanh = 2 };
enum class Norm : std::uint8_t { None = 0, LayerNorm = 1 };
enum class SquashKind : std::uint8_t { None = 0, SigmoidScaled = 1, Tanh = 2 };

/// Output squash applied after the last layer.
/// SigmoidScaled maps raw r to lo + (hi - lo) * sigmoid(r), with r clamped
/// to +-kSigmoidRawLimit so the open interval (lo, hi) is never left in
/// double precision.
struct Squash {
  SquashKind kind = SquashKind::None;
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const Squash&, const Squash&) = default;
};

inline constexpr double kSigmoidRawLimit = 30.0;
inline constexpr double kLayerNormVarianceFloor = 1e-5;

/// One affine layer followed by optional LayerNorm and an activation.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::Identity;
  Norm norm = Norm::None;
  std::vector<double> weight;    // out x in, row-major
  std::vector<double> bias;      // out
  std::vector<double> ln_scale;  // out, only with LayerNorm
  std::vector<double> ln_shift;  // out, only with LayerNorm

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Parameters of a multilayer perceptron. The same type doubles as the
/// gradient buffer and as Adam moment storage, so shapes always agree.
struct MlpParams {
  std::vector<DenseLayer> layers;
  Squash squash;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out; }
  std::size_t parameter_count() const;

  /// Throws ssar::Error on dimension mismatch or non-finite entries.
  void validate() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct MlpSpec {
  std::size_t input = 0;
  std::vector<std::size_t> hidden;
  std::size_t output = 0;
  Activation hidden_activation = Activation::Relu;
  Norm hidden_norm = Norm::None;
  Squash squash;
  /// Multiplies the initial weights and bias of the final layer.
  double final_layer_scale = 1.0;
};

/// Uniform(+-1/sqrt(fan_in)) initialization, LayerNorm at unit scale / zero shift.
MlpParams make_mlp(const MlpSpec& spec, Rng& rng);

MlpParams zeros_like(const MlpParams& p);
bool same_shape(const MlpParams& a, const MlpParams& b);

/// Visits every parameter buffer of `a` together with the matching buffer of
/// `b` (same shapes required).
template <class A, class B, class F>
void zip_buffers(A& a, B& b, F&& fn) {
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    auto& la = a.layers[l];
    auto& lb = b.layers[l];
    fn(std::span(la.weight), std::span(lb.weight));
    fn(std::span(la.bias), std::span(lb.bias));
    fn(std::span(la.ln_scale), std::span(lb.ln_scale));
    fn(std::span(la.ln_shift), std::span(lb.ln_shift));
  }
}

template <class A, class F>
void for_each_buffer(A& a, F&& fn) {
  for (auto& l : a.layers) {
    fn(std::span(l.weight));
    fn(std::span(l.bias));
    fn(std::span(l.ln_scale));
    fn(std::span(l.ln_shift));
  }
}

/// Flattened copy of all parameters, in zip_buffers order.
std::vector<double> flatten(const MlpParams& p);
void unflatten(std::span<const double> flat, MlpParams& p);

/// FNV-1a over the raw bytes of all parameters.
std::uint64_t parameter_hash(const MlpParams& p);

/// Per-layer record of a forward pass, replayed in reverse by backward().
struct LayerRecord {
  Matrix input;       // network input; empty past layer 0, which reads the previous output
  Matrix linear;      // affine output
  Matrix normalized;  // centred and scaled pre-activation (LayerNorm only)
  std::vector<double> inv_std;
  Matrix output;      // post-activation
};

/// Recorded primitive operations of one batched forward pass.
struct GradTape {
  std::vector<LayerRecord> layers;
  Matrix raw;     // final-layer output before the squash
  Matrix output;  // network output

  /// Throws NonFinite error naming the first non-finite intermediate.
  void check_finite() const;
};

/// Batched forward: x is batch x input_dim.
Matrix forward(const MlpParams& params, const Matrix& x);
Matrix forward(const MlpParams& params, const Matrix& x, GradTape& tape);

/// Single-sample convenience.
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x);

/// Reverse pass. Accumulates (+=) parameter gradients into `grads` when
/// non-null and writes d loss / d input into `d_input` when non-null.
void backward(const MlpParams& params, const GradTape& tape, const Matrix& d_output,
              MlpParams* grads, Matrix* d_input);

}  // namespace ssar::numeric

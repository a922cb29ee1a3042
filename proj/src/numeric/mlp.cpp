#include "ssar/numeric/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "ssar/error.hpp"
#include "ssar/numeric/kernels.hpp"

namespace ssar::numeric {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamp_raw(double r) { return std::clamp(r, -kSigmoidRawLimit, kSigmoidRawLimit); }

void apply_activation(Activation act, Matrix& m) {
  switch (act) {
    case Activation::Identity:
      return;
    case Activation::Relu:
      for (double& v : m.values()) v = v < 0.0 ? 0.0 : v;  // keeps NaN visible
      return;
    case Activation::Tanh:
      for (double& v : m.values()) v = std::tanh(v);
      return;
  }
}

void apply_squash(const Squash& sq, const Matrix& raw, Matrix& out) {
  out = raw;
  switch (sq.kind) {
    case SquashKind::None:
      return;
    case SquashKind::SigmoidScaled:
      for (double& v : out.values()) v = sq.lo + (sq.hi - sq.lo) * sigmoid(clamp_raw(v));
      return;
    case SquashKind::Tanh:
      for (double& v : out.values()) v = std::tanh(v);
      return;
  }
}

std::vector<double> transpose(const DenseLayer& layer) {
  std::vector<double> t(layer.in * layer.out);
  for (std::size_t o = 0; o < layer.out; ++o)
    for (std::size_t i = 0; i < layer.in; ++i) t[i * layer.out + o] = layer.weight[o * layer.in + i];
  return t;
}

void affine(const DenseLayer& layer, const Matrix& x, Matrix& y) {
  const std::size_t batch = x.rows();
  y.resize(batch, layer.out);
  for (std::size_t r = 0; r < batch; ++r) std::copy(layer.bias.begin(), layer.bias.end(), y.row(r).begin());
  const auto wt = transpose(layer);
  kernels::gemm_nn(batch, layer.out, layer.in, x.data(), wt.data(), y.data());
}

void layer_norm(const DenseLayer& layer, const Matrix& lin, Matrix& normalized,
                std::vector<double>& inv_std, Matrix& out) {
  const std::size_t batch = lin.rows(), width = lin.cols();
  normalized.resize(batch, width);
  out.resize(batch, width);
  inv_std.assign(batch, 0.0);
  for (std::size_t r = 0; r < batch; ++r) {
    const auto x = lin.row(r);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(width);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(width);
    const double inv = 1.0 / std::sqrt(std::max(var, kLayerNormVarianceFloor));
    inv_std[r] = inv;
    auto n = normalized.row(r);
    auto y = out.row(r);
    for (std::size_t c = 0; c < width; ++c) {
      n[c] = (x[c] - mean) * inv;
      y[c] = layer.ln_scale[c] * n[c] + layer.ln_shift[c];
    }
  }
}

Matrix run_forward(const MlpParams& params, const Matrix& x, GradTape* tape) {
  if (params.layers.empty()) throw Error("empty_network", "MLP has no layers");
  if (x.cols() != params.input_dim())
    throw Error("dimension_mismatch", "input width does not match the first layer",
                {{"expected", std::to_string(params.input_dim())},
                 {"actual", std::to_string(x.cols())}});
  if (tape) {
    tape->layers.assign(params.layers.size(), {});
    tape->layers[0].input = x;
  }
  // Hidden layers read their input straight out of the previous record, so
  // a taped pass stores each activation exactly once.
  const Matrix* in = &x;
  Matrix current;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Matrix lin;
    affine(layer, *in, lin);
    Matrix post;
    if (layer.norm == Norm::LayerNorm) {
      Matrix normalized;
      std::vector<double> inv_std;
      layer_norm(layer, lin, normalized, inv_std, post);
      if (tape) {
        tape->layers[l].normalized = std::move(normalized);
        tape->layers[l].inv_std = std::move(inv_std);
      }
    } else if (tape) {
      post = lin;
    } else {
      post = std::move(lin);
    }
    apply_activation(layer.activation, post);
    if (tape) {
      auto& rec = tape->layers[l];
      rec.linear = std::move(lin);
      rec.output = std::move(post);
      in = &rec.output;
    } else {
      current = std::move(post);
      in = &current;
    }
  }
  Matrix out;
  apply_squash(params.squash, *in, out);
  if (tape) {
    tape->raw = *in;
    tape->output = out;
  }
  return out;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

}  // namespace

Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw Error("dimension_mismatch", "hconcat row counts differ",
                {{"left", std::to_string(a.rows())}, {"right", std::to_string(b.rows())}});
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto o = out.row(r);
    std::copy(a.row(r).begin(), a.row(r).end(), o.begin());
    std::copy(b.row(r).begin(), b.row(r).end(), o.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

Matrix columns(const Matrix& m, std::size_t begin, std::size_t count) {
  Matrix out(m.rows(), count);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = m(r, begin + c);
  return out;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for_each_buffer(*this, [&](std::span<const double> b) { n += b.size(); });
  return n;
}

void MlpParams::validate() const {
  if (layers.empty()) throw Error("empty_network", "MLP has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (l > 0 && layer.in != layers[l - 1].out)
      throw Error("dimension_mismatch", where + " input does not match previous output",
                  {{"layer", std::to_string(l)},
                   {"expected", std::to_string(layers[l - 1].out)},
                   {"actual", std::to_string(layer.in)}});
    if (layer.weight.size() != layer.in * layer.out || layer.bias.size() != layer.out)
      throw Error("dimension_mismatch", where + " buffer sizes disagree with its dims",
                  {{"layer", std::to_string(l)}});
    const std::size_t ln = layer.norm == Norm::LayerNorm ? layer.out : 0;
    if (layer.ln_scale.size() != ln || layer.ln_shift.size() != ln)
      throw Error("dimension_mismatch", where + " layernorm buffers have the wrong size",
                  {{"layer", std::to_string(l)}});
    if (!all_finite(layer.weight) || !all_finite(layer.bias) || !all_finite(layer.ln_scale) ||
        !all_finite(layer.ln_shift))
      throw Error("non_finite", where + " holds a non-finite parameter", {{"layer", std::to_string(l)}});
  }
}

MlpParams make_mlp(const MlpSpec& spec, Rng& rng) {
  MlpParams p;
  p.squash = spec.squash;
  std::vector<std::size_t> dims{spec.input};
  dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
  dims.push_back(spec.output);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    const bool last = l + 2 == dims.size();
    layer.activation = last ? Activation::Identity : spec.hidden_activation;
    layer.norm = last ? Norm::None : spec.hidden_norm;
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    const double scale = last ? spec.final_layer_scale : 1.0;
    layer.weight.resize(layer.in * layer.out);
    layer.bias.resize(layer.out);
    for (double& w : layer.weight) w = scale * uniform(rng, -bound, bound);
    for (double& b : layer.bias) b = scale * uniform(rng, -bound, bound);
    if (layer.norm == Norm::LayerNorm) {
      layer.ln_scale.assign(layer.out, 1.0);
      layer.ln_shift.assign(layer.out, 0.0);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpParams zeros_like(const MlpParams& p) {
  MlpParams z = p;
  for_each_buffer(z, [](std::span<double> b) { std::fill(b.begin(), b.end(), 0.0); });
  return z;
}

bool same_shape(const MlpParams& a, const MlpParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const auto& x = a.layers[l];
    const auto& y = b.layers[l];
    if (x.in != y.in || x.out != y.out || x.norm != y.norm || x.activation != y.activation)
      return false;
  }
  return true;
}

std::vector<double> flatten(const MlpParams& p) {
  std::vector<double> flat;
  flat.reserve(p.parameter_count());
  for_each_buffer(p, [&](std::span<const double> b) { flat.insert(flat.end(), b.begin(), b.end()); });
  return flat;
}

void unflatten(std::span<const double> flat, MlpParams& p) {
  if (flat.size() != p.parameter_count())
    throw Error("dimension_mismatch", "flat parameter vector has the wrong length");
  std::size_t offset = 0;
  for_each_buffer(p, [&](std::span<double> b) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), b.size(), b.begin());
    offset += b.size();
  });
}

std::uint64_t parameter_hash(const MlpParams& p) {
  std::uint64_t h = 1469598103934665603ULL;
  for_each_buffer(p, [&](std::span<const double> b) {
    for (double v : b) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof v);
      for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
      }
    }
  });
  return h;
}

void GradTape::check_finite() const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& rec = layers[l];
    const auto fail = [&](const char* what) {
      throw Error("non_finite", "non-finite intermediate at layer " + std::to_string(l) + " " + what,
                  {{"layer", std::to_string(l)}, {"intermediate", what}});
    };
    if (l == 0 && !all_finite(rec.input.values())) fail("input");
    if (!all_finite(rec.linear.values())) fail("affine output");
    if (!all_finite(rec.normalized.values())) fail("layernorm output");
    if (!all_finite(rec.output.values())) fail("activation output");
  }
  if (!all_finite(output.values()))
    throw Error("non_finite", "non-finite network output", {{"intermediate", "squash output"}});
}

Matrix forward(const MlpParams& params, const Matrix& x) { return run_forward(params, x, nullptr); }

Matrix forward(const MlpParams& params, const Matrix& x, GradTape& tape) {
  return run_forward(params, x, &tape);
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x) {
  Matrix in(1, x.size());
  std::copy(x.begin(), x.end(), in.row(0).begin());
  const Matrix out = forward(params, in);
  return {out.values().begin(), out.values().end()};
}

void backward(const MlpParams& params, const GradTape& tape, const Matrix& d_output,
              MlpParams* grads, Matrix* d_input) {
  if (tape.layers.size() != params.layers.size())
    throw Error("tape_mismatch", "tape was recorded for a different network");
  if (d_output.rows() != tape.output.rows() || d_output.cols() != tape.output.cols())
    throw Error("dimension_mismatch", "output gradient shape does not match the tape");
  if (grads && !same_shape(*grads, params))
    throw Error("dimension_mismatch", "gradient buffers do not match parameter shapes");

  Matrix d = d_output;
  switch (params.squash.kind) {
    case SquashKind::None:
      break;
    case SquashKind::SigmoidScaled: {
      const double range = params.squash.hi - params.squash.lo;
      auto dv = d.values();
      const auto raw = tape.raw.values();
      for (std::size_t i = 0; i < dv.size(); ++i) {
        if (std::abs(raw[i]) >= kSigmoidRawLimit) {
          dv[i] = 0.0;
          continue;
        }
        const double s = sigmoid(raw[i]);
        dv[i] *= range * s * (1.0 - s);
      }
      break;
    }
    case SquashKind::Tanh: {
      auto dv = d.values();
      const auto out = tape.output.values();
      for (std::size_t i = 0; i < dv.size(); ++i) dv[i] *= 1.0 - out[i] * out[i];
      break;
    }
  }

  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& layer = params.layers[li];
    const auto& rec = tape.layers[li];
    const Matrix& input = li == 0 ? rec.input : tape.layers[li - 1].output;
    const std::size_t batch = input.rows();

    switch (layer.activation) {
      case Activation::Identity:
        break;
      case Activation::Relu: {
        auto dv = d.values();
        const auto post = rec.output.values();
        for (std::size_t i = 0; i < dv.size(); ++i)
          if (!(post[i] > 0.0)) dv[i] = 0.0;
        break;
      }
      case Activation::Tanh: {
        auto dv = d.values();
        const auto post = rec.output.values();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] *= 1.0 - post[i] * post[i];
        break;
      }
    }

    if (layer.norm == Norm::LayerNorm) {
      const std::size_t width = layer.out;
      const double inv_width = 1.0 / static_cast<double>(width);
      for (std::size_t r = 0; r < batch; ++r) {
        auto dr = d.row(r);
        const auto n = rec.normalized.row(r);
        if (grads) {
          auto& g = grads->layers[li];
          for (std::size_t c = 0; c < width; ++c) {
            g.ln_scale[c] += dr[c] * n[c];
            g.ln_shift[c] += dr[c];
          }
        }
        double mean_dn = 0.0, mean_dn_n = 0.0;
        for (std::size_t c = 0; c < width; ++c) {
          const double dn = dr[c] * layer.ln_scale[c];
          mean_dn += dn;
          mean_dn_n += dn * n[c];
        }
        mean_dn *= inv_width;
        mean_dn_n *= inv_width;
        const double inv = rec.inv_std[r];
        // Below the variance floor inv_std is a constant, so only the mean
        // subtraction contributes. The forward pass produced exactly this
        // value in that case.
        const bool floored = inv >= 1.0 / std::sqrt(kLayerNormVarianceFloor);
        for (std::size_t c = 0; c < width; ++c) {
          const double dn = dr[c] * layer.ln_scale[c];
          dr[c] = floored ? inv * (dn - mean_dn) : inv * (dn - mean_dn - n[c] * mean_dn_n);
        }
      }
    }

    if (grads) {
      auto& g = grads->layers[li];
      kernels::gemm_tn(layer.out, layer.in, batch, d.data(), input.data(), g.weight.data());
      for (std::size_t r = 0; r < batch; ++r) {
        const auto dr = d.row(r);
        for (std::size_t c = 0; c < layer.out; ++c) g.bias[c] += dr[c];
      }
    }
    if (li > 0 || d_input) {
      Matrix dx(batch, layer.in);
      kernels::gemm_nn(batch, layer.in, layer.out, d.data(), layer.weight.data(), dx.data());
      d = std::move(dx);
    }
  }
  if (d_input) *d_input = std::move(d);
}

}  // namespace ssar::numeric

#include "ssar/numeric/checkpoint.hpp"

#include <algorithm>

#include "ssar/error.hpp"
#include "ssar/numeric/binary_io.hpp"

namespace ssar::numeric {
namespace {

// Layout per network body:
//   u8 squash kind, f64 lo, f64 hi, u32 layer count, then per layer
//   u32 out, u32 in, u8 activation, u8 norm, weights (out*in f64),
//   biases (out f64), and with LayerNorm: scale (out f64), shift (out f64).
void write_body(io::ByteWriter& w, const MlpParams& p) {
  w.u8(static_cast<std::uint8_t>(p.squash.kind));
  w.f64(p.squash.lo);
  w.f64(p.squash.hi);
  w.u32(static_cast<std::uint32_t>(p.layers.size()));
  for (const auto& l : p.layers) {
    w.u32(static_cast<std::uint32_t>(l.out));
    w.u32(static_cast<std::uint32_t>(l.in));
    w.u8(static_cast<std::uint8_t>(l.activation));
    w.u8(static_cast<std::uint8_t>(l.norm));
    w.f64s(l.weight);
    w.f64s(l.bias);
    if (l.norm == Norm::LayerNorm) {
      w.f64s(l.ln_scale);
      w.f64s(l.ln_shift);
    }
  }
}

MlpParams read_body(io::ByteReader& r) {
  MlpParams p;
  const auto kind = r.u8();
  if (kind > static_cast<std::uint8_t>(SquashKind::Tanh))
    throw Error("bad_checkpoint", "unknown squash tag", {{"offset", std::to_string(r.offset() - 1)}});
  p.squash.kind = static_cast<SquashKind>(kind);
  p.squash.lo = r.f64();
  p.squash.hi = r.f64();
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    DenseLayer l;
    l.out = r.u32();
    l.in = r.u32();
    const auto act = r.u8();
    const auto norm = r.u8();
    if (act > static_cast<std::uint8_t>(Activation::Tanh) || norm > 1)
      throw Error("bad_checkpoint", "unknown layer tag", {{"offset", std::to_string(r.offset() - 2)}});
    l.activation = static_cast<Activation>(act);
    l.norm = static_cast<Norm>(norm);
    r.require(8 * (l.out * l.in + l.out));
    l.weight.resize(l.out * l.in);
    l.bias.resize(l.out);
    r.f64s(l.weight);
    r.f64s(l.bias);
    if (l.norm == Norm::LayerNorm) {
      l.ln_scale.resize(l.out);
      l.ln_shift.resize(l.out);
      r.f64s(l.ln_scale);
      r.f64s(l.ln_shift);
    }
    p.layers.push_back(std::move(l));
  }
  return p;
}

template <class V>
const auto& find_named(const V& v, const std::string& name, const char* what) {
  auto it = std::find_if(v.begin(), v.end(), [&](const auto& e) { return e.first == name; });
  if (it == v.end())
    throw Error("missing_entry", std::string("checkpoint has no ") + what + " named " + name,
                {{"name", name}});
  return it->second;
}

}  // namespace

const MlpParams& Checkpoint::network(const std::string& name) const {
  return find_named(networks, name, "network");
}
const AdamState& Checkpoint::optimizer(const std::string& name) const {
  return find_named(optimizers, name, "optimizer");
}
double Checkpoint::scalar(const std::string& name) const { return find_named(scalars, name, "scalar"); }
bool Checkpoint::has_network(const std::string& name) const {
  return std::any_of(networks.begin(), networks.end(), [&](const auto& e) { return e.first == name; });
}
bool Checkpoint::has_scalar(const std::string& name) const {
  return std::any_of(scalars.begin(), scalars.end(), [&](const auto& e) { return e.first == name; });
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::ByteWriter w;
  w.text(std::string_view(kCheckpointMagic, 8));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.networks.size()));
  for (const auto& [name, params] : ckpt.networks) {
    w.string(name);
    write_body(w, params);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.optimizers.size()));
  for (const auto& [name, st] : ckpt.optimizers) {
    w.string(name);
    w.u64(st.t);
    w.f64(st.config.lr);
    w.f64(st.config.beta1);
    w.f64(st.config.beta2);
    w.f64(st.config.eps);
    write_body(w, st.m);
    write_body(w, st.v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.scalars.size()));
  for (const auto& [name, value] : ckpt.scalars) {
    w.string(name);
    w.f64(value);
  }
  w.write_file(path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto r = io::ByteReader::from_file(path);
  if (r.text(8) != std::string_view(kCheckpointMagic, 8))
    throw Error("bad_magic", "not an SSARCKPT file", {{"path", path.string()}, {"offset", "0"}});
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw Error("bad_version", "unsupported checkpoint version",
                {{"version", std::to_string(version)}, {"offset", "8"}});
  Checkpoint ckpt;
  const auto nets = r.u32();
  for (std::uint32_t i = 0; i < nets; ++i) {
    auto name = r.string();
    auto body = read_body(r);
    ckpt.networks.emplace_back(std::move(name), std::move(body));
  }
  const auto opts = r.u32();
  for (std::uint32_t i = 0; i < opts; ++i) {
    auto name = r.string();
    AdamState st;
    st.t = r.u64();
    st.config.lr = r.f64();
    st.config.beta1 = r.f64();
    st.config.beta2 = r.f64();
    st.config.eps = r.f64();
    st.m = read_body(r);
    st.v = read_body(r);
    ckpt.optimizers.emplace_back(std::move(name), std::move(st));
  }
  const auto scalars = r.u32();
  for (std::uint32_t i = 0; i < scalars; ++i) {
    auto name = r.string();
    const double v = r.f64();
    ckpt.scalars.emplace_back(std::move(name), v);
  }
  if (r.remaining() != 0)
    throw Error("bad_checkpoint", "trailing bytes after checkpoint payload",
                {{"offset", std::to_string(r.offset())}});
  for (const auto& [name, p] : ckpt.networks) p.validate();
  return ckpt;
}

}  // namespace ssar::numeric

#include "ssar/data/dataset.hpp"

#include <cmath>

#include "json.hpp"
#include "ssar/error.hpp"
#include "ssar/numeric/binary_io.hpp"

namespace ssar::data {
namespace {

using nlohmann::ordered_json;

std::string idx(std::size_t i) { return std::to_string(i); }

void check_finite(std::span<const double> v, const char* column, std::size_t width) {
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!std::isfinite(v[k]))
      throw Error("non_finite", std::string("non-finite value in column ") + column,
                  {{"column", column}, {"index", idx(width ? k / width : k)}});
}

void read_column(io::ByteReader& r, std::vector<double>& out, std::size_t count, const char* column) {
  out.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t at = r.offset();
    out[k] = r.f64();
    if (!std::isfinite(out[k]))
      throw Error("non_finite", std::string("non-finite value in column ") + column,
                  {{"column", column}, {"offset", std::to_string(at)}});
  }
}

void read_flags(io::ByteReader& r, std::vector<std::uint8_t>& out, std::size_t count, const char* column) {
  out.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t at = r.offset();
    out[k] = r.u8();
    if (out[k] > 1)
      throw Error("bad_flag", std::string("flag column holds a value other than 0/1: ") + column,
                  {{"column", column}, {"offset", std::to_string(at)}});
  }
}

}  // namespace

void Dataset::push_back(const Transition& t) {
  if (t.s.size() != obs_dim || t.s_next.size() != obs_dim || t.a.size() != act_dim)
    throw Error("dimension_mismatch", "transition shape does not match the dataset",
                {{"obs_dim", idx(obs_dim)}, {"act_dim", idx(act_dim)}});
  observations.insert(observations.end(), t.s.begin(), t.s.end());
  actions.insert(actions.end(), t.a.begin(), t.a.end());
  rewards.push_back(t.r);
  next_observations.insert(next_observations.end(), t.s_next.begin(), t.s_next.end());
  terminals.push_back(t.terminal ? 1 : 0);
  timeouts.push_back(t.timeout ? 1 : 0);
}

Transition Dataset::at(std::size_t i) const {
  Transition t;
  t.s.assign(obs(i).begin(), obs(i).end());
  t.a.assign(action(i).begin(), action(i).end());
  t.r = rewards[i];
  t.s_next.assign(next_obs(i).begin(), next_obs(i).end());
  t.terminal = terminal(i);
  t.timeout = timeout(i);
  return t;
}

void Dataset::validate() const {
  const std::size_t n = size();
  if (n == 0) throw Error("empty_dataset", "dataset has no transitions");
  if (obs_dim == 0 || act_dim == 0) throw Error("dimension_mismatch", "obs_dim and act_dim must be positive");
  if (observations.size() != n * obs_dim || next_observations.size() != n * obs_dim ||
      actions.size() != n * act_dim || terminals.size() != n || timeouts.size() != n)
    throw Error("column_length_mismatch", "dataset columns disagree in length", {{"n", idx(n)}});
  if (action_low.size() != act_dim || action_high.size() != act_dim)
    throw Error("dimension_mismatch", "action bounds do not match act_dim");
  for (std::size_t j = 0; j < act_dim; ++j)
    if (!(action_low[j] < action_high[j]))
      throw Error("bad_action_box", "action_low must be below action_high", {{"dim", idx(j)}});
  check_finite(observations, "observations", obs_dim);
  check_finite(actions, "actions", act_dim);
  check_finite(rewards, "rewards", 1);
  check_finite(next_observations, "next_observations", obs_dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (terminals[i] && timeouts[i])
      throw Error("bad_flag", "transition is both terminal and timeout", {{"index", idx(i)}});
    const auto a = action(i);
    for (std::size_t j = 0; j < act_dim; ++j)
      if (a[j] < action_low[j] || a[j] > action_high[j])
        throw Error("action_out_of_bounds", "action outside the environment's box",
                    {{"index", idx(i)}, {"dim", idx(j)}, {"value", std::to_string(a[j])}});
  }
}

Dataset make_dataset(std::size_t obs_dim, std::size_t act_dim, std::vector<double> action_low,
                     std::vector<double> action_high, std::string provenance) {
  Dataset d;
  d.obs_dim = obs_dim;
  d.act_dim = act_dim;
  d.action_low = std::move(action_low);
  d.action_high = std::move(action_high);
  d.provenance = std::move(provenance);
  return d;
}

void append(Dataset& head, const Dataset& tail) {
  if (head.obs_dim != tail.obs_dim || head.act_dim != tail.act_dim || head.action_low != tail.action_low ||
      head.action_high != tail.action_high)
    throw Error("dimension_mismatch", "cannot append datasets of different shape or action box");
  head.observations.insert(head.observations.end(), tail.observations.begin(), tail.observations.end());
  head.actions.insert(head.actions.end(), tail.actions.begin(), tail.actions.end());
  head.rewards.insert(head.rewards.end(), tail.rewards.begin(), tail.rewards.end());
  head.next_observations.insert(head.next_observations.end(), tail.next_observations.begin(),
                                tail.next_observations.end());
  head.terminals.insert(head.terminals.end(), tail.terminals.begin(), tail.terminals.end());
  head.timeouts.insert(head.timeouts.end(), tail.timeouts.begin(), tail.timeouts.end());
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  d.validate();
  ordered_json header;
  header["obs_dim"] = d.obs_dim;
  header["act_dim"] = d.act_dim;
  header["n"] = d.size();
  header["action_low"] = d.action_low;
  header["action_high"] = d.action_high;
  header["provenance"] = d.provenance;
  const std::string text = header.dump();

  io::ByteWriter w;
  w.text(std::string_view(kDatasetMagic, 8));
  w.u32(kDatasetVersion);
  w.string(text);
  w.f64s(d.observations);
  w.f64s(d.actions);
  w.f64s(d.rewards);
  w.f64s(d.next_observations);
  w.bytes(d.terminals);
  w.bytes(d.timeouts);
  w.write_file(path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw UserError("dataset_not_found", "dataset file does not exist", {{"path", path.string()}});
  auto r = io::ByteReader::from_file(path);
  if (r.remaining() < 8 || r.text(8) != std::string_view(kDatasetMagic, 8))
    throw Error("bad_magic", "not an SSARDATA file", {{"path", path.string()}, {"offset", "0"}});
  const auto version = r.u32();
  if (version != kDatasetVersion)
    throw Error("bad_version", "unsupported dataset version",
                {{"version", std::to_string(version)}, {"offset", "8"}});
  const std::size_t header_at = r.offset();
  const std::string text = r.string();
  ordered_json header;
  try {
    header = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error("bad_header", std::string("dataset header is not valid JSON: ") + e.what(),
                {{"offset", std::to_string(header_at)}});
  }
  Dataset d;
  std::size_t n = 0;
  try {
    d.obs_dim = header.at("obs_dim").get<std::size_t>();
    d.act_dim = header.at("act_dim").get<std::size_t>();
    n = header.at("n").get<std::size_t>();
    d.action_low = header.at("action_low").get<std::vector<double>>();
    d.action_high = header.at("action_high").get<std::vector<double>>();
    d.provenance = header.value("provenance", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad_header", std::string("dataset header is missing or mistypes a field: ") + e.what(),
                {{"offset", std::to_string(header_at)}});
  }

  const std::size_t row = 8 * (2 * d.obs_dim + d.act_dim + 1) + 2;
  const std::size_t expected = n * row;
  if (r.remaining() < expected) r.require(expected);
  if (r.remaining() > expected)
    throw Error("column_length_mismatch", "file holds more bytes than the header's n implies",
                {{"expected_bytes", std::to_string(r.offset() + expected)},
                 {"actual_bytes", std::to_string(r.size())},
                 {"offset", std::to_string(r.offset() + expected)}});
  read_column(r, d.observations, n * d.obs_dim, "observations");
  read_column(r, d.actions, n * d.act_dim, "actions");
  read_column(r, d.rewards, n, "rewards");
  read_column(r, d.next_observations, n * d.obs_dim, "next_observations");
  read_flags(r, d.terminals, n, "terminals");
  read_flags(r, d.timeouts, n, "timeouts");
  d.validate();
  return d;
}

}  // namespace ssar::data

#include "ssar/data/selection.hpp"

#include <string>

#include "ssar/error.hpp"

namespace ssar::data {

std::vector<Trajectory> segment_trajectories(const Dataset& d) {
  std::vector<Trajectory> out;
  const std::size_t n = d.size();
  std::size_t begin = 0;
  double ret = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ret += d.rewards[i];
    if (d.terminal(i) || d.timeout(i) || i + 1 == n) {
      out.push_back({begin, i + 1, ret, d.terminal(i) && d.rewards[i] > 0.0});
      begin = i + 1;
      ret = 0.0;
    }
  }
  return out;
}

std::string_view selection_mode_name(SelectionMode m) {
  switch (m) {
    case SelectionMode::All:
      return "all";
    case SelectionMode::Return:
      return "return";
    case SelectionMode::Advantage:
      return "advantage";
    case SelectionMode::Success:
      return "success";
  }
  return "unknown";
}

SubDatasetMask make_mask(std::vector<std::uint8_t> member, SelectionMode mode, double parameter,
                         std::string_view advice) {
  SubDatasetMask m;
  m.member = std::move(member);
  m.mode = mode;
  m.parameter = parameter;
  for (std::size_t i = 0; i < m.member.size(); ++i)
    if (m.member[i]) m.indices.push_back(i);
  if (m.indices.empty())
    throw Error("empty_selection", "sub-dataset selection picked no transitions; " + std::string(advice),
                {{"mode", std::string(selection_mode_name(mode))}, {"parameter", std::to_string(parameter)}});
  return m;
}

namespace {

template <class Pred>
std::vector<std::uint8_t> by_trajectory(const Dataset& d, Pred keep) {
  std::vector<std::uint8_t> member(d.size(), 0);
  for (const auto& t : segment_trajectories(d))
    if (keep(t))
      for (std::size_t i = t.begin; i < t.end; ++i) member[i] = 1;
  return member;
}

}  // namespace

SubDatasetMask select_all(const Dataset& d) {
  return make_mask(std::vector<std::uint8_t>(d.size(), 1), SelectionMode::All, 0.0, "dataset is empty");
}

SubDatasetMask select_by_return(const Dataset& d, double threshold) {
  return make_mask(by_trajectory(d, [&](const Trajectory& t) { return t.ret > threshold; }),
                   SelectionMode::Return, threshold, "lower the return threshold");
}

SubDatasetMask select_by_success(const Dataset& d) {
  return make_mask(by_trajectory(d, [](const Trajectory& t) { return t.success; }), SelectionMode::Success,
                   0.0, "no trajectory reaches the goal");
}

SubDatasetMask select_by_advantage(const Dataset& d, std::span<const double> q, std::span<const double> v,
                                   double tau) {
  if (q.size() != d.size() || v.size() != d.size())
    throw Error("dimension_mismatch", "advantage inputs must have one entry per transition");
  std::vector<std::uint8_t> member(d.size(), 0);
  for (std::size_t i = 0; i < d.size(); ++i) member[i] = q[i] - v[i] > 0.0 ? 1 : 0;
  return make_mask(std::move(member), SelectionMode::Advantage, tau,
                   "no transition has positive advantage; the value pretraining likely failed");
}

}  // namespace ssar::data

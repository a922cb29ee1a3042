#include "ssar/data/batch.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ssar/error.hpp"

namespace ssar::data {

std::size_t Batch::subset_count() const {
  return static_cast<std::size_t>(std::count(in_subset.begin(), in_subset.end(), std::uint8_t{1}));
}

double normalize_action(double a, double low, double high) { return 2.0 * (a - low) / (high - low) - 1.0; }

double denormalize_action(double a, double low, double high) { return low + 0.5 * (a + 1.0) * (high - low); }

std::vector<double> denormalize_action(std::span<const double> a, std::span<const double> low,
                                       std::span<const double> high) {
  std::vector<double> out(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) out[c] = denormalize_action(a[c], low[c], high[c]);
  return out;
}

Batch gather(const Dataset& d, std::span<const std::size_t> indices, std::span<const std::uint8_t> subset) {
  if (!subset.empty() && subset.size() != d.size())
    throw Error("dimension_mismatch", "sub-dataset mask length differs from dataset size",
                {{"mask", std::to_string(subset.size())}, {"dataset", std::to_string(d.size())}});
  const std::size_t n = indices.size();
  Batch b;
  b.obs.resize(n, d.obs_dim);
  b.actions.resize(n, d.act_dim);
  b.next_obs.resize(n, d.obs_dim);
  b.rewards.resize(n);
  b.not_done.resize(n);
  b.in_subset.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = indices[k];
    if (i >= d.size()) throw Error("index_out_of_range", "batch index past dataset end", {{"index", std::to_string(i)}});
    std::copy_n(d.obs(i).data(), d.obs_dim, b.obs.row(k).data());
    std::copy_n(d.next_obs(i).data(), d.obs_dim, b.next_obs.row(k).data());
    const auto a = d.action(i);
    for (std::size_t c = 0; c < d.act_dim; ++c)
      b.actions(k, c) = normalize_action(a[c], d.action_low[c], d.action_high[c]);
    b.rewards[k] = d.rewards[i];
    b.not_done[k] = d.terminal(i) ? 0.0 : 1.0;
    b.in_subset[k] = subset.empty() ? 1 : subset[i];
  }
  return b;
}

Batch gather_all(const Dataset& d, std::span<const std::uint8_t> subset) {
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return gather(d, idx, subset);
}

Batch slice(const Batch& b, std::size_t begin, std::size_t end) {
  end = std::min(end, b.size());
  Batch out;
  const std::size_t n = end > begin ? end - begin : 0;
  auto rows = [&](const numeric::Matrix& m) {
    numeric::Matrix r(n, m.cols());
    std::copy_n(m.data() + begin * m.cols(), n * m.cols(), r.data());
    return r;
  };
  out.obs = rows(b.obs);
  out.actions = rows(b.actions);
  out.next_obs = rows(b.next_obs);
  out.rewards.assign(b.rewards.begin() + begin, b.rewards.begin() + begin + n);
  out.not_done.assign(b.not_done.begin() + begin, b.not_done.begin() + begin + n);
  out.in_subset.assign(b.in_subset.begin() + begin, b.in_subset.begin() + begin + n);
  return out;
}

void append(Batch& head, const Batch& tail) {
  if (head.size() == 0) {
    head = tail;
    return;
  }
  auto stack = [](numeric::Matrix& a, const numeric::Matrix& b) {
    numeric::Matrix m(a.rows() + b.rows(), a.cols());
    std::copy_n(a.data(), a.size(), m.data());
    std::copy_n(b.data(), b.size(), m.data() + a.size());
    a = std::move(m);
  };
  stack(head.obs, tail.obs);
  stack(head.actions, tail.actions);
  stack(head.next_obs, tail.next_obs);
  head.rewards.insert(head.rewards.end(), tail.rewards.begin(), tail.rewards.end());
  head.not_done.insert(head.not_done.end(), tail.not_done.begin(), tail.not_done.end());
  head.in_subset.insert(head.in_subset.end(), tail.in_subset.begin(), tail.in_subset.end());
}

}  // namespace ssar::data

#include "ssar/algorithms/replay.hpp"

#include <string>
#include <utility>

#include "ssar/error.hpp"

namespace ssar::algorithms {

ReplayBuffer::ReplayBuffer(data::Dataset offline, std::vector<std::uint8_t> offline_member,
                           data::Dataset online_template, SamplingMode mode)
    : offline_(std::move(offline)), member_(std::move(offline_member)), online_(std::move(online_template)),
      mode_(mode) {
  if (member_.size() != offline_.size())
    throw Error("dimension_mismatch", "membership flags differ from offline size",
                {{"flags", std::to_string(member_.size())}, {"offline", std::to_string(offline_.size())}});
}

void ReplayBuffer::add_online(const data::Transition& t) { online_.push_back(t); }

data::Batch ReplayBuffer::sample(Rng& rng, std::size_t n) const {
  if (size() == 0) throw Error("empty_buffer", "cannot sample from an empty replay buffer");
  std::size_t n_online = 0;
  if (mode_ == SamplingMode::Symmetric && online_size() > 0 && offline_size() > 0) {
    n_online = (n + 1) / 2;
  } else if (offline_size() == 0) {
    n_online = n;
  } else if (online_size() == 0) {
    n_online = 0;
  } else {
    // uniform over the union: count online draws row by row
    std::uniform_int_distribution<std::size_t> pick(0, size() - 1);
    std::vector<std::size_t> off, on;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t j = pick(rng);
      if (j < offline_size()) off.push_back(j);
      else on.push_back(j - offline_size());
    }
    data::Batch b = data::gather(offline_, off, member_);
    data::append(b, data::gather(online_, on));
    return b;
  }
  const std::size_t n_offline = n - n_online;
  std::vector<std::size_t> off(n_offline), on(n_online);
  if (n_offline) {
    std::uniform_int_distribution<std::size_t> pick(0, offline_size() - 1);
    for (auto& j : off) j = pick(rng);
  }
  if (n_online) {
    std::uniform_int_distribution<std::size_t> pick(0, online_size() - 1);
    for (auto& j : on) j = pick(rng);
  }
  data::Batch b = data::gather(offline_, off, member_);
  data::append(b, data::gather(online_, on));
  return b;
}

ReplayBuffer make_replay_buffer(BufferStrategy s, const data::Dataset& d, const data::SubDatasetMask& mask) {
  data::Dataset empty = data::make_dataset(d.obs_dim, d.act_dim, d.action_low, d.action_high, "online");
  switch (s) {
    case BufferStrategy::All:
      return ReplayBuffer(d, mask.member, std::move(empty), SamplingMode::Uniform);
    case BufferStrategy::Half:
      return ReplayBuffer(d, mask.member, std::move(empty), SamplingMode::Symmetric);
    case BufferStrategy::Part: {
      data::Dataset part = data::make_dataset(d.obs_dim, d.act_dim, d.action_low, d.action_high, d.provenance);
      for (std::size_t i : mask.indices) part.push_back(d.at(i));
      std::vector<std::uint8_t> ones(part.size(), 1);
      return ReplayBuffer(std::move(part), std::move(ones), std::move(empty), SamplingMode::Uniform);
    }
    case BufferStrategy::None: {
      data::Dataset none = data::make_dataset(d.obs_dim, d.act_dim, d.action_low, d.action_high, d.provenance);
      return ReplayBuffer(std::move(none), {}, std::move(empty), SamplingMode::Uniform);
    }
  }
  throw Error("bad_strategy", "unhandled buffer strategy");
}

}  // namespace ssar::algorithms

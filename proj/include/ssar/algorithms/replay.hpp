#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ssar/algorithms/config.hpp"
#include "ssar/data/batch.hpp"
#include "ssar/data/dataset.hpp"
#include "ssar/data/selection.hpp"
#include "ssar/numeric/random.hpp"

namespace ssar::algorithms {

enum class SamplingMode : std::uint8_t { Uniform, Symmetric };

/// Offline storage (with D-hat flags) and online storage. Online
/// transitions always count as D-hat members.
class ReplayBuffer {
 public:
  ReplayBuffer(data::Dataset offline, std::vector<std::uint8_t> offline_member, data::Dataset online_template,
               SamplingMode mode);

  std::size_t offline_size() const { return offline_.size(); }
  std::size_t online_size() const { return online_.size(); }
  std::size_t size() const { return offline_size() + online_size(); }
  SamplingMode mode() const { return mode_; }

  void add_online(const data::Transition& t);

  /// Uniform: rows drawn uniformly over both storages. Symmetric: ceil(n/2)
  /// online rows and floor(n/2) offline rows (falls back to whichever
  /// storage is non-empty).
  data::Batch sample(Rng& rng, std::size_t n) const;

  const data::Dataset& offline() const { return offline_; }
  const data::Dataset& online() const { return online_; }

 private:
  data::Dataset offline_;
  std::vector<std::uint8_t> member_;
  data::Dataset online_;
  SamplingMode mode_;
};

/// all: full D, uniform. half: full D and a separate online store, sampled
/// symmetrically. part: D-hat only, uniform. none: online only.
ReplayBuffer make_replay_buffer(BufferStrategy s, const data::Dataset& d, const data::SubDatasetMask& mask);

}  // namespace ssar::algorithms

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "ssar/data/dataset.hpp"
#include "ssar/data/selection.hpp"
#include "ssar/error.hpp"
#include "ssar/numeric/random.hpp"

using namespace ssar;
using namespace ssar::data;

TEST_SUITE_BEGIN("data");

namespace {

std::filesystem::path temp_file(const char* name) { return std::filesystem::temp_directory_path() / name; }

Dataset tiny(std::vector<double> rewards, std::vector<int> terminals, std::vector<int> timeouts = {}) {
  Dataset d = make_dataset(1, 1, {-1.0}, {1.0}, "test");
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    Transition t{{double(i)}, {0.0}, rewards[i], {double(i + 1)}, terminals[i] != 0,
                 !timeouts.empty() && timeouts[i] != 0};
    d.push_back(t);
  }
  return d;
}

// Random dataset with random trajectory boundaries.
Dataset random_dataset(Rng& rng, std::size_t n, std::size_t obs_dim = 3, std::size_t act_dim = 2) {
  Dataset d = make_dataset(obs_dim, act_dim, std::vector<double>(act_dim, -2.0), std::vector<double>(act_dim, 2.0),
                           "random");
  for (std::size_t i = 0; i < n; ++i) {
    Transition t;
    for (std::size_t k = 0; k < obs_dim; ++k) {
      t.s.push_back(uniform(rng, -5, 5));
      t.s_next.push_back(uniform(rng, -5, 5));
    }
    for (std::size_t k = 0; k < act_dim; ++k) t.a.push_back(uniform(rng, -2, 2));
    t.r = uniform(rng, -3, 3);
    const auto roll = rng() % 20;
    t.terminal = roll == 0;
    t.timeout = roll == 1;
    d.push_back(t);
  }
  return d;
}

std::size_t error_detail_count(const Error& e, const std::string& key) {
  std::size_t c = 0;
  for (const auto& [k, v] : e.details()) c += k == key;
  return c;
}

}  // namespace

TEST_CASE("save then load is bit identical") {
  Rng rng(1);
  const Dataset d = random_dataset(rng, 500);
  const auto path = temp_file("ssar_roundtrip.ssardata");
  save_dataset(path, d);
  const Dataset back = load_dataset(path);
  CHECK(back == d);
  std::filesystem::remove(path);
}

TEST_CASE("load reports malformed files") {
  Rng rng(2);
  const Dataset d = random_dataset(rng, 40);
  const auto path = temp_file("ssar_bad.ssardata");
  save_dataset(path, d);
  const auto size = std::filesystem::file_size(path);

  SUBCASE("truncated") {
    std::filesystem::resize_file(path, size - 3);
    try {
      load_dataset(path);
      FAIL("expected truncated");
    } catch (const Error& e) {
      CHECK(e.code() == "truncated");
      CHECK(std::string(e.what()).find(std::to_string(size)) != std::string::npos);
      CHECK(std::string(e.what()).find(std::to_string(size - 3)) != std::string::npos);
    }
  }
  SUBCASE("trailing bytes") {
    std::ofstream(path, std::ios::binary | std::ios::app) << "xx";
    try {
      load_dataset(path);
      FAIL("expected column_length_mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == "column_length_mismatch");
      CHECK(error_detail_count(e, "offset") == 1);
    }
  }
  SUBCASE("bad magic") {
    {
      std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
      f.seekp(0);
      f.write("XXXX", 4);
    }
    try {
      load_dataset(path);
      FAIL("expected bad_magic");
    } catch (const Error& e) {
      CHECK(e.code() == "bad_magic");
    }
  }
  SUBCASE("bad version") {
    {
      std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
      f.seekp(8);
      f.put(char(7));
    }
    CHECK_THROWS_WITH_AS(load_dataset(path), "unsupported dataset version", Error);
  }
  SUBCASE("non-finite value") {
    {
      // Overwrite the last reward with a NaN.
      const std::size_t n = d.size();
      const std::size_t tail = n * (8 * 3 + 2);  // next_observations + flags
      std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
      f.seekp(static_cast<std::streamoff>(size - tail - 8));
      const double nan = std::numeric_limits<double>::quiet_NaN();
      f.write(reinterpret_cast<const char*>(&nan), 8);
    }
    try {
      load_dataset(path);
      FAIL("expected non_finite");
    } catch (const Error& e) {
      CHECK(e.code() == "non_finite");
      CHECK(error_detail_count(e, "offset") == 1);
    }
  }
  SUBCASE("missing file") {
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_dataset(path), UserError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("validate rejects broken invariants") {
  Dataset d = tiny({1, 2}, {0, 0});
  d.terminals[0] = d.timeouts[0] = 1;
  CHECK_THROWS_AS(d.validate(), Error);
  d = tiny({1, 2}, {0, 0});
  d.actions[1] = 1.5;
  CHECK_THROWS_AS(d.validate(), Error);
  d = tiny({1, 2}, {0, 0});
  d.rewards.push_back(0.0);
  CHECK_THROWS_AS(d.validate(), Error);
  CHECK_THROWS_AS(make_dataset(1, 1, {-1}, {1}).validate(), Error);
}

TEST_CASE("segmentation examples") {
  SUBCASE("single terminal trajectory") {
    const auto t = segment_trajectories(tiny({1, 2, 3}, {0, 0, 1}));
    REQUIRE(t.size() == 1);
    CHECK(t[0].ret == 6.0);
    CHECK(t[0].success);
  }
  SUBCASE("no boundaries") {
    const auto t = segment_trajectories(tiny({1, 1, 1, 1}, {0, 0, 0, 0}));
    REQUIRE(t.size() == 1);
    CHECK(t[0].begin == 0);
    CHECK(t[0].end == 4);
    CHECK_FALSE(t[0].success);
  }
  SUBCASE("terminal every step") {
    const auto t = segment_trajectories(tiny({1, 0, 1, 0, 1}, {1, 1, 1, 1, 1}));
    CHECK(t.size() == 5);
    for (const auto& tr : t) CHECK(tr.length() == 1);
  }
  SUBCASE("timeouts end trajectories without success") {
    const auto t = segment_trajectories(tiny({1, 1, 1}, {0, 0, 0}, {0, 1, 0}));
    REQUIRE(t.size() == 2);
    CHECK(t[0].end == 2);
    CHECK_FALSE(t[0].success);
  }
}

TEST_CASE("segmentation partitions the dataset and preserves reward mass") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset d = random_dataset(rng, 1 + rng() % 400);
    const auto trajs = segment_trajectories(d);
    std::size_t expect = 0;
    double total = 0.0;
    for (const auto& t : trajs) {
      CHECK(t.begin == expect);
      CHECK(t.end > t.begin);
      double g = 0.0;
      for (std::size_t i = t.begin; i < t.end; ++i) g += d.rewards[i];
      CHECK(g == t.ret);
      const std::size_t last = t.end - 1;
      CHECK((d.terminal(last) || d.timeout(last) || t.end == d.size()));
      expect = t.end;
      total += t.ret;
    }
    CHECK(expect == d.size());
    const double all = std::accumulate(d.rewards.begin(), d.rewards.end(), 0.0);
    CHECK(std::abs(total - all) <= 1e-9 * std::max(1.0, std::abs(all)));
  }
}

TEST_CASE("return threshold selection examples") {
  // Trajectory returns 10 then 5.
  const Dataset d = tiny({4, 6, 2, 3}, {0, 1, 0, 1});
  const auto m = select_by_return(d, 7.0);
  CHECK(m.member == std::vector<std::uint8_t>{1, 1, 0, 0});
  CHECK(m.indices == std::vector<std::size_t>{0, 1});
  CHECK(m.mode == SelectionMode::Return);
  CHECK(m.parameter == 7.0);
  CHECK(select_by_return(d, -100.0).count() == d.size());
  try {
    select_by_return(d, 10.0);
    FAIL("expected empty_selection");
  } catch (const Error& e) {
    CHECK(e.code() == "empty_selection");
    CHECK(std::string(e.what()).find("lower the return threshold") != std::string::npos);
  }
}

TEST_CASE("return selection is monotone and trajectory atomic") {
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const Dataset d = random_dataset(rng, 50 + rng() % 300);
    const auto trajs = segment_trajectories(d);
    double lo = trajs[0].ret, hi = trajs[0].ret;
    for (const auto& t : trajs) {
      lo = std::min(lo, t.ret);
      hi = std::max(hi, t.ret);
    }
    std::vector<std::uint8_t> prev;
    for (int k = 0; k <= 10; ++k) {
      const double g = lo - 1.0 + (hi - lo + 1.0) * k / 10.0;
      if (g >= hi) break;
      const auto m = select_by_return(d, g);
      CHECK(m.size() == d.size());
      for (const auto& t : trajs)
        for (std::size_t i = t.begin; i < t.end; ++i) CHECK(m.member[i] == m.member[t.begin]);
      if (!prev.empty())
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(m.member[i] <= prev[i]);
      prev = m.member;
    }
  }
}

TEST_CASE("success selection") {
  SUBCASE("planted successes") {
    // Ten trajectories of length 3; trajectories 1, 4, 7 reach the goal.
    std::vector<double> r;
    std::vector<int> term, tout;
    for (int k = 0; k < 10; ++k) {
      const bool ok = k % 3 == 1;
      r.insert(r.end(), {0, 0, ok ? 1.0 : 0.0});
      term.insert(term.end(), {0, 0, ok ? 1 : 0});
      tout.insert(tout.end(), {0, 0, ok ? 0 : 1});
    }
    const auto m = select_by_success(tiny(r, term, tout));
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(m.contains(i) == ((i / 3) % 3 == 1));
  }
  SUBCASE("all successful") {
    CHECK(select_by_success(tiny({0, 1, 1}, {0, 1, 1})).count() == 3);
  }
  SUBCASE("none successful") {
    CHECK_THROWS_AS(select_by_success(tiny({0, 0, 0}, {0, 0, 0}, {0, 0, 1})), Error);
  }
}

TEST_CASE("advantage selection examples") {
  const Dataset d = tiny({0, 0, 0}, {0, 0, 0});
  const std::vector<double> one(3, 1.0), zero(3, 0.0);
  CHECK(select_by_advantage(d, one, zero, 0.7).count() == 3);
  CHECK_THROWS_AS(select_by_advantage(d, one, one, 0.7), Error);
  CHECK_THROWS_AS(select_by_advantage(d, one, std::vector<double>(2, 0.0), 0.7), Error);
}

TEST_CASE("advantage selection against tabular policy evaluation") {
  // 25-state ring, two actions (left/right encoded as -1/+1), stochastic
  // behaviour policy, random rewards. V from iterative policy evaluation,
  // Q from one-step lookahead; the brute-force advantage is Q - sum_a pi Q.
  constexpr int S = 25;
  const double gamma = 0.9;
  Rng rng(13);
  double reward[S][2], p_right[S];
  for (int s = 0; s < S; ++s) {
    reward[s][0] = uniform(rng, -1, 1);
    reward[s][1] = uniform(rng, -1, 1);
    p_right[s] = uniform(rng, 0.1, 0.9);
  }
  const auto next = [](int s, int a) { return (s + (a ? 1 : S - 1)) % S; };
  std::vector<double> v(S, 0.0);
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> nv(S);
    for (int s = 0; s < S; ++s)
      nv[s] = (1 - p_right[s]) * (reward[s][0] + gamma * v[next(s, 0)]) +
              p_right[s] * (reward[s][1] + gamma * v[next(s, 1)]);
    v = nv;
  }
  const auto q = [&](int s, int a) { return reward[s][a] + gamma * v[next(s, a)]; };

  Dataset d = make_dataset(1, 1, {-1}, {1}, "ring");
  std::vector<double> qcol, vcol;
  std::vector<std::uint8_t> truth;
  int s = 0;
  for (int i = 0; i < 1000; ++i) {
    const int a = uniform(rng, 0, 1) < p_right[s] ? 1 : 0;
    const int s2 = next(s, a);
    d.push_back({{double(s)}, {a ? 1.0 : -1.0}, reward[s][a], {double(s2)}, false, false});
    qcol.push_back(q(s, a));
    vcol.push_back(v[s]);
    const double adv = q(s, a) - ((1 - p_right[s]) * q(s, 0) + p_right[s] * q(s, 1));
    truth.push_back(adv > 0 ? 1 : 0);
    s = s2;
  }
  const auto m = select_by_advantage(d, qcol, vcol, 0.5);
  CHECK(m.member == truth);
  CHECK(m.mode == SelectionMode::Advantage);
}

TEST_SUITE_END();

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "swakit/param_vector.hpp"
#include "swakit/rng.hpp"

using namespace swakit;

namespace {

ParamVector grouped(std::vector<double> emb, std::vector<double> head) {
  const std::size_t n_emb = emb.size();
  std::vector<double> values = std::move(emb);
  values.insert(values.end(), head.begin(), head.end());
  return ParamVector(std::move(values), {{"emb", 0, n_emb}, {"head", n_emb, head.size()}});
}

ParamVector random_vector(std::size_t n, CounterRng& rng, double lo = -10.0, double hi = 10.0) {
  std::vector<double> values(n);
  for (double& v : values) v = rng.next_uniform(lo, hi);
  return ParamVector::dense(std::move(values));
}

}  // namespace

TEST_CASE("layout validation rejects gaps, mismatched totals and duplicates") {
  CHECK_THROWS_AS(ParamVector({1.0, 2.0, 3.0}, {{"a", 0, 1}, {"b", 2, 1}}), LayoutError);
  CHECK_THROWS_AS(ParamVector({1.0, 2.0, 3.0}, {{"a", 0, 2}}), LayoutError);
  CHECK_THROWS_AS(ParamVector({1.0, 2.0}, {{"a", 0, 1}, {"a", 1, 1}}), LayoutError);
  CHECK_THROWS_AS(ParamVector({1.0}, {{"", 0, 1}}), LayoutError);
  CHECK_NOTHROW(ParamVector({1.0, 2.0, 3.0}, {{"a", 0, 2}, {"b", 2, 1}}));
}

TEST_CASE("axpy basics") {
  const ParamVector x55 = ParamVector::dense({5.0, 5.0});
  const ParamVector y12 = ParamVector::dense({1.0, 2.0});
  const ParamVector zero = ParamVector::dense({0.0, 0.0});
  const ParamVector y34 = ParamVector::dense({3.0, 4.0});
  const ParamVector ones = ParamVector::dense({1.0, 1.0});

  const ParamVector a = axpy(0.0, x55, y12);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == 2.0);

  const ParamVector b = axpy(1.0, zero, y34);
  CHECK(b[0] == 3.0);
  CHECK(b[1] == 4.0);

  const ParamVector c = axpy(2.0, ones, ones);
  CHECK(c[0] == 3.0);
  CHECK(c[1] == 3.0);
}

TEST_CASE("axpy and dot reject mismatched layouts") {
  const ParamVector x = ParamVector::dense({1.0, 2.0});
  const ParamVector y = ParamVector::dense({1.0, 2.0, 3.0});
  const ParamVector z = grouped({1.0}, {2.0});
  CHECK_THROWS_AS(axpy(1.0, x, y), LayoutError);
  CHECK_THROWS_AS(dot(x, y), LayoutError);
  CHECK_THROWS_AS(dot(x, z), LayoutError);  // same length, different groups
}

TEST_CASE("dot basics") {
  CHECK(dot(ParamVector::dense({1.0, 0.0}), ParamVector::dense({0.0, 1.0})) == 0.0);
  CHECK(dot(ParamVector::dense({1.0, 2.0}), ParamVector::dense({1.0, 2.0})) == 5.0);
  CHECK(dot(ParamVector::dense({3.0}), ParamVector::dense({1.0})) == 3.0);
}

TEST_CASE("scale and running_mean_update") {
  const ParamVector x = ParamVector::dense({2.0, -4.0});
  const ParamVector s = scale(0.5, x);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == -2.0);

  ParamVector mean = ParamVector::dense({0.0});
  running_mean_update(mean, ParamVector::dense({2.0}), 1);
  CHECK(mean[0] == 1.0);
  running_mean_update(mean, ParamVector::dense({4.0}), 2);
  CHECK(mean[0] == 2.0);
}

TEST_CASE("masked_view selects groups in order") {
  const ParamVector x = grouped({1.0, 2.0}, {3.0});

  const ParamVector head_only = masked_view(x, GroupMask{"head"});
  REQUIRE(head_only.size() == 1);
  CHECK(head_only[0] == 3.0);

  const ParamVector all = masked_view(x, GroupMask::all_of(x));
  REQUIRE(all.size() == 3);
  CHECK(all[0] == 1.0);
  CHECK(all[1] == 2.0);
  CHECK(all[2] == 3.0);
  CHECK(all.same_layout(x));

  const ParamVector emb_only = masked_view(x, GroupMask{"emb"});
  REQUIRE(emb_only.size() == 2);
  CHECK(emb_only[0] == 1.0);
  CHECK(emb_only[1] == 2.0);

  CHECK_THROWS_AS(masked_view(x, GroupMask{"missing"}), LayoutError);
}

TEST_CASE("mask helpers") {
  const ParamVector x = grouped({1.0, 2.0}, {3.0});
  const GroupMask without_emb = GroupMask::excluding(x, {"emb"});
  CHECK(without_emb.includes("head"));
  CHECK(!without_emb.includes("emb"));
  CHECK(masked_size(x, without_emb) == 1);
  CHECK_THROWS_AS(GroupMask::excluding(x, {"nope"}), LayoutError);

  ParamVector y = x;
  zero_excluded(y, without_emb);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 3.0);
}

TEST_CASE("property: dot(x,x) matches norm2 squared") {
  CounterRng rng = CounterRng::stream(101, "dotnorm");
  for (int trial = 0; trial < 50; ++trial) {
    const ParamVector x = random_vector(1 + trial * 3, rng);
    const double d = dot(x, x);
    const double n = norm2(x);
    CHECK(d == doctest::Approx(n * n).epsilon(1e-12));
  }
}

TEST_CASE("property: masked_view then scatter_view is the identity") {
  CounterRng rng = CounterRng::stream(202, "scatter");
  for (int trial = 0; trial < 20; ++trial) {
    ParamVector x({rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian(),
                   rng.next_gaussian(), rng.next_gaussian()},
                  {{"a", 0, 2}, {"b", 2, 1}, {"c", 3, 2}});
    const GroupMask mask = (trial % 2 == 0) ? GroupMask{"a", "c"} : GroupMask{"b"};

    const ParamVector before = x;
    const ParamVector view = masked_view(x, mask);
    scatter_view(x, mask, view);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i] == before[i]);
    }

    // And writing modified values only touches included groups.
    ParamVector bumped = view;
    for (std::size_t i = 0; i < bumped.size(); ++i) bumped[i] += 1.0;
    scatter_view(x, mask, bumped);
    for (const ParamGroup& g : x.groups()) {
      for (std::size_t i = 0; i < g.length; ++i) {
        const double expected = mask.includes(g.name) ? before[g.offset + i] + 1.0
                                                      : before[g.offset + i];
        CHECK(x[g.offset + i] == expected);
      }
    }
  }
}

TEST_CASE("operations are bitwise deterministic") {
  CounterRng rng = CounterRng::stream(303, "det");
  const ParamVector x = random_vector(257, rng);
  const ParamVector y = random_vector(257, rng);

  const ParamVector a1 = axpy(1.7, x, y);
  const ParamVector a2 = axpy(1.7, x, y);
  CHECK(std::memcmp(a1.data(), a2.data(), a1.size() * sizeof(double)) == 0);
  CHECK(dot(x, y) == dot(x, y));
  CHECK(norm2(x) == norm2(x));
}

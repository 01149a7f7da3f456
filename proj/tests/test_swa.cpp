#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "swakit/checkpoint.hpp"
#include "swakit/rng.hpp"
#include "swakit/swa.hpp"

using namespace swakit;
namespace fs = std::filesystem;

TEST_CASE("swa_init starts the average at the given weights") {
  const ParamVector w = ParamVector::dense({1.0, 2.0});
  const SwaState st = swa_init(w);
  CHECK(st.components == 1);
  CHECK(st.average()[0] == 1.0);
  CHECK(st.average()[1] == 2.0);
}

TEST_CASE("observations at the interval absorb components") {
  SwaState st = swa_init(ParamVector::dense({0.0}));

  swa_observe(st, ParamVector::dense({2.0}), 1, 1);
  CHECK(st.components == 2);
  CHECK(st.average()[0] == 1.0);  // (0+2)/2

  swa_observe(st, ParamVector::dense({4.0}), 2, 1);
  CHECK(st.components == 3);
  CHECK(st.average()[0] == 2.0);  // (0+2+4)/3
}

TEST_CASE("off-interval observations are no-ops") {
  SwaState st = swa_init(ParamVector::dense({1.0, -1.0}));
  const ParamVector before = st.average();
  swa_observe(st, ParamVector::dense({100.0, 100.0}), 3, 5);
  CHECK(st.components == 1);
  CHECK(st.average()[0] == before[0]);
  CHECK(st.average()[1] == before[1]);
  CHECK(st.steps_in_stage2 == 3);
}

TEST_CASE("component count at collection j equals j plus the start") {
  // with a local index, collection j happens at i = j*K and sees exactly j
  // components already averaged
  const std::size_t K = 4;
  SwaState st = swa_init(ParamVector::dense({0.0}));
  std::size_t collections = 0;
  for (std::size_t i = 1; i <= 40; ++i) {
    if (i % K == 0) {
      ++collections;
      CHECK(st.components == collections);  // n_model before the update
    }
    swa_observe(st, ParamVector::dense({static_cast<double>(i)}), i, K);
    if (i % K == 0) {
      CHECK(st.components == collections + 1);
    }
  }
  CHECK(collections == 40 / K);
  CHECK(st.components == 40 / K + 1);
}

TEST_CASE("running average equals the batch mean of all components") {
  CounterRng rng = CounterRng::stream(42, "meaneq");
  for (int trial = 0; trial < 10; ++trial) {
    CounterRng trial_rng = rng.fork(static_cast<std::uint64_t>(trial));
    const std::size_t dim = 1 + trial_rng.next_below(50);
    const std::size_t collections = 1 + trial_rng.next_below(100);

    auto random_vec = [&]() {
      std::vector<double> v(dim);
      for (double& x : v) x = trial_rng.next_uniform(-1.0, 1.0);
      return ParamVector::dense(std::move(v));
    };

    const ParamVector start = random_vec();
    SwaState st = swa_init(start);
    std::vector<ParamVector> components{start};
    for (std::size_t j = 1; j <= collections; ++j) {
      const ParamVector w = random_vec();
      swa_observe(st, w, j, 1);
      components.push_back(w);
    }

    // independent batch mean
    std::vector<double> mean(dim, 0.0);
    for (const ParamVector& c : components) {
      for (std::size_t i = 0; i < dim; ++i) mean[i] += c[i];
    }
    for (double& m : mean) m /= static_cast<double>(components.size());

    for (std::size_t i = 0; i < dim; ++i) {
      CHECK(st.average()[i] == doctest::Approx(mean[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("swa_observe validates its inputs") {
  SwaState uninitialized;
  CHECK_THROWS_AS(swa_observe(uninitialized, ParamVector::dense({1.0}), 1, 1), ConfigError);

  SwaState st = swa_init(ParamVector::dense({1.0}));
  CHECK_THROWS_AS(swa_observe(st, ParamVector::dense({1.0, 2.0}), 1, 1), LayoutError);
  CHECK_THROWS_AS(swa_observe(st, ParamVector::dense({1.0}), 1, 0), ConfigError);
}

TEST_CASE("policy validation") {
  SwaPolicy policy;
  policy.interval = 10;
  policy.start_fraction = 0.5;
  policy.stage2_schedule = Schedule::high_constant(1e-3, 50);
  CHECK_NOTHROW(policy.validate(100));
  CHECK(policy.stage1_steps(100) == 50);
  CHECK(policy.stage1_steps(101) == 51);  // ceil

  policy.start_fraction = 0.95;
  CHECK_THROWS_AS(policy.validate(100), ConfigError);  // 5 stage-2 steps < K

  policy.start_fraction = 0.5;
  policy.interval = 0;
  CHECK_THROWS_AS(policy.validate(100), ConfigError);
}

TEST_CASE("soup of one file returns that vector bitwise") {
  const fs::path dir = fs::temp_directory_path() / "swakit_soup_one";
  fs::create_directories(dir);
  const ParamVector w({0.25, -3.5, 1e-12}, {{"a", 0, 2}, {"b", 2, 1}});
  write_checkpoint(dir / "w.swck", w);

  const ParamVector avg = soup_average({dir / "w.swck"});
  REQUIRE(avg.size() == 3);
  CHECK(std::memcmp(avg.data(), w.data(), w.size() * sizeof(double)) == 0);
  CHECK(avg.same_layout(w));
}

TEST_CASE("soup of symmetric pairs averages elementwise") {
  const fs::path dir = fs::temp_directory_path() / "swakit_soup_pair";
  fs::create_directories(dir);
  write_checkpoint(dir / "a.swck", ParamVector::dense({1.0, 3.0}));
  write_checkpoint(dir / "b.swck", ParamVector::dense({3.0, 1.0}));

  const ParamVector avg = soup_average({dir / "a.swck", dir / "b.swck"});
  CHECK(avg[0] == 2.0);
  CHECK(avg[1] == 2.0);
}

TEST_CASE("soup matches an independent accumulation and ignores order") {
  const fs::path dir = fs::temp_directory_path() / "swakit_soup_many";
  fs::create_directories(dir);
  CounterRng rng = CounterRng::stream(17, "soup");

  std::vector<fs::path> paths;
  std::vector<std::vector<double>> raw;
  for (int k = 0; k < 5; ++k) {
    std::vector<double> v(8);
    for (double& x : v) x = rng.next_uniform(-2.0, 2.0);
    const fs::path p = dir / ("c" + std::to_string(k) + ".swck");
    write_checkpoint(p, ParamVector::dense(std::vector<double>(v)));
    paths.push_back(p);
    raw.push_back(std::move(v));
  }

  std::vector<double> expected(8, 0.0);
  for (const auto& v : raw) {
    for (std::size_t i = 0; i < v.size(); ++i) expected[i] += v[i];
  }
  for (double& x : expected) x /= 5.0;

  const ParamVector avg = soup_average(paths);
  for (std::size_t i = 0; i < avg.size(); ++i) {
    CHECK(avg[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }

  std::vector<fs::path> shuffled = paths;
  std::reverse(shuffled.begin(), shuffled.end());
  const ParamVector avg2 = soup_average(shuffled);
  for (std::size_t i = 0; i < avg.size(); ++i) {
    CHECK(avg[i] == doctest::Approx(avg2[i]).epsilon(1e-12));
  }
}

TEST_CASE("soup rejects mixed layouts and missing inputs") {
  const fs::path dir = fs::temp_directory_path() / "swakit_soup_bad";
  fs::create_directories(dir);
  write_checkpoint(dir / "x.swck", ParamVector::dense({1.0, 2.0}));
  write_checkpoint(dir / "y.swck", ParamVector::dense({1.0, 2.0, 3.0}));

  CHECK_THROWS_AS(soup_average({dir / "x.swck", dir / "y.swck"}), LayoutError);
  CHECK_THROWS_AS(soup_average({}), ConfigError);
  CHECK_THROWS_AS(soup_average({dir / "missing.swck"}), IoError);
}

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "swakit/dataset.hpp"

using namespace swakit;
namespace fs = std::filesystem;

namespace {

fs::path write_temp_csv(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream f(path, std::ios::trunc);
  f << content;
  return path;
}

}  // namespace

TEST_CASE("two moons with zero noise lie exactly on their arcs") {
  const Dataset d = two_moons(4, 0.0, 1);
  REQUIRE(d.rows() == 4);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double x = d.inputs(i, 0);
    const double y = d.inputs(i, 1);
    if (d.labels[i] == 0) {
      CHECK(std::abs(x * x + y * y - 1.0) < 1e-12);
      CHECK(y >= -1e-12);
    } else {
      const double dx = x - 1.0;
      const double dy = y - 0.5;
      CHECK(std::abs(dx * dx + dy * dy - 1.0) < 1e-12);
      CHECK(y <= 0.5 + 1e-12);
    }
  }
}

TEST_CASE("two moons is deterministic and balanced") {
  const Dataset a = two_moons(1000, 0.2, 7);
  const Dataset b = two_moons(1000, 0.2, 7);
  CHECK(std::memcmp(a.inputs.data(), b.inputs.data(), a.inputs.size() * sizeof(double)) == 0);
  CHECK(a.labels == b.labels);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.test_indices == b.test_indices);

  const auto zeros = static_cast<std::size_t>(std::count(a.labels.begin(), a.labels.end(), 0));
  CHECK(zeros == 500);
  CHECK(a.labels.size() - zeros == 500);
  CHECK(a.num_classes == 2);

  const Dataset c = two_moons(1000, 0.2, 8);
  CHECK(std::memcmp(a.inputs.data(), c.inputs.data(), a.inputs.size() * sizeof(double)) != 0);
}

TEST_CASE("split is disjoint, covering, and 80/20 by default") {
  const Dataset d = two_moons(1000, 0.2, 3);
  CHECK(d.train_indices.size() == 800);
  CHECK(d.test_indices.size() == 200);

  std::set<std::size_t> seen(d.train_indices.begin(), d.train_indices.end());
  for (std::size_t i : d.test_indices) {
    CHECK(!seen.contains(i));
    seen.insert(i);
  }
  CHECK(seen.size() == 1000);
}

TEST_CASE("two moons input validation") {
  CHECK_THROWS_AS(two_moons(1, 0.1, 0), ConfigError);
  CHECK_THROWS_AS(two_moons(10, -0.1, 0), ConfigError);
}

TEST_CASE("gaussian blobs are balanced round-robin and labeled by center") {
  const std::vector<std::vector<double>> centers{{0.0, 0.0}, {5.0, 5.0}, {-5.0, 5.0}};
  const Dataset d = gaussian_blobs(9, centers, 0.1, 11);
  REQUIRE(d.rows() == 9);
  CHECK(d.num_classes == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::count(d.labels.begin(), d.labels.end(), k) == 3);
  }
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto& c = centers[static_cast<std::size_t>(d.labels[i])];
    const double dx = d.inputs(i, 0) - c[0];
    const double dy = d.inputs(i, 1) - c[1];
    CHECK(std::sqrt(dx * dx + dy * dy) < 1.0);  // 0.1 sd, 10 sigma margin
  }

  CHECK_THROWS_AS(gaussian_blobs(4, {{0.0}, {1.0, 2.0}}, 0.1, 0), ConfigError);
  CHECK_THROWS_AS(gaussian_blobs(4, {}, 0.1, 0), ConfigError);
}

TEST_CASE("csv with integer labels loads as classification") {
  const fs::path p = write_temp_csv("swakit_test_basic.csv",
                                    "x1,x2,label\n"
                                    "0.5,1.5,0\n"
                                    "-1.0,2.0,1\n"
                                    "0.25,-0.75,0\n");
  const Dataset d = load_csv(p);
  REQUIRE(d.rows() == 3);
  CHECK(d.num_classes == 2);
  CHECK(d.input_dim() == 2);
  CHECK(d.labels == std::vector<int>{0, 1, 0});
  CHECK(d.inputs(1, 0) == -1.0);
  CHECK(d.inputs(2, 1) == -0.75);
}

TEST_CASE("csv with fractional labels loads as regression") {
  const fs::path p = write_temp_csv("swakit_test_reg.csv",
                                    "x,y\n"
                                    "1.0,0.5\n"
                                    "2.0,1.5\n");
  const Dataset d = load_csv(p);
  CHECK(!d.is_classification());
  REQUIRE(d.targets.rows() == 2);
  CHECK(d.targets(0, 0) == 0.5);
  CHECK(d.targets(1, 0) == 1.5);
}

TEST_CASE("csv error paths name the offending location") {
  const fs::path header_only = write_temp_csv("swakit_test_header.csv", "x1,x2,label\n");
  CHECK_THROWS_WITH_AS(load_csv(header_only), doctest::Contains("no data rows"), ConfigError);

  const fs::path empty = write_temp_csv("swakit_test_empty.csv", "");
  CHECK_THROWS_WITH_AS(load_csv(empty), doctest::Contains("empty"), ConfigError);

  const fs::path bad_cell = write_temp_csv("swakit_test_bad.csv",
                                           "a,b,c\n"
                                           "1,2,0\n"
                                           "3,4,abc\n");
  try {
    load_csv(bad_cell);
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("column 3") != std::string::npos);
  }

  CHECK_THROWS_AS(load_csv(fs::temp_directory_path() / "swakit_does_not_exist.csv"), IoError);

  const fs::path ragged = write_temp_csv("swakit_test_ragged.csv",
                                         "a,b,c\n"
                                         "1,2\n");
  CHECK_THROWS_WITH_AS(load_csv(ragged), doctest::Contains("row 1"), ConfigError);
}

TEST_CASE("one epoch of batches covers the train split exactly once") {
  const Dataset d = two_moons(50, 0.1, 5);
  const auto epoch = batches(d, 8, 999);

  // 40 train rows -> batches of 8,8,8,8,8
  std::size_t total = 0;
  for (const Batch& b : epoch) total += b.rows();
  CHECK(total == d.train_indices.size());
  CHECK(epoch.size() == 5);

  // multiset equality against the train rows
  using Row = std::array<double, 3>;
  std::vector<Row> seen;
  for (const Batch& b : epoch) {
    for (std::size_t r = 0; r < b.rows(); ++r) {
      seen.push_back({b.inputs(r, 0), b.inputs(r, 1), static_cast<double>(b.labels[r])});
    }
  }
  std::vector<Row> expected;
  for (std::size_t i : d.train_indices) {
    expected.push_back({d.inputs(i, 0), d.inputs(i, 1), static_cast<double>(d.labels[i])});
  }
  std::sort(seen.begin(), seen.end());
  std::sort(expected.begin(), expected.end());
  CHECK(seen == expected);
}

TEST_CASE("partial final batch is kept") {
  const Dataset d = two_moons(12, 0.1, 5, 1.0 / 6.0);  // 10 train rows
  REQUIRE(d.train_indices.size() == 10);
  const auto epoch = batches(d, 4, 1);
  REQUIRE(epoch.size() == 3);
  CHECK(epoch[0].rows() == 4);
  CHECK(epoch[1].rows() == 4);
  CHECK(epoch[2].rows() == 2);
}

TEST_CASE("batches are determined by the epoch seed") {
  const Dataset d = two_moons(50, 0.1, 5);
  const auto a = batches(d, 8, 42);
  const auto b = batches(d, 8, 42);
  const auto c = batches(d, 8, 43);
  REQUIRE(a.size() == b.size());
  bool all_equal = true;
  bool any_diff_from_c = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::memcmp(a[k].inputs.data(), b[k].inputs.data(),
                    a[k].inputs.size() * sizeof(double)) != 0) {
      all_equal = false;
    }
    if (std::memcmp(a[k].inputs.data(), c[k].inputs.data(),
                    a[k].inputs.size() * sizeof(double)) != 0) {
      any_diff_from_c = true;
    }
  }
  CHECK(all_equal);
  CHECK(any_diff_from_c);
}

TEST_CASE("batch stream reshuffles per epoch deterministically") {
  const Dataset d = two_moons(20, 0.1, 5, 0.0);  // all 20 rows train
  BatchStream s1(d, 8, CounterRng::stream(1, "data"));
  BatchStream s2(d, 8, CounterRng::stream(1, "data"));
  for (int i = 0; i < 10; ++i) {
    const Batch& a = s1.next();
    const Batch& b = s2.next();
    REQUIRE(a.rows() == b.rows());
    CHECK(std::memcmp(a.inputs.data(), b.inputs.data(), a.inputs.size() * sizeof(double)) == 0);
  }
  CHECK(s1.epoch() >= 3);  // 20 rows, batches 8/8/4, 10 draws span epochs
}

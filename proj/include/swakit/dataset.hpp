#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swakit/errors.hpp"
#include "swakit/matrix.hpp"
#include "swakit/model.hpp"
#include "swakit/rng.hpp"

namespace swakit {

/// Immutable dataset: inputs plus either class labels or regression targets,
/// with a disjoint, covering train/test split. Identical seeds reproduce the
/// dataset bit for bit.
struct Dataset {
  Matrix inputs;            // n x d
  std::vector<int> labels;  // classification; empty for regression
  Matrix targets;           // regression; 0 rows for classification
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  std::size_t num_classes = 0;  // 0 for regression

  std::size_t rows() const noexcept { return inputs.rows(); }
  std::size_t input_dim() const noexcept { return inputs.cols(); }
  bool is_classification() const noexcept { return num_classes > 0; }
};

namespace detail {

/// Shuffled split: round(test_fraction*n) test rows, the rest train, at
/// least one train row.
inline void make_split(Dataset& d, double test_fraction, CounterRng rng) {
  const std::size_t n = d.rows();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);

  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test >= n) n_test = n - 1;
  d.train_indices.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_test));
  d.test_indices.assign(perm.end() - static_cast<std::ptrdiff_t>(n_test), perm.end());
}

}  // namespace detail

/// Two interleaved half circles with Gaussian coordinate noise. Class 0 sits
/// on the upper unit arc at the origin, class 1 on the lower arc centered at
/// (1, 0.5); arc positions are evenly spaced, so noise_sd = 0 puts every
/// point exactly on its arc. Counts are balanced (class 0 gets the extra
/// point when n is odd).
inline Dataset two_moons(std::size_t n, double noise_sd, std::uint64_t seed,
                         double test_fraction = 0.2) {
  if (n < 2) throw ConfigError("two_moons: need n >= 2");
  if (!(noise_sd >= 0.0)) throw ConfigError("two_moons: noise_sd must be >= 0");

  const std::size_t n1 = n / 2;
  const std::size_t n0 = n - n1;

  Dataset d;
  d.seed = seed;
  d.num_classes = 2;
  d.inputs = Matrix(n, 2);
  d.labels.resize(n);

  CounterRng noise = CounterRng::stream(seed, "noise");
  auto arc = [](std::size_t j, std::size_t count) {
    if (count <= 1) return 0.0;
    return std::numbers::pi * static_cast<double>(j) / static_cast<double>(count - 1);
  };

  for (std::size_t j = 0; j < n0; ++j) {
    const double t = arc(j, n0);
    d.inputs(j, 0) = std::cos(t) + noise_sd * noise.next_gaussian();
    d.inputs(j, 1) = std::sin(t) + noise_sd * noise.next_gaussian();
    d.labels[j] = 0;
  }
  for (std::size_t j = 0; j < n1; ++j) {
    const double t = arc(j, n1);
    d.inputs(n0 + j, 0) = 1.0 - std::cos(t) + noise_sd * noise.next_gaussian();
    d.inputs(n0 + j, 1) = 0.5 - std::sin(t) + noise_sd * noise.next_gaussian();
    d.labels[n0 + j] = 1;
  }

  detail::make_split(d, test_fraction, CounterRng::stream(seed, "split"));
  return d;
}

/// Isotropic Gaussian clusters, one class per center, points assigned
/// round-robin so the classes stay balanced.
inline Dataset gaussian_blobs(std::size_t n, const std::vector<std::vector<double>>& centers,
                              double sd, std::uint64_t seed, double test_fraction = 0.2) {
  if (n < 2) throw ConfigError("gaussian_blobs: need n >= 2");
  if (centers.empty()) throw ConfigError("gaussian_blobs: need at least one center");
  if (!(sd >= 0.0)) throw ConfigError("gaussian_blobs: sd must be >= 0");
  const std::size_t dim = centers.front().size();
  if (dim == 0) throw ConfigError("gaussian_blobs: centers must have dimension >= 1");
  for (const auto& c : centers) {
    if (c.size() != dim) throw ConfigError("gaussian_blobs: centers have mixed dimensions");
  }

  Dataset d;
  d.seed = seed;
  d.num_classes = centers.size();
  d.inputs = Matrix(n, dim);
  d.labels.resize(n);

  CounterRng noise = CounterRng::stream(seed, "noise");
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % centers.size();
    for (std::size_t j = 0; j < dim; ++j) {
      d.inputs(i, j) = centers[k][j] + sd * noise.next_gaussian();
    }
    d.labels[i] = static_cast<int>(k);
  }

  detail::make_split(d, test_fraction, CounterRng::stream(seed, "split"));
  return d;
}

/// CSV loader: comma separated, '.' decimal point, mandatory header row,
/// last column is the label. Integer-valued non-negative labels make a
/// classification dataset, anything else a 1-d regression target. Row order
/// is preserved; only the split is shuffled.
inline Dataset load_csv(const std::filesystem::path& path, double test_fraction = 0.2,
                        std::uint64_t seed = 0) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("load_csv: cannot open '" + path.string() + "'");
  }

  auto split_line = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      std::size_t start = 0;
      while (start < cell.size() && cell[start] == ' ') ++start;
      cells.push_back(cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("load_csv: '" + path.string() + "' is empty (missing header)");
  }
  const std::size_t n_cols = split_line(line).size();
  if (n_cols < 2) {
    throw ConfigError("load_csv: need at least one feature column and one label column");
  }

  std::vector<double> features;
  std::vector<double> raw_labels;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++data_row;
    const auto cells = split_line(line);
    if (cells.size() != n_cols) {
      throw ConfigError("load_csv: row " + std::to_string(data_row) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(n_cols));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      double value = 0.0;
      const char* first = cells[c].data();
      const char* last = first + cells[c].size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last) {
        throw ConfigError("load_csv: non-numeric cell '" + cells[c] + "' at row " +
                          std::to_string(data_row) + ", column " + std::to_string(c + 1));
      }
      if (c + 1 < n_cols) {
        features.push_back(value);
      } else {
        raw_labels.push_back(value);
      }
    }
  }
  if (data_row == 0) {
    throw ConfigError("load_csv: '" + path.string() + "' has a header but no data rows");
  }

  Dataset d;
  d.seed = seed;
  d.inputs = Matrix(data_row, n_cols - 1, std::move(features));

  bool integral = true;
  double max_label = 0.0;
  for (double v : raw_labels) {
    if (v < 0.0 || v != std::floor(v)) {
      integral = false;
      break;
    }
    max_label = std::max(max_label, v);
  }
  if (integral) {
    d.num_classes = static_cast<std::size_t>(max_label) + 1;
    d.labels.reserve(raw_labels.size());
    for (double v : raw_labels) d.labels.push_back(static_cast<int>(v));
  } else {
    const std::size_t n_rows = raw_labels.size();
    d.targets = Matrix(n_rows, 1, std::move(raw_labels));
  }

  detail::make_split(d, test_fraction, CounterRng::stream(seed, "split"));
  return d;
}

/// Materializes the given dataset rows into a Batch.
inline Batch batch_from_indices(const Dataset& d, std::span<const std::size_t> indices) {
  Batch b;
  b.inputs = Matrix(indices.size(), d.input_dim());
  if (d.is_classification()) {
    b.labels.reserve(indices.size());
  } else {
    b.targets = Matrix(indices.size(), d.targets.cols());
  }
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t src = indices[r];
    std::copy_n(d.inputs.data() + src * d.input_dim(), d.input_dim(),
                b.inputs.data() + r * d.input_dim());
    if (d.is_classification()) {
      b.labels.push_back(d.labels[src]);
    } else {
      std::copy_n(d.targets.data() + src * d.targets.cols(), d.targets.cols(),
                  b.targets.data() + r * d.targets.cols());
    }
  }
  return b;
}

inline Batch train_batch(const Dataset& d) { return batch_from_indices(d, d.train_indices); }
inline Batch test_batch(const Dataset& d) { return batch_from_indices(d, d.test_indices); }

/// One epoch of minibatches: a seeded shuffle of the train split chopped
/// into batch_size chunks, last partial chunk kept. Every train row appears
/// exactly once per epoch.
inline std::vector<Batch> batches(const Dataset& d, std::size_t batch_size,
                                  std::uint64_t epoch_seed) {
  if (batch_size == 0) throw ConfigError("batches: batch_size must be >= 1");
  if (d.train_indices.empty()) throw ConfigError("batches: dataset has no train rows");

  std::vector<std::size_t> order = d.train_indices;
  CounterRng rng = CounterRng::stream(epoch_seed, "epoch-shuffle");
  rng.shuffle(order);

  std::vector<Batch> out;
  out.reserve((order.size() + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t len = std::min(batch_size, order.size() - start);
    out.push_back(batch_from_indices(d, {order.data() + start, len}));
  }
  return out;
}

/// Endless minibatch cursor: reshuffles the train split every epoch with a
/// seed forked per epoch index. Single-threaded use.
class BatchStream {
public:
  BatchStream(const Dataset& dataset, std::size_t batch_size, CounterRng data_stream)
      : dataset_(&dataset), batch_size_(batch_size), data_stream_(data_stream) {
    refill();
  }

  const Batch& next() {
    if (cursor_ >= current_.size()) refill();
    return current_[cursor_++];
  }

  std::size_t epoch() const noexcept { return epoch_; }

private:
  void refill() {
    current_ = batches(*dataset_, batch_size_, data_stream_.fork(epoch_).key());
    cursor_ = 0;
    ++epoch_;
  }

  const Dataset* dataset_;
  std::size_t batch_size_;
  CounterRng data_stream_;
  std::size_t epoch_ = 0;
  std::size_t cursor_ = 0;
  std::vector<Batch> current_;
};

}  // namespace swakit

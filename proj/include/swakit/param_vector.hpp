#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swakit/errors.hpp"

namespace swakit {

/// One named contiguous segment of a ParamVector.
struct ParamGroup {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  friend bool operator==(const ParamGroup&, const ParamGroup&) = default;
};

/// Flat vector of model parameters segmented into named groups. Groups are
/// contiguous, non-overlapping and cover the storage exactly; that is
/// validated at construction and preserved by every operation below.
///
/// Values are plain doubles with value semantics: copies are deep, shared
/// instances are read-only by convention.
class ParamVector {
public:
  ParamVector() = default;

  ParamVector(std::vector<double> values, std::vector<ParamGroup> groups)
      : values_(std::move(values)), groups_(std::move(groups)) {
    validate_layout();
  }

  /// Single anonymous group covering everything; handy for tests and math
  /// on plain vectors.
  static ParamVector dense(std::vector<double> values, std::string name = "params") {
    const std::size_t n = values.size();
    return ParamVector(std::move(values), {{std::move(name), 0, n}});
  }

  static ParamVector zeros_like(const ParamVector& other) {
    return ParamVector(std::vector<double>(other.size(), 0.0), other.groups_);
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  std::span<const double> span() const noexcept { return {values_.data(), values_.size()}; }
  const std::vector<double>& values() const noexcept { return values_; }

  const std::vector<ParamGroup>& groups() const noexcept { return groups_; }

  bool has_group(std::string_view name) const noexcept {
    return std::any_of(groups_.begin(), groups_.end(),
                       [&](const ParamGroup& g) { return g.name == name; });
  }

  const ParamGroup& group(std::string_view name) const {
    for (const ParamGroup& g : groups_) {
      if (g.name == name) return g;
    }
    throw LayoutError("ParamVector: unknown group '" + std::string(name) + "'");
  }

  std::span<double> group_span(std::string_view name) {
    const ParamGroup& g = group(name);
    return {values_.data() + g.offset, g.length};
  }
  std::span<const double> group_span(std::string_view name) const {
    const ParamGroup& g = group(name);
    return {values_.data() + g.offset, g.length};
  }

  bool same_layout(const ParamVector& other) const noexcept {
    return groups_ == other.groups_ && values_.size() == other.values_.size();
  }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
  }

private:
  void validate_layout() const {
    std::size_t expected_offset = 0;
    for (const ParamGroup& g : groups_) {
      if (g.name.empty()) {
        throw LayoutError("ParamVector: group with empty name");
      }
      if (g.offset != expected_offset) {
        throw LayoutError("ParamVector: group '" + g.name + "' does not start at offset " +
                          std::to_string(expected_offset));
      }
      expected_offset += g.length;
    }
    if (expected_offset != values_.size()) {
      throw LayoutError("ParamVector: groups cover " + std::to_string(expected_offset) +
                        " values, storage holds " + std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      for (std::size_t j = i + 1; j < groups_.size(); ++j) {
        if (groups_[i].name == groups_[j].name) {
          throw LayoutError("ParamVector: duplicate group name '" + groups_[i].name + "'");
        }
      }
    }
  }

  std::vector<double> values_;
  std::vector<ParamGroup> groups_;
};

inline void check_same_layout(const ParamVector& x, const ParamVector& y) {
  if (!x.same_layout(y)) {
    throw LayoutError("parameter vectors have different layouts");
  }
}

/// alpha*x + y, elementwise; layout preserved.
inline ParamVector axpy(double alpha, const ParamVector& x, const ParamVector& y) {
  check_same_layout(x, y);
  ParamVector out = y;
  double* o = out.data();
  const double* xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    o[i] += alpha * xs[i];
  }
  return out;
}

/// Inner product, summed strictly left to right so results are bit-stable.
inline double dot(const ParamVector& x, const ParamVector& y) {
  check_same_layout(x, y);
  double acc = 0.0;
  const double* xs = x.data();
  const double* ys = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += xs[i] * ys[i];
  }
  return acc;
}

inline ParamVector scale(double alpha, const ParamVector& x) {
  ParamVector out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] *= alpha;
  }
  return out;
}

/// Euclidean norm with the same deterministic summation order as dot().
inline double norm2(const ParamVector& x) {
  double acc = 0.0;
  const double* xs = x.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += xs[i] * xs[i];
  }
  return std::sqrt(acc);
}

/// mean <- (mean*n + x) / (n+1), the running-average step used when a new
/// component is absorbed into an average of n components.
inline void running_mean_update(ParamVector& mean, const ParamVector& x, std::size_t n) {
  check_same_layout(mean, x);
  const double count = static_cast<double>(n);
  double* m = mean.data();
  const double* xs = x.data();
  for (std::size_t i = 0; i < mean.size(); ++i) {
    m[i] = (m[i] * count + xs[i]) / (count + 1.0);
  }
}

/// Named subset of groups to include in an operation. Unknown names are
/// rejected when the mask is applied to a concrete vector.
class GroupMask {
public:
  GroupMask() = default;
  explicit GroupMask(std::vector<std::string> included) : included_(std::move(included)) {
    std::sort(included_.begin(), included_.end());
    included_.erase(std::unique(included_.begin(), included_.end()), included_.end());
  }
  GroupMask(std::initializer_list<std::string> names)
      : GroupMask(std::vector<std::string>(names)) {}

  static GroupMask all_of(const ParamVector& x) {
    std::vector<std::string> names;
    names.reserve(x.groups().size());
    for (const ParamGroup& g : x.groups()) names.push_back(g.name);
    return GroupMask(std::move(names));
  }

  /// Every group of `x` except the listed ones.
  static GroupMask excluding(const ParamVector& x, const std::vector<std::string>& excluded) {
    for (const std::string& name : excluded) {
      if (!x.has_group(name)) {
        throw LayoutError("GroupMask: unknown group '" + name + "'");
      }
    }
    std::vector<std::string> names;
    for (const ParamGroup& g : x.groups()) {
      if (std::find(excluded.begin(), excluded.end(), g.name) == excluded.end()) {
        names.push_back(g.name);
      }
    }
    return GroupMask(std::move(names));
  }

  bool includes(std::string_view name) const noexcept {
    return std::binary_search(included_.begin(), included_.end(), name);
  }

  const std::vector<std::string>& names() const noexcept { return included_; }
  std::size_t group_count() const noexcept { return included_.size(); }

  void validate_against(const ParamVector& x) const {
    for (const std::string& name : included_) {
      if (!x.has_group(name)) {
        throw LayoutError("GroupMask: unknown group '" + name + "'");
      }
    }
  }

private:
  std::vector<std::string> included_;  // sorted, unique
};

/// Concatenation of the included groups, in the order they appear in `x`.
inline ParamVector masked_view(const ParamVector& x, const GroupMask& mask) {
  mask.validate_against(x);
  std::vector<double> values;
  std::vector<ParamGroup> groups;
  std::size_t offset = 0;
  for (const ParamGroup& g : x.groups()) {
    if (!mask.includes(g.name)) continue;
    const double* src = x.data() + g.offset;
    values.insert(values.end(), src, src + g.length);
    groups.push_back({g.name, offset, g.length});
    offset += g.length;
  }
  return ParamVector(std::move(values), std::move(groups));
}

/// Writes `view` (a masked_view result) back into the included groups of `x`;
/// excluded groups are untouched.
inline void scatter_view(ParamVector& x, const GroupMask& mask, const ParamVector& view) {
  mask.validate_against(x);
  std::size_t cursor = 0;
  for (const ParamGroup& g : x.groups()) {
    if (!mask.includes(g.name)) continue;
    if (cursor + g.length > view.size()) {
      throw LayoutError("scatter_view: view shorter than masked groups");
    }
    std::copy_n(view.data() + cursor, g.length, x.data() + g.offset);
    cursor += g.length;
  }
  if (cursor != view.size()) {
    throw LayoutError("scatter_view: view longer than masked groups");
  }
}

/// Zeroes every coordinate outside the mask, in place.
inline void zero_excluded(ParamVector& x, const GroupMask& mask) {
  mask.validate_against(x);
  for (const ParamGroup& g : x.groups()) {
    if (mask.includes(g.name)) continue;
    std::fill_n(x.data() + g.offset, g.length, 0.0);
  }
}

/// Number of coordinates covered by the mask.
inline std::size_t masked_size(const ParamVector& x, const GroupMask& mask) {
  mask.validate_against(x);
  std::size_t n = 0;
  for (const ParamGroup& g : x.groups()) {
    if (mask.includes(g.name)) n += g.length;
  }
  return n;
}

}  // namespace swakit

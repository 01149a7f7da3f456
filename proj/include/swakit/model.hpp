#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "swakit/errors.hpp"
#include "swakit/matrix.hpp"
#include "swakit/param_vector.hpp"
#include "swakit/rng.hpp"

namespace swakit {

enum class Activation { tanh, relu };
enum class LossKind { softmax_cross_entropy, mean_squared_error };

inline std::string to_string(Activation a) {
  return a == Activation::tanh ? "tanh" : "relu";
}
inline std::string to_string(LossKind l) {
  return l == LossKind::softmax_cross_entropy ? "softmax-ce" : "mse";
}

inline Activation activation_from(std::string_view s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}
inline LossKind loss_kind_from(std::string_view s) {
  if (s == "softmax-ce") return LossKind::softmax_cross_entropy;
  if (s == "mse") return LossKind::mean_squared_error;
  throw ConfigError("unknown loss '" + std::string(s) + "'");
}

/// Fully connected feed-forward net: layer_sizes[0] inputs through hidden
/// layers to layer_sizes.back() outputs. Hidden layers apply the activation,
/// the output layer is linear (logits for softmax-ce, predictions for mse).
///
/// Parameters are stored flat, layer by layer, each layer contributing a
/// row-major (n_in x n_out) weight group "layerL.weight" followed by a bias
/// group "layerL.bias". l2_coeff is informational here: decay is applied by
/// the optimizer (decoupled), never folded into loss or grad.
struct ModelSpec {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::tanh;
  LossKind loss = LossKind::softmax_cross_entropy;
  double l2_coeff = 0.0;

  void validate() const {
    if (layer_sizes.size() < 2) {
      throw ConfigError("model: need at least input and output layer sizes");
    }
    for (std::size_t s : layer_sizes) {
      if (s == 0) throw ConfigError("model: layer sizes must be positive");
    }
    if (!(l2_coeff >= 0.0)) throw ConfigError("model: l2_coeff must be >= 0");
  }

  std::size_t input_dim() const noexcept { return layer_sizes.front(); }
  std::size_t output_dim() const noexcept { return layer_sizes.back(); }
  std::size_t num_layers() const noexcept { return layer_sizes.size() - 1; }

  std::size_t param_count() const noexcept {
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
      count += (layer_sizes[l] + 1) * layer_sizes[l + 1];
    }
    return count;
  }

  std::vector<ParamGroup> param_groups() const {
    std::vector<ParamGroup> groups;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
      const std::size_t w_len = layer_sizes[l] * layer_sizes[l + 1];
      const std::string prefix = "layer" + std::to_string(l);
      groups.push_back({prefix + ".weight", offset, w_len});
      offset += w_len;
      groups.push_back({prefix + ".bias", offset, layer_sizes[l + 1]});
      offset += layer_sizes[l + 1];
    }
    return groups;
  }
};

/// One step's worth of data. Classification batches carry integer labels,
/// regression batches carry target rows; exactly one of the two is set.
struct Batch {
  Matrix inputs;            // rows x input_dim
  std::vector<int> labels;  // classification targets
  Matrix targets;           // regression targets

  std::size_t rows() const noexcept { return inputs.rows(); }
  bool is_classification() const noexcept { return !labels.empty(); }

  void validate(const ModelSpec& spec) const {
    if (inputs.rows() == 0) throw ConfigError("batch: no rows");
    if (inputs.cols() != spec.input_dim()) {
      throw LayoutError("batch: input width " + std::to_string(inputs.cols()) +
                        " does not match model input " + std::to_string(spec.input_dim()));
    }
    if (is_classification()) {
      if (labels.size() != inputs.rows()) {
        throw LayoutError("batch: label count does not match row count");
      }
      for (int c : labels) {
        if (c < 0 || static_cast<std::size_t>(c) >= spec.output_dim()) {
          throw ConfigError("batch: class index " + std::to_string(c) +
                            " outside [0, " + std::to_string(spec.output_dim()) + ")");
        }
      }
    } else {
      if (targets.rows() != inputs.rows() || targets.cols() != spec.output_dim()) {
        throw LayoutError("batch: target shape does not match model output");
      }
    }
  }
};

/// Seeded uniform init: weights in [-s, s] with s = sqrt(6/(n_in+n_out)),
/// biases zero.
inline ParamVector init_params(const ModelSpec& spec, CounterRng& rng) {
  spec.validate();
  std::vector<double> values(spec.param_count(), 0.0);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t n_in = spec.layer_sizes[l];
    const std::size_t n_out = spec.layer_sizes[l + 1];
    const double s = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
    for (std::size_t i = 0; i < n_in * n_out; ++i) {
      values[offset + i] = rng.next_uniform(-s, s);
    }
    offset += n_in * n_out + n_out;  // biases stay zero
  }
  return ParamVector(std::move(values), spec.param_groups());
}

namespace detail {

inline void check_weights(const ModelSpec& spec, const ParamVector& w) {
  if (w.size() != spec.param_count()) {
    throw LayoutError("model: weight vector has " + std::to_string(w.size()) +
                      " values, spec needs " + std::to_string(spec.param_count()));
  }
}

inline void check_finite_rows(const Matrix& m, std::size_t layer, const char* what) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i])) {
      throw NumericError(std::string("model: non-finite ") + what + " at layer " +
                         std::to_string(layer) + ", flat index " + std::to_string(i));
    }
  }
}

struct ForwardPass {
  std::vector<Matrix> pre;   // pre[l]: pre-activation of layer l
  std::vector<Matrix> post;  // post[l]: activation output (post.back() == logits)
};

/// Runs the whole batch through the net, keeping per-layer buffers for
/// backprop. Weight group l lives at the offsets given by the spec layout.
inline ForwardPass forward(const ModelSpec& spec, const ParamVector& w, const Batch& b) {
  check_weights(spec, w);
  b.validate(spec);

  ForwardPass fp;
  const std::size_t L = spec.num_layers();
  fp.pre.reserve(L);
  fp.post.reserve(L);

  const Matrix* prev = &b.inputs;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t n_in = spec.layer_sizes[l];
    const std::size_t n_out = spec.layer_sizes[l + 1];
    const double* W = w.data() + offset;
    const double* bias = W + n_in * n_out;

    Matrix z(prev->rows(), n_out);
    for (std::size_t r = 0; r < prev->rows(); ++r) {
      const double* in = prev->data() + r * n_in;
      double* out = z.data() + r * n_out;
      for (std::size_t j = 0; j < n_out; ++j) out[j] = bias[j];
      for (std::size_t i = 0; i < n_in; ++i) {
        const double v = in[i];
        const double* w_row = W + i * n_out;
        for (std::size_t j = 0; j < n_out; ++j) out[j] += v * w_row[j];
      }
    }
    check_finite_rows(z, l, "pre-activation");

    Matrix a = z;
    if (l + 1 < L) {
      if (spec.activation == Activation::tanh) {
        for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = std::tanh(a.data()[i]);
      } else {
        for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = std::max(a.data()[i], 0.0);
      }
    }
    fp.pre.push_back(std::move(z));
    fp.post.push_back(std::move(a));
    prev = &fp.post.back();
    offset += (n_in + 1) * n_out;
  }
  return fp;
}

/// Mean loss over the batch given final-layer outputs. softmax-ce uses the
/// max-shifted log-sum-exp; mse is the squared residual summed over outputs,
/// averaged over rows.
inline double loss_from_logits(const ModelSpec& spec, const Matrix& logits, const Batch& b) {
  const std::size_t rows = logits.rows();
  const std::size_t C = logits.cols();
  double acc = 0.0;
  if (spec.loss == LossKind::softmax_cross_entropy) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* z = logits.data() + r * C;
      double zmax = z[0];
      for (std::size_t j = 1; j < C; ++j) zmax = std::max(zmax, z[j]);
      double sum = 0.0;
      for (std::size_t j = 0; j < C; ++j) sum += std::exp(z[j] - zmax);
      acc += std::log(sum) + zmax - z[static_cast<std::size_t>(b.labels[r])];
    }
  } else {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* z = logits.data() + r * C;
      const double* t = b.targets.data() + r * C;
      for (std::size_t j = 0; j < C; ++j) {
        const double d = z[j] - t[j];
        acc += d * d;
      }
    }
  }
  const double value = acc / static_cast<double>(rows);
  if (!std::isfinite(value)) {
    throw NumericError("model: non-finite loss value");
  }
  return value;
}

/// dL/dlogits for the mean batch loss.
inline Matrix output_delta(const ModelSpec& spec, const Matrix& logits, const Batch& b) {
  const std::size_t rows = logits.rows();
  const std::size_t C = logits.cols();
  const double inv_rows = 1.0 / static_cast<double>(rows);
  Matrix delta(rows, C);
  if (spec.loss == LossKind::softmax_cross_entropy) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* z = logits.data() + r * C;
      double* d = delta.data() + r * C;
      double zmax = z[0];
      for (std::size_t j = 1; j < C; ++j) zmax = std::max(zmax, z[j]);
      double sum = 0.0;
      for (std::size_t j = 0; j < C; ++j) {
        d[j] = std::exp(z[j] - zmax);
        sum += d[j];
      }
      for (std::size_t j = 0; j < C; ++j) d[j] = d[j] / sum * inv_rows;
      d[static_cast<std::size_t>(b.labels[r])] -= inv_rows;
    }
  } else {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* z = logits.data() + r * C;
      const double* t = b.targets.data() + r * C;
      double* d = delta.data() + r * C;
      for (std::size_t j = 0; j < C; ++j) d[j] = 2.0 * (z[j] - t[j]) * inv_rows;
    }
  }
  return delta;
}

}  // namespace detail

/// Mean loss over the batch rows.
inline double loss(const ModelSpec& spec, const ParamVector& w, const Batch& b) {
  const auto fp = detail::forward(spec, w, b);
  return detail::loss_from_logits(spec, fp.post.back(), b);
}

/// Analytic gradient of loss() w.r.t. w, same layout as w. Also hands back
/// the loss value computed on the shared forward pass.
inline ParamVector loss_and_grad(const ModelSpec& spec, const ParamVector& w, const Batch& b,
                                 double* loss_out = nullptr) {
  const auto fp = detail::forward(spec, w, b);
  const Matrix& logits = fp.post.back();
  if (loss_out != nullptr) {
    *loss_out = detail::loss_from_logits(spec, logits, b);
  }

  const std::size_t L = spec.num_layers();
  ParamVector g(std::vector<double>(spec.param_count(), 0.0), spec.param_groups());

  Matrix delta = detail::output_delta(spec, logits, b);
  // Walk layers backwards; delta holds dL/d(pre-activation of layer l).
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t n_in = spec.layer_sizes[l];
    const std::size_t n_out = spec.layer_sizes[l + 1];
    std::size_t offset = 0;
    for (std::size_t k = 0; k < l; ++k) {
      offset += (spec.layer_sizes[k] + 1) * spec.layer_sizes[k + 1];
    }
    const Matrix& input = (l == 0) ? b.inputs : fp.post[l - 1];
    double* gW = g.data() + offset;
    double* gb = gW + n_in * n_out;

    for (std::size_t r = 0; r < input.rows(); ++r) {
      const double* in = input.data() + r * n_in;
      const double* d = delta.data() + r * n_out;
      for (std::size_t i = 0; i < n_in; ++i) {
        double* gw_row = gW + i * n_out;
        const double v = in[i];
        for (std::size_t j = 0; j < n_out; ++j) gw_row[j] += v * d[j];
      }
      for (std::size_t j = 0; j < n_out; ++j) gb[j] += d[j];
    }

    if (l == 0) break;

    // delta for the previous layer: (delta . W^T) masked by activation'.
    const double* W = w.data() + offset;
    Matrix prev_delta(delta.rows(), n_in);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const double* d = delta.data() + r * n_out;
      double* pd = prev_delta.data() + r * n_in;
      for (std::size_t i = 0; i < n_in; ++i) {
        const double* w_row = W + i * n_out;
        double acc = 0.0;
        for (std::size_t j = 0; j < n_out; ++j) acc += d[j] * w_row[j];
        pd[i] = acc;
      }
    }
    const Matrix& act = fp.post[l - 1];
    const Matrix& pre = fp.pre[l - 1];
    if (spec.activation == Activation::tanh) {
      for (std::size_t i = 0; i < prev_delta.size(); ++i) {
        const double a = act.data()[i];
        prev_delta.data()[i] *= 1.0 - a * a;
      }
    } else {
      // relu subgradient at exactly 0 is taken as 0
      for (std::size_t i = 0; i < prev_delta.size(); ++i) {
        if (pre.data()[i] <= 0.0) prev_delta.data()[i] = 0.0;
      }
    }
    delta = std::move(prev_delta);
  }

  if (!g.all_finite()) {
    throw NumericError("model: non-finite gradient");
  }
  return g;
}

inline ParamVector grad(const ModelSpec& spec, const ParamVector& w, const Batch& b) {
  return loss_and_grad(spec, w, b);
}

/// Final-layer outputs for the batch (logits or regression predictions).
inline Matrix forward_outputs(const ModelSpec& spec, const ParamVector& w, const Batch& b) {
  auto fp = detail::forward(spec, w, b);
  return std::move(fp.post.back());
}

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;  // classification
  double rmse = 0.0;      // regression
  std::size_t rows = 0;

  /// Scalar used when runs are compared: accuracy for classification,
  /// negated RMSE for regression (higher is better either way).
  double metric(bool classification) const noexcept {
    return classification ? accuracy : -rmse;
  }
};

inline Evaluation evaluate(const ModelSpec& spec, const ParamVector& w, const Batch& b) {
  const Matrix outputs = forward_outputs(spec, w, b);
  Evaluation ev;
  ev.rows = b.rows();
  ev.loss = detail::loss_from_logits(spec, outputs, b);
  if (b.is_classification()) {
    std::size_t correct = 0;
    for (std::size_t r = 0; r < outputs.rows(); ++r) {
      const double* z = outputs.data() + r * outputs.cols();
      std::size_t best = 0;
      for (std::size_t j = 1; j < outputs.cols(); ++j) {
        if (z[j] > z[best]) best = j;
      }
      if (static_cast<int>(best) == b.labels[r]) ++correct;
    }
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(outputs.rows());
  } else {
    double acc = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const double d = outputs.data()[i] - b.targets.data()[i];
      acc += d * d;
    }
    ev.rmse = std::sqrt(acc / static_cast<double>(outputs.size()));
  }
  return ev;
}

}  // namespace swakit

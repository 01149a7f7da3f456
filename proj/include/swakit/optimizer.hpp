#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "swakit/errors.hpp"
#include "swakit/param_vector.hpp"

namespace swakit {

enum class OptimizerKind { sgd, sgd_momentum, adamw };

inline std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::sgd_momentum: return "sgd-momentum";
    case OptimizerKind::adamw: return "adamw";
  }
  return "?";
}

inline OptimizerKind optimizer_kind_from(std::string_view s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "sgd-momentum") return OptimizerKind::sgd_momentum;
  if (s == "adamw") return OptimizerKind::adamw;
  throw ConfigError("unknown optimizer kind '" + std::string(s) + "'");
}

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::sgd;
  double momentum = 0.9;      // sgd-momentum
  double beta1 = 0.9;         // adamw
  double beta2 = 0.999;       // adamw
  double eps = 1e-8;          // adamw
  double weight_decay = 0.0;  // adamw, decoupled
  double clip_norm = 0.0;     // global-norm gradient clip, 0 disables

  /// AdamW defaults: beta1 0.9, beta2 0.999, eps 1e-8, weight decay 0.01.
  static OptimizerOptions adamw_defaults() {
    OptimizerOptions o;
    o.kind = OptimizerKind::adamw;
    o.weight_decay = 0.01;
    return o;
  }

  void validate() const {
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("optimizer: momentum in [0,1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("optimizer: beta1 in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("optimizer: beta2 in [0,1)");
    if (!(eps > 0.0)) throw ConfigError("optimizer: eps must be > 0");
    if (!(weight_decay >= 0.0)) throw ConfigError("optimizer: weight_decay must be >= 0");
    if (!(clip_norm >= 0.0)) throw ConfigError("optimizer: clip_norm must be >= 0");
  }
};

/// Sequential single-owner optimizer state. step() advances the step counter
/// and updates the weights in place.
///
/// sgd is the bare descent line w <- w - eta*g; sgd-momentum keeps a velocity
/// buffer v <- mu*v + g and applies w <- w - eta*v; adamw is Adam with bias
/// correction plus decoupled weight decay w <- w - eta*lambda*w evaluated on
/// the pre-step weights, separate from the adaptive term.
class OptimizerState {
public:
  OptimizerState(OptimizerOptions options, const ParamVector& like)
      : options_(options),
        velocity_(ParamVector::zeros_like(like)),
        moment1_(ParamVector::zeros_like(like)),
        moment2_(ParamVector::zeros_like(like)) {
    options_.validate();
  }

  const OptimizerOptions& options() const noexcept { return options_; }
  std::size_t step_count() const noexcept { return step_count_; }

  void step(ParamVector& w, const ParamVector& g, double eta) {
    check_same_layout(w, g);
    check_same_layout(w, velocity_);
    if (!(eta >= 0.0)) {
      throw ConfigError("optimizer step: eta must be >= 0");
    }
    if (!g.all_finite()) {
      throw NumericError("optimizer step: non-finite gradient at step " +
                         std::to_string(step_count_ + 1));
    }

    double clip_scale = 1.0;
    if (options_.clip_norm > 0.0) {
      const double gnorm = norm2(g);
      if (gnorm > options_.clip_norm) clip_scale = options_.clip_norm / gnorm;
    }

    ++step_count_;
    const std::size_t n = w.size();
    switch (options_.kind) {
      case OptimizerKind::sgd: {
        for (std::size_t i = 0; i < n; ++i) {
          w[i] -= eta * (clip_scale * g[i]);
        }
        break;
      }
      case OptimizerKind::sgd_momentum: {
        const double mu = options_.momentum;
        for (std::size_t i = 0; i < n; ++i) {
          velocity_[i] = mu * velocity_[i] + clip_scale * g[i];
          w[i] -= eta * velocity_[i];
        }
        break;
      }
      case OptimizerKind::adamw: {
        const double b1 = options_.beta1;
        const double b2 = options_.beta2;
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
        const double decay = eta * options_.weight_decay;
        for (std::size_t i = 0; i < n; ++i) {
          const double gi = clip_scale * g[i];
          const double wi = w[i];
          moment1_[i] = b1 * moment1_[i] + (1.0 - b1) * gi;
          moment2_[i] = b2 * moment2_[i] + (1.0 - b2) * gi * gi;
          const double m_hat = moment1_[i] / bc1;
          const double v_hat = moment2_[i] / bc2;
          w[i] = wi - eta * (m_hat / (std::sqrt(v_hat) + options_.eps)) - decay * wi;
        }
        break;
      }
    }
  }

private:
  OptimizerOptions options_;
  std::size_t step_count_ = 0;
  ParamVector velocity_;  // sgd-momentum
  ParamVector moment1_;   // adamw
  ParamVector moment2_;   // adamw
};

}  // namespace swakit

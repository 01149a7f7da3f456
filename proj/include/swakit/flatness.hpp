#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swakit/dataset.hpp"
#include "swakit/errors.hpp"
#include "swakit/model.hpp"
#include "swakit/param_vector.hpp"
#include "swakit/rng.hpp"

namespace swakit {

/// Analytic gradient of the loss as a function of the weights. The curvature
/// estimators below only ever touch the loss through this operator, so they
/// work unchanged on quadratic surrogates in tests.
using GradFn = std::function<ParamVector(const ParamVector&)>;

inline GradFn model_grad_fn(const ModelSpec& spec, const Batch& batch) {
  return [&spec, &batch](const ParamVector& w) { return grad(spec, w, batch); };
}

/// Hessian-vector product by central differences of the gradient:
///
///   H v ~= (grad(w + eps*v) - grad(w - eps*v)) / (2*eps),  eps = eps0 / ||v||
///
/// Exact for quadratics up to rounding, O(eps^2) error otherwise.
inline ParamVector hvp(const GradFn& grad_fn, const ParamVector& w, const ParamVector& v,
                       double eps0 = 1e-4) {
  if (!(eps0 > 0.0)) throw ConfigError("hvp: eps0 must be > 0");
  const double vnorm = norm2(v);
  if (vnorm == 0.0) throw ConfigError("hvp: direction must be nonzero");
  const double eps = eps0 / vnorm;

  const ParamVector g_plus = grad_fn(axpy(eps, v, w));
  const ParamVector g_minus = grad_fn(axpy(-eps, v, w));
  ParamVector out = axpy(-1.0, g_minus, g_plus);
  const double inv = 1.0 / (2.0 * eps);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= inv;
  if (!out.all_finite()) throw NumericError("hvp: non-finite result");
  return out;
}

struct PowerIterOptions {
  double tol = 1e-6;
  std::size_t max_iter = 500;
  double hvp_eps0 = 1e-4;
};

struct PowerIterResult {
  double lambda = 0.0;       // Rayleigh quotient at the last iterate
  std::size_t iterations = 0;
  double residual = 0.0;     // ||H v - lambda v|| at the last iterate
  bool converged = false;
};

/// Power iteration on the masked Hessian operator: excluded coordinates of
/// the probe are zeroed before and after every product, so the spectrum seen
/// is that of the principal submatrix on the included groups.
///
/// Converges on the eigenvalue of largest magnitude (sign preserved via the
/// Rayleigh quotient); declared converged when successive estimates differ
/// by less than tol*|estimate| or the eigen-residual drops below the same
/// scale.
inline PowerIterResult lambda_max(const GradFn& grad_fn, const ParamVector& w,
                                  const GroupMask& mask, const PowerIterOptions& options,
                                  CounterRng rng) {
  mask.validate_against(w);
  if (masked_size(w, mask) == 0) {
    throw ConfigError("lambda_max: mask selects no parameters");
  }

  ParamVector v = ParamVector::zeros_like(w);
  for (const ParamGroup& g : w.groups()) {
    if (!mask.includes(g.name)) continue;
    for (std::size_t i = 0; i < g.length; ++i) {
      v[g.offset + i] = rng.next_gaussian();
    }
  }
  {
    const double n = norm2(v);
    if (n == 0.0) {
      v[w.group(mask.names().front()).offset] = 1.0;
    } else {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] /= n;
    }
  }

  PowerIterResult result;
  double previous = 0.0;
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    ParamVector u = hvp(grad_fn, w, v, options.hvp_eps0);
    zero_excluded(u, mask);

    const double lambda = dot(v, u);  // v is unit length
    double residual_sq = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = u[i] - lambda * v[i];
      residual_sq += r * r;
    }

    result.lambda = lambda;
    result.iterations = k;
    result.residual = std::sqrt(residual_sq);

    const double scale = std::max(std::abs(lambda), 1e-300);
    if (result.residual <= options.tol * scale ||
        (k >= 2 && std::abs(lambda - previous) < options.tol * scale)) {
      result.converged = true;
      return result;
    }
    previous = lambda;

    const double unorm = norm2(u);
    if (unorm == 0.0) {
      // Operator annihilated the probe: zero spectrum on this subspace.
      result.lambda = 0.0;
      result.converged = true;
      return result;
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] /= unorm;
    v = std::move(u);
  }
  return result;  // best estimate, flagged non-converged
}

struct TraceResult {
  double estimate = 0.0;
  double stderr_est = 0.0;  // sample sd / sqrt(samples); 0 when samples == 1
  std::size_t samples = 0;
};

/// Hutchinson trace estimator: mean of v^T H v over Rademacher probes that
/// are +-1 on included coordinates and 0 elsewhere. Samples accumulate in
/// index order (Welford), so the result does not depend on evaluation
/// interleaving.
inline TraceResult trace_hutchinson(const GradFn& grad_fn, const ParamVector& w,
                                    const GroupMask& mask, std::size_t samples,
                                    double hvp_eps0, CounterRng rng) {
  if (samples == 0) throw ConfigError("trace_hutchinson: need samples >= 1");
  mask.validate_against(w);
  if (masked_size(w, mask) == 0) {
    throw ConfigError("trace_hutchinson: mask selects no parameters");
  }

  double mean = 0.0;
  double m2 = 0.0;
  ParamVector v = ParamVector::zeros_like(w);
  for (std::size_t k = 1; k <= samples; ++k) {
    CounterRng probe = rng.fork(k);
    for (const ParamGroup& g : w.groups()) {
      if (!mask.includes(g.name)) continue;
      for (std::size_t i = 0; i < g.length; ++i) {
        v[g.offset + i] = probe.next_sign();
      }
    }
    ParamVector hv = hvp(grad_fn, w, v, hvp_eps0);
    zero_excluded(hv, mask);
    const double sample = dot(v, hv);

    const double delta = sample - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (sample - mean);
  }

  TraceResult result;
  result.estimate = mean;
  result.samples = samples;
  if (samples >= 2) {
    const double variance = m2 / static_cast<double>(samples - 1);
    result.stderr_est = std::sqrt(variance / static_cast<double>(samples));
  }
  return result;
}

struct FlatnessOptions {
  double tol = 1e-6;
  std::size_t max_iter = 500;
  std::size_t trace_samples = 100;
  double hvp_eps0 = 1e-4;
  std::vector<std::string> exclude_groups;  // empty: include everything
};

/// Curvature summary of a weight vector: largest-magnitude Hessian
/// eigenvalue with power-iteration diagnostics, and the Hutchinson trace
/// estimate with its standard error.
struct FlatnessReport {
  double lambda_max = 0.0;
  std::size_t lambda_max_iterations = 0;
  double lambda_max_residual = 0.0;
  bool lambda_max_converged = false;
  double trace_estimate = 0.0;
  std::size_t trace_samples = 0;
  double trace_stderr = 0.0;
  std::vector<std::string> included_groups;
  double hvp_epsilon = 0.0;
};

inline nlohmann::json to_json(const FlatnessReport& r) {
  return nlohmann::json{{"lambda_max", r.lambda_max},
                        {"lambda_max_iterations", r.lambda_max_iterations},
                        {"lambda_max_residual", r.lambda_max_residual},
                        {"lambda_max_converged", r.lambda_max_converged},
                        {"trace_estimate", r.trace_estimate},
                        {"trace_samples", r.trace_samples},
                        {"trace_stderr", r.trace_stderr},
                        {"included_groups", r.included_groups},
                        {"hvp_epsilon", r.hvp_epsilon}};
}

/// Evaluates both estimators at `w` with gradients averaged over the full
/// training split. Probe randomness comes from the "hutchinson" stream of
/// the given seed.
inline FlatnessReport flatness_report(const ModelSpec& spec, const ParamVector& w,
                                      const Dataset& data, const FlatnessOptions& options,
                                      std::uint64_t seed) {
  const Batch full = train_batch(data);
  const GradFn grad_fn = model_grad_fn(spec, full);
  const GroupMask mask = GroupMask::excluding(w, options.exclude_groups);

  CounterRng stream = CounterRng::stream(seed, "hutchinson");
  const PowerIterOptions pi{options.tol, options.max_iter, options.hvp_eps0};
  const PowerIterResult top = lambda_max(grad_fn, w, mask, pi, stream.fork("power"));
  const TraceResult trace =
      trace_hutchinson(grad_fn, w, mask, options.trace_samples, options.hvp_eps0,
                       stream.fork("probes"));

  FlatnessReport report;
  report.lambda_max = top.lambda;
  report.lambda_max_iterations = top.iterations;
  report.lambda_max_residual = top.residual;
  report.lambda_max_converged = top.converged;
  report.trace_estimate = trace.estimate;
  report.trace_samples = trace.samples;
  report.trace_stderr = trace.stderr_est;
  report.included_groups = mask.names();
  report.hvp_epsilon = options.hvp_eps0;
  return report;
}

}  // namespace swakit

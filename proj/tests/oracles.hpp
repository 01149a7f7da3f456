// Test-only reference implementations. Everything here recomputes results
// through a different path than the library: scalar per-sample forward
// passes, finite differences of the loss, dense linear algebra via Eigen.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "swakit/flatness.hpp"
#include "swakit/model.hpp"
#include "swakit/param_vector.hpp"
#include "swakit/rng.hpp"

namespace oracles {

/// Per-sample scalar forward pass written with nested loops and explicit
/// indexing, independent of the library's batched forward.
inline double naive_loss(const swakit::ModelSpec& spec, const swakit::ParamVector& w,
                         const swakit::Batch& b) {
  const auto& sizes = spec.layer_sizes;
  double total = 0.0;
  for (std::size_t r = 0; r < b.rows(); ++r) {
    std::vector<double> act(b.inputs.row(r).begin(), b.inputs.row(r).end());
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const std::size_t n_in = sizes[l];
      const std::size_t n_out = sizes[l + 1];
      std::vector<double> next(n_out, 0.0);
      for (std::size_t j = 0; j < n_out; ++j) {
        double z = w[offset + n_in * n_out + j];  // bias
        for (std::size_t i = 0; i < n_in; ++i) {
          z += act[i] * w[offset + i * n_out + j];
        }
        if (l + 2 < sizes.size()) {  // hidden layer
          z = (spec.activation == swakit::Activation::tanh) ? std::tanh(z)
                                                            : (z > 0.0 ? z : 0.0);
        }
        next[j] = z;
      }
      act = next;
      offset += (n_in + 1) * n_out;
    }

    if (spec.loss == swakit::LossKind::softmax_cross_entropy) {
      double zmax = act[0];
      for (double z : act) zmax = std::max(zmax, z);
      double sum = 0.0;
      for (double z : act) sum += std::exp(z - zmax);
      total += std::log(sum) + zmax - act[static_cast<std::size_t>(b.labels[r])];
    } else {
      for (std::size_t j = 0; j < act.size(); ++j) {
        const double d = act[j] - b.targets(r, j);
        total += d * d;
      }
    }
  }
  return total / static_cast<double>(b.rows());
}

/// Central finite differences of the loss, coordinate by coordinate.
inline swakit::ParamVector fd_gradient(const swakit::ModelSpec& spec,
                                       const swakit::ParamVector& w, const swakit::Batch& b,
                                       double eps = 1e-5) {
  swakit::ParamVector g = swakit::ParamVector::zeros_like(w);
  swakit::ParamVector probe = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + eps;
    const double up = swakit::loss(spec, probe, b);
    probe[i] = w[i] - eps;
    const double down = swakit::loss(spec, probe, b);
    probe[i] = w[i];
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

/// Coordinatewise agreement: relative error below rel_tol, or absolute error
/// below abs_tol for near-zero coordinates.
inline bool gradients_match(const swakit::ParamVector& analytic, const swakit::ParamVector& fd,
                            double rel_tol = 1e-5, double abs_tol = 1e-8) {
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - fd[i]);
    const double scale = std::max(std::abs(analytic[i]), std::abs(fd[i]));
    if (diff > abs_tol && diff > rel_tol * scale) return false;
  }
  return true;
}

/// Symmetric dense matrix wrapped as a gradient operator g(w) = A w, the
/// loss being the quadratic (1/2) w^T A w.
struct QuadraticOperator {
  Eigen::MatrixXd a;

  swakit::GradFn grad_fn() const {
    return [this](const swakit::ParamVector& w) {
      swakit::ParamVector g = swakit::ParamVector::zeros_like(w);
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        double acc = 0.0;
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
          acc += a(r, c) * w[static_cast<std::size_t>(c)];
        }
        g[static_cast<std::size_t>(r)] = acc;
      }
      return g;
    };
  }
};

inline QuadraticOperator diagonal_quadratic(const std::vector<double>& diag) {
  QuadraticOperator q;
  q.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(diag.size()),
                              static_cast<Eigen::Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) {
    q.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
  }
  return q;
}

/// Random symmetric matrix with the given eigenvalues: A = Q diag Q^T with a
/// seeded random orthogonal Q.
inline QuadraticOperator rotated_quadratic(const std::vector<double>& eigenvalues,
                                           std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(eigenvalues.size());
  swakit::CounterRng rng = swakit::CounterRng::stream(seed, "rotation");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = rng.next_gaussian();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = eigenvalues[static_cast<std::size_t>(i)];
  QuadraticOperator quad;
  quad.a = q * d.asDiagonal() * q.transpose();
  return quad;
}

/// Dense Hessian reconstruction: one HVP per unit direction, symmetrized.
inline Eigen::MatrixXd explicit_hessian(const swakit::GradFn& grad_fn,
                                        const swakit::ParamVector& w, double eps0 = 1e-4) {
  const auto n = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    swakit::ParamVector e = swakit::ParamVector::zeros_like(w);
    e[static_cast<std::size_t>(c)] = 1.0;
    const swakit::ParamVector col = swakit::hvp(grad_fn, w, e, eps0);
    for (Eigen::Index r = 0; r < n; ++r) h(r, c) = col[static_cast<std::size_t>(r)];
  }
  return 0.5 * (h + h.transpose());
}

/// Eigenvalue of largest magnitude via Eigen's dense symmetric solver.
inline double dense_lambda_max(const Eigen::MatrixXd& h) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  double best = ev(0);
  for (Eigen::Index i = 1; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > std::abs(best)) best = ev(i);
  }
  return best;
}

}  // namespace oracles

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sepcert/cones.hpp"
#include "sepcert/decomp.hpp"
#include "sepcert/ds_state.hpp"
#include "sepcert/matcore.hpp"

namespace test_helpers {

/// Partial transpose on the second tensor factor of a d^2 x d^2 matrix in
/// the row-major product basis.
inline Eigen::MatrixXd partial_transpose_second(const Eigen::MatrixXd& x, int d) {
  Eigen::MatrixXd y(d * d, d * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
          y(i * d + j, k * d + l) = x(i * d + l, k * d + j);
        }
      }
    }
  }
  return y;
}

/// Spectrum of the partial transpose computed the expensive way: build the
/// dense d^2 x d^2 matrix, transpose the second factor, eigensolve.
inline std::vector<double> dense_pt_spectrum(const sepcert::DsState& rho) {
  const int d = rho.dim();
  const Eigen::MatrixXd dense = sepcert::full_density_matrix(rho);
  const Eigen::MatrixXd pt = partial_transpose_second(dense, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(pt);
  std::vector<double> out(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + d * d);
  return out;
}

/// Largest absolute gap after sorting both multisets; +infinity on a size
/// mismatch.
inline double multiset_distance(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
  return gap;
}

/// Random DS state with independent uniform weights on every canonical pair
/// (not normalized, not necessarily PPT).
inline sepcert::DsState random_ds(std::mt19937& rng, int d) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  sepcert::WeightMap p;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) p[{i, j}] = unif(rng);
  }
  return sepcert::DsState::create(d, p, false);
}

/// Rejection-sampled doubly nonnegative matrix: symmetric uniform entries,
/// resampled until positive semidefinite.
inline sepcert::MMatrix random_dnn_m(std::mt19937& rng, int d,
                                     const sepcert::Tolerance& tol = {}) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i) {
      m(i, i) = unif(rng);
      for (int j = i + 1; j < d; ++j) {
        m(i, j) = unif(rng);
        m(j, i) = m(i, j);
      }
    }
    const sepcert::SymMatrix sym(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym.mat(),
                                                          Eigen::EigenvaluesOnly);
    // Strictly inside the PSD cone so the sample stays DNN after the
    // round trip through state weights.
    if (solver.eigenvalues().minCoeff() >= 1e-6) return sepcert::MMatrix(sym);
    (void)tol;
  }
}

/// Random entrywise nonnegative factor B (d x k) with a sprinkle of exact
/// zeros, packaged as a CP factorization.
inline sepcert::CpFactorization random_cp(std::mt19937& rng, int d, int k) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd b(d, k);
  for (int i = 0; i < d; ++i) {
    for (int c = 0; c < k; ++c) {
      const double v = unif(rng);
      b(i, c) = v < 0.2 ? 0.0 : v;
    }
  }
  return sepcert::CpFactorization{b};
}

/// Normalized convex mixture of random rank-1 DS states I_x, assembled
/// through the associated-matrix correspondence.
inline sepcert::DsState random_ix_mixture(std::mt19937& rng, int d, int terms) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd mix(terms);
  for (int t = 0; t < terms; ++t) mix(t) = unif(rng);
  mix /= mix.sum();
  for (int t = 0; t < terms; ++t) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = unif(rng);
    const Eigen::VectorXd u = x / x.lpNorm<1>();
    m += mix(t) * (u * u.transpose());
  }
  return sepcert::from_m_matrix(sepcert::MMatrix(sepcert::SymMatrix(m)));
}

/// Brute-force minimum of x^T q x over the probability simplex restricted to
/// the grid with the given resolution (x_i = k_i / resolution).
inline double grid_min_quad(const sepcert::SymMatrix& q, int resolution) {
  const int d = q.dim();
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(d);
  std::function<void(int, int)> recurse = [&](int idx, int remaining) {
    if (idx == d - 1) {
      x(idx) = static_cast<double>(remaining) / resolution;
      best = std::min(best, double(x.transpose() * q.mat() * x));
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      x(idx) = static_cast<double>(k) / resolution;
      recurse(idx + 1, remaining - k);
    }
  };
  recurse(0, resolution);
  return best;
}

}  // namespace test_helpers

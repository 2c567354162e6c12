#include "sepcert/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace sepcert {

namespace {

/// Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const int d = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + d);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  int support = 0;
  double running = 0.0;
  for (int j = 0; j < d; ++j) {
    running += u[j];
    const double candidate = (running - 1.0) / (j + 1);
    if (u[j] - candidate > 0.0) {
      support = j + 1;
      cumulative = running;
    }
  }
  if (support == 0) {
    support = 1;
    cumulative = u[0];
  }
  tau = (cumulative - 1.0) / support;
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x(i) = std::max(0.0, v(i) - tau);
  return x;
}

double quad_value(const Eigen::MatrixXd& q, const Eigen::VectorXd& x) {
  return x.dot(q * x);
}

}  // namespace

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatchError("symmetric matrix must be square");
  }
  if (m.rows() < 1) {
    throw BadParamError("symmetric matrix must have dimension at least 1");
  }
  const int d = static_cast<int>(m.rows());
  mat_.resize(d, d);
  for (int i = 0; i < d; ++i) {
    mat_(i, i) = m(i, i);
    for (int j = i + 1; j < d; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      mat_(i, j) = v;
      mat_(j, i) = v;
    }
  }
}

SymMatrix SymMatrix::identity(int d) { return SymMatrix(Eigen::MatrixXd::Identity(d, d)); }

SymMatrix SymMatrix::zero(int d) { return SymMatrix(Eigen::MatrixXd::Zero(d, d)); }

EigResult sym_eig(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.mat());
  return EigResult{solver.eigenvalues(), solver.eigenvectors()};
}

bool is_psd(const SymMatrix& m, const Tolerance& tol) {
  const EigResult eig = sym_eig(m);
  const double min_eig = eig.eigenvalues(0);
  const double spectral_norm =
      std::max(std::abs(eig.eigenvalues(0)), std::abs(eig.eigenvalues(m.dim() - 1)));
  return min_eig >= -(tol.abs_eig + tol.rel_scale * spectral_norm);
}

int numerical_rank(const SymMatrix& m, const Tolerance& tol) {
  const EigResult eig = sym_eig(m);
  const Eigen::VectorXd sigma = eig.eigenvalues.cwiseAbs();
  const double sigma_max = sigma.maxCoeff();
  if (sigma_max == 0.0) return 0;
  const double cut = tol.rank_cut * sigma_max;
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cut) ++rank;
  }
  return rank;
}

SymMatrix pseudo_inverse(const SymMatrix& m, const Tolerance& tol) {
  const EigResult eig = sym_eig(m);
  const double sigma_max = eig.eigenvalues.cwiseAbs().maxCoeff();
  const double cut = tol.rank_cut * sigma_max;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(m.dim());
  for (int i = 0; i < m.dim(); ++i) {
    const double lambda = eig.eigenvalues(i);
    if (std::abs(lambda) > cut) inv(i) = 1.0 / lambda;
  }
  return SymMatrix(eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.transpose());
}

bool in_range(const SymMatrix& m, const Eigen::VectorXd& v, const Tolerance& tol) {
  if (v.size() != m.dim()) {
    throw DimensionMismatchError("vector length does not match matrix dimension");
  }
  const SymMatrix p = pseudo_inverse(m, tol);
  const Eigen::VectorXd residual = v - m.mat() * (p.mat() * v);
  return residual.norm() <= 1e-8 * v.norm();
}

SimplexMinResult min_quad_over_simplex(const SymMatrix& q, int restarts, int iters,
                                       unsigned seed) {
  if (restarts < 1 || iters < 1) {
    throw BadParamError("min_quad_over_simplex requires restarts >= 1 and iters >= 1");
  }
  const int d = q.dim();
  const Eigen::MatrixXd& qm = q.mat();

  const EigResult eig = sym_eig(q);
  const double spectral_norm =
      std::max(std::abs(eig.eigenvalues(0)), std::abs(eig.eigenvalues(d - 1)));
  const double step = 1.0 / (2.0 * spectral_norm + 1e-12);

  std::vector<Eigen::VectorXd> starts;
  for (int i = 0; i < d; ++i) starts.push_back(Eigen::VectorXd::Unit(d, i));
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
      x(i) = 0.5;
      x(j) = 0.5;
      starts.push_back(x);
    }
  }
  std::mt19937 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = expo(rng);
    starts.push_back(x / x.sum());
  }

  SimplexMinResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& start : starts) {
    Eigen::VectorXd x = start;
    double value = quad_value(qm, x);
    if (value < best.value) {
      best.value = value;
      best.argmin = x;
    }
    for (int it = 0; it < iters; ++it) {
      const Eigen::VectorXd gradient = 2.0 * (qm * x);
      const Eigen::VectorXd next = project_to_simplex(x - step * gradient);
      const double next_value = quad_value(qm, next);
      if ((x - next).norm() < 1e-14) break;
      x = next;
      if (next_value < best.value) {
        best.value = next_value;
        best.argmin = x;
      }
    }
  }
  return best;
}

}  // namespace sepcert

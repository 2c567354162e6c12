#pragma once

#include <Eigen/Dense>

#include "sepcert/errors.hpp"

namespace sepcert {

/// Central tolerance policy.  Every boolean predicate in the library states
/// its threshold as a formula over these three knobs so that certificates are
/// reproducible under a single configuration point.
struct Tolerance {
  /// Absolute slack on eigenvalue sign tests.
  double abs_eig = 1e-9;
  /// Relative slack on eigenvalue sign tests, multiplied by the spectral norm.
  double rel_scale = 1e-12;
  /// Relative singular-value cutoff for rank decisions (relative to the
  /// largest singular value).
  double rank_cut = 1e-9;
};

/// Dense real symmetric matrix.  Symmetry is enforced at construction by
/// assigning the averaged value to both (i,j) and (j,i), so entry(i,j) ==
/// entry(j,i) holds exactly in floating point.
class SymMatrix {
public:
  /// Builds from an arbitrary square matrix by exact symmetrization
  /// (both mirror entries receive the same double).
  explicit SymMatrix(const Eigen::MatrixXd& m);

  /// Dimension (number of rows == columns), at least 1.
  int dim() const { return static_cast<int>(mat_.rows()); }

  double operator()(int i, int j) const { return mat_(i, j); }

  const Eigen::MatrixXd& mat() const { return mat_; }

  static SymMatrix identity(int d);
  static SymMatrix zero(int d);

private:
  Eigen::MatrixXd mat_;
};

/// Eigendecomposition of a symmetric matrix.
struct EigResult {
  /// Eigenvalues in ascending order.
  Eigen::VectorXd eigenvalues;
  /// Orthonormal eigenvectors as columns, aligned with `eigenvalues`.
  Eigen::MatrixXd eigenvectors;
};

/// Dense symmetric eigendecomposition.  Reconstruction residual
/// ||m - V diag(w) V^T||_F is at most 1e-10 * (1 + ||m||_F).
EigResult sym_eig(const SymMatrix& m);

/// True iff the minimum eigenvalue is at least
/// -(tol.abs_eig + tol.rel_scale * ||m||_2).
bool is_psd(const SymMatrix& m, const Tolerance& tol);

/// Number of singular values exceeding tol.rank_cut times the largest one.
/// Returns 0 for the zero matrix.
int numerical_rank(const SymMatrix& m, const Tolerance& tol);

/// Moore-Penrose pseudo-inverse through the eigendecomposition; eigenvalues
/// with magnitude below tol.rank_cut times the spectral norm are treated as
/// exact zeros.
SymMatrix pseudo_inverse(const SymMatrix& m, const Tolerance& tol);

/// True iff v lies in the range of m:
/// ||(I - m * pseudo_inverse(m)) v||_2 <= 1e-8 * ||v||_2.
bool in_range(const SymMatrix& m, const Eigen::VectorXd& v, const Tolerance& tol);

/// Result of the heuristic simplex minimization.
struct SimplexMinResult {
  /// Best objective value found; an upper bound on the true simplex minimum.
  double value = 0.0;
  /// Entrywise nonnegative argmin summing to one.
  Eigen::VectorXd argmin;
};

/// Minimizes x^T q x over the probability simplex by projected gradient
/// descent started from every vertex, every edge midpoint, and `restarts`
/// seeded random interior points.  Heuristic: the result is an upper bound
/// on the true minimum, never a certified lower bound.  Deterministic for a
/// fixed seed.
SimplexMinResult min_quad_over_simplex(const SymMatrix& q, int restarts, int iters,
                                       unsigned seed = 0x5eedu);

}  // namespace sepcert

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "sepcert/ds_state.hpp"

namespace sepcert {

/// Entrywise nonnegative factorization M = B B^T of a completely positive
/// matrix.  B has one column per factorization term; entries in
/// [-1e-12, 0) are clamped to zero at construction.
struct CpFactorization {
  Eigen::MatrixXd b;

  int dim() const { return static_cast<int>(b.rows()); }
  int order() const { return static_cast<int>(b.cols()); }

  /// B B^T as a symmetric matrix.
  SymMatrix product() const { return SymMatrix(b * b.transpose()); }
};

/// Explicit separable decomposition of a DS state into symmetric product
/// vectors:  rho = sum_t w_t |psi_t><psi_t| with |psi_t> = ket_t (x) ket_t.
struct SeparableDecomposition {
  struct Term {
    double weight = 0.0;
    Eigen::VectorXcd ket;
  };
  std::vector<Term> terms;
};

/// Converts a CP factorization into an explicit separable decomposition by
/// the phase-averaging construction: for each column b_c the product vectors
///
///   ket_{c,j,k} = sum_l (-1)^{k_l} omega^{j l} sqrt((b_c)_l) |l>,
///
/// with omega = exp(i pi / d) a primitive 2d-th root of unity, j = 0..d-1,
/// k = 0..2^d-1, each carrying uniform weight 1/(d 2^d).  The phase average
/// cancels every non-DS coherence exactly, so the output reconstructs the DS
/// state whose associated matrix is B B^T (for a normalized target the
/// weight equals 1/(d 2^d ||M||_1) up to the global scale).  Columns that
/// are identically zero are dropped.
SeparableDecomposition separable_from_cp(const CpFactorization& b);

/// The unnormalized DS state with p(i,i) = 1 and p(i,j) = 2 for i < j;
/// its associated matrix is the all-ones matrix and its entrywise 1-norm is
/// d^2.  This is the state subtracted by the uniform-mix certificate.
DsState all_ones_state(int d);

/// The normalized DS state whose associated matrix is the rank-1 outer
/// product u_x u_x^T with u_x = x / ||x||_1:  p(i,i) = x_i^2/||x||_1^2 and
/// p(i,j) = 2 x_i x_j/||x||_1^2.  Requires x >= 0 entrywise and x != 0
/// (AllZeroError).  Invariant under positive rescaling of x.  These are the
/// extremal separable DS states and the states subtracted by the
/// weighted-mix certificate.
DsState rank_one_state(const Eigen::VectorXd& x);

/// The unnormalized d=3 DS state induced by the symmetric product vector
/// (x, y, z) (x) (x, y, z):  p(0,0) = |x|^4, p(1,1) = |y|^4, p(2,2) = |z|^4,
/// p(0,1) = 2|x|^2|y|^2, p(0,2) = 2|x|^2|z|^2, p(1,2) = 2|y|^2|z|^2.
/// Depends only on the moduli of the arguments.
DsState product_ds_state(std::complex<double> x, std::complex<double> y,
                         std::complex<double> z);

/// Independent reconstruction check: builds the dense matrix
/// sum_t w_t (ket_t ket_t^dagger) (x) (ket_t ket_t^dagger) and compares it
/// against full_density_matrix(rho) within 1e-8 * (1 + trace).
bool verify_decomposition(const DsState& rho, const SeparableDecomposition& dec,
                          const Tolerance& tol);

}  // namespace sepcert

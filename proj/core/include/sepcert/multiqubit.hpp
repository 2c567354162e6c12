#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sepcert/matcore.hpp"

namespace sepcert {

/// The three-term sequence underlying the N-qubit PPT-entangled family:
///   f_0 = 1,  f_1 = 1 + Z,  f_{k+2} = (2 + Z) f_{k+1} - f_k,
/// with closed form
///   f_m = ((alpha - 1) alpha^m - (beta - 1) beta^m) / (alpha - beta),
/// where alpha, beta = (2 + Z +- sqrt(Z (4 + Z)))/2, alpha beta = 1.
/// The closed form extends to negative indices and satisfies the reflection
/// identity f_p = f_{-p-1}.
struct FSequence {
  double z_param = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  /// values[k] = f_k for k = 0..count-1.
  std::vector<double> values;

  /// f_p for any integer p: stored values for 0 <= p < count, the
  /// reflection identity for p < 0, and the closed form beyond the stored
  /// range.
  double at(long long p) const;
};

/// Builds the sequence; throws BadParamError for z <= 0 or count < 2.
FSequence f_sequence(double z_param, int count);

/// Diagonal symmetric N-qubit state in the Dicke basis with one symmetric
/// off-diagonal coherence:
///
///   rho = (1/normalization) * [ sum_k diag[k] |D_N^k><D_N^k|
///         + sigma (|D_N^a><D_N^b| + |D_N^b><D_N^a|) ],
///
/// with (a, b) = coherence_pos.  diag[k] is the full weight of the Dicke
/// level k (binomial multiplicity included).
struct SymmetricNQubitState {
  int n_qubits = 0;
  /// diag[k] for k = 0..N (size N+1), entrywise >= 0.
  Eigen::VectorXd diag;
  double sigma = 0.0;
  /// Dicke levels the coherence connects (default the two extreme levels).
  std::pair<int, int> coherence_pos{0, 0};
  /// Positive global denominator.
  double normalization = 1.0;

  /// floor(N/2): number of nontrivial bipartition cuts.
  int half() const { return n_qubits / 2; }
};

/// The PPT-entangled family: N = 2K+1 (K > 1), Z > 0, sigma = +-1.
/// Dicke weights diag[k] = C(N,k) f_{K-k} (negative indices through the
/// reflection identity), coherence sigma between levels 0 and N,
/// normalization 2 (4+Z)^K.  The resulting state has unit trace.
/// Throws BadParamError for even N, K <= 1, Z <= 0, or sigma outside {+1,-1}.
SymmetricNQubitState family_rho(int n_qubits, double z_param, double sigma);

/// One diagonal block of the partially transposed state at cut m, indexed
/// by the grading n = j - i (difference of Dicke indices across the cut):
/// A_n = D_n H_n D_n, where D_n is the diagonal of square-rooted binomial
/// products and H_n is the Hankel matrix of per-level weights
/// lambda_s = diag[s]/C(N,s) along the window s = i + k + n.
struct PtBlock {
  int n = 0;
  /// Row/column index range: i = i_min..i_min+size-1 with
  /// i_min = max(0, -n)  and size = min(m, N-m-n) - max(0, -n) + 1.
  int i_min = 0;
  Eigen::MatrixXd a;
  Eigen::VectorXd d_entries;
  /// The Hankel factor (equals the factorization core of the family's
  /// blocks up to index relabeling).
  Eigen::MatrixXd hankel;
};

/// Block decomposition of the partial transpose across the cut of the first
/// m qubits, valid when the coherence sits between the extreme Dicke levels
/// (0, N) or vanishes: interior blocks n = -m+1 .. N-m-1 plus the 2x2
/// coherence block [[lambda_m, sigma'], [sigma', lambda_{N-m}]] joining the
/// two extreme singletons (sigma' = sigma/normalization).
struct PtBlockDecomposition {
  int m_cut = 0;
  Eigen::Matrix2d coherence_block;
  std::vector<PtBlock> blocks;

  /// All eigenvalues of the direct sum (coherence block + interior blocks).
  std::vector<double> spectrum() const;
};

/// Builds the block decomposition.  Throws BadCutError for m outside
/// 1..floor(N/2) and BadParamError when a nonzero coherence connects levels
/// other than (0, N) (the grading argument needs the extreme placement; use
/// the dense routines below for general placements).
PtBlockDecomposition pt_blocks(const SymmetricNQubitState& state, int m_cut);

/// Two-column Cholesky factor of an interior family block's Hankel core.
/// For the family, the core of block n at any valid cut is the Hankel
/// matrix B(a, b) = f_{p+a+b} with p = |n| - K - 1 (negative indices via
/// the reflection identity).  L has rows (f_{p+a}, sqrt(I_{a,a})) / sqrt(f_p)
/// with the cut-independent bilinear form
///   I_{a,b} = f_q f_{q+a+b} - f_{q+a} f_{q+b}
///           = (alpha^a - beta^a)(alpha^b - beta^b) / (4 + Z)  >=  0,
/// so L L^T = B exactly and every interior block has rank at most 2.
struct BlockCholesky {
  /// The Hankel core B.
  Eigen::MatrixXd core;
  /// size x 2 nonnegative-structure factor with L L^T = core.
  Eigen::MatrixXd l;
  /// max |I_{a,b} - sqrt(I_{a,a} I_{b,b})| over the block.
  double iab_product_residual = 0.0;
  /// max |I_{a,b} at base q - I_{a,b} at base q+1| (cut independence).
  double iab_shift_residual = 0.0;
  /// ||L L^T - core||_F / (1 + ||core||_F).
  double reconstruction_residual = 0.0;
};

/// Factorizes the core of block n at cut m_cut for an N-qubit family state
/// whose sequence is f.  Throws BadCutError/BadParamError for indices
/// outside the valid interior range.
BlockCholesky block_cholesky(const FSequence& f, int n, int m_cut, int n_qubits);

/// Dense (m+1)(N-m+1)-dimensional matrix of the state in the bipartite
/// symmetric representation across the cut of the first m qubits (Dicke
/// levels embedded by split occupation numbers).
Eigen::MatrixXd dense_bipartite_matrix(const SymmetricNQubitState& state, int m_cut);

/// Dense partial transpose (on the first factor) of the bipartite
/// symmetric representation.
Eigen::MatrixXd dense_partial_transpose(const SymmetricNQubitState& state, int m_cut);

/// True iff the state is PPT across every bipartition m = 1..floor(N/2).
/// Uses the block decomposition when the coherence placement permits and
/// the dense representation otherwise; thresholds scale with the block
/// spectral norm.
bool is_ppt_all_bipartitions(const SymmetricNQubitState& state, const Tolerance& tol);

/// Numerical ranks (rho, rho^{PT over 1 qubit}, ..., rho^{PT over floor(N/2)
/// qubits}); length floor(N/2) + 1.
std::vector<int> ranks_profile(const SymmetricNQubitState& state, const Tolerance& tol);

/// Dimension of the space of symmetric candidate perturbations H (Dicke
/// diagonal plus the state's own coherence slot, N+2 real parameters)
/// satisfying range(H^{PT_m}) inside range(rho^{PT_m}) for every
/// m = 0..floor(N/2), computed as the nullspace dimension of the stacked
/// kernel constraints.  The state is extremal in the PPT set iff the
/// result is 1; an extremal PPT state of rank above 1 is entangled.
int extremality_dimension(const SymmetricNQubitState& state, const Tolerance& tol);

/// The four-qubit PPT-entangled example: Dicke weights
/// (7, 12, 12, 12, 7)/50 and coherence -2 sqrt(15)/(50 sqrt(7)) between
/// Dicke levels 1 and 4.  Unit trace; ranks (5, 7, 8); extremal.
SymmetricNQubitState example_4qubit();

}  // namespace sepcert

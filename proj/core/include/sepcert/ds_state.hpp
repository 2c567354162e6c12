#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sepcert/matcore.hpp"

namespace sepcert {

/// Weight map for a diagonal symmetric state: keys are index pairs (i, j)
/// with 0 <= i <= j < d, values are nonnegative weights.
using WeightMap = std::map<std::pair<int, int>, double>;

/// Bipartite diagonal symmetric (DS) state on C^d (x) C^d:
///
///   rho = sum_i p(i,i) |ii><ii| + sum_{i<j} p(i,j) |D_ij><D_ij|,
///
/// with |D_ij> = (|ij> + |ji>)/sqrt(2).  Weights are stored sparsely;
/// missing pairs default to zero.  States may be unnormalized; when the
/// normalized flag is set the weights must sum to one within 1e-9.
class DsState {
public:
  /// Validating constructor.  Throws BadParamError (d < 2), BadIndexError
  /// (key out of range), NegativeWeightError, or BadNormalizationError
  /// (normalized requested but the sum deviates from 1 by more than 1e-9).
  static DsState create(int d, const WeightMap& p, bool normalized);

  int dim() const { return d_; }

  /// Weight of the (i, j) pair in canonical order (i <= j after swapping);
  /// zero for absent pairs.  Throws BadIndexError out of range.
  double weight(int i, int j) const;

  bool normalized() const { return normalized_; }

  /// Sum of all stored weights (equals 1 for normalized states).
  double weight_sum() const;

  /// Stored nonzero weights in canonical (i <= j) key order.
  const WeightMap& weights() const { return p_; }

private:
  DsState(int d, WeightMap p, bool normalized)
      : d_(d), p_(std::move(p)), normalized_(normalized) {}

  int d_;
  WeightMap p_;
  bool normalized_;
};

/// The d x d matrix associated with a DS state: M(i,i) = p(i,i) and
/// M(i,j) = p(i,j)/2 off the diagonal.  Entrywise nonnegative by
/// construction; its entrywise 1-norm equals the weight sum of the state.
class MMatrix {
public:
  /// Validates entrywise nonnegativity (NegativeWeightError otherwise).
  /// Entries in [-1e-12, 0) are clamped to zero.
  explicit MMatrix(const SymMatrix& inner);

  const SymMatrix& inner() const { return inner_; }
  int dim() const { return inner_.dim(); }
  double operator()(int i, int j) const { return inner_(i, j); }

  /// Sum of absolute values of all entries (== sum of entries here).
  double entrywise_one_norm() const;

private:
  SymMatrix inner_;
};

/// Spectrum of the partial transpose of a DS state in block form: the
/// eigenvalues of M(rho) plus, for every i < j, a singleton value p(i,j)/2
/// with multiplicity two.  Total count with multiplicity is d^2.
struct PtSpectrumReport {
  std::vector<double> m_eigenvalues;
  /// (value p(i,j)/2, multiplicity 2) for each i < j.
  struct Singleton {
    int i = 0;
    int j = 0;
    double value = 0.0;
    int multiplicity = 2;
  };
  std::vector<Singleton> singleton_blocks;

  /// All eigenvalues expanded with multiplicity (size d^2).
  std::vector<double> flattened() const;
};

/// M(rho) of a DS state.
MMatrix m_matrix(const DsState& rho);

/// Inverse direction of the correspondence; exact round trip:
/// m_matrix(from_m_matrix(m)) == m entry for entry.  The result is flagged
/// normalized when the entrywise 1-norm is within 1e-9 of one.
DsState from_m_matrix(const MMatrix& m);

/// Dense d^2 x d^2 density matrix in the computational product basis
/// (row-major index i*d + j).  Trace equals the weight sum.
Eigen::MatrixXd full_density_matrix(const DsState& rho);

/// Block spectrum of the partial transpose (no d^2 x d^2 eigensolve).
PtSpectrumReport pt_spectrum(const DsState& rho, const Tolerance& tol);

/// PPT test: true iff M(rho) is positive semidefinite (entrywise
/// nonnegativity holds by construction).
bool is_ppt(const DsState& rho, const Tolerance& tol);

/// True iff p(i,j) == 2 sqrt(p(i,i) p(j,j)) within 1e-9 for all i < j,
/// i.e. M(rho) is a nonnegative rank-1 outer product.  Such states are the
/// extremal separable DS states.
bool is_extremal_separable_candidate(const DsState& rho, const Tolerance& tol);

}  // namespace sepcert

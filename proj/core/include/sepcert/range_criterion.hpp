#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sepcert/ds_state.hpp"

namespace sepcert {

/// Outcome of the DS-specialized range-criterion test.
///
/// For a PPT DS state, any symmetric product vector |z>|z> in the range of
/// rho induces y_i = |z_i|^2 subject to: every kernel vector w of M(rho)
/// gives the linear equation sum_i w_i y_i = 0; p(i,i) = 0 forces y_i = 0;
/// and p(i,j) = 0 (i != j) forces y_i y_j = 0, excluding supports that
/// contain both ends of such a pair.  If no admissible support carries a
/// strictly positive solution, no product vector exists and the state is
/// entangled by the range criterion.
struct RangeReport {
  enum class Verdict {
    /// No feasible y on any admissible support: the state is entangled.
    Infeasible,
    /// A feasible y was found (inconclusive for separability).
    FeasibleWitnessVector,
    /// Admissible supports exceeded the cap; verdict withheld.
    BudgetExceeded,
  };

  Verdict verdict = Verdict::BudgetExceeded;
  /// Orthonormal basis of ker M(rho).
  std::vector<Eigen::VectorXd> kernel_basis;
  /// Pairs (i, j), i < j, with p(i,j) = 0.
  std::vector<std::pair<int, int>> zero_pairs;
  /// Indices i with p(i,i) = 0 (force y_i = 0).
  std::vector<int> zero_diag;
  /// Lexicographically smallest support carrying a strictly positive
  /// solution, when one exists.
  std::optional<std::vector<int>> feasible_support;
  /// The feasible vector (scaled so its largest entry is 1), when found.
  Eigen::VectorXd y;
  /// Number of admissible supports examined.
  std::uint64_t supports_examined = 0;
};

/// Runs the range-criterion test.  Supports are enumerated in lexicographic
/// order of their index sequences; the first feasible support decides.  When
/// the number of admissible supports would exceed `support_cap` without a
/// feasible one appearing, the verdict is BudgetExceeded.  Intended for PPT
/// states (NPT states are already decided by the partial transpose).
RangeReport range_criterion_test(const DsState& rho, const Tolerance& tol,
                                 std::uint64_t support_cap = std::uint64_t{1} << 16);

/// Feasibility on a fixed support: seeks y >= 0, strictly positive exactly
/// on `support` and zero elsewhere, satisfying every kernel equation.
/// Implemented as a nullspace restriction followed by a small linear
/// program maximizing the minimum entry.  Returns the solution scaled so
/// its largest entry is 1, or nullopt when none exists.
std::optional<Eigen::VectorXd> feasible_on_support(
    const std::vector<Eigen::VectorXd>& kernel_basis, const std::vector<int>& support,
    int d, const Tolerance& tol);

/// Preprocessing hook: subtracts explicit rank-1 terms sum_t w_t v_t v_t^T
/// from M(rho) and returns the DS state of the residual matrix.  The terms
/// are user-supplied (finding them is outside the scope of the test).
/// Throws NegativeWeightError when the residual leaves the DS cone
/// (a negative entry beyond -1e-12).
DsState subtract_rank_one_terms(
    const DsState& rho,
    const std::vector<std::pair<double, Eigen::VectorXd>>& terms);

}  // namespace sepcert

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sepcert/decomp.hpp"
#include "sepcert/ds_state.hpp"
#include "sepcert/range_criterion.hpp"

namespace sepcert {

/// Copositive witness candidate with provenance.  For Horn and LiftedHorn
/// provenance copositivity is guaranteed by construction (the Horn matrix is
/// copositive and zero-padding a copositive matrix preserves copositivity on
/// principal subsets).
struct Witness {
  enum class Provenance { Horn, LiftedHorn, UserSupplied };

  SymMatrix w;
  Provenance provenance = Provenance::UserSupplied;
  /// For LiftedHorn: the principal subset the 5x5 core occupies.
  std::vector<int> subset;
};

/// The canonical 5x5 copositive Horn matrix (entries +-1).  It is not a sum
/// of a PSD and a nonnegative matrix, which is what lets it separate the
/// doubly nonnegative cone from the completely positive cone at dimension 5.
Witness horn_matrix();

/// Embeds a witness into dimension d on a principal subset: the result
/// equals w on subset x subset and is zero elsewhere.  Throws
/// BadSubsetError for size mismatch, duplicates, or out-of-range indices.
Witness lift_witness(const Witness& w, int d, const std::vector<int>& subset);

/// Trace inner product sum_ij w_ij m_ij.  Throws DimensionMismatchError.
double witness_value(const Witness& w, const MMatrix& m);

/// True iff m is doubly nonnegative: positive semidefinite (entrywise
/// nonnegativity already holds by the MMatrix invariant).  Equivalent to
/// the PPT property of the underlying DS state.
bool is_dnn(const MMatrix& m, const Tolerance& tol);

/// True iff every diagonal entry dominates its off-diagonal row sum:
/// m(i,i) >= sum_{j != i} m(i,j), compared exactly on stored values.
/// Diagonal dominance of a symmetric nonnegative matrix implies complete
/// positivity with an explicit factorization (see cp_diag_dominant).
bool is_diag_dominant(const MMatrix& m);

/// Explicit CP factorization of a diagonally dominant symmetric nonnegative
/// matrix: one column sqrt(m(i,j)) (e_i + e_j) per off-diagonal pair i < j
/// with m(i,j) > 0, plus one column sqrt(m(i,i) - sum_{j!=i} m(i,j)) e_i per
/// index with positive slack.  Throws BadParamError when m is not
/// diagonally dominant (beyond a -1e-12 slack clamp).
CpFactorization cp_diag_dominant(const MMatrix& m);

/// CP factorization for numerical rank <= 2: eigen-factors m into planar
/// vectors (one row per index); pairwise nonnegative scalar products mean
/// all rows fit in a closed arc of width pi/2, so a single rotation moves
/// them into the positive quadrant.  Throws RankTooHighError when the
/// numerical rank exceeds 2 and NotDnnError when m is not PSD or a pairwise
/// product is negative beyond tolerance.
CpFactorization cp_rank2_embed(const MMatrix& m, const Tolerance& tol);

/// Constructive CP factorization for d = 3 doubly nonnegative matrices.
/// Tries the six simultaneous row/column permutations of the explicit
/// three-vector Cholesky formula and returns the first whose generating
/// vectors are entrywise nonnegative; at least one permutation works for
/// every 3x3 doubly nonnegative matrix.  Falls back to cp_rank2_embed on
/// numerical degeneracy (all pivots below the rank cutoff).  Throws
/// NotDnnError when m is not doubly nonnegative or BadParamError when
/// m.dim() != 3.
CpFactorization cp_d3_decompose(const MMatrix& m, const Tolerance& tol);

/// Certificate for the uniform-mix sufficient condition: rho decomposes as
/// rho = rho_tilde + epsilon * (all-ones DS state) with rho_tilde a valid,
/// PPT, diagonally dominant DS state.  Three conditions on epsilon:
///   1. epsilon <= m(i,j) for all i, j              (stay in the DS cone)
///   2. epsilon * d <= 1 / <u|M^+|u>, u = ones/sqrt(d) in range(M)  (stay PPT)
///   3. m(i,i) + epsilon (d-2) >= sum_{j!=i} m(j,i)  (diagonal dominance)
/// The feasible interval [lower, upper] is always reported, feasible or not.
struct UniformMixCertificate {
  enum class Status {
    Feasible,
    /// lower > upper; the bounds are still meaningful.
    Infeasible,
    /// The all-ones direction is outside range(M); condition 2 fails for
    /// every epsilon > 0.
    OnesNotInRange,
    /// d < 3: condition 3 involves the divisor d - 2.
    DimensionTooSmall,
  };

  Status status = Status::Infeasible;
  double lower = 0.0;
  double upper = 0.0;
  /// Midpoint (lower + upper)/2 when feasible.
  double epsilon = 0.0;
  /// Condition-1 bound: min_ij m(i,j).
  double cond1_upper = 0.0;
  /// Condition-2 bound: (1 / <u|M^+|u>) / d.
  double cond2_upper = 0.0;
  /// Condition-3 bound: max_i [sum_{j!=i} m(j,i) - m(i,i)] / (d-2).
  double cond3_lower = 0.0;
};

UniformMixCertificate uniform_mix_certificate(const DsState& rho, const Tolerance& tol);

/// Minimum slack of the three uniform-mix conditions at a given epsilon
/// (nonnegative slack means the condition holds).  Used to re-verify
/// certificates independently of the code path that produced them.
double uniform_mix_slack(const DsState& rho, double epsilon, const Tolerance& tol);

/// Explicit CP factorization from a feasible uniform-mix certificate:
/// columns of cp_diag_dominant(M - epsilon * ones) plus the column
/// sqrt(epsilon) * ones.
CpFactorization cp_from_uniform_mix(const DsState& rho, const UniformMixCertificate& cert);

/// Certificate for the weighted-mix sufficient condition: rho decomposes as
/// rho = (1 - lambda) rho_tilde + lambda I_x, where I_x is the rank-1 DS
/// state of u_x = x/||x||_1 and rho_tilde is a valid, PPT, diagonally
/// dominant DS state.  Conditions on lambda for a fixed positive x:
///   1. lambda <= m(i,j) ||x||_1^2 / (x_i x_j) for all i, j
///   2. lambda <= 1 / <u_x|M^+|u_x>, u_x in range(M)
///   3. lambda x_i (||x||_1 - 2 x_i) >= ||x||_1^2 (sum_{j!=i} m(i,j) - m(i,i))
///      per coordinate (a constraint with negative coefficient flips into an
///      upper bound).
struct WeightedMixCertificate {
  enum class Status {
    Feasible,
    Infeasible,
    /// u_x is outside range(M); condition 2 fails for every lambda > 0.
    WeightNotInRange,
  };

  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  /// Midpoint (max(0, lower) + min(upper, 1 - 1e-12))/2 when feasible.
  double lambda = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// Condition-1 bound: min_ij m(i,j) ||x||_1^2 / (x_i x_j).
  double cond1_upper = 0.0;
  /// Condition-2 bound: 1 / <u_x|M^+|u_x>.
  double cond2_upper = 0.0;
  /// Largest lower bound contributed by condition 3 (0 when none binds).
  double cond3_lower = 0.0;
  /// Smallest upper bound contributed by sign-flipped condition-3 rows
  /// (+infinity when none flips).
  double cond3_upper = 0.0;
};

/// Evaluates the weighted-mix conditions for a fixed x (all entries > 0;
/// throws BadParamError otherwise).
WeightedMixCertificate weighted_mix_certificate(const DsState& rho,
                                                const Eigen::VectorXd& x,
                                                const Tolerance& tol);

/// Minimum slack of the weighted-mix conditions at (x, lambda).
double weighted_mix_slack(const DsState& rho, const Eigen::VectorXd& x, double lambda,
                          const Tolerance& tol);

/// Explicit CP factorization from a feasible weighted-mix certificate:
/// columns sqrt(1 - lambda) * cp_diag_dominant((M - lambda u_x u_x^T)/(1 - lambda))
/// plus the column sqrt(lambda) * u_x.
CpFactorization cp_from_weighted_mix(const DsState& rho, const WeightedMixCertificate& cert);

/// Derivative-free search over positive weight vectors x (Nelder-Mead style
/// on the simplex, entries clamped at 1e-6) maximizing the feasibility
/// margin of the weighted-mix conditions.  Returns the first feasible
/// certificate, or nullopt when the budget is exhausted (which is not
/// evidence of entanglement).  Deterministic for a fixed seed.
std::optional<WeightedMixCertificate> search_weighted_mix(const DsState& rho, int restarts,
                                                          const Tolerance& tol,
                                                          unsigned seed = 0x5eedu);

/// Symmetric nonnegative factorization search: damped multiplicative
/// updates on B (d x k, entrywise nonnegative) minimizing ||m - B B^T||_F,
/// from seeded random starts.  Success iff the residual is at most
/// 1e-7 * (1 + ||m||_F); nullopt otherwise (not evidence of
/// non-membership).
std::optional<CpFactorization> cp_search(const MMatrix& m, int k, int restarts, int iters,
                                         unsigned seed);

/// Budget knobs for the certification pipeline.
struct CertifyBudget {
  unsigned seed = 0x5eedu;
  /// Max number of principal 5-subsets scanned with the Horn witness.
  int witness_subset_cap = 2000;
  /// Support cap forwarded to the range criterion.
  std::uint64_t support_cap = std::uint64_t{1} << 16;
  /// Column budget for cp_search; 0 selects d(d+1)/2.
  int cp_search_k_max = 0;
  int cp_search_restarts = 8;
  int cp_search_iters = 4000;
  int weighted_mix_restarts = 24;
  /// Budget for the copositivity evidence oracle on witness candidates.
  int min_quad_restarts = 16;
  int min_quad_iters = 400;
};

/// Evidence attached to a Separable verdict that carries an explicit
/// decomposition (independently re-verified before the verdict is emitted).
struct DecompositionEvidence {
  /// Which route produced the factorization.
  std::string route;
  CpFactorization factorization;
  SeparableDecomposition decomposition;
};

/// Evidence attached to a Separable verdict justified by a structure
/// theorem whose hypotheses were re-verified but for which no explicit
/// decomposition was constructed (d = 4 PPT states).
struct TheoremCitationEvidence {
  std::string theorem;
  std::string detail;
};

/// Evidence attached to an Entangled verdict from a copositive witness:
/// value < -1e-9 certifies non-membership in the CP cone.
struct WitnessViolationEvidence {
  Witness witness;
  double value = 0.0;
};

/// Evidence attached to an Entangled verdict from a negative partial
/// transpose eigenvalue.
struct NptViolationEvidence {
  double min_eigenvalue = 0.0;
};

/// Evidence attached to an Entangled verdict from range-criterion
/// infeasibility.
struct RangeCriterionEvidence {
  RangeReport report;
};

/// Evidence for an Inconclusive verdict: the ordered list of attempted
/// routes with their outcomes.
struct AttemptTraceEvidence {
  std::vector<std::string> attempts;
};

using CertificateEvidence =
    std::variant<DecompositionEvidence, TheoremCitationEvidence, WitnessViolationEvidence,
                 NptViolationEvidence, RangeCriterionEvidence, AttemptTraceEvidence>;

/// Outcome of the certification pipeline.
struct SeparabilityCertificate {
  enum class Verdict { Separable, Entangled, Inconclusive };

  Verdict verdict = Verdict::Inconclusive;
  CertificateEvidence evidence = AttemptTraceEvidence{};
  /// Ordered log of every attempted route (also populated on success).
  std::vector<std::string> attempt_trace;
};

/// Certification pipeline, cheapest and strongest evidence first:
///   1. NPT test (entangled on failure);
///   2. d <= 4: PPT implies separable; explicit decomposition for d <= 3,
///      theorem citation with opportunistic cp_search for d = 4;
///   3. numerical rank <= 2: planar embedding decomposition;
///   4. diagonal dominance: explicit factorization;
///   5. uniform-mix certificate (+ explicit decomposition);
///   6. weighted-mix search (+ explicit decomposition);
///   7. cp_search (+ decomposition on success);
///   8. Horn witness scan over principal 5-subsets (entangled on a value
///      below -1e-9), with simplex-minimization evidence in the trace;
///   9. range criterion (entangled on infeasibility).
/// Otherwise Inconclusive with the attempt trace.
SeparabilityCertificate certify(const DsState& rho, const CertifyBudget& budget = {});

}  // namespace sepcert

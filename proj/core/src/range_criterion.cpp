#include "sepcert/range_criterion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "sepcert/errors.hpp"
#include "sepcert/matcore.hpp"

namespace sepcert {

namespace {

/// Dense simplex solver for min c^T x subject to A x = b, x >= 0, with
/// Bland's rule.  Sized for the tiny feasibility programs of this module
/// (at most a few dozen variables), not for general use.
class SimplexSolver {
 public:
  SimplexSolver(Eigen::MatrixXd a, Eigen::VectorXd b) : a_(std::move(a)), b_(std::move(b)) {
    for (int i = 0; i < b_.size(); ++i) {
      if (b_(i) < 0.0) {
        a_.row(i) = -a_.row(i);
        b_(i) = -b_(i);
      }
    }
  }

  /// Runs two phases; returns the optimal x, or nullopt when infeasible.
  std::optional<Eigen::VectorXd> solve(const Eigen::VectorXd& cost) {
    const int m = static_cast<int>(a_.rows());
    const int n = static_cast<int>(a_.cols());

    // Phase 1: artificial variables form the initial basis.
    Eigen::MatrixXd table(m, n + m);
    table.leftCols(n) = a_;
    table.rightCols(m) = Eigen::MatrixXd::Identity(m, m);
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;
    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n + m);
    phase1_cost.tail(m).setOnes();
    if (!pivot_to_optimum(table, basis, phase1_cost, n + m)) return std::nullopt;
    if (objective(table, basis, phase1_cost) > 1e-7) return std::nullopt;

    // Phase 2: artificial columns are barred from entering.
    Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(n + m);
    phase2_cost.head(n) = cost;
    if (!pivot_to_optimum(table, basis, phase2_cost, n)) return std::nullopt;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd xb = basic_solution(table, basis);
    for (int i = 0; i < m; ++i) {
      if (basis[i] < n) x(basis[i]) = xb(i);
    }
    return x;
  }

 private:
  Eigen::MatrixXd basis_matrix(const Eigen::MatrixXd& table, const std::vector<int>& basis) const {
    const int m = static_cast<int>(basis.size());
    Eigen::MatrixXd bm(m, m);
    for (int i = 0; i < m; ++i) bm.col(i) = table.col(basis[i]);
    return bm;
  }

  Eigen::VectorXd basic_solution(const Eigen::MatrixXd& table,
                                 const std::vector<int>& basis) const {
    return basis_matrix(table, basis).fullPivLu().solve(b_);
  }

  double objective(const Eigen::MatrixXd& table, const std::vector<int>& basis,
                   const Eigen::VectorXd& cost) const {
    const Eigen::VectorXd xb = basic_solution(table, basis);
    double value = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) value += cost(basis[i]) * xb(i);
    return value;
  }

  /// Bland-rule pivoting until optimality.  Columns with index >= allowed
  /// never enter.  Returns false on unboundedness.
  bool pivot_to_optimum(Eigen::MatrixXd& table, std::vector<int>& basis,
                        const Eigen::VectorXd& cost, int allowed) {
    const int m = static_cast<int>(table.rows());
    const int max_pivots = 200 + 50 * static_cast<int>(table.cols());
    for (int pivot = 0; pivot < max_pivots; ++pivot) {
      const Eigen::MatrixXd bm = basis_matrix(table, basis);
      const auto lu = bm.fullPivLu();
      const Eigen::VectorXd xb = lu.solve(b_);
      Eigen::VectorXd cb(m);
      for (int i = 0; i < m; ++i) cb(i) = cost(basis[i]);
      const Eigen::VectorXd dual = lu.transpose().solve(cb);

      int entering = -1;
      for (int j = 0; j < allowed; ++j) {
        if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
        const double reduced = cost(j) - table.col(j).dot(dual);
        if (reduced < -1e-9) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;

      const Eigen::VectorXd direction = lu.solve(table.col(entering));
      int leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (direction(i) > 1e-12) {
          const double ratio = std::max(xb(i), 0.0) / direction(i);
          if (ratio < best_ratio - 1e-15 ||
              (std::abs(ratio - best_ratio) <= 1e-15 &&
               (leaving < 0 || basis[i] < basis[leaving]))) {
            best_ratio = ratio;
            leaving = i;
          }
        }
      }
      if (leaving < 0) return false;
      basis[leaving] = entering;
    }
    return false;
  }

  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
};

}  // namespace

std::optional<Eigen::VectorXd> feasible_on_support(
    const std::vector<Eigen::VectorXd>& kernel_basis, const std::vector<int>& support, int d,
    const Tolerance& tol) {
  if (support.empty()) {
    throw BadSubsetError("feasible_on_support requires a nonempty support");
  }
  std::set<int> seen;
  for (int idx : support) {
    if (idx < 0 || idx >= d) {
      throw BadSubsetError("support index " + std::to_string(idx) + " outside dimension " +
                           std::to_string(d));
    }
    if (!seen.insert(idx).second) {
      throw BadSubsetError("support index " + std::to_string(idx) + " repeated");
    }
  }
  const int s = static_cast<int>(support.size());
  const int k = static_cast<int>(kernel_basis.size());

  // Restrict the kernel equations to the support coordinates and compute
  // a basis of the restricted solution space.
  Eigen::MatrixXd nullspace;
  if (k == 0) {
    nullspace = Eigen::MatrixXd::Identity(s, s);
  } else {
    Eigen::MatrixXd w(k, s);
    for (int row = 0; row < k; ++row) {
      if (kernel_basis[row].size() != d) {
        throw DimensionMismatchError("kernel vector length does not match dimension");
      }
      for (int col = 0; col < s; ++col) w(row, col) = kernel_basis[row](support[col]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullV);
    const Eigen::VectorXd singular = svd.singularValues();
    const double cut = singular.size() > 0 ? tol.rank_cut * std::max(singular(0), 1e-300) : 0.0;
    int rank = 0;
    for (int i = 0; i < singular.size(); ++i) {
      if (singular(i) > cut) ++rank;
    }
    if (rank >= s) return std::nullopt;
    nullspace = svd.matrixV().rightCols(s - rank);
  }
  const int r = static_cast<int>(nullspace.cols());

  // Linear program: maximize t subject to (N c)_i >= t on the support and
  // sum_i (N c)_i = 1.  Free variables are split into differences.
  // Columns: c+ (r), c- (r), t+ (1), t- (1), slack (s).
  const int n_vars = 2 * r + 2 + s;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(s + 1, n_vars);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s + 1);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < r; ++j) {
      a(i, j) = nullspace(i, j);
      a(i, r + j) = -nullspace(i, j);
    }
    a(i, 2 * r) = -1.0;
    a(i, 2 * r + 1) = 1.0;
    a(i, 2 * r + 2 + i) = -1.0;
  }
  for (int j = 0; j < r; ++j) {
    const double column_sum = nullspace.col(j).sum();
    a(s, j) = column_sum;
    a(s, r + j) = -column_sum;
  }
  b(s) = 1.0;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n_vars);
  cost(2 * r) = -1.0;
  cost(2 * r + 1) = 1.0;

  SimplexSolver solver(a, b);
  const std::optional<Eigen::VectorXd> solution = solver.solve(cost);
  if (!solution) return std::nullopt;
  const double t = (*solution)(2 * r) - (*solution)(2 * r + 1);
  if (t <= 1e-9) return std::nullopt;

  Eigen::VectorXd coeffs(r);
  for (int j = 0; j < r; ++j) coeffs(j) = (*solution)(j) - (*solution)(r + j);
  const Eigen::VectorXd y_support = nullspace * coeffs;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < s; ++i) y(support[i]) = y_support(i);
  const double peak = y.maxCoeff();
  if (peak <= 0.0) return std::nullopt;
  y /= peak;
  return y;
}

RangeReport range_criterion_test(const DsState& rho, const Tolerance& tol,
                                 std::uint64_t support_cap) {
  const int d = rho.dim();
  RangeReport report;

  const MMatrix m = m_matrix(rho);
  const EigResult eig = sym_eig(m.inner());
  const double sigma_max = eig.eigenvalues.cwiseAbs().maxCoeff();
  for (int i = 0; i < d; ++i) {
    if (sigma_max == 0.0 || std::abs(eig.eigenvalues(i)) <= tol.rank_cut * sigma_max) {
      report.kernel_basis.push_back(eig.eigenvectors.col(i));
    }
  }

  for (int i = 0; i < d; ++i) {
    if (rho.weight(i, i) == 0.0) report.zero_diag.push_back(i);
    for (int j = i + 1; j < d; ++j) {
      if (rho.weight(i, j) == 0.0) report.zero_pairs.emplace_back(i, j);
    }
  }

  std::vector<bool> excluded(d, false);
  for (int i : report.zero_diag) excluded[i] = true;
  std::vector<std::vector<bool>> conflict(d, std::vector<bool>(d, false));
  for (const auto& [i, j] : report.zero_pairs) {
    conflict[i][j] = true;
    conflict[j][i] = true;
  }

  // Depth-first enumeration in lexicographic order of index sequences; a
  // support is tested as soon as its last index is pushed, so the first
  // feasible support found is the lexicographically smallest one.
  std::vector<int> support;
  bool budget_hit = false;
  const std::function<bool(int)> dfs = [&](int next) -> bool {
    for (int i = next; i < d; ++i) {
      if (excluded[i]) continue;
      bool clash = false;
      for (int chosen : support) {
        if (conflict[chosen][i]) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      support.push_back(i);
      if (report.supports_examined >= support_cap) {
        budget_hit = true;
        support.pop_back();
        return true;
      }
      ++report.supports_examined;
      if (const auto y = feasible_on_support(report.kernel_basis, support, d, tol)) {
        report.verdict = RangeReport::Verdict::FeasibleWitnessVector;
        report.feasible_support = support;
        report.y = *y;
        support.pop_back();
        return true;
      }
      if (dfs(i + 1)) {
        support.pop_back();
        return true;
      }
      support.pop_back();
    }
    return false;
  };

  const bool stopped = dfs(0);
  if (stopped && budget_hit) {
    report.verdict = RangeReport::Verdict::BudgetExceeded;
  } else if (!stopped) {
    report.verdict = RangeReport::Verdict::Infeasible;
  }
  return report;
}

DsState subtract_rank_one_terms(const DsState& rho,
                                const std::vector<std::pair<double, Eigen::VectorXd>>& terms) {
  const int d = rho.dim();
  Eigen::MatrixXd residual = m_matrix(rho).inner().mat();
  for (const auto& [weight, vec] : terms) {
    if (vec.size() != d) {
      throw DimensionMismatchError("rank-1 term length does not match the state dimension");
    }
    if (weight < 0.0) {
      throw BadParamError("rank-1 term weights must be nonnegative");
    }
    residual -= weight * (vec * vec.transpose());
  }
  return from_m_matrix(MMatrix(SymMatrix(residual)));
}

}  // namespace sepcert

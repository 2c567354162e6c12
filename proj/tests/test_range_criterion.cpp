#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "sepcert/ds_state.hpp"
#include "sepcert/errors.hpp"
#include "sepcert/range_criterion.hpp"

using sepcert::DsState;
using sepcert::MMatrix;
using sepcert::RangeReport;
using sepcert::SymMatrix;
using sepcert::Tolerance;
using sepcert::WeightMap;

namespace {

DsState circulant_d6_state() {
  WeightMap p;
  for (int i = 0; i < 6; ++i) {
    p[{i, i}] = 2.0;
    for (int j = i + 1; j < 6; ++j) {
      const int dist = std::min(j - i, 6 - (j - i));
      if (dist == 1) p[{i, j}] = 3.0;
      if (dist == 2) p[{i, j}] = 1.0;
    }
  }
  return DsState::create(6, p, false);
}

DsState state_from_matrix(const Eigen::MatrixXd& m) {
  return sepcert::from_m_matrix(MMatrix(SymMatrix(m)));
}

Eigen::MatrixXd entangled_m5() {
  Eigen::MatrixXd m(5, 5);
  m << 1, 1, 0, 0, 1,
       1, 2, 1, 0, 0,
       0, 1, 2, 1, 0,
       0, 0, 1, 1, 1,
       1, 0, 0, 1, 3;
  return m;
}

Eigen::MatrixXd full_rank_m5() {
  Eigen::MatrixXd m(5, 5);
  m << 1, 1, 0, 0, 1,
       1, 2, 1, 0, 0,
       0, 1, 2, 1, 0,
       0, 0, 1, 2, 1,
       1, 0, 0, 1, 6;
  return m;
}

/// Re-verifies a feasible report: the witness vector satisfies every
/// constraint the report claims it does.
void check_feasible_report(const DsState& rho, const RangeReport& report) {
  REQUIRE(report.verdict == RangeReport::Verdict::FeasibleWitnessVector);
  REQUIRE(report.feasible_support.has_value());
  const Eigen::VectorXd& y = report.y;
  REQUIRE(y.size() == rho.dim());
  CHECK(y.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(y.minCoeff() >= 0.0);
  std::vector<bool> on_support(rho.dim(), false);
  for (int i : *report.feasible_support) {
    on_support[static_cast<std::size_t>(i)] = true;
    CHECK(y(i) > 0.0);
  }
  for (int i = 0; i < rho.dim(); ++i) {
    if (!on_support[static_cast<std::size_t>(i)]) CHECK(y(i) == 0.0);
  }
  for (const auto& w : report.kernel_basis) CHECK(std::abs(w.dot(y)) <= 1e-9);
  for (int i : report.zero_diag) CHECK(y(i) == 0.0);
  for (const auto& [i, j] : report.zero_pairs) {
    CHECK((y(i) == 0.0 || y(j) == 0.0));
  }
}

/// Independent brute-force feasibility scan: every admissible support, dense
/// simplex grid, kernel residual threshold.  Returns true when some grid
/// point satisfies the whole system.
bool grid_finds_feasible(const RangeReport& report, int d, int steps) {
  std::vector<bool> diag_zero(d, false);
  for (int i : report.zero_diag) diag_zero[static_cast<std::size_t>(i)] = true;

  for (int mask = 1; mask < (1 << d); ++mask) {
    bool admissible = true;
    for (int i = 0; i < d && admissible; ++i) {
      if ((mask >> i & 1) && diag_zero[static_cast<std::size_t>(i)]) admissible = false;
    }
    for (const auto& [i, j] : report.zero_pairs) {
      if ((mask >> i & 1) && (mask >> j & 1)) admissible = false;
    }
    if (!admissible) continue;

    std::vector<int> support;
    for (int i = 0; i < d; ++i) {
      if (mask >> i & 1) support.push_back(i);
    }
    const int s = static_cast<int>(support.size());

    // Enumerate strictly positive grid compositions of `steps` over the
    // support and test the kernel equations.
    Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
    bool found = false;
    std::function<void(int, int)> recurse = [&](int idx, int remaining) {
      if (found) return;
      if (idx == s - 1) {
        if (remaining < 1) return;
        y(support[static_cast<std::size_t>(idx)]) =
            static_cast<double>(remaining) / steps;
        double violation = 0.0;
        for (const auto& w : report.kernel_basis) {
          violation = std::max(violation, std::abs(w.dot(y)));
        }
        if (violation <= 1e-6) found = true;
        return;
      }
      for (int k = 1; k <= remaining - (s - 1 - idx); ++k) {
        y(support[static_cast<std::size_t>(idx)]) = static_cast<double>(k) / steps;
        recurse(idx + 1, remaining - k);
      }
    };
    recurse(0, steps);
    if (found) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("range criterion flags the circulant d=6 state") {
  const Tolerance tol;
  const DsState rho = circulant_d6_state();
  const RangeReport report = sepcert::range_criterion_test(rho, tol);
  CHECK(report.verdict == RangeReport::Verdict::Infeasible);
  CHECK(report.kernel_basis.size() == 3);
  REQUIRE(report.zero_pairs.size() == 3);
  CHECK(report.zero_pairs[0] == std::pair<int, int>{0, 3});
  CHECK(report.zero_pairs[1] == std::pair<int, int>{1, 4});
  CHECK(report.zero_pairs[2] == std::pair<int, int>{2, 5});
  CHECK(report.supports_examined > 0);

  // Independent confirmation by dense grid search.
  CHECK_FALSE(grid_finds_feasible(report, 6, 12));
}

TEST_CASE("range criterion flags the entangled d=5 state") {
  const Tolerance tol;
  const RangeReport report =
      sepcert::range_criterion_test(state_from_matrix(entangled_m5()), tol);
  CHECK(report.verdict == RangeReport::Verdict::Infeasible);
  CHECK(report.kernel_basis.size() == 2);
  CHECK_FALSE(grid_finds_feasible(report, 5, 12));
}

TEST_CASE("range criterion passes the full-rank diagonal state") {
  const Tolerance tol;
  WeightMap p;
  for (int i = 0; i < 3; ++i) p[{i, i}] = 1.0 / 3.0;
  const DsState rho = DsState::create(3, p, true);
  const RangeReport report = sepcert::range_criterion_test(rho, tol);
  CHECK(report.kernel_basis.empty());
  check_feasible_report(rho, report);
}

TEST_CASE("range criterion respects the support budget") {
  const Tolerance tol;
  const RangeReport report = sepcert::range_criterion_test(circulant_d6_state(), tol, 4);
  CHECK(report.verdict == RangeReport::Verdict::BudgetExceeded);
  CHECK(report.supports_examined <= 4);
}

TEST_CASE("feasible_on_support fixed systems") {
  const Tolerance tol;

  const auto free = sepcert::feasible_on_support({}, {0}, 3, tol);
  REQUIRE(free.has_value());
  CHECK((*free)(0) == doctest::Approx(1.0));
  CHECK((*free)(1) == 0.0);
  CHECK((*free)(2) == 0.0);

  Eigen::VectorXd w(3);
  w << 1.0, -1.0, 0.0;
  const auto balanced = sepcert::feasible_on_support({w}, {0, 1}, 3, tol);
  REQUIRE(balanced.has_value());
  CHECK((*balanced)(0) == doctest::Approx(1.0));
  CHECK((*balanced)(1) == doctest::Approx(1.0));
  CHECK((*balanced)(2) == 0.0);

  // The circulant state's kernel system admits nothing on {0, 1, 2}.
  const RangeReport report =
      sepcert::range_criterion_test(circulant_d6_state(), Tolerance{});
  CHECK_FALSE(
      sepcert::feasible_on_support(report.kernel_basis, {0, 1, 2}, 6, tol).has_value());
}

TEST_CASE("rank-1 subtraction turns the full-rank d=5 example decidable") {
  const Tolerance tol;
  const DsState direct = state_from_matrix(full_rank_m5());

  // Full-rank associated matrix: no kernel equations, so the test cannot
  // conclude anything (a singleton support is trivially feasible).
  const RangeReport before = sepcert::range_criterion_test(direct, tol);
  CHECK(before.verdict == RangeReport::Verdict::FeasibleWitnessVector);
  CHECK(before.kernel_basis.empty());

  Eigen::VectorXd v1(5), v2(5);
  v1 << 1, 0, 0, 0, 1;
  v2 << 1, 0, 0, 0, 9;
  const DsState residual = sepcert::subtract_rank_one_terms(
      direct, {{3.0 / 16.0, v1}, {1.0 / 16.0, v2}});
  const RangeReport after = sepcert::range_criterion_test(residual, tol);
  CHECK(after.verdict == RangeReport::Verdict::Infeasible);
  CHECK(after.kernel_basis.size() == 2);
  CHECK_FALSE(grid_finds_feasible(after, 5, 12));
}

TEST_CASE("subtract_rank_one_terms validates its input") {
  const DsState rho = state_from_matrix(full_rank_m5());

  Eigen::VectorXd short_vec(3);
  short_vec << 1, 0, 0;
  CHECK_THROWS_AS(sepcert::subtract_rank_one_terms(rho, {{0.1, short_vec}}),
                  sepcert::DimensionMismatchError);

  Eigen::VectorXd v(5);
  v << 1, 0, 0, 0, 1;
  CHECK_THROWS_AS(sepcert::subtract_rank_one_terms(rho, {{-0.1, v}}),
                  sepcert::BadParamError);

  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(5);
  e0(0) = 1.0;
  CHECK_THROWS_AS(sepcert::subtract_rank_one_terms(rho, {{10.0, e0}}),
                  sepcert::NegativeWeightError);
}

TEST_CASE("range criterion never flags separable mixtures") {
  std::mt19937 rng(89u);
  const Tolerance tol;
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 5);
    const int terms = 1 + static_cast<int>(rng() % (d + 2));
    const DsState rho = test_helpers::random_ix_mixture(rng, d, terms);
    const RangeReport report = sepcert::range_criterion_test(rho, tol);
    CHECK(report.verdict != RangeReport::Verdict::Infeasible);
    if (report.verdict == RangeReport::Verdict::FeasibleWitnessVector) {
      check_feasible_report(rho, report);
    }
  }
}

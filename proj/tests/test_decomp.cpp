#include <doctest.h>

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "sepcert/decomp.hpp"
#include "sepcert/ds_state.hpp"
#include "sepcert/errors.hpp"

using sepcert::CpFactorization;
using sepcert::DsState;
using sepcert::SeparableDecomposition;
using sepcert::Tolerance;

namespace {

/// Dense reconstruction of a decomposition, for comparison against
/// full_density_matrix of the target.
Eigen::MatrixXcd dense_reconstruction(const SeparableDecomposition& dec, int d) {
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (const auto& term : dec.terms) {
    Eigen::VectorXcd prod(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) prod(i * d + j) = term.ket(i) * term.ket(j);
    sum += term.weight * (prod * prod.adjoint());
  }
  return sum;
}

}  // namespace

TEST_CASE("separable_from_cp on the balanced single column") {
  Eigen::MatrixXd b(2, 1);
  b << 0.5, 0.5;
  const SeparableDecomposition dec = sepcert::separable_from_cp(CpFactorization{b});
  CHECK(dec.terms.size() == 8);  // d * 2^d terms for one column

  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(4, 4);
  want(0, 0) = 0.25;
  want(3, 3) = 0.25;
  want(1, 1) = 0.25;
  want(1, 2) = 0.25;
  want(2, 1) = 0.25;
  want(2, 2) = 0.25;
  const Eigen::MatrixXcd got = dense_reconstruction(dec, 2);
  CHECK((got - want.cast<std::complex<double>>()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("separable_from_cp on the diagonal 3x3 factor") {
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(3, 3) / std::sqrt(3.0);
  const SeparableDecomposition dec = sepcert::separable_from_cp(CpFactorization{b});
  Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(9, 9);
  for (int i = 0; i < 3; ++i) want(i * 3 + i, i * 3 + i) = 1.0 / 3.0;
  CHECK((dense_reconstruction(dec, 3) - want).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("separable_from_cp reconstructs random factors") {
  std::mt19937 rng(37u);
  for (int trial = 0; trial < 10; ++trial) {
    const CpFactorization b = test_helpers::random_cp(rng, 5, 3);
    const DsState target = sepcert::from_m_matrix(sepcert::MMatrix(b.product()));
    const SeparableDecomposition dec = sepcert::separable_from_cp(b);
    const Eigen::MatrixXd dense = sepcert::full_density_matrix(target);
    const Eigen::MatrixXcd got = dense_reconstruction(dec, 5);
    CHECK((got - dense.cast<std::complex<double>>()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(sepcert::verify_decomposition(target, dec, Tolerance{}));
  }
}

TEST_CASE("separable_from_cp cancels every non-DS coherence") {
  std::mt19937 rng(41u);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 4);
    const CpFactorization b = test_helpers::random_cp(rng, d, 3);
    const Eigen::MatrixXcd got = dense_reconstruction(sepcert::separable_from_cp(b), d);
    for (int i1 = 0; i1 < d; ++i1) {
      for (int j1 = 0; j1 < d; ++j1) {
        for (int i2 = 0; i2 < d; ++i2) {
          for (int j2 = 0; j2 < d; ++j2) {
            const bool diag_pair = (i1 == j1 && i2 == j2);
            const bool swap_pair = (i1 == i2 && j1 == j2) || (i1 == j2 && j1 == i2);
            if (diag_pair || swap_pair) continue;
            CHECK(std::abs(got(i1 * d + j1, i2 * d + j2)) <= 1e-10);
          }
        }
      }
    }
  }
}

TEST_CASE("decomposition weights account for the full trace") {
  std::mt19937 rng(43u);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 4);
    const CpFactorization b = test_helpers::random_cp(rng, d, 3);
    const DsState target = sepcert::from_m_matrix(sepcert::MMatrix(b.product()));
    const SeparableDecomposition dec = sepcert::separable_from_cp(b);
    double mass = 0.0;
    for (const auto& term : dec.terms) {
      CHECK(term.weight > 0.0);
      mass += term.weight * std::pow(term.ket.squaredNorm(), 2);
    }
    CHECK(mass == doctest::Approx(target.weight_sum()).epsilon(1e-9));
  }
}

TEST_CASE("all_ones_state matches the printed d=3 density matrix") {
  const DsState state = sepcert::all_ones_state(3);
  Eigen::MatrixXd want = Eigen::MatrixXd::Identity(9, 9);
  want(1, 3) = 1.0;
  want(3, 1) = 1.0;
  want(2, 6) = 1.0;
  want(6, 2) = 1.0;
  want(5, 7) = 1.0;
  want(7, 5) = 1.0;
  CHECK((sepcert::full_density_matrix(state) - want).cwiseAbs().maxCoeff() <= 1e-15);

  const DsState d2 = sepcert::all_ones_state(2);
  const sepcert::MMatrix m2 = sepcert::m_matrix(d2);
  CHECK(m2(0, 0) == 1.0);
  CHECK(m2(0, 1) == 1.0);
  CHECK(m2(1, 1) == 1.0);

  for (int d = 2; d <= 7; ++d) {
    CHECK(sepcert::m_matrix(sepcert::all_ones_state(d)).entrywise_one_norm() ==
          doctest::Approx(static_cast<double>(d) * d).epsilon(1e-12));
  }
}

TEST_CASE("rank_one_state fixed values and scale invariance") {
  Eigen::VectorXd ones2(2);
  ones2 << 1.0, 1.0;
  const DsState balanced = sepcert::rank_one_state(ones2);
  CHECK(balanced.weight(0, 0) == doctest::Approx(0.25));
  CHECK(balanced.weight(1, 1) == doctest::Approx(0.25));
  CHECK(balanced.weight(0, 1) == doctest::Approx(0.5));

  Eigen::VectorXd ux(3);
  ux << 0.3746, 0.2516, 0.3738;
  const DsState weighted = sepcert::rank_one_state(ux);
  CHECK(sepcert::m_matrix(weighted).entrywise_one_norm() ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(weighted.weight(0, 0) == doctest::Approx(0.3746 * 0.3746).epsilon(1e-9));

  CHECK_THROWS_AS(sepcert::rank_one_state(Eigen::VectorXd::Zero(3)),
                  sepcert::AllZeroError);

  std::mt19937 rng(47u);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Tolerance tol;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 5);
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = unif(rng);
    x(static_cast<int>(rng() % d)) += 0.1;  // keep it nonzero
    const DsState a = sepcert::rank_one_state(x);
    const DsState b = sepcert::rank_one_state(3.7 * x);
    CHECK((sepcert::m_matrix(a).inner().mat() - sepcert::m_matrix(b).inner().mat())
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    CHECK(sepcert::is_extremal_separable_candidate(a, tol));
  }
}

TEST_CASE("product_ds_state fixed values") {
  const DsState basis = sepcert::product_ds_state(1.0, 0.0, 0.0);
  CHECK(basis.weight(0, 0) == 1.0);
  CHECK(basis.weight_sum() == doctest::Approx(1.0));

  const DsState two = sepcert::product_ds_state(1.0, 1.0, 0.0);
  CHECK(two.weight(0, 0) == 1.0);
  CHECK(two.weight(1, 1) == 1.0);
  CHECK(two.weight(0, 1) == 2.0);
  CHECK(two.weight(2, 2) == 0.0);

  const DsState all = sepcert::product_ds_state(1.0, 1.0, 1.0);
  const DsState want = sepcert::all_ones_state(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) CHECK(all.weight(i, j) == want.weight(i, j));

  // Phase invariance: only the moduli matter.
  const std::complex<double> im(0.0, 1.0);
  const DsState phased = sepcert::product_ds_state(im, -1.0, im * 0.5);
  const DsState plain = sepcert::product_ds_state(1.0, 1.0, 0.5);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      CHECK(phased.weight(i, j) == doctest::Approx(plain.weight(i, j)).epsilon(1e-12));
}

TEST_CASE("verify_decomposition accepts the construction and rejects junk") {
  const Tolerance tol;

  Eigen::MatrixXd b(3, 2);
  b << 0.4, 0.1, 0.3, 0.7, 0.2, 0.5;
  const CpFactorization factor{b};
  const DsState target = sepcert::from_m_matrix(sepcert::MMatrix(factor.product()));
  CHECK(sepcert::verify_decomposition(target, sepcert::separable_from_cp(factor), tol));

  CHECK_FALSE(sepcert::verify_decomposition(target, SeparableDecomposition{}, tol));

  // The all-ones state through its rank-1 factor.
  const DsState ones3 = sepcert::all_ones_state(3);
  Eigen::MatrixXd u(3, 1);
  u << 1.0, 1.0, 1.0;
  CHECK(sepcert::verify_decomposition(ones3, sepcert::separable_from_cp(CpFactorization{u}),
                                      tol));
}

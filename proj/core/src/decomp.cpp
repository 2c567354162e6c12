#include "sepcert/decomp.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sepcert {

SeparableDecomposition separable_from_cp(const CpFactorization& b) {
  const int d = b.dim();
  const int k = b.order();
  const double phase_unit = std::numbers::pi / static_cast<double>(d);
  const std::uint64_t sign_patterns = std::uint64_t{1} << d;
  const double weight = 1.0 / (static_cast<double>(d) * static_cast<double>(sign_patterns));

  SeparableDecomposition dec;
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd z(d);
    bool nonzero = false;
    for (int l = 0; l < d; ++l) {
      z(l) = std::sqrt(std::max(0.0, b.b(l, c)));
      if (z(l) != 0.0) nonzero = true;
    }
    if (!nonzero) continue;
    for (int j = 0; j < d; ++j) {
      for (std::uint64_t signs = 0; signs < sign_patterns; ++signs) {
        Eigen::VectorXcd ket(d);
        for (int l = 0; l < d; ++l) {
          const double sign = (signs >> l) & 1u ? -1.0 : 1.0;
          ket(l) = sign * std::polar(z(l), phase_unit * j * l);
        }
        dec.terms.push_back({weight, std::move(ket)});
      }
    }
  }
  return dec;
}

DsState all_ones_state(int d) {
  WeightMap p;
  for (int i = 0; i < d; ++i) {
    p[{i, i}] = 1.0;
    for (int j = i + 1; j < d; ++j) p[{i, j}] = 2.0;
  }
  return DsState::create(d, p, false);
}

DsState rank_one_state(const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  if (d < 2) throw BadParamError("rank_one_state needs dimension >= 2");
  double norm1 = 0.0;
  for (int i = 0; i < d; ++i) {
    if (x(i) < 0.0) throw NegativeWeightError("rank_one_state requires x >= 0 entrywise");
    norm1 += x(i);
  }
  if (norm1 == 0.0) throw AllZeroError("rank_one_state requires a nonzero vector");
  const Eigen::VectorXd u = x / norm1;
  WeightMap p;
  for (int i = 0; i < d; ++i) {
    if (u(i) == 0.0) continue;
    p[{i, i}] = u(i) * u(i);
    for (int j = i + 1; j < d; ++j) {
      if (u(j) != 0.0) p[{i, j}] = 2.0 * u(i) * u(j);
    }
  }
  return DsState::create(d, p, true);
}

DsState product_ds_state(std::complex<double> x, std::complex<double> y,
                         std::complex<double> z) {
  const double a = std::abs(x);
  const double b = std::abs(y);
  const double c = std::abs(z);
  const double a2 = a * a;
  const double b2 = b * b;
  const double c2 = c * c;
  WeightMap p;
  p[{0, 0}] = a2 * a2;
  p[{1, 1}] = b2 * b2;
  p[{2, 2}] = c2 * c2;
  p[{0, 1}] = 2.0 * a2 * b2;
  p[{0, 2}] = 2.0 * a2 * c2;
  p[{1, 2}] = 2.0 * b2 * c2;
  return DsState::create(3, p, false);
}

bool verify_decomposition(const DsState& rho, const SeparableDecomposition& dec,
                          const Tolerance& tol) {
  (void)tol;
  const int d = rho.dim();
  for (const SeparableDecomposition::Term& term : dec.terms) {
    if (term.ket.size() != d) {
      throw DimensionMismatchError("decomposition ket length does not match the state");
    }
  }
  Eigen::MatrixXcd reconstruction = Eigen::MatrixXcd::Zero(d * d, d * d);
  Eigen::VectorXcd product(d * d);
  for (const SeparableDecomposition::Term& term : dec.terms) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) product(i * d + j) = term.ket(i) * term.ket(j);
    }
    reconstruction.noalias() += term.weight * (product * product.adjoint());
  }
  const Eigen::MatrixXd target = full_density_matrix(rho);
  const double residual = (reconstruction - target.cast<std::complex<double>>()).norm();
  return residual <= 1e-8 * (1.0 + rho.weight_sum());
}

}  // namespace sepcert

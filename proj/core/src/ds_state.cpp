#include "sepcert/ds_state.hpp"

#include <algorithm>
#include <cmath>

namespace sepcert {

DsState DsState::create(int d, const WeightMap& p, bool normalized) {
  if (d < 2) {
    throw BadParamError("diagonal symmetric states need local dimension >= 2");
  }
  WeightMap canonical;
  double sum = 0.0;
  for (const auto& [key, w] : p) {
    const auto [i, j] = key;
    if (i < 0 || j < 0 || i >= d || j >= d || i > j) {
      throw BadIndexError("weight key (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") outside 0 <= i <= j < " + std::to_string(d));
    }
    if (w < 0.0) {
      throw NegativeWeightError("weight (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") is negative: " + std::to_string(w));
    }
    if (w != 0.0) canonical[{i, j}] = w;
    sum += w;
  }
  if (normalized && std::abs(sum - 1.0) > 1e-9) {
    throw BadNormalizationError("weights of a normalized state sum to " + std::to_string(sum));
  }
  return DsState(d, std::move(canonical), normalized);
}

double DsState::weight(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= d_) {
    throw BadIndexError("weight index (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") outside dimension " + std::to_string(d_));
  }
  const auto it = p_.find({i, j});
  return it == p_.end() ? 0.0 : it->second;
}

double DsState::weight_sum() const {
  double sum = 0.0;
  for (const auto& [key, w] : p_) sum += w;
  return sum;
}

MMatrix::MMatrix(const SymMatrix& inner) : inner_(inner) {
  Eigen::MatrixXd clamped = inner.mat();
  bool touched = false;
  for (int i = 0; i < clamped.rows(); ++i) {
    for (int j = 0; j < clamped.cols(); ++j) {
      const double v = clamped(i, j);
      if (v < 0.0) {
        if (v < -1e-12) {
          throw NegativeWeightError("matrix entry (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") is negative: " + std::to_string(v));
        }
        clamped(i, j) = 0.0;
        touched = true;
      }
    }
  }
  if (touched) inner_ = SymMatrix(clamped);
}

double MMatrix::entrywise_one_norm() const {
  return inner_.mat().cwiseAbs().sum();
}

std::vector<double> PtSpectrumReport::flattened() const {
  std::vector<double> all = m_eigenvalues;
  for (const Singleton& s : singleton_blocks) {
    for (int c = 0; c < s.multiplicity; ++c) all.push_back(s.value);
  }
  std::sort(all.begin(), all.end());
  return all;
}

MMatrix m_matrix(const DsState& rho) {
  const int d = rho.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [key, w] : rho.weights()) {
    const auto [i, j] = key;
    if (i == j) {
      m(i, i) = w;
    } else {
      m(i, j) = 0.5 * w;
      m(j, i) = 0.5 * w;
    }
  }
  return MMatrix(SymMatrix(m));
}

DsState from_m_matrix(const MMatrix& m) {
  const int d = m.dim();
  WeightMap p;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double w = (i == j) ? m(i, i) : 2.0 * m(i, j);
      if (w != 0.0) p[{i, j}] = w;
    }
  }
  const double sum = m.entrywise_one_norm();
  return DsState::create(d, p, std::abs(sum - 1.0) <= 1e-9);
}

Eigen::MatrixXd full_density_matrix(const DsState& rho) {
  const int d = rho.dim();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(d * d, d * d);
  for (const auto& [key, w] : rho.weights()) {
    const auto [i, j] = key;
    if (i == j) {
      full(i * d + i, i * d + i) += w;
    } else {
      const int ij = i * d + j;
      const int ji = j * d + i;
      full(ij, ij) += 0.5 * w;
      full(ij, ji) += 0.5 * w;
      full(ji, ij) += 0.5 * w;
      full(ji, ji) += 0.5 * w;
    }
  }
  return full;
}

PtSpectrumReport pt_spectrum(const DsState& rho, const Tolerance& tol) {
  (void)tol;
  PtSpectrumReport report;
  const EigResult eig = sym_eig(m_matrix(rho).inner());
  report.m_eigenvalues.assign(eig.eigenvalues.data(), eig.eigenvalues.data() + eig.eigenvalues.size());
  const int d = rho.dim();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      report.singleton_blocks.push_back({i, j, 0.5 * rho.weight(i, j), 2});
    }
  }
  return report;
}

bool is_ppt(const DsState& rho, const Tolerance& tol) {
  return is_psd(m_matrix(rho).inner(), tol);
}

bool is_extremal_separable_candidate(const DsState& rho, const Tolerance& tol) {
  (void)tol;
  const int d = rho.dim();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double target = 2.0 * std::sqrt(rho.weight(i, i) * rho.weight(j, j));
      if (std::abs(rho.weight(i, j) - target) > 1e-9) return false;
    }
  }
  return true;
}

}  // namespace sepcert

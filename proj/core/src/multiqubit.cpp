#include "sepcert/multiqubit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sepcert/errors.hpp"

namespace sepcert {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double result = 1.0;
  for (int i = 0; i < k; ++i) result = result * (n - i) / (i + 1);
  return result;
}

int checked_half_cut(const SymmetricNQubitState& state, int m_cut) {
  if (m_cut < 1 || m_cut > state.half()) {
    throw BadCutError("cut " + std::to_string(m_cut) + " outside 1.." +
                      std::to_string(state.half()));
  }
  return m_cut;
}

void check_state_shape(const SymmetricNQubitState& state) {
  const int n = state.n_qubits;
  if (n < 2) throw BadParamError("state needs at least 2 qubits");
  if (state.diag.size() != n + 1) {
    throw DimensionMismatchError("diag must have length n_qubits + 1");
  }
  if (!(state.normalization > 0.0)) {
    throw BadParamError("normalization must be positive");
  }
  const auto [a, b] = state.coherence_pos;
  if (a < 0 || a > n || b < 0 || b > n) {
    throw BadIndexError("coherence position outside the Dicke range");
  }
}

/// Square root of the product of split binomials for the Dicke embedding.
double split_amplitude(int m, int n_total, int i, int j) {
  return std::sqrt(binomial(m, i) * binomial(n_total - m, j));
}

int flat_index(int i, int j, int cols) { return i * cols + j; }

/// Dense bipartite embedding of the normalized Dicke projector |D^k><D^k|.
Eigen::MatrixXd embed_projector(int k, int m, int n_total) {
  const int rows = m + 1;
  const int cols = n_total - m + 1;
  const int dim = rows * cols;
  Eigen::VectorXd ket = Eigen::VectorXd::Zero(dim);
  const double norm = std::sqrt(binomial(n_total, k));
  for (int i = 0; i <= m; ++i) {
    const int j = k - i;
    if (j < 0 || j > n_total - m) continue;
    ket(flat_index(i, j, cols)) = split_amplitude(m, n_total, i, j) / norm;
  }
  return ket * ket.transpose();
}

/// Dense bipartite embedding of |D^a><D^b| + |D^b><D^a|.
Eigen::MatrixXd embed_coherence(int a, int b, int m, int n_total) {
  const int rows = m + 1;
  const int cols = n_total - m + 1;
  const int dim = rows * cols;
  Eigen::VectorXd ket_a = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd ket_b = Eigen::VectorXd::Zero(dim);
  const double norm_a = std::sqrt(binomial(n_total, a));
  const double norm_b = std::sqrt(binomial(n_total, b));
  for (int i = 0; i <= m; ++i) {
    const int ja = a - i;
    if (ja >= 0 && ja <= n_total - m) {
      ket_a(flat_index(i, ja, cols)) = split_amplitude(m, n_total, i, ja) / norm_a;
    }
    const int jb = b - i;
    if (jb >= 0 && jb <= n_total - m) {
      ket_b(flat_index(i, jb, cols)) = split_amplitude(m, n_total, i, jb) / norm_b;
    }
  }
  return ket_a * ket_b.transpose() + ket_b * ket_a.transpose();
}

/// Partial transpose over the first factor of a (rows*cols)-dim matrix.
Eigen::MatrixXd transpose_first_factor(const Eigen::MatrixXd& x, int rows, int cols) {
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      for (int k = 0; k < rows; ++k) {
        for (int l = 0; l < cols; ++l) {
          y(flat_index(i, j, cols), flat_index(k, l, cols)) =
              x(flat_index(k, j, cols), flat_index(i, l, cols));
        }
      }
    }
  }
  return y;
}

/// The state's matrix in the (N+1)-dimensional Dicke basis.
Eigen::MatrixXd dicke_matrix(const SymmetricNQubitState& state) {
  const int n = state.n_qubits;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) r(k, k) = state.diag(k) / state.normalization;
  const auto [a, b] = state.coherence_pos;
  if (a != b) {
    r(a, b) += state.sigma / state.normalization;
    r(b, a) += state.sigma / state.normalization;
  }
  return r;
}

bool coherence_is_extreme(const SymmetricNQubitState& state) {
  if (state.sigma == 0.0) return true;
  const int lo = std::min(state.coherence_pos.first, state.coherence_pos.second);
  const int hi = std::max(state.coherence_pos.first, state.coherence_pos.second);
  return lo == 0 && hi == state.n_qubits;
}

}  // namespace

double FSequence::at(long long p) const {
  if (p < 0) return at(-p - 1);
  if (p < static_cast<long long>(values.size())) return values[static_cast<std::size_t>(p)];
  const double ap = std::pow(alpha, static_cast<double>(p));
  const double bp = std::pow(beta, static_cast<double>(p));
  return ((alpha - 1.0) * ap - (beta - 1.0) * bp) / (alpha - beta);
}

FSequence f_sequence(double z_param, int count) {
  if (!(z_param > 0.0)) throw BadParamError("f_sequence requires z > 0");
  if (count < 2) throw BadParamError("f_sequence requires count >= 2");
  FSequence f;
  f.z_param = z_param;
  const double root = std::sqrt(z_param * (4.0 + z_param));
  f.alpha = (2.0 + z_param + root) / 2.0;
  f.beta = (2.0 + z_param - root) / 2.0;
  f.values.resize(static_cast<std::size_t>(count));
  f.values[0] = 1.0;
  f.values[1] = 1.0 + z_param;
  for (int k = 2; k < count; ++k) {
    f.values[static_cast<std::size_t>(k)] =
        (2.0 + z_param) * f.values[static_cast<std::size_t>(k - 1)] -
        f.values[static_cast<std::size_t>(k - 2)];
  }
  return f;
}

SymmetricNQubitState family_rho(int n_qubits, double z_param, double sigma) {
  if (n_qubits % 2 == 0) throw BadParamError("the family needs an odd qubit count");
  const int k_half = (n_qubits - 1) / 2;
  if (k_half <= 1) throw BadParamError("the family needs n_qubits >= 5");
  if (!(z_param > 0.0)) throw BadParamError("the family needs z > 0");
  if (sigma != 1.0 && sigma != -1.0) throw BadParamError("sigma must be +1 or -1");

  const FSequence f = f_sequence(z_param, k_half + 2);
  SymmetricNQubitState state;
  state.n_qubits = n_qubits;
  state.diag = Eigen::VectorXd::Zero(n_qubits + 1);
  for (int k = 0; k <= n_qubits; ++k) {
    state.diag(k) = binomial(n_qubits, k) * f.at(k_half - k);
  }
  state.sigma = sigma;
  state.coherence_pos = {0, n_qubits};
  state.normalization = 2.0 * std::pow(4.0 + z_param, k_half);
  return state;
}

PtBlockDecomposition pt_blocks(const SymmetricNQubitState& state, int m_cut) {
  check_state_shape(state);
  const int m = checked_half_cut(state, m_cut);
  if (!coherence_is_extreme(state)) {
    throw BadParamError(
        "nonzero coherence away from the extreme Dicke levels breaks the "
        "grading; use the dense routines");
  }
  const int n_total = state.n_qubits;
  const double norm = state.normalization;

  const auto lambda = [&](int s) { return state.diag(s) / (binomial(n_total, s) * norm); };

  PtBlockDecomposition out;
  out.m_cut = m;
  out.coherence_block << lambda(m), state.sigma / norm, state.sigma / norm, lambda(n_total - m);

  for (int n = -m + 1; n <= n_total - m - 1; ++n) {
    PtBlock block;
    block.n = n;
    block.i_min = std::max(0, -n);
    const int i_max = std::min(m, n_total - m - n);
    const int size = i_max - block.i_min + 1;
    block.d_entries = Eigen::VectorXd::Zero(size);
    block.hankel = Eigen::MatrixXd::Zero(size, size);
    for (int a = 0; a < size; ++a) {
      const int i = block.i_min + a;
      block.d_entries(a) = split_amplitude(m, n_total, i, i + n);
      for (int b = 0; b < size; ++b) {
        const int i2 = block.i_min + b;
        block.hankel(a, b) = lambda(i + i2 + n);
      }
    }
    block.a = block.d_entries.asDiagonal() * block.hankel * block.d_entries.asDiagonal();
    out.blocks.push_back(std::move(block));
  }
  return out;
}

std::vector<double> PtBlockDecomposition::spectrum() const {
  std::vector<double> eigs;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(coherence_block);
    eigs.push_back(solver.eigenvalues()(0));
    eigs.push_back(solver.eigenvalues()(1));
  }
  for (const PtBlock& block : blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block.a);
    for (int i = 0; i < solver.eigenvalues().size(); ++i) {
      eigs.push_back(solver.eigenvalues()(i));
    }
  }
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

BlockCholesky block_cholesky(const FSequence& f, int n, int m_cut, int n_qubits) {
  if (n_qubits % 2 == 0 || n_qubits < 5) {
    throw BadParamError("block_cholesky expects an odd qubit count >= 5");
  }
  if (m_cut < 1 || m_cut > n_qubits / 2) {
    throw BadCutError("cut " + std::to_string(m_cut) + " outside 1.." +
                      std::to_string(n_qubits / 2));
  }
  if (n < -m_cut + 1 || n > n_qubits - m_cut - 1) {
    throw BadParamError("block index " + std::to_string(n) + " outside the interior range");
  }
  const int k_half = (n_qubits - 1) / 2;
  const int i_min = std::max(0, -n);
  const int i_max = std::min(m_cut, n_qubits - m_cut - n);
  const int size = i_max - i_min + 1;
  const long long p = std::abs(n) - k_half - 1;

  BlockCholesky out;
  out.core = Eigen::MatrixXd::Zero(size, size);
  for (int a = 0; a < size; ++a) {
    for (int b = 0; b < size; ++b) out.core(a, b) = f.at(p + a + b);
  }

  const auto iab = [&](long long q, int a, int b) {
    return f.at(q) * f.at(q + a + b) - f.at(q + a) * f.at(q + b);
  };

  const double fp = f.at(p);
  out.l = Eigen::MatrixXd::Zero(size, 2);
  for (int a = 0; a < size; ++a) {
    out.l(a, 0) = f.at(p + a) / std::sqrt(fp);
    out.l(a, 1) = std::sqrt(std::max(0.0, iab(p, a, a))) / std::sqrt(fp);
  }

  for (int a = 0; a < size; ++a) {
    for (int b = 0; b < size; ++b) {
      const double direct = iab(p, a, b);
      const double product =
          std::sqrt(std::max(0.0, iab(p, a, a)) * std::max(0.0, iab(p, b, b)));
      out.iab_product_residual =
          std::max(out.iab_product_residual, std::abs(direct - product));
      out.iab_shift_residual =
          std::max(out.iab_shift_residual, std::abs(direct - iab(p + 1, a, b)));
    }
  }
  out.reconstruction_residual =
      (out.l * out.l.transpose() - out.core).norm() / (1.0 + out.core.norm());
  return out;
}

Eigen::MatrixXd dense_bipartite_matrix(const SymmetricNQubitState& state, int m_cut) {
  check_state_shape(state);
  const int m = checked_half_cut(state, m_cut);
  const int n_total = state.n_qubits;
  const int dim = (m + 1) * (n_total - m + 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k <= n_total; ++k) {
    if (state.diag(k) != 0.0) {
      x += (state.diag(k) / state.normalization) * embed_projector(k, m, n_total);
    }
  }
  const auto [a, b] = state.coherence_pos;
  if (state.sigma != 0.0 && a != b) {
    x += (state.sigma / state.normalization) * embed_coherence(a, b, m, n_total);
  }
  return x;
}

Eigen::MatrixXd dense_partial_transpose(const SymmetricNQubitState& state, int m_cut) {
  const int m = checked_half_cut(state, m_cut);
  const Eigen::MatrixXd x = dense_bipartite_matrix(state, m);
  return transpose_first_factor(x, m + 1, state.n_qubits - m + 1);
}

bool is_ppt_all_bipartitions(const SymmetricNQubitState& state, const Tolerance& tol) {
  check_state_shape(state);
  for (int m = 1; m <= state.half(); ++m) {
    double min_eig = 0.0;
    double scale = 0.0;
    if (coherence_is_extreme(state)) {
      const std::vector<double> spec = pt_blocks(state, m).spectrum();
      for (double value : spec) {
        min_eig = std::min(min_eig, value);
        scale = std::max(scale, std::abs(value));
      }
    } else {
      const Eigen::MatrixXd pt = dense_partial_transpose(state, m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(pt);
      min_eig = solver.eigenvalues().minCoeff();
      scale = solver.eigenvalues().cwiseAbs().maxCoeff();
    }
    if (min_eig < -(tol.abs_eig + tol.rel_scale * scale)) return false;
  }
  return true;
}

std::vector<int> ranks_profile(const SymmetricNQubitState& state, const Tolerance& tol) {
  check_state_shape(state);
  std::vector<int> ranks;
  ranks.push_back(numerical_rank(SymMatrix(dicke_matrix(state)), tol));
  for (int m = 1; m <= state.half(); ++m) {
    ranks.push_back(numerical_rank(SymMatrix(dense_partial_transpose(state, m)), tol));
  }
  return ranks;
}

int extremality_dimension(const SymmetricNQubitState& state, const Tolerance& tol) {
  check_state_shape(state);
  const int n_total = state.n_qubits;
  const auto [pos_a, pos_b] = state.coherence_pos;
  const int n_params = n_total + 2;

  // Constraint rows: for every cut m (m = 0 is the state itself) and every
  // kernel vector w of the transposed state, each candidate generator E_t
  // must satisfy E_t^{PT} w = 0.
  std::vector<Eigen::MatrixXd> rows;
  long long total_rows = 0;

  for (int m = 0; m <= state.half(); ++m) {
    Eigen::MatrixXd rho_pt;
    std::vector<Eigen::MatrixXd> generators;
    if (m == 0) {
      rho_pt = dicke_matrix(state);
      for (int k = 0; k <= n_total; ++k) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n_total + 1, n_total + 1);
        e(k, k) = 1.0;
        generators.push_back(e);
      }
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n_total + 1, n_total + 1);
      if (pos_a != pos_b) {
        e(pos_a, pos_b) = 1.0;
        e(pos_b, pos_a) = 1.0;
      }
      generators.push_back(e);
    } else {
      rho_pt = dense_partial_transpose(state, m);
      const int rows_dim = m + 1;
      const int cols_dim = n_total - m + 1;
      for (int k = 0; k <= n_total; ++k) {
        generators.push_back(
            transpose_first_factor(embed_projector(k, m, n_total), rows_dim, cols_dim));
      }
      if (pos_a != pos_b) {
        generators.push_back(transpose_first_factor(
            embed_coherence(pos_a, pos_b, m, n_total), rows_dim, cols_dim));
      } else {
        generators.push_back(Eigen::MatrixXd::Zero(rho_pt.rows(), rho_pt.cols()));
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(rho_pt);
    const double scale = solver.eigenvalues().cwiseAbs().maxCoeff();
    for (int idx = 0; idx < solver.eigenvalues().size(); ++idx) {
      if (std::abs(solver.eigenvalues()(idx)) <= tol.rank_cut * scale) {
        const Eigen::VectorXd w = solver.eigenvectors().col(idx);
        Eigen::MatrixXd block(rho_pt.rows(), n_params);
        for (int t = 0; t < n_params; ++t) block.col(t) = generators[t] * w;
        rows.push_back(std::move(block));
        total_rows += rho_pt.rows();
      }
    }
  }

  if (total_rows == 0) return n_params;
  Eigen::MatrixXd stacked(total_rows, n_params);
  long long offset = 0;
  for (const Eigen::MatrixXd& block : rows) {
    stacked.middleRows(offset, block.rows()) = block;
    offset += block.rows();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const Eigen::VectorXd singular = svd.singularValues();
  const double cut = singular.size() > 0 ? tol.rank_cut * singular(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < singular.size(); ++i) {
    if (singular(i) > cut) ++rank;
  }
  return n_params - rank;
}

SymmetricNQubitState example_4qubit() {
  SymmetricNQubitState state;
  state.n_qubits = 4;
  state.diag = Eigen::VectorXd(5);
  state.diag << 7.0, 12.0, 12.0, 12.0, 7.0;
  state.sigma = -2.0 * std::sqrt(15.0 / 7.0);
  state.coherence_pos = {1, 4};
  state.normalization = 50.0;
  return state;
}

}  // namespace sepcert

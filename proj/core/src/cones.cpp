#include "sepcert/cones.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace sepcert {

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::string(buf);
}

/// Deterministic Nelder-Mead minimization with standard coefficients.
struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
};

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, double spread, int max_iters) {
  const int d = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  pts.push_back(start);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd p = start;
    p(i) += spread;
    pts.push_back(p);
  }
  for (const Eigen::VectorXd& p : pts) vals.push_back(objective(p));

  const double alpha = 1.0;
  const double gamma = 2.0;
  const double rho = 0.5;
  const double sigma = 0.5;

  for (int iter = 0; iter < max_iters; ++iter) {
    std::vector<int> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> sorted_pts;
    std::vector<double> sorted_vals;
    for (int idx : order) {
      sorted_pts.push_back(pts[idx]);
      sorted_vals.push_back(vals[idx]);
    }
    pts = std::move(sorted_pts);
    vals = std::move(sorted_vals);

    if (std::abs(vals.back() - vals.front()) < 1e-12) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= static_cast<double>(pts.size() - 1);

    const Eigen::VectorXd reflected = centroid + alpha * (centroid - pts.back());
    const double reflected_val = objective(reflected);
    if (reflected_val < vals.front()) {
      const Eigen::VectorXd expanded = centroid + gamma * (centroid - pts.back());
      const double expanded_val = objective(expanded);
      if (expanded_val < reflected_val) {
        pts.back() = expanded;
        vals.back() = expanded_val;
      } else {
        pts.back() = reflected;
        vals.back() = reflected_val;
      }
    } else if (reflected_val < vals[vals.size() - 2]) {
      pts.back() = reflected;
      vals.back() = reflected_val;
    } else {
      const Eigen::VectorXd contracted = centroid + rho * (pts.back() - centroid);
      const double contracted_val = objective(contracted);
      if (contracted_val < vals.back()) {
        pts.back() = contracted;
        vals.back() = contracted_val;
      } else {
        for (std::size_t i = 1; i < pts.size(); ++i) {
          pts[i] = pts[0] + sigma * (pts[i] - pts[0]);
          vals[i] = objective(pts[i]);
        }
      }
    }
  }

  NelderMeadResult best;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (vals[i] < best.value) {
      best.value = vals[i];
      best.x = pts[i];
    }
  }
  return best;
}

Eigen::MatrixXd clamp_nonnegative(Eigen::MatrixXd b, double hard_floor) {
  for (int i = 0; i < b.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      if (b(i, j) < 0.0) {
        if (b(i, j) < hard_floor) {
          throw NotDnnError("factorization produced an entry below the clamp floor: " +
                            fmt_num(b(i, j)));
        }
        b(i, j) = 0.0;
      }
    }
  }
  return b;
}

/// Shared bound data for the uniform-mix evaluation.
struct UniformMixBounds {
  bool ones_in_range = false;
  double cond1 = 0.0;
  double cond2 = 0.0;
  double cond3 = 0.0;
};

UniformMixBounds uniform_mix_bounds(const MMatrix& m, const Tolerance& tol) {
  const int d = m.dim();
  UniformMixBounds out;
  out.cond1 = m.inner().mat().minCoeff();
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  out.ones_in_range = in_range(m.inner(), u, tol);
  if (out.ones_in_range) {
    const SymMatrix pinv = pseudo_inverse(m.inner(), tol);
    const double quad = u.dot(pinv.mat() * u);
    out.cond2 = quad > 0.0 ? 1.0 / (quad * d) : std::numeric_limits<double>::infinity();
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    double off = 0.0;
    for (int j = 0; j < d; ++j) {
      if (j != i) off += m(j, i);
    }
    worst = std::max(worst, off - m(i, i));
  }
  out.cond3 = d > 2 ? worst / (d - 2) : std::numeric_limits<double>::infinity();
  return out;
}

/// Shared bound data for the weighted-mix evaluation with precomputed
/// pseudo-inverse data (the search calls this in a loop).
struct WeightedMixContext {
  Eigen::MatrixXd m;
  Eigen::MatrixXd pinv;
  Eigen::MatrixXd range_projector;
  int d = 0;
};

WeightedMixContext weighted_mix_context(const MMatrix& m, const Tolerance& tol) {
  WeightedMixContext ctx;
  ctx.m = m.inner().mat();
  ctx.pinv = pseudo_inverse(m.inner(), tol).mat();
  ctx.range_projector = ctx.m * ctx.pinv;
  ctx.d = m.dim();
  return ctx;
}

WeightedMixCertificate evaluate_weighted_mix(const WeightedMixContext& ctx,
                                             const Eigen::VectorXd& x) {
  const int d = ctx.d;
  WeightedMixCertificate cert;
  cert.x = x;
  const double s = x.sum();
  const double s2 = s * s;

  double cond1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      cond1 = std::min(cond1, ctx.m(i, j) * s2 / (x(i) * x(j)));
    }
  }
  cert.cond1_upper = cond1;

  const Eigen::VectorXd u = x / s;
  const Eigen::VectorXd range_residual = u - ctx.range_projector * u;
  if (range_residual.norm() > 1e-8 * u.norm()) {
    cert.status = WeightedMixCertificate::Status::WeightNotInRange;
    return cert;
  }
  const double quad = u.dot(ctx.pinv * u);
  cert.cond2_upper = quad > 0.0 ? 1.0 / quad : std::numeric_limits<double>::infinity();

  double lower_raw = 0.0;
  double upper3 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    const double coeff = x(i) * (s - 2.0 * x(i));
    double off = 0.0;
    for (int j = 0; j < d; ++j) {
      if (j != i) off += ctx.m(i, j);
    }
    const double rhs = s2 * (off - ctx.m(i, i));
    if (coeff > 0.0) {
      lower_raw = std::max(lower_raw, rhs / coeff);
    } else if (coeff < 0.0) {
      upper3 = std::min(upper3, rhs / coeff);
    } else if (rhs > 0.0) {
      lower_raw = std::numeric_limits<double>::infinity();
    }
  }
  cert.cond3_lower = lower_raw;
  cert.cond3_upper = upper3;

  cert.lower = std::max(0.0, lower_raw);
  cert.upper = std::min({cert.cond1_upper, cert.cond2_upper, upper3});
  // lambda = 0 is admissible (the state itself diagonally dominant), so a
  // degenerate interval [0, 0] still counts as feasible; a strictly negative
  // upper bound cannot.
  const double capped_upper = std::min(cert.upper, 1.0 - 1e-12);
  if (cert.lower <= capped_upper) {
    cert.status = WeightedMixCertificate::Status::Feasible;
    cert.lambda = 0.5 * (cert.lower + capped_upper);
  } else {
    cert.status = WeightedMixCertificate::Status::Infeasible;
  }
  return cert;
}

/// Lexicographic enumeration of k-subsets of {0..d-1}.
bool next_combination(std::vector<int>& c, int d) {
  const int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[i] < d - k + i) {
      ++c[i];
      for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double result = 1.0;
  for (int i = 0; i < k; ++i) result = result * (n - i) / (i + 1);
  return result;
}

}  // namespace

Witness horn_matrix() {
  Eigen::MatrixXd h(5, 5);
  h << 1, -1, 1, 1, -1,  //
      -1, 1, -1, 1, 1,   //
      1, -1, 1, -1, 1,   //
      1, 1, -1, 1, -1,   //
      -1, 1, 1, -1, 1;
  return Witness{SymMatrix(h), Witness::Provenance::Horn, {0, 1, 2, 3, 4}};
}

Witness lift_witness(const Witness& w, int d, const std::vector<int>& subset) {
  const int k = w.w.dim();
  if (static_cast<int>(subset.size()) != k) {
    throw BadSubsetError("subset size " + std::to_string(subset.size()) +
                         " does not match witness dimension " + std::to_string(k));
  }
  if (k > d) {
    throw BadSubsetError("witness dimension exceeds target dimension");
  }
  std::set<int> seen;
  for (int idx : subset) {
    if (idx < 0 || idx >= d) {
      throw BadSubsetError("subset index " + std::to_string(idx) + " outside dimension " +
                           std::to_string(d));
    }
    if (!seen.insert(idx).second) {
      throw BadSubsetError("subset index " + std::to_string(idx) + " repeated");
    }
  }
  Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(d, d);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) lifted(subset[a], subset[b]) = w.w(a, b);
  }
  const bool horn_family = w.provenance == Witness::Provenance::Horn ||
                           w.provenance == Witness::Provenance::LiftedHorn;
  return Witness{SymMatrix(lifted),
                 horn_family ? Witness::Provenance::LiftedHorn
                             : Witness::Provenance::UserSupplied,
                 subset};
}

double witness_value(const Witness& w, const MMatrix& m) {
  if (w.w.dim() != m.dim()) {
    throw DimensionMismatchError("witness dimension " + std::to_string(w.w.dim()) +
                                 " does not match matrix dimension " + std::to_string(m.dim()));
  }
  return (w.w.mat().array() * m.inner().mat().array()).sum();
}

bool is_dnn(const MMatrix& m, const Tolerance& tol) { return is_psd(m.inner(), tol); }

bool is_diag_dominant(const MMatrix& m) {
  const int d = m.dim();
  for (int i = 0; i < d; ++i) {
    double off = 0.0;
    for (int j = 0; j < d; ++j) {
      if (j != i) off += m(i, j);
    }
    if (m(i, i) < off) return false;
  }
  return true;
}

CpFactorization cp_diag_dominant(const MMatrix& m) {
  const int d = m.dim();
  std::vector<Eigen::VectorXd> columns;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (m(i, j) > 0.0) {
        Eigen::VectorXd col = Eigen::VectorXd::Zero(d);
        const double root = std::sqrt(m(i, j));
        col(i) = root;
        col(j) = root;
        columns.push_back(col);
      }
    }
  }
  for (int i = 0; i < d; ++i) {
    double off = 0.0;
    for (int j = 0; j < d; ++j) {
      if (j != i) off += m(i, j);
    }
    double slack = m(i, i) - off;
    if (slack < 0.0) {
      if (slack < -1e-12) {
        throw BadParamError("matrix is not diagonally dominant: row " + std::to_string(i) +
                            " slack " + fmt_num(slack));
      }
      slack = 0.0;
    }
    if (slack > 0.0) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(d);
      col(i) = std::sqrt(slack);
      columns.push_back(col);
    }
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, std::max<std::size_t>(columns.size(), 1));
  for (std::size_t c = 0; c < columns.size(); ++c) b.col(static_cast<int>(c)) = columns[c];
  return CpFactorization{b};
}

CpFactorization cp_rank2_embed(const MMatrix& m, const Tolerance& tol) {
  const int d = m.dim();
  const EigResult eig = sym_eig(m.inner());
  const double sigma_max = eig.eigenvalues.cwiseAbs().maxCoeff();
  const double psd_floor = -(tol.abs_eig + tol.rel_scale * sigma_max);
  if (eig.eigenvalues(0) < psd_floor) {
    throw NotDnnError("matrix is not positive semidefinite: min eigenvalue " +
                      fmt_num(eig.eigenvalues(0)));
  }
  if (numerical_rank(m.inner(), tol) > 2) {
    throw RankTooHighError("numerical rank exceeds 2");
  }
  if (sigma_max == 0.0) {
    return CpFactorization{Eigen::MatrixXd::Zero(d, 1)};
  }

  const double cut = tol.rank_cut * sigma_max;
  std::vector<int> kept;
  for (int i = d - 1; i >= 0 && static_cast<int>(kept.size()) < 2; --i) {
    if (eig.eigenvalues(i) > cut) kept.push_back(i);
  }

  if (kept.size() == 1) {
    Eigen::VectorXd v = std::sqrt(eig.eigenvalues(kept[0])) * eig.eigenvectors.col(kept[0]);
    // A rank-1 doubly nonnegative matrix is an outer product of a vector
    // with entries of a single sign.
    if (v.sum() < 0.0) v = -v;
    Eigen::MatrixXd b = clamp_nonnegative(v, -(tol.abs_eig + std::sqrt(sigma_max) * 1e-9));
    return CpFactorization{b};
  }

  Eigen::MatrixXd v(d, 2);
  v.col(0) = std::sqrt(eig.eigenvalues(kept[0])) * eig.eigenvectors.col(kept[0]);
  v.col(1) = std::sqrt(eig.eigenvalues(kept[1])) * eig.eigenvectors.col(kept[1]);

  // Rows are planar vectors with pairwise nonnegative scalar products, so
  // their directions fit in a closed arc of width pi/2; rotating the arc
  // start onto the first axis puts every row in the positive quadrant.
  const double row_floor = 1e-10 * std::sqrt(sigma_max);
  std::vector<double> angles;
  for (int i = 0; i < d; ++i) {
    if (v.row(i).norm() > row_floor) {
      double a = std::atan2(v(i, 1), v(i, 0));
      if (a < 0.0) a += 2.0 * std::numbers::pi;
      angles.push_back(a);
    }
  }
  double theta = 0.0;
  if (!angles.empty()) {
    std::sort(angles.begin(), angles.end());
    const int count = static_cast<int>(angles.size());
    double widest_gap = 2.0 * std::numbers::pi - angles.back() + angles.front();
    theta = angles.front();
    for (int i = 1; i < count; ++i) {
      const double gap = angles[i] - angles[i - 1];
      if (gap > widest_gap) {
        widest_gap = gap;
        theta = angles[i];
      }
    }
    const double arc = 2.0 * std::numbers::pi - widest_gap;
    if (arc > 0.5 * std::numbers::pi + 1e-6) {
      throw NotDnnError("planar rows span an arc wider than pi/2: " + fmt_num(arc));
    }
  }
  Eigen::Matrix2d rotation;
  rotation << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  Eigen::MatrixXd b = v * rotation.transpose();
  b = clamp_nonnegative(std::move(b), -(tol.abs_eig + std::sqrt(sigma_max) * 1e-6));
  return CpFactorization{b};
}

CpFactorization cp_d3_decompose(const MMatrix& m, const Tolerance& tol) {
  if (m.dim() != 3) {
    throw BadParamError("cp_d3_decompose requires a 3x3 matrix");
  }
  if (!is_dnn(m, tol)) {
    throw NotDnnError("matrix is not doubly nonnegative");
  }
  if (numerical_rank(m.inner(), tol) <= 2) {
    return cp_rank2_embed(m, tol);
  }

  const Eigen::MatrixXd& a_full = m.inner().mat();
  const double scale = a_full.cwiseAbs().maxCoeff();
  static constexpr std::array<std::array<int, 3>, 6> permutations{{
      {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
  }};

  for (const std::array<int, 3>& perm : permutations) {
    Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) p(perm[i], i) = 1.0;
    const Eigen::Matrix3d ap = p.transpose() * a_full * p;

    const double a = ap(0, 0);
    const double b = ap(0, 1);
    const double c = ap(0, 2);
    const double dd = ap(1, 1);
    const double e = ap(1, 2);
    const double m2 = a * dd - b * b;
    const double m2p = a * e - b * c;
    if (a <= 0.0 || m2 <= 0.0) continue;
    if (m2p < -1e-12 * scale * scale) continue;

    const double det = ap.determinant();
    Eigen::Matrix3d cols = Eigen::Matrix3d::Zero();
    cols.col(0) = Eigen::Vector3d(a, b, c) / std::sqrt(a);
    cols(1, 1) = std::sqrt(m2 / a);
    cols(2, 1) = std::max(0.0, m2p) / std::sqrt(a * m2);
    cols(2, 2) = std::sqrt(std::max(0.0, det / m2));

    Eigen::MatrixXd factor = p * cols;
    const double residual = (factor * factor.transpose() - a_full).norm();
    if (residual <= 1e-8 * (1.0 + a_full.norm())) {
      return CpFactorization{clamp_nonnegative(std::move(factor), -1e-12 * (1.0 + scale))};
    }
  }
  throw NotDnnError("no permutation yields a nonnegative factorization within tolerance");
}

UniformMixCertificate uniform_mix_certificate(const DsState& rho, const Tolerance& tol) {
  UniformMixCertificate cert;
  const int d = rho.dim();
  if (d < 3) {
    cert.status = UniformMixCertificate::Status::DimensionTooSmall;
    return cert;
  }
  const MMatrix m = m_matrix(rho);
  const UniformMixBounds bounds = uniform_mix_bounds(m, tol);
  cert.cond1_upper = bounds.cond1;
  cert.cond2_upper = bounds.cond2;
  cert.cond3_lower = bounds.cond3;
  if (!bounds.ones_in_range) {
    cert.status = UniformMixCertificate::Status::OnesNotInRange;
    cert.lower = std::max(0.0, bounds.cond3);
    cert.upper = bounds.cond1;
    return cert;
  }
  cert.lower = std::max(0.0, bounds.cond3);
  cert.upper = std::min(bounds.cond1, bounds.cond2);
  if (cert.lower <= cert.upper) {
    cert.status = UniformMixCertificate::Status::Feasible;
    cert.epsilon = 0.5 * (cert.lower + cert.upper);
  } else {
    cert.status = UniformMixCertificate::Status::Infeasible;
  }
  return cert;
}

double uniform_mix_slack(const DsState& rho, double epsilon, const Tolerance& tol) {
  const int d = rho.dim();
  if (d < 3) return -std::numeric_limits<double>::infinity();
  const MMatrix m = m_matrix(rho);
  const UniformMixBounds bounds = uniform_mix_bounds(m, tol);
  if (!bounds.ones_in_range && epsilon > 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  double slack = bounds.cond1 - epsilon;
  if (bounds.ones_in_range) slack = std::min(slack, bounds.cond2 - epsilon);
  slack = std::min(slack, (epsilon - bounds.cond3) * (d - 2));
  return slack;
}

CpFactorization cp_from_uniform_mix(const DsState& rho, const UniformMixCertificate& cert) {
  if (cert.status != UniformMixCertificate::Status::Feasible) {
    throw BadParamError("cp_from_uniform_mix needs a feasible certificate");
  }
  const int d = rho.dim();
  const Eigen::MatrixXd shifted =
      m_matrix(rho).inner().mat() - cert.epsilon * Eigen::MatrixXd::Ones(d, d);
  const CpFactorization dominant = cp_diag_dominant(MMatrix(SymMatrix(shifted)));
  Eigen::MatrixXd b(d, dominant.order() + 1);
  b.leftCols(dominant.order()) = dominant.b;
  b.col(dominant.order()) =
      std::sqrt(cert.epsilon) * Eigen::VectorXd::Ones(d);
  return CpFactorization{b};
}

WeightedMixCertificate weighted_mix_certificate(const DsState& rho, const Eigen::VectorXd& x,
                                                const Tolerance& tol) {
  if (x.size() != rho.dim()) {
    throw DimensionMismatchError("weight vector length does not match the state dimension");
  }
  for (int i = 0; i < x.size(); ++i) {
    if (!(x(i) > 0.0)) {
      throw BadParamError("weighted_mix_certificate requires strictly positive x");
    }
  }
  const WeightedMixContext ctx = weighted_mix_context(m_matrix(rho), tol);
  return evaluate_weighted_mix(ctx, x);
}

double weighted_mix_slack(const DsState& rho, const Eigen::VectorXd& x, double lambda,
                          const Tolerance& tol) {
  const WeightedMixContext ctx = weighted_mix_context(m_matrix(rho), tol);
  const WeightedMixCertificate cert = evaluate_weighted_mix(ctx, x);
  if (cert.status == WeightedMixCertificate::Status::WeightNotInRange && lambda > 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  double slack = cert.cond1_upper - lambda;
  slack = std::min(slack, cert.cond2_upper - lambda);
  // Condition 3 in lambda scale: lower bounds want lambda above them,
  // sign-flipped rows want lambda below them.
  slack = std::min(slack, lambda - cert.cond3_lower);
  slack = std::min(slack, cert.cond3_upper - lambda);
  return slack;
}

CpFactorization cp_from_weighted_mix(const DsState& rho, const WeightedMixCertificate& cert) {
  if (cert.status != WeightedMixCertificate::Status::Feasible) {
    throw BadParamError("cp_from_weighted_mix needs a feasible certificate");
  }
  const int d = rho.dim();
  const double s = cert.x.sum();
  const Eigen::VectorXd u = cert.x / s;
  const double lambda = cert.lambda;
  const Eigen::MatrixXd residual =
      (m_matrix(rho).inner().mat() - lambda * (u * u.transpose())) / (1.0 - lambda);
  const CpFactorization dominant = cp_diag_dominant(MMatrix(SymMatrix(residual)));
  Eigen::MatrixXd b(d, dominant.order() + 1);
  b.leftCols(dominant.order()) = std::sqrt(1.0 - lambda) * dominant.b;
  b.col(dominant.order()) = std::sqrt(lambda) * u;
  return CpFactorization{b};
}

std::optional<WeightedMixCertificate> search_weighted_mix(const DsState& rho, int restarts,
                                                          const Tolerance& tol, unsigned seed) {
  if (restarts < 1) throw BadParamError("search_weighted_mix requires restarts >= 1");
  const int d = rho.dim();
  const WeightedMixContext ctx = weighted_mix_context(m_matrix(rho), tol);

  const auto normalize = [d](const Eigen::VectorXd& raw) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = std::max(raw(i), 1e-6);
    return Eigen::VectorXd(x / x.sum());
  };
  const auto margin = [&](const Eigen::VectorXd& raw) {
    const WeightedMixCertificate cert = evaluate_weighted_mix(ctx, normalize(raw));
    if (cert.status == WeightedMixCertificate::Status::WeightNotInRange) return -1e6;
    return std::min(cert.upper, 1.0 - 1e-12) - cert.lower;
  };
  const auto feasible_at = [&](const Eigen::VectorXd& raw) -> std::optional<WeightedMixCertificate> {
    const WeightedMixCertificate cert = evaluate_weighted_mix(ctx, normalize(raw));
    if (cert.status == WeightedMixCertificate::Status::Feasible) return cert;
    return std::nullopt;
  };

  std::mt19937 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd start(d);
    if (r == 0) {
      start = Eigen::VectorXd::Constant(d, 1.0 / d);
    } else {
      for (int i = 0; i < d; ++i) start(i) = expo(rng);
      start /= start.sum();
    }
    if (auto cert = feasible_at(start)) return cert;
    const NelderMeadResult nm = nelder_mead(
        [&](const Eigen::VectorXd& p) { return -margin(p); }, start, 0.25 / d, 200 * d);
    if (auto cert = feasible_at(nm.x)) return cert;
  }
  return std::nullopt;
}

std::optional<CpFactorization> cp_search(const MMatrix& m, int k, int restarts, int iters,
                                         unsigned seed) {
  if (k < 1) throw BadParamError("cp_search requires k >= 1");
  if (restarts < 1 || iters < 1) {
    throw BadParamError("cp_search requires restarts >= 1 and iters >= 1");
  }
  const int d = m.dim();
  const Eigen::MatrixXd& target = m.inner().mat();
  const double norm = target.norm();
  const double threshold = 1e-7 * (1.0 + norm);
  const double diag_scale = target.diagonal().maxCoeff();
  const double delta = 1e-12 * (1.0 + diag_scale);

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uniform(0.1, 1.1);

  Eigen::MatrixXd best;
  double best_residual = std::numeric_limits<double>::infinity();
  const double init_scale = std::sqrt(std::max(diag_scale, 1e-30) / k);

  // Spectral start: |V sqrt(L)| from the leading eigenpairs lands close to
  // the factorization whenever one exists, so it runs before random starts.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(target);
  Eigen::MatrixXd spectral = Eigen::MatrixXd::Constant(d, k, 1e-3 * init_scale);
  for (int c = 0; c < std::min(k, d); ++c) {
    const int idx = d - 1 - c;
    const double lam = std::max(eig.eigenvalues()(idx), 0.0);
    spectral.col(c) =
        (eig.eigenvectors().col(idx) * std::sqrt(lam)).cwiseAbs().cwiseMax(1e-3 * init_scale);
  }

  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd b(d, k);
    if (r == 0) {
      b = spectral;
    } else {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < k; ++j) b(i, j) = uniform(rng) * init_scale;
      }
    }
    for (int it = 0; it < iters; ++it) {
      const Eigen::MatrixXd numerator = target * b;
      const Eigen::MatrixXd denominator = b * (b.transpose() * b);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < k; ++j) {
          b(i, j) *= 0.5 + 0.5 * numerator(i, j) / (denominator(i, j) + delta);
        }
      }
      if (it % 25 == 24) {
        const double residual = (b * b.transpose() - target).norm();
        if (residual <= 0.25 * threshold) break;
      }
    }

    // Multiplicative updates crawl near the solution and cannot move entries
    // across the boundary, so a spectral projected-gradient polish
    // (Barzilai-Borwein steps, nonmonotone acceptance) finishes the descent.
    if ((b * b.transpose() - target).norm() > 0.25 * threshold) {
      double value = (b * b.transpose() - target).squaredNorm();
      Eigen::MatrixXd grad = 4.0 * (b * b.transpose() - target) * b;
      double step = 0.25 / (1.0 + 3.0 * b.squaredNorm() + norm);
      double recent[8];
      for (double& v : recent) v = value;
      int slot = 0;
      for (int it = 0; it < 2000; ++it) {
        const Eigen::MatrixXd candidate = (b - step * grad).cwiseMax(0.0);
        const double new_value =
            (candidate * candidate.transpose() - target).squaredNorm();
        double reference = recent[0];
        for (double v : recent) reference = std::max(reference, v);
        if (new_value <= reference - 1e-6 / std::max(step, 1e-300) *
                                         (candidate - b).squaredNorm()) {
          const Eigen::MatrixXd new_grad =
              4.0 * (candidate * candidate.transpose() - target) * candidate;
          const Eigen::MatrixXd s = candidate - b;
          const Eigen::MatrixXd y = new_grad - grad;
          const double sy = (s.array() * y.array()).sum();
          step = sy > 1e-300 ? std::min(s.squaredNorm() / sy, 1e6) : 2.0 * step;
          b = candidate;
          grad = new_grad;
          value = new_value;
          recent[slot] = value;
          slot = (slot + 1) % 8;
          if (std::sqrt(value) <= 0.25 * threshold) break;
        } else {
          step *= 0.5;
          if (step < 1e-18) break;
        }
      }
    }

    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < k; ++j) {
        if (b(i, j) < 1e-13 * (1.0 + init_scale)) b(i, j) = 0.0;
      }
    }
    const double residual = (b * b.transpose() - target).norm();
    if (residual < best_residual) {
      best_residual = residual;
      best = b;
    }
    if (best_residual <= threshold) break;
  }
  if (best_residual <= threshold) {
    return CpFactorization{best};
  }
  return std::nullopt;
}

namespace {

/// Builds, verifies, and packages a decomposition-backed Separable verdict;
/// returns nullopt when the independent re-verification fails.
std::optional<SeparabilityCertificate> finish_separable(const DsState& rho,
                                                        const CpFactorization& factor,
                                                        const std::string& route,
                                                        std::vector<std::string>& trace) {
  const SeparableDecomposition dec = separable_from_cp(factor);
  if (!verify_decomposition(rho, dec, Tolerance{})) {
    trace.push_back(route + ": decomposition failed independent re-verification");
    return std::nullopt;
  }
  trace.push_back(route + ": explicit decomposition verified (" +
                  std::to_string(dec.terms.size()) + " terms)");
  SeparabilityCertificate out;
  out.verdict = SeparabilityCertificate::Verdict::Separable;
  out.evidence = DecompositionEvidence{route, factor, dec};
  out.attempt_trace = trace;
  return out;
}

}  // namespace

SeparabilityCertificate certify(const DsState& rho, const CertifyBudget& budget) {
  const Tolerance tol{};
  const int d = rho.dim();
  std::vector<std::string> trace;

  // Step 1: the partial transpose test decides every NPT state.
  const MMatrix m = m_matrix(rho);
  {
    const EigResult eig = sym_eig(m.inner());
    const double min_eig = eig.eigenvalues(0);
    const double spectral =
        std::max(std::abs(min_eig), std::abs(eig.eigenvalues(d - 1)));
    if (min_eig < -(tol.abs_eig + tol.rel_scale * spectral)) {
      trace.push_back("partial transpose: negative eigenvalue " + fmt_num(min_eig));
      SeparabilityCertificate out;
      out.verdict = SeparabilityCertificate::Verdict::Entangled;
      out.evidence = NptViolationEvidence{min_eig};
      out.attempt_trace = trace;
      return out;
    }
    trace.push_back("partial transpose: positive semidefinite (min eigenvalue " +
                    fmt_num(min_eig) + ")");
  }

  // Step 2: local dimension at most 4 means PPT is also sufficient.  A
  // constructive factorization is preferred; the citation is the fallback.
  if (d <= 4) {
    if (d <= 3) {
      try {
        const CpFactorization factor =
            d == 3 ? cp_d3_decompose(m, tol) : cp_rank2_embed(m, tol);
        const std::string route = d == 3 ? "constructive 3x3 factorization"
                                         : "planar rank-2 embedding";
        if (auto out = finish_separable(rho, factor, route, trace)) return *out;
      } catch (const Error& err) {
        trace.push_back(std::string("small-dimension factorization failed: ") + err.what());
      }
    } else {
      const int k_auto =
          budget.cp_search_k_max > 0 ? budget.cp_search_k_max : d * (d + 1) / 2;
      if (auto factor = cp_search(m, k_auto, budget.cp_search_restarts,
                                  budget.cp_search_iters, budget.seed)) {
        if (auto out =
                finish_separable(rho, *factor, "nonnegative factorization search", trace)) {
          return *out;
        }
      }
    }
    trace.push_back("PPT at local dimension " + std::to_string(d) +
                    ": separability follows without a printed construction");
    SeparabilityCertificate out;
    out.verdict = SeparabilityCertificate::Verdict::Separable;
    out.evidence = TheoremCitationEvidence{
        "PPT implies separable for local dimension <= 4",
        "re-verified: partial transpose PSD at d = " + std::to_string(d)};
    out.attempt_trace = trace;
    return out;
  }

  // Step 3: numerical rank at most 2 admits the planar embedding.
  if (numerical_rank(m.inner(), tol) <= 2) {
    try {
      const CpFactorization factor = cp_rank2_embed(m, tol);
      if (auto out = finish_separable(rho, factor, "planar rank-2 embedding", trace)) {
        return *out;
      }
    } catch (const Error& err) {
      trace.push_back(std::string("rank-2 embedding failed: ") + err.what());
    }
  } else {
    trace.push_back("rank: above 2, planar embedding not applicable");
  }

  // Step 4: diagonal dominance gives an explicit factorization.
  if (is_diag_dominant(m)) {
    if (auto out = finish_separable(rho, cp_diag_dominant(m), "diagonal dominance", trace)) {
      return *out;
    }
  } else {
    trace.push_back("diagonal dominance: does not hold");
  }

  // Step 5: uniform-mix certificate.
  {
    const UniformMixCertificate cert = uniform_mix_certificate(rho, tol);
    if (cert.status == UniformMixCertificate::Status::Feasible) {
      trace.push_back("uniform-mix certificate: feasible epsilon " + fmt_num(cert.epsilon) +
                      " in [" + fmt_num(cert.lower) + ", " + fmt_num(cert.upper) + "]");
      if (auto out = finish_separable(rho, cp_from_uniform_mix(rho, cert),
                                      "uniform-mix certificate", trace)) {
        return *out;
      }
    } else {
      trace.push_back("uniform-mix certificate: not feasible (bounds [" +
                      fmt_num(cert.lower) + ", " + fmt_num(cert.upper) + "])");
    }
  }

  // Step 6: search over weighted mixes.
  if (auto cert = search_weighted_mix(rho, budget.weighted_mix_restarts, tol, budget.seed)) {
    trace.push_back("weighted-mix search: feasible lambda " + fmt_num(cert->lambda));
    if (auto out = finish_separable(rho, cp_from_weighted_mix(rho, *cert),
                                    "weighted-mix certificate", trace)) {
      return *out;
    }
  } else {
    trace.push_back("weighted-mix search: no feasible weight vector found");
  }

  // Step 7: direct factorization search.
  {
    const int k_auto = budget.cp_search_k_max > 0 ? budget.cp_search_k_max : d * (d + 1) / 2;
    if (auto factor = cp_search(m, k_auto, budget.cp_search_restarts, budget.cp_search_iters,
                                budget.seed)) {
      if (auto out =
              finish_separable(rho, *factor, "nonnegative factorization search", trace)) {
        return *out;
      }
    } else {
      trace.push_back("nonnegative factorization search: no factorization within budget");
    }
  }

  // Step 8: copositive witness scan over principal 5-subsets.
  if (d >= 5) {
    const Witness horn = horn_matrix();
    double best_value = std::numeric_limits<double>::infinity();
    Witness best_witness = horn;
    const double total = binomial(d, 5);
    std::uint64_t scanned = 0;
    if (total <= static_cast<double>(budget.witness_subset_cap)) {
      std::vector<int> subset{0, 1, 2, 3, 4};
      do {
        const Witness lifted = d == 5 ? horn : lift_witness(horn, d, subset);
        const double value = witness_value(lifted, m);
        if (value < best_value) {
          best_value = value;
          best_witness = lifted;
        }
        ++scanned;
      } while (next_combination(subset, d));
    } else {
      std::mt19937 rng(budget.seed + 17u);
      std::vector<int> indices(d);
      for (int i = 0; i < d; ++i) indices[i] = i;
      for (int s = 0; s < budget.witness_subset_cap; ++s) {
        std::shuffle(indices.begin(), indices.end(), rng);
        std::vector<int> subset(indices.begin(), indices.begin() + 5);
        std::sort(subset.begin(), subset.end());
        const Witness lifted = lift_witness(horn, d, subset);
        const double value = witness_value(lifted, m);
        if (value < best_value) {
          best_value = value;
          best_witness = lifted;
        }
        ++scanned;
      }
    }
    trace.push_back("witness scan: " + std::to_string(scanned) +
                    " principal 5-subsets, min value " + fmt_num(best_value));
    if (best_value < -1e-9) {
      const SimplexMinResult evidence = min_quad_over_simplex(
          best_witness.w, budget.min_quad_restarts, budget.min_quad_iters, budget.seed);
      trace.push_back("copositivity evidence: witness simplex minimum " +
                      fmt_num(evidence.value));
      SeparabilityCertificate out;
      out.verdict = SeparabilityCertificate::Verdict::Entangled;
      out.evidence = WitnessViolationEvidence{best_witness, best_value};
      out.attempt_trace = trace;
      return out;
    }
  }

  // Step 9: range criterion.
  {
    const RangeReport report = range_criterion_test(rho, tol, budget.support_cap);
    if (report.verdict == RangeReport::Verdict::Infeasible) {
      trace.push_back("range criterion: no admissible product vector (entangled)");
      SeparabilityCertificate out;
      out.verdict = SeparabilityCertificate::Verdict::Entangled;
      out.evidence = RangeCriterionEvidence{report};
      out.attempt_trace = trace;
      return out;
    }
    trace.push_back(report.verdict == RangeReport::Verdict::FeasibleWitnessVector
                        ? "range criterion: feasible product-vector candidate found"
                        : "range criterion: support budget exceeded");
  }

  SeparabilityCertificate out;
  out.verdict = SeparabilityCertificate::Verdict::Inconclusive;
  out.evidence = AttemptTraceEvidence{trace};
  out.attempt_trace = trace;
  return out;
}

}  // namespace sepcert

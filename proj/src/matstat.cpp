#include "eas/matstat.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "eas/errors.hpp"

namespace eas {

SpdFactor::SpdFactor(DenseMatrix lower) : lower_(std::move(lower)) {
  log_det_ = 2.0 * lower_.diagonal().array().log().sum();
}

SpdFactor SpdFactor::from_lower(DenseMatrix lower) {
  if (lower.rows() != lower.cols()) {
    throw std::invalid_argument("SpdFactor: factor must be square");
  }
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    if (!(lower(i, i) > 0.0)) {
      throw NotPositiveDefinite("SpdFactor: non-positive diagonal entry");
    }
  }
  lower.triangularView<Eigen::StrictlyUpper>().setZero();
  return SpdFactor(std::move(lower));
}

DenseMatrix SpdFactor::solve_lower(const DenseMatrix& b) const {
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

DenseMatrix SpdFactor::solve_upper(const DenseMatrix& b) const {
  return lower_.transpose().triangularView<Eigen::Upper>().solve(b);
}

DenseMatrix SpdFactor::solve(const DenseMatrix& b) const { return solve_upper(solve_lower(b)); }

double SpdFactor::trace_solve(const DenseMatrix& k) const {
  // tr(L^{-T} L^{-1} K) = tr(L^{-1} K L^{-T})
  DenseMatrix a = solve_lower(k);
  DenseMatrix c = solve_lower(a.transpose());
  return c.trace();
}

DenseMatrix SpdFactor::reconstruct() const { return lower_ * lower_.transpose(); }

SpdFactor cholesky(const DenseMatrix& s, double pivot_floor) {
  if (s.rows() != s.cols()) {
    throw std::invalid_argument("cholesky: matrix must be square");
  }
  if (s.size() == 0) {
    return SpdFactor::from_lower(DenseMatrix(0, 0));
  }
  const double scale = s.cwiseAbs().maxCoeff();
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("cholesky: matrix is not symmetric");
  }
  Eigen::LLT<DenseMatrix, Eigen::Lower> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: non-positive pivot");
  }
  DenseMatrix lower = llt.matrixL();
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    const double pivot = lower(i, i) * lower(i, i);
    if (!(pivot > pivot_floor) || !std::isfinite(pivot)) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(i) + " below floor");
    }
  }
  return SpdFactor::from_lower(std::move(lower));
}

double log_multivariate_gamma(int q, double a) {
  if (q < 1) {
    throw DomainError("log_multivariate_gamma: q must be >= 1");
  }
  if (!(a > 0.5 * (q - 1))) {
    throw DomainError("log_multivariate_gamma: a must exceed (q-1)/2");
  }
  double out = 0.25 * q * (q - 1) * std::log(std::numbers::pi);
  for (int i = 0; i < q; ++i) {
    out += std::lgamma(a - 0.5 * i);
  }
  return out;
}

double power_iteration_max_eigenvalue(const DenseMatrix& s, double rel_tol, int max_iter) {
  const Eigen::Index n = s.rows();
  if (n == 0) return 0.0;
  // non-uniform positive start; exact orthogonality to the top
  // eigenvector is a measure-zero event
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 1.0 / static_cast<double>(i + 2);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = s.selfadjointView<Eigen::Lower>() * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      return std::max(next, norm);
    }
    lambda = next;
  }
  return lambda;
}

namespace {

DenseMatrix standard_normal(RngStream& rng, Eigen::Index rows, Eigen::Index cols) {
  DenseMatrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = rng.normal();
  }
  return z;
}

}  // namespace

DenseMatrix sample_matrix_normal(RngStream& rng, const DenseMatrix& mean,
                                 const SpdFactor& row_cov, const SpdFactor& col_cov) {
  if (row_cov.dim() != mean.rows() || col_cov.dim() != mean.cols()) {
    throw std::invalid_argument("sample_matrix_normal: dimension mismatch");
  }
  DenseMatrix z = standard_normal(rng, mean.rows(), mean.cols());
  return mean + row_cov.lower() * z * col_cov.lower().transpose();
}

DenseMatrix sample_bartlett_factor(RngStream& rng, int dof, int q) {
  if (q < 1 || dof < q) {
    throw DomainError("sample_wishart: dof must be >= dimension");
  }
  DenseMatrix a = DenseMatrix::Zero(q, q);
  for (int i = 0; i < q; ++i) {
    a(i, i) = std::sqrt(rng.chi_square(static_cast<double>(dof - i)));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  return a;
}

DenseMatrix sample_wishart(RngStream& rng, int dof, const SpdFactor& scale) {
  const int q = static_cast<int>(scale.dim());
  DenseMatrix a = sample_bartlett_factor(rng, dof, q);
  DenseMatrix b = scale.lower() * a.triangularView<Eigen::Lower>();
  DenseMatrix w = DenseMatrix::Zero(q, q);
  w.selfadjointView<Eigen::Lower>().rankUpdate(b);
  w.triangularView<Eigen::StrictlyUpper>() = w.transpose();
  return w;
}

DenseMatrix sample_matrix_t(RngStream& rng, double dof, const DenseMatrix& location,
                            const SpdFactor& row_scale, const SpdFactor& col_gram) {
  if (!(dof > 0.0)) {
    throw DegreesOfFreedomError("sample_matrix_t: degrees of freedom must be positive");
  }
  const Eigen::Index q = location.rows();
  const Eigen::Index m = location.cols();
  if (row_scale.dim() != q || col_gram.dim() != m) {
    throw std::invalid_argument("sample_matrix_t: dimension mismatch");
  }
  const double wishart_dof = dof + static_cast<double>(q) - 1.0;
  const int rounded = static_cast<int>(std::lround(wishart_dof));
  if (std::abs(wishart_dof - rounded) > 1e-9) {
    throw DegreesOfFreedomError("sample_matrix_t: dof + q - 1 must be an integer");
  }
  DenseMatrix a = sample_bartlett_factor(rng, rounded, static_cast<int>(q));
  DenseMatrix z = standard_normal(rng, q, m);
  // rows of A^{-T} Z have covariance (A A^T)^{-1}
  DenseMatrix t = a.transpose().triangularView<Eigen::Upper>().solve(z);
  // right-multiplying by L_col^{-1} gives column covariance (L L^T)^{-1}
  DenseMatrix tc = col_gram.lower().transpose().triangularView<Eigen::Upper>()
                       .solve(t.transpose())
                       .transpose();
  return location + row_scale.lower() * tc;
}

bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

}  // namespace eas

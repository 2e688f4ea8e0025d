#pragma once

#include <Eigen/Dense>

#include "eas/rng.hpp"

namespace eas {

/// Column-major dense matrix used throughout the library.
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Lower Cholesky factor of a symmetric positive-definite matrix together
/// with its cached log-determinant. Immutable once built.
class SpdFactor {
 public:
  /// Takes ownership of an already-computed lower factor. Diagonal entries
  /// must be strictly positive.
  static SpdFactor from_lower(DenseMatrix lower);

  Eigen::Index dim() const { return lower_.rows(); }
  const DenseMatrix& lower() const { return lower_; }
  double log_det() const { return log_det_; }

  /// L^{-1} b.
  DenseMatrix solve_lower(const DenseMatrix& b) const;
  /// L^{-T} b.
  DenseMatrix solve_upper(const DenseMatrix& b) const;
  /// S^{-1} b.
  DenseMatrix solve(const DenseMatrix& b) const;
  /// tr(S^{-1} K) for symmetric K, via two triangular solves.
  double trace_solve(const DenseMatrix& k) const;
  /// L L^T.
  DenseMatrix reconstruct() const;

 private:
  explicit SpdFactor(DenseMatrix lower);

  DenseMatrix lower_;
  double log_det_ = 0.0;
};

/// Cholesky factorization. Throws NotPositiveDefinite when a pivot is
/// <= pivot_floor, and std::invalid_argument when S is not symmetric to
/// 1e-10 * max|S_ij|.
SpdFactor cholesky(const DenseMatrix& s, double pivot_floor = 0.0);

/// log Gamma_q(a) = q(q-1)/4 log(pi) + sum_{i=1..q} log Gamma(a - (i-1)/2).
/// Throws DomainError when a <= (q-1)/2.
double log_multivariate_gamma(int q, double a);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration, to
/// `rel_tol` relative change of the Rayleigh quotient.
double power_iteration_max_eigenvalue(const DenseMatrix& s, double rel_tol = 1e-8,
                                      int max_iter = 100000);

/// mean + L_U Z L_V^T with Z i.i.d. standard normal.
DenseMatrix sample_matrix_normal(RngStream& rng, const DenseMatrix& mean,
                                 const SpdFactor& row_cov, const SpdFactor& col_cov);

/// Wishart_q(dof, scale) draw by the Bartlett decomposition. The result is
/// exactly symmetric. Throws DomainError when dof < q.
DenseMatrix sample_wishart(RngStream& rng, int dof, const SpdFactor& scale);

/// Lower-triangular Bartlett factor A with A A^T ~ Wishart_q(dof, I).
DenseMatrix sample_bartlett_factor(RngStream& rng, int dof, int q);

/// Matrix-t draw T_{q,m}(dof, location, row_scale, col_gram^{-1}), built as
/// location + L_row A^{-T} Z L_col^{-1} with A A^T ~ Wishart_q(dof + q - 1, I).
/// The column scale is supplied through the factor of its inverse (a Gram
/// matrix) so nothing is inverted explicitly. Throws DegreesOfFreedomError
/// when dof <= 0.
DenseMatrix sample_matrix_t(RngStream& rng, double dof, const DenseMatrix& location,
                            const SpdFactor& row_scale, const SpdFactor& col_gram);

bool all_finite(const DenseMatrix& m);

}  // namespace eas

#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eas/matstat.hpp"

namespace eas {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Responses and predictors with observations stored as columns:
/// Y is q x n and X is p x n. Gram matrices used by every model fit are
/// computed once at construction; the object is immutable afterwards and
/// may be shared across threads.
class Dataset {
 public:
  Dataset(DenseMatrix y, DenseMatrix x);

  Eigen::Index n() const { return y_.cols(); }
  Eigen::Index p() const { return x_.rows(); }
  Eigen::Index q() const { return y_.rows(); }

  const DenseMatrix& y() const { return y_; }
  const DenseMatrix& x() const { return x_; }
  /// X X^T (p x p).
  const DenseMatrix& gram() const { return gram_; }
  /// X Y^T (p x q).
  const DenseMatrix& cross() const { return cross_; }
  /// Y Y^T (q x q).
  const DenseMatrix& response_gram() const { return response_gram_; }
  /// lambda_max(X X^T), by power iteration.
  double gram_max_eigenvalue() const { return gram_max_eigenvalue_; }

  /// Dataset restricted to the given observation columns (0-based).
  Dataset select_observations(std::span<const Eigen::Index> columns) const;

 private:
  DenseMatrix y_;
  DenseMatrix x_;
  DenseMatrix gram_;
  DenseMatrix cross_;
  DenseMatrix response_gram_;
  double gram_max_eigenvalue_ = 0.0;
};

/// Row-wise centering (and optional scaling to unit variance) of each
/// response and predictor variable across observations.
Dataset preprocess(const Dataset& data, bool center, bool scale);

/// Sorted, duplicate-free set of predictor indices. Indices are 0-based
/// in memory; text and JSON output is 1-based.
class ModelIndexSet {
 public:
  ModelIndexSet() = default;
  /// Sorts the input; throws std::invalid_argument on duplicates or
  /// negative entries.
  explicit ModelIndexSet(std::vector<int> indices);
  static ModelIndexSet from_one_based(const std::vector<int>& indices);

  const std::vector<int>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(int j) const;

  ModelIndexSet with(int j) const;
  ModelIndexSet without(int j) const;

  std::vector<int> one_based() const;
  /// "{2,5}" in 1-based notation.
  std::string to_string() const;

  friend bool operator==(const ModelIndexSet&, const ModelIndexSet&) = default;
  friend auto operator<=>(const ModelIndexSet& a, const ModelIndexSet& b) {
    return a.indices_ <=> b.indices_;
  }

 private:
  std::vector<int> indices_;
};

struct ModelIndexSetHash {
  std::size_t operator()(const ModelIndexSet& m) const noexcept;
};

/// Least-squares artifacts of one candidate model.
struct FittedModel {
  ModelIndexSet model;
  /// False when X_{M.} X_{M.}^T failed its pivot test; the remaining
  /// fields are then empty.
  bool full_rank = false;
  DenseMatrix coef;            ///< B-hat, q x |M|
  DenseMatrix residual_cross;  ///< Sigma-hat = Y (I - H) Y^T, q x q
  std::optional<SpdFactor> residual_factor;  ///< present iff Sigma-hat is PD
  std::optional<SpdFactor> gram_factor;      ///< factor of X_{M.} X_{M.}^T
  double log_det_residual = kNegInf;
};

/// Fits B-hat through the Cholesky factor of the model Gram block and
/// forms Sigma-hat as Y Y^T - B-hat (X_{M.} Y^T), never building the hat
/// matrix. Rank deficiency is reported through `full_rank`.
FittedModel fit_model(const Dataset& data, const ModelIndexSet& model);

/// Log unnormalized GF mass of a model plus its admissibility verdict.
struct GfWeight {
  double log_mass = kNegInf;
  bool admissible = false;
  double epsilon = 0.0;
};

/// log Gamma_q((n-|M|)/2) + (q|M|/2) log(pi) - ((n-|M|-q)/2) log det Sigma-hat,
/// i.e. the log mass of an admissible model. -inf when |M| >= n - q, when
/// the fit is rank deficient, or when Sigma-hat is singular.
double log_mass_prefactor(const FittedModel& fitted, Eigen::Index n, Eigen::Index q);

/// Adds log h to the prefactor; h_value = 0 yields -inf.
GfWeight log_gf_mass(const FittedModel& fitted, int h_value, Eigen::Index n, Eigen::Index q,
                     double epsilon = 0.0);

/// Log-sum-exp normalization. Throws AllInadmissible when no mass is finite.
std::vector<double> normalize_masses(std::span<const GfWeight> weights);
std::vector<double> normalize_log_masses(std::span<const double> log_masses);

/// Draw of B_{.M} from its matrix-t GF law with n - |M| - q + 1 degrees of
/// freedom, location B-hat, row scale Sigma-hat and column scale
/// (X_{M.} X_{M.}^T)^{-1}. Throws DegreesOfFreedomError when the degrees of
/// freedom are not positive.
DenseMatrix sample_matrix_t(RngStream& rng, const FittedModel& fitted, Eigen::Index n);

/// Gathers rows of X for the given model (|M| x n).
DenseMatrix model_rows(const DenseMatrix& x, const ModelIndexSet& model);

}  // namespace eas

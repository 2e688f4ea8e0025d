#include "eas/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "eas/errors.hpp"

namespace eas {

namespace {

DenseMatrix symmetric_product(const DenseMatrix& a) {
  DenseMatrix out = DenseMatrix::Zero(a.rows(), a.rows());
  out.selfadjointView<Eigen::Lower>().rankUpdate(a);
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

}  // namespace

Dataset::Dataset(DenseMatrix y, DenseMatrix x) : y_(std::move(y)), x_(std::move(x)) {
  if (y_.cols() != x_.cols()) {
    throw std::invalid_argument("Dataset: Y and X must have the same number of observations");
  }
  if (y_.cols() < 1 || y_.rows() < 1 || x_.rows() < 1) {
    throw std::invalid_argument("Dataset: n, p and q must all be >= 1");
  }
  if (!y_.allFinite() || !x_.allFinite()) {
    throw std::invalid_argument("Dataset: entries must be finite");
  }
  gram_ = symmetric_product(x_);
  cross_ = x_ * y_.transpose();
  response_gram_ = symmetric_product(y_);
  gram_max_eigenvalue_ = power_iteration_max_eigenvalue(gram_);
}

Dataset Dataset::select_observations(std::span<const Eigen::Index> columns) const {
  DenseMatrix y(q(), static_cast<Eigen::Index>(columns.size()));
  DenseMatrix x(p(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto c = columns[k];
    if (c < 0 || c >= n()) {
      throw std::out_of_range("Dataset::select_observations: column out of range");
    }
    y.col(static_cast<Eigen::Index>(k)) = y_.col(c);
    x.col(static_cast<Eigen::Index>(k)) = x_.col(c);
  }
  return Dataset(std::move(y), std::move(x));
}

Dataset preprocess(const Dataset& data, bool center, bool scale) {
  auto adjust = [&](DenseMatrix m) {
    const double n = static_cast<double>(m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (center) m.row(i).array() -= m.row(i).mean();
      if (scale) {
        const double mean = center ? 0.0 : m.row(i).mean();
        const double sd = std::sqrt((m.row(i).array() - mean).square().sum() / std::max(n - 1.0, 1.0));
        if (sd > 0.0) m.row(i) /= sd;
      }
    }
    return m;
  };
  if (!center && !scale) return data;
  return Dataset(adjust(data.y()), adjust(data.x()));
}

ModelIndexSet::ModelIndexSet(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw std::invalid_argument("ModelIndexSet: duplicate index");
  }
  if (!indices_.empty() && indices_.front() < 0) {
    throw std::invalid_argument("ModelIndexSet: negative index");
  }
}

ModelIndexSet ModelIndexSet::from_one_based(const std::vector<int>& indices) {
  std::vector<int> zero;
  zero.reserve(indices.size());
  for (int j : indices) {
    if (j < 1) throw std::invalid_argument("ModelIndexSet: 1-based index must be >= 1");
    zero.push_back(j - 1);
  }
  return ModelIndexSet(std::move(zero));
}

bool ModelIndexSet::contains(int j) const {
  return std::binary_search(indices_.begin(), indices_.end(), j);
}

ModelIndexSet ModelIndexSet::with(int j) const {
  ModelIndexSet out = *this;
  auto it = std::lower_bound(out.indices_.begin(), out.indices_.end(), j);
  if (it != out.indices_.end() && *it == j) {
    throw std::invalid_argument("ModelIndexSet::with: index already present");
  }
  out.indices_.insert(it, j);
  return out;
}

ModelIndexSet ModelIndexSet::without(int j) const {
  ModelIndexSet out = *this;
  auto it = std::lower_bound(out.indices_.begin(), out.indices_.end(), j);
  if (it == out.indices_.end() || *it != j) {
    throw std::invalid_argument("ModelIndexSet::without: index not present");
  }
  out.indices_.erase(it);
  return out;
}

std::vector<int> ModelIndexSet::one_based() const {
  std::vector<int> out(indices_);
  for (int& j : out) ++j;
  return out;
}

std::string ModelIndexSet::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (k) os << ',';
    os << indices_[k] + 1;
  }
  os << '}';
  return os.str();
}

std::size_t ModelIndexSetHash::operator()(const ModelIndexSet& m) const noexcept {
  std::uint64_t h = 0x84222325cbf29ce4ULL ^ m.size();
  for (int j : m.indices()) h = mix64(h ^ static_cast<std::uint64_t>(j));
  return static_cast<std::size_t>(h);
}

DenseMatrix model_rows(const DenseMatrix& x, const ModelIndexSet& model) {
  DenseMatrix out(static_cast<Eigen::Index>(model.size()), x.cols());
  for (std::size_t k = 0; k < model.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = x.row(model.indices()[k]);
  }
  return out;
}

FittedModel fit_model(const Dataset& data, const ModelIndexSet& model) {
  if (model.empty()) {
    throw std::invalid_argument("fit_model: empty model");
  }
  if (model.indices().back() >= data.p()) {
    throw std::out_of_range("fit_model: predictor index out of range");
  }
  FittedModel fit;
  fit.model = model;
  const auto m = static_cast<Eigen::Index>(model.size());
  const auto& idx = model.indices();

  DenseMatrix g(m, m);
  DenseMatrix xy(m, data.q());
  for (Eigen::Index a = 0; a < m; ++a) {
    xy.row(a) = data.cross().row(idx[a]);
    for (Eigen::Index b = 0; b < m; ++b) g(a, b) = data.gram()(idx[a], idx[b]);
  }
  const double floor = 1e-10 * g.trace() / static_cast<double>(m);
  try {
    fit.gram_factor = cholesky(g, floor);
  } catch (const NotPositiveDefinite&) {
    return fit;
  }
  fit.full_rank = true;
  // B-hat^T = G^{-1} (X_M Y^T)
  fit.coef = fit.gram_factor->solve(xy).transpose();
  DenseMatrix sigma = data.response_gram() - fit.coef * xy;
  sigma = (0.5 * (sigma + sigma.transpose())).eval();
  fit.residual_cross = sigma;
  const double sigma_floor =
      1e-10 * data.response_gram().trace() / static_cast<double>(data.q());
  try {
    fit.residual_factor = cholesky(sigma, sigma_floor);
    fit.log_det_residual = fit.residual_factor->log_det();
  } catch (const NotPositiveDefinite&) {
    fit.log_det_residual = kNegInf;
  }
  return fit;
}

double log_mass_prefactor(const FittedModel& fitted, Eigen::Index n, Eigen::Index q) {
  const auto m = static_cast<Eigen::Index>(fitted.model.size());
  if (!fitted.full_rank || !fitted.residual_factor || m < 1 || m >= n - q) {
    return kNegInf;
  }
  const double nm = static_cast<double>(n - m);
  return log_multivariate_gamma(static_cast<int>(q), 0.5 * nm) +
         0.5 * static_cast<double>(q * m) * std::log(std::numbers::pi) -
         0.5 * (nm - static_cast<double>(q)) * fitted.log_det_residual;
}

GfWeight log_gf_mass(const FittedModel& fitted, int h_value, Eigen::Index n, Eigen::Index q,
                     double epsilon) {
  GfWeight w;
  w.epsilon = epsilon;
  if (h_value == 0) return w;
  w.log_mass = log_mass_prefactor(fitted, n, q);
  w.admissible = std::isfinite(w.log_mass);
  if (!w.admissible) w.log_mass = kNegInf;
  return w;
}

std::vector<double> normalize_log_masses(std::span<const double> log_masses) {
  double top = kNegInf;
  for (double v : log_masses) top = std::max(top, v);
  if (!std::isfinite(top)) {
    throw AllInadmissible("normalize_masses: every mass is -inf");
  }
  double total = 0.0;
  for (double v : log_masses) total += std::exp(v - top);
  std::vector<double> out;
  out.reserve(log_masses.size());
  for (double v : log_masses) out.push_back(std::exp(v - top) / total);
  return out;
}

std::vector<double> normalize_masses(std::span<const GfWeight> weights) {
  std::vector<double> logs;
  logs.reserve(weights.size());
  for (const auto& w : weights) logs.push_back(w.log_mass);
  return normalize_log_masses(logs);
}

DenseMatrix sample_matrix_t(RngStream& rng, const FittedModel& fitted, Eigen::Index n) {
  if (!fitted.full_rank || !fitted.residual_factor || !fitted.gram_factor) {
    throw DomainError("sample_matrix_t: model fit is degenerate");
  }
  const auto m = static_cast<Eigen::Index>(fitted.model.size());
  const auto q = fitted.coef.rows();
  const double dof = static_cast<double>(n - m - q + 1);
  return sample_matrix_t(rng, dof, fitted.coef, *fitted.residual_factor, *fitted.gram_factor);
}

}  // namespace eas

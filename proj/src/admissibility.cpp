#include "eas/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eas/errors.hpp"

namespace eas {

const char* to_string(HMethod m) {
  switch (m) {
    case HMethod::Indicator: return "indicator";
    case HMethod::ProjectedGradient: return "pgd";
    case HMethod::ExhaustiveOracle: return "exhaustive";
  }
  return "unknown";
}

int warm_start_column(const DenseMatrix& coef) {
  int best = 0;
  double best_norm = coef.col(0).squaredNorm();
  for (Eigen::Index j = 1; j < coef.cols(); ++j) {
    const double v = coef.col(j).squaredNorm();
    if (v < best_norm) {
      best_norm = v;
      best = static_cast<int>(j);
    }
  }
  return best;
}

DenseMatrix warm_start(const FittedModel& fitted, Eigen::Index p) {
  if (fitted.model.size() < 2) {
    throw std::invalid_argument("warm_start: model needs at least two predictors");
  }
  DenseMatrix b = DenseMatrix::Zero(fitted.coef.rows(), p);
  const int drop = warm_start_column(fitted.coef);
  for (std::size_t k = 0; k < fitted.model.size(); ++k) {
    if (static_cast<int>(k) == drop) continue;
    b.col(fitted.model.indices()[k]) = fitted.coef.col(static_cast<Eigen::Index>(k));
  }
  return b;
}

namespace {

// Per-call state for evaluating g and its gradient.
struct Problem {
  const Dataset& data;
  const SpdFactor& sigma;
  DenseMatrix fitted_mean;  // target * X_M, q x n
  DenseMatrix target_gram;  // target * G_{M,.}, q x p

  Problem(const Dataset& d, const FittedModel& fit, const DenseMatrix& target)
      : data(d), sigma(*fit.residual_factor) {
    fitted_mean = target * model_rows(d.x(), fit.model);
    target_gram = target * model_rows(d.gram(), fit.model);
  }

  double objective(const DenseMatrix& b, const std::vector<int>& support) const {
    DenseMatrix diff = fitted_mean;
    for (int j : support) diff.noalias() -= b.col(j) * data.x().row(j);
    return 0.5 * sigma.solve_lower(diff).squaredNorm();
  }

  // Sigma^{-1} (B G - target G_{M,.}) for B supported on `support`.
  DenseMatrix gradient(const DenseMatrix& b, const std::vector<int>& support) const {
    DenseMatrix g = -target_gram;
    for (int j : support) g.noalias() += b.col(j) * data.gram().row(j);
    return sigma.solve(g);
  }

  // Exact least-squares columns on a fixed support: target G_{M,S} G_{S,S}^{-1}.
  bool polish(DenseMatrix& b, const std::vector<int>& support) const {
    const auto k = static_cast<Eigen::Index>(support.size());
    DenseMatrix gss(k, k);
    DenseMatrix cs(target_gram.rows(), k);
    for (Eigen::Index a = 0; a < k; ++a) {
      cs.col(a) = target_gram.col(support[a]);
      for (Eigen::Index c = 0; c < k; ++c) gss(a, c) = data.gram()(support[a], support[c]);
    }
    try {
      const SpdFactor f = cholesky(gss, 1e-10 * gss.trace() / static_cast<double>(k));
      DenseMatrix bs = f.solve(cs.transpose()).transpose();
      for (Eigen::Index a = 0; a < k; ++a) b.col(support[a]) = bs.col(a);
      return true;
    } catch (const NotPositiveDefinite&) {
      return false;
    }
  }
};

// Indices of the k largest column norms, ties to the lower index, sorted.
std::vector<int> top_columns(const DenseMatrix& b, int k) {
  const auto p = static_cast<int>(b.cols());
  std::vector<double> norms(p);
  for (int j = 0; j < p; ++j) norms[j] = b.col(j).squaredNorm();
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  auto before = [&](int a, int c) { return norms[a] > norms[c] || (norms[a] == norms[c] && a < c); };
  std::nth_element(order.begin(), order.begin() + k, order.end(), before);
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

// Shared short-circuits; returns true when `out` is final.
bool trivial_verdict(const Dataset& data, const FittedModel& fitted, HResult& out) {
  const auto m = static_cast<Eigen::Index>(fitted.model.size());
  out.method = HMethod::Indicator;
  out.h = 0;
  out.converged = true;
  if (m < 1 || m >= data.n() - data.q() || !fitted.full_rank || !fitted.residual_factor) {
    return true;
  }
  return false;
}

}  // namespace

double h_objective(const Dataset& data, const FittedModel& fitted, const DenseMatrix& target,
                   const DenseMatrix& b) {
  if (!fitted.residual_factor) {
    throw DomainError("h_objective: residual matrix is singular");
  }
  Problem prob(data, fitted, target);
  std::vector<int> support;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    if (b.col(j).squaredNorm() > 0.0) support.push_back(static_cast<int>(j));
  }
  return prob.objective(b, support);
}

HResult h_pgd(const Dataset& data, const FittedModel& fitted, const HConfig& cfg) {
  return h_pgd(data, fitted, fitted.coef, cfg);
}

HResult h_pgd(const Dataset& data, const FittedModel& fitted, const DenseMatrix& target,
              const HConfig& cfg) {
  HResult out;
  if (trivial_verdict(data, fitted, out)) return out;
  out.method = HMethod::ProjectedGradient;
  Problem prob(data, fitted, target);
  const auto q = data.q();
  const auto p = data.p();
  const int m = static_cast<int>(fitted.model.size());

  if (m == 1) {
    out.certificate = DenseMatrix::Zero(q, p);
    out.objective = prob.objective(out.certificate, {});
    out.h = out.objective >= cfg.epsilon ? 1 : 0;
    out.converged = true;
    if (cfg.record_trace) out.trace.push_back(out.objective);
    return out;
  }

  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(fitted.residual_cross, Eigen::EigenvaluesOnly);
  const double step = eig.eigenvalues()(0) / data.gram_max_eigenvalue();

  DenseMatrix b = DenseMatrix::Zero(q, p);
  {
    const int drop = warm_start_column(target);
    for (int k = 0; k < m; ++k) {
      if (k != drop) b.col(fitted.model.indices()[k]) = target.col(k);
    }
  }
  std::vector<int> support;
  for (int k = 0; k < m; ++k) {
    if (k != warm_start_column(target)) support.push_back(fitted.model.indices()[k]);
  }
  if (cfg.polish) prob.polish(b, support);
  double g = prob.objective(b, support);
  if (cfg.record_trace) out.trace.push_back(g);

  int it = 0;
  bool converged = false;
  while (!(cfg.early_stop && g < cfg.epsilon) && it < cfg.max_iterations) {
    ++it;
    DenseMatrix next = b - step * prob.gradient(b, support);
    std::vector<int> next_support = top_columns(next, m - 1);
    DenseMatrix kept = DenseMatrix::Zero(q, p);
    for (int j : next_support) kept.col(j) = next.col(j);
    if (cfg.polish) prob.polish(kept, next_support);
    const double g_next = prob.objective(kept, next_support);
    const double diff = std::abs(g - g_next);
    // thresholded steps are a descent method; keep the better iterate so
    // rounding can never raise the reported objective
    if (g_next > g) {
      if (cfg.record_trace) out.trace.push_back(g);
      converged = true;
      break;
    }
    b = std::move(kept);
    support = std::move(next_support);
    g = g_next;
    if (cfg.record_trace) out.trace.push_back(g);
    if (diff <= cfg.threshold * std::max(g, std::numeric_limits<double>::min())) {
      converged = true;
      break;
    }
  }
  out.iterations = it;
  out.converged = converged || g < cfg.epsilon;
  out.objective = g;
  out.certificate = std::move(b);
  out.support = std::move(support);
  out.h = g >= cfg.epsilon ? 1 : 0;
  return out;
}

HResult h_exhaustive(const Dataset& data, const FittedModel& fitted, double epsilon, int cap) {
  if (data.p() > cap) {
    throw CapExceeded("h_exhaustive: p = " + std::to_string(data.p()) + " exceeds cap " +
                      std::to_string(cap));
  }
  HResult out;
  if (trivial_verdict(data, fitted, out)) return out;
  out.method = HMethod::ExhaustiveOracle;
  out.converged = true;
  const auto q = data.q();
  const auto p = static_cast<int>(data.p());
  const int k = static_cast<int>(fitted.model.size()) - 1;
  // transposed fitted mean, n x q
  const DenseMatrix mean_t = (fitted.coef * model_rows(data.x(), fitted.model)).transpose();
  const SpdFactor& sigma = *fitted.residual_factor;

  auto evaluate = [&](const std::vector<int>& support, DenseMatrix& coef_out) {
    if (support.empty()) {
      coef_out.resize(q, 0);
      return 0.5 * sigma.solve_lower(mean_t.transpose()).squaredNorm();
    }
    ModelIndexSet s(support);
    const DenseMatrix xs_t = model_rows(data.x(), s).transpose();
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(xs_t);
    const DenseMatrix solution = qr.solve(mean_t);  // |S| x q
    const DenseMatrix resid = mean_t - xs_t * solution;
    coef_out = solution.transpose();
    return 0.5 * sigma.solve_lower(resid.transpose()).squaredNorm();
  };

  std::vector<int> comb(k);
  std::iota(comb.begin(), comb.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  DenseMatrix best_coef;
  std::vector<int> best_support;
  while (true) {
    DenseMatrix coef;
    const double g = evaluate(comb, coef);
    if (g < best) {
      best = g;
      best_coef = coef;
      best_support = comb;
    }
    ++out.iterations;
    // next combination in lexicographic order
    int i = k - 1;
    while (i >= 0 && comb[i] == p - k + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
  out.objective = best;
  out.support = best_support;
  out.certificate = DenseMatrix::Zero(q, p);
  for (std::size_t a = 0; a < best_support.size(); ++a) {
    out.certificate.col(best_support[a]) = best_coef.col(static_cast<Eigen::Index>(a));
  }
  out.h = best >= epsilon ? 1 : 0;
  return out;
}

double expected_h_monte_carlo(const Dataset& data, const FittedModel& fitted, const HConfig& cfg,
                              int draws, RngStream& rng) {
  if (draws < 1) throw std::invalid_argument("expected_h_monte_carlo: draws must be >= 1");
  HResult probe;
  if (trivial_verdict(data, fitted, probe)) return 0.0;
  int hits = 0;
  for (int d = 0; d < draws; ++d) {
    const DenseMatrix b = sample_matrix_t(rng, fitted, data.n());
    hits += h_pgd(data, fitted, b, cfg).h;
  }
  return static_cast<double>(hits) / draws;
}

}  // namespace eas

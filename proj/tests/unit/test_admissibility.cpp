#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "eas/admissibility.hpp"
#include "eas/errors.hpp"

using namespace eas;

namespace {

DenseMatrix gaussian(RngStream& rng, int r, int c) {
  DenseMatrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

// Independent re-evaluation of g(B) = 1/2 ||L^{-1}(B_M X_M - B X)||_F^2.
double g_direct(const Dataset& d, const FittedModel& f, const DenseMatrix& b) {
  const DenseMatrix r = f.coef * model_rows(d.x(), f.model) - b * d.x();
  const DenseMatrix sigma_inv = f.residual_cross.inverse();
  return 0.5 * (r.transpose() * sigma_inv * r).trace();
}

Dataset instance(RngStream& rng, int n, int p, int q, double signal) {
  DenseMatrix x = gaussian(rng, p, n);
  DenseMatrix b = signal * gaussian(rng, q, p);
  DenseMatrix y = b * x + gaussian(rng, q, n);
  return Dataset(std::move(y), std::move(x));
}

}  // namespace

TEST_CASE("warm start zeroes the minimum-norm column") {
  DenseMatrix c(1, 3);
  c << 5.0, 1.0, 3.0;
  CHECK(warm_start_column(c) == 1);
  c << 2.0, 1.0, 1.0;
  CHECK(warm_start_column(c) == 1);
  c << 1.0, 1.0, 1.0;
  CHECK(warm_start_column(c) == 0);
  c << -4.0, 4.0, 5.0;
  CHECK(warm_start_column(c) == 0);
}

TEST_CASE("warm start embeds B-hat with support |M| - 1") {
  RngStream rng(1);
  const Dataset d = instance(rng, 30, 6, 2, 1.0);
  const FittedModel f = fit_model(d, ModelIndexSet({1, 3, 4}));
  const DenseMatrix w = warm_start(f, 6);
  CHECK(w.rows() == 2);
  CHECK(w.cols() == 6);
  int nonzero = 0;
  for (int j = 0; j < 6; ++j) nonzero += w.col(j).norm() > 0;
  CHECK(nonzero == 2);
  CHECK(w.col(0).norm() == 0.0);
  CHECK_THROWS(warm_start(fit_model(d, ModelIndexSet({2})), 6));
}

TEST_CASE("a zero coefficient column gives h = 0 for every epsilon") {
  RngStream rng(2);
  DenseMatrix x = gaussian(rng, 4, 40);
  DenseMatrix b = gaussian(rng, 2, 4);
  b.col(2).setZero();
  // response built without predictor 2, then refit exactly
  DenseMatrix y = b * x;
  y += 1e-3 * gaussian(rng, 2, 40);
  const Dataset d(y, x);
  const FittedModel f = fit_model(d, ModelIndexSet({0, 1, 2, 3}));
  // replace the target by the exactly-zero-column matrix
  DenseMatrix target = f.coef;
  target.col(2).setZero();
  for (double eps : {1e-6, 1e-2, 1.0, 100.0}) {
    HConfig cfg;
    cfg.epsilon = eps;
    CHECK(h_pgd(d, f, target, cfg).h == 0);
  }
}

TEST_CASE("size indicator and rank deficiency short-circuit") {
  RngStream rng(3);
  const Dataset d = instance(rng, 8, 6, 3, 1.0);
  HConfig cfg;
  const HResult r = h_pgd(d, fit_model(d, ModelIndexSet({0, 1, 2, 3, 4})), cfg);
  CHECK(r.h == 0);
  CHECK(r.method == HMethod::Indicator);

  DenseMatrix x = gaussian(rng, 3, 20);
  x.row(1) = x.row(0);
  const Dataset dup(gaussian(rng, 2, 20), x);
  const FittedModel f = fit_model(dup, ModelIndexSet({0, 1}));
  CHECK(h_pgd(dup, f, cfg).h == 0);
}

TEST_CASE("single-predictor models are evaluated in closed form") {
  RngStream rng(4);
  const Dataset d = instance(rng, 30, 4, 2, 1.0);
  const FittedModel f = fit_model(d, ModelIndexSet({2}));
  HConfig cfg;
  const HResult r = h_pgd(d, f, cfg);
  const double g0 = g_direct(d, f, DenseMatrix::Zero(2, 4));
  CHECK(r.objective == doctest::Approx(g0).epsilon(1e-10));
  CHECK(r.iterations == 0);
  cfg.epsilon = g0 * 1.01;
  CHECK(h_pgd(d, f, cfg).h == 0);
  cfg.epsilon = g0 * 0.99;
  CHECK(h_pgd(d, f, cfg).h == 1);
}

TEST_CASE("pgd certificates are sound and the trace does not increase") {
  RngStream rng(5);
  int zeros = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Dataset d = instance(rng, 25, 8, 2, 0.3 + 0.05 * trial);
    const FittedModel f = fit_model(d, ModelIndexSet({0, 3, 5}));
    HConfig cfg;
    cfg.epsilon = 0.5 + 0.1 * trial;
    cfg.record_trace = true;
    cfg.early_stop = false;
    const HResult r = h_pgd(d, f, cfg);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      CHECK(r.trace[i] <= r.trace[i - 1] + 1e-10 * std::max(1.0, r.trace[i - 1]));
    }
    REQUIRE(r.certificate.cols() == 8);
    int support = 0;
    for (int j = 0; j < 8; ++j) support += r.certificate.col(j).norm() > 0;
    CHECK(support <= 2);
    CHECK(g_direct(d, f, r.certificate) == doctest::Approx(r.objective).epsilon(1e-8));
    if (r.h == 0) {
      ++zeros;
      CHECK(g_direct(d, f, r.certificate) < cfg.epsilon);
    }
  }
  CHECK(zeros > 0);
}

TEST_CASE("plain projected gradient also descends") {
  RngStream rng(6);
  const Dataset d = instance(rng, 40, 10, 3, 1.0);
  const FittedModel f = fit_model(d, ModelIndexSet({1, 2, 6, 8}));
  HConfig cfg;
  cfg.polish = false;
  cfg.early_stop = false;
  cfg.record_trace = true;
  const HResult r = h_pgd(d, f, cfg);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    CHECK(r.trace[i] <= r.trace[i - 1] + 1e-10 * std::max(1.0, r.trace[i - 1]));
  }
}

TEST_CASE("scaling Y leaves g unchanged") {
  RngStream rng(7);
  const Dataset d = instance(rng, 30, 6, 2, 1.0);
  const Dataset scaled(3.5 * d.y(), d.x());
  const ModelIndexSet m({0, 2, 4});
  HConfig cfg;
  cfg.early_stop = false;
  const HResult a = h_pgd(d, fit_model(d, m), cfg);
  const HResult b = h_pgd(scaled, fit_model(scaled, m), cfg);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-8));
  CHECK(a.h == b.h);
  const HResult ea = h_exhaustive(d, fit_model(d, m), 1.0);
  const HResult eb = h_exhaustive(scaled, fit_model(scaled, m), 1.0);
  CHECK(ea.objective == doctest::Approx(eb.objective).epsilon(1e-8));
}

TEST_CASE("exhaustive oracle: an outside predictor reproducing two inside ones") {
  RngStream rng(8);
  DenseMatrix x = gaussian(rng, 5, 30);
  const Dataset d(gaussian(rng, 1, 30), x);
  const ModelIndexSet m({1, 2, 4});
  const FittedModel f = fit_model(d, m);
  // predictor 0 := b1 x1 + b4 x4, so support {0, 2} fits B-hat X_M exactly
  x.row(0) = f.coef(0, 0) * x.row(1) + f.coef(0, 2) * x.row(4);
  const Dataset d2(d.y(), x);
  const FittedModel f2 = fit_model(d2, m);
  const HResult r = h_exhaustive(d2, f2, 1e-8);
  CHECK(r.objective < 1e-10);
  CHECK(r.h == 0);
  CHECK(r.support == std::vector<int>{0, 2});
}

TEST_CASE("exhaustive oracle: orthogonal design closed form") {
  // p = |M| = 3 with orthogonal rows, so the best drop is column-wise
  const int n = 12;
  DenseMatrix x = DenseMatrix::Zero(3, n);
  for (int i = 0; i < n; ++i) x(i % 3, i) = 1.0 + 0.1 * i;
  RngStream rng(9);
  DenseMatrix b(2, 3);
  b << 5.0, -6.0, 7.0, 4.0, 8.0, -5.0;
  const Dataset d(b * x + 0.5 * gaussian(rng, 2, n), x);
  const FittedModel f = fit_model(d, ModelIndexSet({0, 1, 2}));
  double closed = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 3; ++j) {
    const Vector bj = f.coef.col(j);
    const double v = 0.5 * bj.dot(f.residual_cross.ldlt().solve(bj)) * x.row(j).squaredNorm();
    closed = std::min(closed, v);
  }
  const HResult r = h_exhaustive(d, f, 1e-3);
  CHECK(r.objective == doctest::Approx(closed).epsilon(1e-9));
  CHECK(r.h == 1);
  CHECK(r.method == HMethod::ExhaustiveOracle);
  HConfig cfg;
  cfg.epsilon = 1e-3;
  CHECK(h_pgd(d, f, cfg).h == 1);
}

TEST_CASE("exhaustive oracle brackets epsilon around its minimum") {
  RngStream rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset d = instance(rng, 30, 7, 2, 1.0);
    const FittedModel f = fit_model(d, ModelIndexSet({0, 2, 5}));
    const double g = h_exhaustive(d, f, 1.0).objective;
    CHECK(h_exhaustive(d, f, g * 1.001).h == 0);
    CHECK(h_exhaustive(d, f, g * 0.999).h == 1);
  }
}

TEST_CASE("pgd never undercuts the exact minimum") {
  RngStream rng(11);
  int disagreements = 0;
  const int trials = 80;
  for (int trial = 0; trial < trials; ++trial) {
    const Dataset d = instance(rng, 30, 8, 2, 0.2 + 0.02 * trial);
    const FittedModel f = fit_model(d, ModelIndexSet({1, 4, 6}));
    HConfig cfg;
    cfg.early_stop = false;
    const HResult exact = h_exhaustive(d, f, 1.0);
    const HResult pgd = h_pgd(d, f, cfg);
    CHECK(pgd.objective >= exact.objective * (1.0 - 1e-9));
    cfg.epsilon = exact.objective * 1.5;
    cfg.early_stop = true;
    const int h = h_pgd(d, f, cfg).h;
    disagreements += h == 1;
  }
  CHECK(disagreements < trials / 10);
}

TEST_CASE("exhaustive cap") {
  RngStream rng(12);
  const Dataset d = instance(rng, 40, 16, 2, 1.0);
  CHECK_THROWS_AS(h_exhaustive(d, fit_model(d, ModelIndexSet({0, 1})), 1.0), CapExceeded);
  CHECK_NOTHROW(h_exhaustive(d, fit_model(d, ModelIndexSet({0, 1})), 1.0, 16));
}

TEST_CASE("monte-carlo E[h] lies in [0, 1] and is reproducible") {
  RngStream rng(13);
  const Dataset d = instance(rng, 30, 5, 2, 1.0);
  const FittedModel f = fit_model(d, ModelIndexSet({0, 1, 3}));
  HConfig cfg;
  RngStream a(77), b(77);
  const double ea = expected_h_monte_carlo(d, f, cfg, 50, a);
  const double eb = expected_h_monte_carlo(d, f, cfg, 50, b);
  CHECK(ea == eb);
  CHECK((ea >= 0.0 && ea <= 1.0));
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include "eas/errors.hpp"
#include "eas/model.hpp"

using namespace eas;

namespace {

DenseMatrix gaussian(RngStream& rng, int r, int c) {
  DenseMatrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

Dataset make_data(std::uint64_t seed, int n, int p, int q) {
  RngStream rng(seed);
  DenseMatrix x = gaussian(rng, p, n);
  DenseMatrix b = gaussian(rng, q, p);
  DenseMatrix y = b * x + gaussian(rng, q, n);
  return Dataset(std::move(y), std::move(x));
}

}  // namespace

TEST_CASE("dataset validation") {
  CHECK_THROWS(Dataset(DenseMatrix::Zero(2, 5), DenseMatrix::Zero(3, 4)));
  DenseMatrix x = DenseMatrix::Ones(2, 3);
  x(0, 0) = std::nan("");
  CHECK_THROWS(Dataset(DenseMatrix::Ones(1, 3), x));
  const Dataset d = make_data(1, 10, 3, 2);
  CHECK(d.n() == 10);
  CHECK(d.p() == 3);
  CHECK(d.q() == 2);
  CHECK(d.gram().isApprox(d.x() * d.x().transpose()));
  CHECK(d.cross().isApprox(d.x() * d.y().transpose()));
}

TEST_CASE("model index set") {
  const ModelIndexSet m(std::vector<int>{4, 1});
  CHECK(m.indices() == std::vector<int>{1, 4});
  CHECK(m.to_string() == "{2,5}");
  CHECK(m.one_based() == std::vector<int>{2, 5});
  CHECK(ModelIndexSet::from_one_based({2, 5}) == m);
  CHECK(m.with(0).indices() == std::vector<int>{0, 1, 4});
  CHECK(m.without(4).indices() == std::vector<int>{1});
  CHECK(m.contains(4));
  CHECK_FALSE(m.contains(2));
  CHECK_THROWS_AS(ModelIndexSet(std::vector<int>{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ModelIndexSet(std::vector<int>{-1}), std::invalid_argument);
  CHECK_THROWS(ModelIndexSet::from_one_based({0}));
}

TEST_CASE("noiseless fit on orthonormal rows") {
  const int n = 8;
  DenseMatrix x = DenseMatrix::Zero(2, n);
  x(0, 0) = 1.0;
  x(1, 1) = 1.0;
  DenseMatrix b(3, 2);
  b << 1.0, -2.0, 0.5, 3.0, 4.0, 1.0;
  DenseMatrix y = b * x;
  const Dataset d(y, x);
  const FittedModel f = fit_model(d, ModelIndexSet({0, 1}));
  REQUIRE(f.full_rank);
  CHECK((f.coef - b).norm() < 1e-12);
  CHECK(f.residual_cross.norm() < 1e-12);
  CHECK_FALSE(f.residual_factor.has_value());
  CHECK(f.log_det_residual == kNegInf);
  CHECK(log_mass_prefactor(f, n, 3) == kNegInf);
}

TEST_CASE("duplicate predictor rows are rank deficient") {
  RngStream rng(2);
  DenseMatrix x = gaussian(rng, 3, 20);
  x.row(2) = x.row(0);
  const Dataset d(gaussian(rng, 2, 20), x);
  const FittedModel f = fit_model(d, ModelIndexSet({0, 2}));
  CHECK_FALSE(f.full_rank);
  CHECK(log_gf_mass(f, 1, 20, 2).log_mass == kNegInf);
  CHECK(fit_model(d, ModelIndexSet({0, 1})).full_rank);
}

TEST_CASE("coefficients match an SVD pseudo-inverse solve") {
  const Dataset d = make_data(3, 30, 5, 2);
  const ModelIndexSet m({0, 2, 3});
  const FittedModel f = fit_model(d, m);
  REQUIRE(f.full_rank);
  const DenseMatrix xm = model_rows(d.x(), m);
  // B^T = argmin ||X_M^T B^T - Y^T||
  Eigen::JacobiSVD<DenseMatrix> svd(xm.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const DenseMatrix oracle = svd.solve(d.y().transpose()).transpose();
  CHECK((f.coef - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("residual cross matches the explicit hat matrix") {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const Dataset d = make_data(seed, 60 + static_cast<int>(seed) * 10, 6, 3);
    const ModelIndexSet m({1, 4, 5});
    const FittedModel f = fit_model(d, m);
    const DenseMatrix xm = model_rows(d.x(), m);
    const DenseMatrix h = xm.transpose() * (xm * xm.transpose()).inverse() * xm;
    const DenseMatrix eye = DenseMatrix::Identity(d.n(), d.n());
    const DenseMatrix explicit_sigma = d.y() * (eye - h) * d.y().transpose();
    CHECK((f.residual_cross - explicit_sigma).norm() <= 1e-6 * explicit_sigma.norm());
    CHECK(f.log_det_residual == doctest::Approx(std::log(explicit_sigma.determinant())));
  }
}

TEST_CASE("nested models shrink the residual determinant") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = make_data(100 + seed, 25, 6, 2);
    const FittedModel small = fit_model(d, ModelIndexSet({1, 3}));
    const FittedModel big = fit_model(d, ModelIndexSet({1, 3, 4}));
    CHECK(big.log_det_residual <= small.log_det_residual + 1e-12);
  }
}

TEST_CASE("log mass formula and mass ratio") {
  const Dataset d = make_data(7, 30, 4, 2);
  const ModelIndexSet m1({0, 1}), m2({2, 3});
  const FittedModel f1 = fit_model(d, m1), f2 = fit_model(d, m2);
  const double n = 30, q = 2, k = 2;
  const double expected = log_multivariate_gamma(2, (n - k) / 2) + q * k / 2 * std::log(M_PI) -
                          (n - k - q) / 2 * std::log(f1.residual_cross.determinant());
  CHECK(log_mass_prefactor(f1, 30, 2) == doctest::Approx(expected).epsilon(1e-12));
  const double ratio = std::exp(log_gf_mass(f2, 1, 30, 2).log_mass - log_gf_mass(f1, 1, 30, 2).log_mass);
  const double oracle =
      std::pow(f1.residual_cross.determinant() / f2.residual_cross.determinant(), (n - k - q) / 2);
  CHECK(ratio == doctest::Approx(oracle).epsilon(1e-9));

  const GfWeight off = log_gf_mass(f1, 0, 30, 2, 0.5);
  CHECK(off.log_mass == kNegInf);
  CHECK_FALSE(off.admissible);
  CHECK(off.epsilon == 0.5);
}

TEST_CASE("size indicator excludes |M| >= n - q") {
  const Dataset d = make_data(9, 8, 6, 3);
  // n - q = 5
  CHECK(std::isfinite(log_mass_prefactor(fit_model(d, ModelIndexSet({0, 1, 2, 3})), 8, 3)));
  CHECK(log_mass_prefactor(fit_model(d, ModelIndexSet({0, 1, 2, 3, 4})), 8, 3) == kNegInf);
}

TEST_CASE("log mass decreases with log det at fixed size") {
  RngStream rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = make_data(200 + trial, 20, 5, 2);
    const FittedModel a = fit_model(d, ModelIndexSet({0, 1}));
    const FittedModel b = fit_model(d, ModelIndexSet({2, 4}));
    const bool a_smaller_det = a.log_det_residual < b.log_det_residual;
    CHECK((log_mass_prefactor(a, 20, 2) > log_mass_prefactor(b, 20, 2)) == a_smaller_det);
  }
}

TEST_CASE("fit is invariant to the input order of indices") {
  const Dataset d = make_data(5, 20, 5, 2);
  const FittedModel a = fit_model(d, ModelIndexSet({3, 0, 2}));
  const FittedModel b = fit_model(d, ModelIndexSet({0, 2, 3}));
  CHECK(a.coef == b.coef);
  CHECK(a.log_det_residual == b.log_det_residual);
}

TEST_CASE("normalization") {
  const std::vector<double> one{-3.0};
  CHECK(normalize_log_masses(one)[0] == 1.0);
  const std::vector<double> two{2.0, 2.0};
  CHECK(normalize_log_masses(two)[0] == doctest::Approx(0.5));
  const std::vector<double> ratio{std::log(1.0), std::log(3.0)};
  const auto r = normalize_log_masses(ratio);
  CHECK(r[0] == doctest::Approx(0.25));
  CHECK(r[1] == doctest::Approx(0.75));
  const std::vector<double> mixed{kNegInf, -1e4, -1e4 + std::log(3.0)};
  const auto m = normalize_log_masses(mixed);
  CHECK(m[0] == 0.0);
  CHECK(m[2] == doctest::Approx(0.75));
  CHECK(std::abs(m[0] + m[1] + m[2] - 1.0) < 1e-12);
  const std::vector<double> none{kNegInf, kNegInf};
  CHECK_THROWS_AS(normalize_log_masses(none), AllInadmissible);
  std::vector<GfWeight> w{{std::log(1.0), true, 1.0}, {std::log(3.0), true, 1.0}};
  CHECK(normalize_masses(w)[1] == doctest::Approx(0.75));
}

TEST_CASE("preprocess centers rows") {
  const Dataset d = make_data(6, 15, 3, 2);
  const Dataset c = preprocess(d, true, true);
  CHECK(c.x().rowwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(c.y().rowwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd var = c.x().rowwise().squaredNorm() / (15 - 1);
  CHECK(var.isApprox(Eigen::VectorXd::Ones(3)));
}

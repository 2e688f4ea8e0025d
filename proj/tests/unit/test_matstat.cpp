#include <doctest.h>

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "eas/errors.hpp"
#include "eas/matstat.hpp"

using namespace eas;

namespace {

DenseMatrix random_spd(RngStream& rng, int k) {
  DenseMatrix a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + 5.0 * DenseMatrix::Identity(k, k);
}

}  // namespace

TEST_CASE("cholesky of identity and diagonal") {
  const SpdFactor f = cholesky(DenseMatrix::Identity(4, 4));
  CHECK(f.lower().isApprox(DenseMatrix::Identity(4, 4)));
  CHECK(f.log_det() == doctest::Approx(0.0));

  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d.diagonal() << 4.0, 9.0, 16.0;
  const SpdFactor g = cholesky(d);
  CHECK(g.lower()(0, 0) == doctest::Approx(2.0));
  CHECK(g.lower()(1, 1) == doctest::Approx(3.0));
  CHECK(g.lower()(2, 2) == doctest::Approx(4.0));
  CHECK(g.log_det() == doctest::Approx(std::log(576.0)));
}

TEST_CASE("cholesky reconstructs A A^T + 5I") {
  RngStream rng(11);
  for (int k : {1, 2, 5, 12}) {
    const DenseMatrix s = random_spd(rng, k);
    const SpdFactor f = cholesky(s);
    CHECK((f.reconstruct() - s).norm() <= 1e-12 * s.norm());
    CHECK(f.log_det() == doctest::Approx(std::log(s.determinant())).epsilon(1e-10));
    const DenseMatrix b = DenseMatrix::Random(k, 3);
    CHECK((s * f.solve(b) - b).norm() <= 1e-10 * b.norm());
    CHECK(f.trace_solve(s) == doctest::Approx(k));
  }
}

TEST_CASE("cholesky rejects indefinite and asymmetric input") {
  DenseMatrix s(2, 2);
  s << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(cholesky(s), NotPositiveDefinite);
  DenseMatrix z = DenseMatrix::Zero(2, 2);
  CHECK_THROWS_AS(cholesky(z), NotPositiveDefinite);
  DenseMatrix a(2, 2);
  a << 2.0, 1.0, 0.0, 2.0;
  CHECK_THROWS_AS(cholesky(a), std::invalid_argument);
}

TEST_CASE("log multivariate gamma against high-precision values") {
  // mpmath, 30 digits: q(q-1)/4 log(pi) + sum log Gamma(a - j/2)
  CHECK(log_multivariate_gamma(1, 2.5) == doctest::Approx(0.28468287047291915963).epsilon(1e-13));
  CHECK(log_multivariate_gamma(2, 3.0) == doctest::Approx(1.5501949939575645561).epsilon(1e-13));
  CHECK(log_multivariate_gamma(3, 4.5) == doctest::Approx(7.1635644711916717073).epsilon(1e-13));
  CHECK(log_multivariate_gamma(5, 10.25) == doctest::Approx(61.583616320011884547).epsilon(1e-13));
  CHECK(log_multivariate_gamma(10, 30.0) == doctest::Approx(663.4363124698033421).epsilon(1e-13));
  // q = 2, a = 3: 1/2 log pi + log Gamma(3) + log Gamma(2.5)
  const double direct = 0.5 * std::log(M_PI) + std::lgamma(3.0) + std::lgamma(2.5);
  CHECK(log_multivariate_gamma(2, 3.0) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("log multivariate gamma domain") {
  CHECK_THROWS_AS(log_multivariate_gamma(3, 1.0), DomainError);
  CHECK_NOTHROW(log_multivariate_gamma(3, 1.01));
  CHECK_THROWS_AS(log_multivariate_gamma(2, 0.5), DomainError);
}

TEST_CASE("power iteration matches the symmetric eigensolver") {
  RngStream rng(5);
  for (int k : {1, 3, 20}) {
    const DenseMatrix s = random_spd(rng, k);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(s);
    CHECK(power_iteration_max_eigenvalue(s) ==
          doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-6));
  }
}

TEST_CASE("wishart is symmetric with mean dof * scale") {
  RngStream rng(21);
  DenseMatrix scale(3, 3);
  scale << 2.0, 0.5, 0.1, 0.5, 1.0, 0.3, 0.1, 0.3, 1.5;
  const SpdFactor f = cholesky(scale);
  const int dof = 7;
  const int draws = 20000;
  DenseMatrix mean = DenseMatrix::Zero(3, 3);
  for (int i = 0; i < draws; ++i) {
    const DenseMatrix w = sample_wishart(rng, dof, f);
    CHECK_EQ((w - w.transpose()).cwiseAbs().maxCoeff(), 0.0);
    mean += w;
  }
  mean /= draws;
  CHECK((mean - dof * scale).norm() <= 0.03 * (dof * scale).norm());
  CHECK_THROWS_AS(sample_wishart(rng, 2, f), DomainError);
}

TEST_CASE("matrix normal moments") {
  RngStream rng(3);
  DenseMatrix u(2, 2), v(2, 2);
  u << 1.0, 0.4, 0.4, 2.0;
  v << 1.0, -0.3, -0.3, 0.5;
  const SpdFactor lu = cholesky(u), lv = cholesky(v);
  const DenseMatrix mean = DenseMatrix::Constant(2, 2, 1.5);
  const int draws = 40000;
  DenseMatrix acc = DenseMatrix::Zero(2, 2);
  double cov_00_11 = 0.0;  // Cov(Z00, Z11) = U01 V01
  for (int i = 0; i < draws; ++i) {
    const DenseMatrix z = sample_matrix_normal(rng, mean, lu, lv);
    acc += z;
    cov_00_11 += (z(0, 0) - 1.5) * (z(1, 1) - 1.5);
  }
  acc /= draws;
  CHECK((acc - mean).cwiseAbs().maxCoeff() < 0.03);
  CHECK(cov_00_11 / draws == doctest::Approx(u(0, 1) * v(0, 1)).epsilon(0.1));
}

TEST_CASE("matrix-t mean and scalar quantiles") {
  RngStream rng(8);
  SUBCASE("mean is the location") {
    DenseMatrix loc(2, 3);
    loc << 1.0, -2.0, 0.5, 3.0, 0.0, -1.0;
    const SpdFactor row = cholesky(DenseMatrix::Identity(2, 2));
    const SpdFactor col = cholesky(4.0 * DenseMatrix::Identity(3, 3));
    DenseMatrix acc = DenseMatrix::Zero(2, 3);
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) acc += sample_matrix_t(rng, 8.0, loc, row, col);
    acc /= draws;
    // entry sd = sqrt((1/4) / (dof - 2)); 5 standard errors
    CHECK((acc - loc).cwiseAbs().maxCoeff() < 5.0 * std::sqrt(0.25 / 6.0 / draws));
  }
  SUBCASE("1 x 1 case is a scaled student t") {
    // q = m = 1: location + sqrt(s / (g dof)) * t_dof
    const double dof = 5.0;
    const SpdFactor row = cholesky(DenseMatrix::Constant(1, 1, 1.0));
    const SpdFactor col = cholesky(DenseMatrix::Constant(1, 1, 1.0));
    const int draws = 100000;
    int below = 0, below90 = 0;
    boost::math::students_t t(dof);
    const double c975 = boost::math::quantile(t, 0.975) / std::sqrt(dof);
    const double c90 = boost::math::quantile(t, 0.9) / std::sqrt(dof);
    for (int i = 0; i < draws; ++i) {
      const double x = sample_matrix_t(rng, dof, DenseMatrix::Zero(1, 1), row, col)(0, 0);
      below += x < c975;
      below90 += x < c90;
    }
    CHECK(static_cast<double>(below) / draws == doctest::Approx(0.975).epsilon(0.003));
    CHECK(static_cast<double>(below90) / draws == doctest::Approx(0.9).epsilon(0.006));
  }
  const SpdFactor one = cholesky(DenseMatrix::Identity(1, 1));
  CHECK_THROWS_AS(sample_matrix_t(rng, 0.0, DenseMatrix::Zero(1, 1), one, one),
                  DegreesOfFreedomError);
}

TEST_CASE("rng streams are reproducible and independent of parent draws") {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  CHECK(a.uniform() == b.uniform());
  CHECK(a.normal() == b.normal());
  RngStream a2(42, 3);
  CHECK(a2.uniform() != c.uniform());
  RngStream p1(9), p2(9);
  p2.uniform();
  RngStream d1 = p1.derive(5), d2 = p2.derive(5);
  CHECK(d1.uniform() == d2.uniform());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(a.index(7) < 7u);
  }
}

#include <doctest.h>

#include <random>

#include "qbd/orthopoly.hpp"

using namespace qbd;

namespace {

double binom(double top, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r *= (top - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("jacobi chain coefficients at small orders") {
  auto c = jacobiChainCoeffs(0.0, 0.0, 0);
  CHECK(c.a == doctest::Approx(0.5));
  CHECK(c.b == doctest::Approx(0.5));
  CHECK(c.c == 0.0);

  c = jacobiChainCoeffs(0.0, 0.0, 1);
  CHECK(c.a == doctest::Approx(1.0 / 3));
  CHECK(c.b == doctest::Approx(0.5));
  CHECK(c.c == doctest::Approx(1.0 / 6));

  for (double a : {-0.5, 0.0, 2.5})
    for (double b : {-0.9, 1.0, 7.0}) CHECK(jacobiChainCoeffs(a, b, 0).c == 0.0);
}

TEST_CASE("jacobi chain sums to one over the tested range") {
  double worst = 0;
  for (double a : {-0.99, -0.5, 0.0, 0.3, 1.0, 5.0, 20.0})
    for (double b : {-0.99, -0.5, 0.0, 0.7, 3.0, 20.0})
      for (int n = 0; n <= 200; ++n) {
        const auto c = jacobiChainCoeffs(a, b, n);
        CHECK(c.a > 0);
        CHECK(c.c >= 0);
        if (n > 0) CHECK(c.c > 0);
        worst = std::max(worst, std::abs(c.a + c.b + c.c - 1));
      }
  CHECK(worst <= 1e-15);
}

TEST_CASE("jacobi chain rejects parameters at or below -1") {
  CHECK_THROWS_AS(jacobiChainCoeffs(-1.0, 0.0, 2), DomainError);
  CHECK_THROWS_AS(jacobiChainCoeffs(0.0, -1.5, 2), DomainError);
  try {
    jacobiChainCoeffs(0.0, -2.0, 1);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("beta") != std::string::npos);
  }
}

TEST_CASE("laguerre chain coefficients") {
  auto c = laguerreChainCoeffs(0.0, 0, LaguerreVariant::EndpointBinomial);
  CHECK(c.a == 1.0);
  CHECK(c.b == -1.0);
  CHECK(c.c == 0.0);

  c = laguerreChainCoeffs(2.0, 3, LaguerreVariant::EndpointBinomial);
  CHECK(c.a == 4.0);
  CHECK(c.b == -9.0);
  CHECK(c.c == 5.0);

  c = laguerreChainCoeffs(2.0, 3, LaguerreVariant::EndpointOne);
  CHECK(c.a == 6.0);
  CHECK(c.b == -9.0);
  CHECK(c.c == 3.0);

  for (auto v : {LaguerreVariant::EndpointBinomial, LaguerreVariant::EndpointOne})
    for (double a : {-0.5, 0.0, 1.25, 9.0})
      for (int n = 0; n < 50; ++n) {
        const auto k = laguerreChainCoeffs(a, n, v);
        CHECK(k.a + k.b + k.c == 0.0);
        CHECK(k.a > 0);
        CHECK(k.b < 0);
        if (n > 0 || a >= 0) CHECK(k.c >= 0);
      }
  CHECK_THROWS_AS(laguerreChainCoeffs(-1.0, 0, LaguerreVariant::EndpointOne), DomainError);
}

TEST_CASE("standard jacobi endpoint values") {
  CHECK(evalJacobi(1.0, 2.0, 3, 1.0, JacobiConvention::Standard) == doctest::Approx(4.0));
  for (double a : {0.0, 0.5, 2.0})
    for (double b : {0.0, 1.5, 3.0})
      for (int n = 0; n <= 12; ++n) {
        const double sign = n % 2 ? -1.0 : 1.0;
        CHECK(evalJacobi(a, b, n, 1.0, JacobiConvention::Standard) == doctest::Approx(binom(n + a, n)));
        CHECK(evalJacobi(a, b, n, -1.0, JacobiConvention::Standard) ==
              doctest::Approx(sign * binom(n + b, n)));
        CHECK(evalJacobi(a, b, n, 1.0, JacobiConvention::UnitAtOne) == doctest::Approx(1.0).epsilon(1e-13));
      }
}

TEST_CASE("standard jacobi satisfies its three-term recurrence") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> t(-1, 1);
  for (double a : {0.0, 0.5, 3.0})
    for (double b : {-0.5, 1.0, 4.0})
      for (int n = 1; n <= 30; ++n)
        for (int i = 0; i < 100; ++i) {
          const double x = t(rng);
          const double p0 = evalJacobi(a, b, n - 1, x, JacobiConvention::Standard);
          const double p1 = evalJacobi(a, b, n, x, JacobiConvention::Standard);
          const double p2 = evalJacobi(a, b, n + 1, x, JacobiConvention::Standard);
          const double m = n + 1, c = 2 * m + a + b;
          const double lhs = 2 * m * (m + a + b) * (c - 2) * p2;
          const double rhs = (c - 1) * (c * (c - 2) * x + a * a - b * b) * p1 - 2 * (m + a - 1) * (m + b - 1) * c * p0;
          const double scale = 2 * m * (m + a + b) * (c - 2);
          CHECK(std::abs(lhs - rhs) / scale <= 1e-12 * std::max(1.0, std::abs(p2)));
        }
}

TEST_CASE("gauss rules") {
  const auto r1 = gauss1DRule(JacobiWeight{0, 0}, 1);
  REQUIRE(r1.nodes.size() == 1);
  CHECK(r1.nodes(0) == doctest::Approx(0.5));
  CHECK(r1.weights(0) == doctest::Approx(1.0));

  for (double a : {-0.5, 0.0, 1.0, 4.5})
    for (double b : {-0.7, 0.0, 2.0}) {
      const auto r = gauss1DRule(JacobiWeight{a, b}, 4);
      CHECK(r.exactness_degree == 7);
      CHECK(std::abs(r.weights.sum() - 1) <= 1e-13);
      CHECK((r.weights.array() > 0).all());
      CHECK((r.nodes.array() > 0).all());
      CHECK((r.nodes.array() < 1).all());
      CHECK(std::abs(r.weights.dot(r.nodes) - (a + 1) / (a + b + 2)) <= 1e-13);
      double moment = 1;
      for (int k = 1; k <= 7; ++k) {
        moment *= (a + k) / (a + b + k + 1);
        const double q = r.weights.dot(r.nodes.array().pow(k).matrix());
        CHECK(std::abs(q - moment) <= 1e-12 * moment);
      }
    }

  const auto lg = gauss1DRule(LaguerreWeight{0}, 4);
  CHECK(std::abs(lg.weights.dot(lg.nodes) - 1) <= 1e-12);
  CHECK(std::abs(lg.weights.dot(lg.nodes.array().square().matrix()) - 2) <= 1e-12);
  double moment = 1;
  for (int k = 1; k <= 7; ++k) {
    moment *= k;
    CHECK(std::abs(lg.weights.dot(lg.nodes.array().pow(k).matrix()) - moment) <= 1e-12 * moment);
  }
  CHECK_THROWS_AS(gauss1DRule(JacobiWeight{0, 0}, 0), UsageError);
}

TEST_CASE("gauss rule orthogonality of the unit-at-one polynomials") {
  for (double a : {-0.5, 0.0, 2.0})
    for (double b : {0.0, 1.5}) {
      const int m = 8;
      const auto r = gauss1DRule(JacobiWeight{a, b}, m);
      for (int n = 0; n < 2 * m; ++n)
        for (int np = 0; np < n && n + np <= 2 * m - 1; ++np) {
          double s = 0;
          for (int i = 0; i < m; ++i)
            s += r.weights(i) * evalJacobi(a, b, n, r.nodes(i), JacobiConvention::UnitAtOne) *
                 evalJacobi(a, b, np, r.nodes(i), JacobiConvention::UnitAtOne);
          CHECK(std::abs(s) <= 1e-11);
        }
    }
}

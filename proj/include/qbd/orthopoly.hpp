#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <variant>

#include "qbd/errors.hpp"

namespace qbd {

/// Three-term recurrence weights x p_n = a p_{n+1} + b p_n + c p_{n-1} (up to sign).
template <typename Scalar = double>
struct ChainCoefficients {
  Scalar a{0};
  Scalar b{0};
  Scalar c{0};
};

enum class LaguerreVariant { EndpointBinomial, EndpointOne };
enum class JacobiConvention { Standard, UnitAtOne };

/// Normalized weight x^alpha (1-x)^beta on [0,1].
struct JacobiWeight {
  double alpha{0};
  double beta{0};
};

/// Normalized weight x^alpha e^{-x} on [0, inf).
struct LaguerreWeight {
  double alpha{0};
};

using Weight1D = std::variant<JacobiWeight, LaguerreWeight>;

template <typename Scalar = double>
struct QuadratureRule1D {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
  int exactness_degree{0};
};

namespace detail {

template <typename Scalar>
void requireAboveMinusOne(Scalar v, const char* name) {
  if (!(v > Scalar(-1)))
    throw DomainError(std::string("parameter ") + name + " must be > -1, got " +
                      std::to_string(static_cast<double>(v)));
}

inline void requireNonnegative(int n, const char* name) {
  if (n < 0) throw DomainError(std::string(name) + " must be >= 0, got " + std::to_string(n));
}

}  // namespace detail

/// Jacobi chain for Q_n with Q_n(1) = 1, orthogonal for x^alpha (1-x)^beta on [0,1].
template <typename Scalar>
ChainCoefficients<Scalar> jacobiChainCoeffs(Scalar alpha, Scalar beta, int n) {
  detail::requireAboveMinusOne(alpha, "alpha");
  detail::requireAboveMinusOne(beta, "beta");
  detail::requireNonnegative(n, "n");
  const Scalar s = alpha + beta;
  const Scalar m = Scalar(n);
  ChainCoefficients<Scalar> r;
  if (n == 0) {
    r.a = (beta + 1) / (s + 2);
    r.c = 0;
  } else {
    r.a = (m + beta + 1) * (m + s + 1) / ((2 * m + s + 1) * (2 * m + s + 2));
    r.c = m * (m + alpha) / ((2 * m + s) * (2 * m + s + 1));
  }
  r.b = 1 - r.a - r.c;
  return r;
}

/// Laguerre chain for -x L_n = a L_{n+1} + b L_n + c L_{n-1}.
template <typename Scalar>
ChainCoefficients<Scalar> laguerreChainCoeffs(Scalar alpha, int n, LaguerreVariant variant) {
  detail::requireAboveMinusOne(alpha, "alpha");
  detail::requireNonnegative(n, "n");
  const Scalar m = Scalar(n);
  ChainCoefficients<Scalar> r;
  r.b = -(2 * m + alpha + 1);
  if (variant == LaguerreVariant::EndpointBinomial) {
    r.a = m + 1;
    r.c = m + alpha;
  } else {
    r.a = m + alpha + 1;
    r.c = m;
  }
  return r;
}

/// Forward recurrence (sign*x) p_m = a_m p_{m+1} + b_m p_m + c_m p_{m-1}, p_0 = 1.
template <typename Scalar, typename CoeffFn>
Scalar evalChain(CoeffFn&& coeffs, int n, Scalar x, Scalar sign = Scalar(1)) {
  Scalar prev = 0;
  Scalar cur = 1;
  for (int m = 0; m < n; ++m) {
    const ChainCoefficients<Scalar> k = coeffs(m);
    const Scalar next = ((sign * x - k.b) * cur - k.c * prev) / k.a;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// All values p_0..p_n of a chain at x.
template <typename Scalar, typename CoeffFn>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evalChainAll(CoeffFn&& coeffs, int n, Scalar x,
                                                     Scalar sign = Scalar(1)) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p(n + 1);
  p(0) = 1;
  Scalar prev = 0;
  for (int m = 0; m < n; ++m) {
    const ChainCoefficients<Scalar> k = coeffs(m);
    p(m + 1) = ((sign * x - k.b) * p(m) - k.c * prev) / k.a;
    prev = p(m);
  }
  return p;
}

/// G_n = s^n P_n^{(a,b)}(u/s) as a polynomial in (u, s); s enters only via s and s2 = s^2,
/// so callers may pass s2 alone when a == b.
template <typename Scalar>
Scalar homogeneousJacobi(Scalar a, Scalar b, int n, Scalar u, Scalar s, Scalar s2) {
  if (n == 0) return Scalar(1);
  Scalar g0 = 1;
  Scalar g1 = ((a - b) * s + (a + b + 2) * u) / 2;
  if (a == b) g1 = (a + 1) * u;
  for (int m = 2; m <= n; ++m) {
    const Scalar mm = Scalar(m);
    const Scalar c = 2 * mm + a + b;
    const Scalar lin = (a == b) ? c * (c - 2) * u : c * (c - 2) * u + (a * a - b * b) * s;
    const Scalar num = (c - 1) * lin * g1 - 2 * (mm + a - 1) * (mm + b - 1) * c * s2 * g0;
    const Scalar g2 = num / (2 * mm * (mm + a + b) * (c - 2));
    g0 = g1;
    g1 = g2;
  }
  return g1;
}

/// Jacobi polynomial: standard P_n^{(alpha,beta)}(t) on [-1,1], or the unit-at-1 Q_n on [0,1]
/// orthogonal for x^alpha (1-x)^beta.
template <typename Scalar>
Scalar evalJacobi(Scalar alpha, Scalar beta, int n, Scalar t, JacobiConvention convention) {
  detail::requireNonnegative(n, "n");
  if (convention == JacobiConvention::Standard)
    return homogeneousJacobi<Scalar>(alpha, beta, n, t, Scalar(1), Scalar(1));
  detail::requireAboveMinusOne(alpha, "alpha");
  detail::requireAboveMinusOne(beta, "beta");
  return evalChain<Scalar>([&](int m) { return jacobiChainCoeffs<Scalar>(alpha, beta, m); }, n, t);
}

/// Gauss rule from the symmetric tridiagonal recurrence matrix, normalized to total mass 1.
template <typename Scalar = double>
QuadratureRule1D<Scalar> gauss1DRule(const Weight1D& weight, int m) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (m < 1) throw UsageError("quadrature order m must be >= 1, got " + std::to_string(m));
  Vec diag(m);
  Vec off(std::max(m - 1, 0));
  bool symmetric = false;
  if (const auto* jw = std::get_if<JacobiWeight>(&weight)) {
    const Scalar a = Scalar(jw->alpha);
    const Scalar b = Scalar(jw->beta);
    for (int n = 0; n < m; ++n) {
      const auto k = jacobiChainCoeffs<Scalar>(a, b, n);
      diag(n) = k.b;
      if (n + 1 < m) {
        const Scalar prod = k.a * jacobiChainCoeffs<Scalar>(a, b, n + 1).c;
        if (!(prod > 0)) throw NumericError("non-positive off-diagonal in Jacobi recurrence matrix");
        off(n) = std::sqrt(prod);
      }
    }
    symmetric = (jw->alpha == jw->beta);
  } else {
    const Scalar a = Scalar(std::get<LaguerreWeight>(weight).alpha);
    for (int n = 0; n < m; ++n) {
      const auto k = laguerreChainCoeffs<Scalar>(a, n, LaguerreVariant::EndpointBinomial);
      diag(n) = -k.b;
      if (n + 1 < m) {
        const Scalar prod =
            k.a * laguerreChainCoeffs<Scalar>(a, n + 1, LaguerreVariant::EndpointBinomial).c;
        if (!(prod > 0))
          throw NumericError("non-positive off-diagonal in Laguerre recurrence matrix");
        off(n) = std::sqrt(prod);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw NumericError("tridiagonal eigensolver failed to converge for m=" + std::to_string(m));
  QuadratureRule1D<Scalar> rule;
  rule.nodes = es.eigenvalues();
  rule.weights = es.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();
  if (symmetric) {
    // mirror about 1/2 so odd moments about the centre cancel exactly
    Vec nodes = rule.nodes;
    Vec weights = rule.weights;
    for (int i = 0; i < m; ++i) {
      const int j = m - 1 - i;
      rule.nodes(i) = (nodes(i) + (Scalar(1) - nodes(j))) / 2;
      rule.weights(i) = (weights(i) + weights(j)) / 2;
    }
    if (m % 2 == 1) rule.nodes(m / 2) = Scalar(1) / 2;
    rule.weights /= rule.weights.sum();
  }
  rule.exactness_degree = 2 * m - 1;
  return rule;
}

}  // namespace qbd

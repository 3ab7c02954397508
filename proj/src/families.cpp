#include "qbd/families.hpp"

#include <cmath>
#include <stdexcept>

#include "qbd/coefficients.hpp"

namespace qbd {

namespace {

// log((a)_m) for a > 0
double logPoch(double a, int m) { return std::lgamma(a + m) - std::lgamma(a); }

double pochRatio(double a, int m) {
  // (a)_m / m!
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= (a + i) / (i + 1);
  return r;
}

void checkLevel(int n) {
  if (n < 0) throw DomainError("level n must be >= 0, got " + std::to_string(n));
}

// log of 1 / ||Q_h||^2 for the unit-at-1 Jacobi chain with weight x^a (1-x)^b
double logJacobiNorm1D(double a, double b, int h) {
  const double logC = std::lgamma(a + b + 2) - std::lgamma(a + 1) - std::lgamma(b + 1);
  const double logSigma = std::lgamma(h + b + 1) - std::lgamma(b + 1) - std::lgamma(h + 1.0);
  const double lead =
      (h == 0) ? std::lgamma(a + b + 2) : std::log(2.0 * h + a + b + 1) + std::lgamma(h + a + b + 1);
  const double logNu =
      logC + std::lgamma(h + a + 1) + std::lgamma(h + b + 1) - std::lgamma(h + 1.0) - lead;
  return 2 * logSigma - logNu;
}

double logLaguerreNorm1D(double a, int h, LaguerreVariant v) {
  if (v == LaguerreVariant::EndpointOne) return logPoch(a + 1, h) - std::lgamma(h + 1.0);
  return std::lgamma(a + 1) + std::lgamma(h + 1.0) - std::lgamma(h + a + 1);
}

double logParabolicNorm(double alpha, double beta, int j, int k) {
  const double h = alpha + beta;
  const double phase =
      (k == 0) ? std::lgamma(2 * beta + 2) : std::log(2.0 * k + 2 * beta + 1) + std::lgamma(k + 2 * beta + 1);
  const double level = (j == 0) ? std::lgamma(h + 2.5)
                                : std::log(2.0 * j - k + h + 1.5) + std::lgamma(j + h + 1.5);
  return 0.5 * std::log(M_PI) + phase + level + std::lgamma(j - k + alpha + 1) -
         (2 * beta + 1) * std::log(2.0) - std::lgamma(j + beta + 1.5) - std::lgamma(h + 2.5) -
         std::lgamma(alpha + 1) - std::lgamma(beta + 1) - std::lgamma(j - k + 1.0) -
         std::lgamma(k + 1.0);
}

double logTriangleNorm(const FamilySpec& spec, int n, int k) {
  const double a = spec.alpha, b = spec.beta, g = spec.gamma;
  const double s = a + b + g;
  const double t = b + g;
  // log nu_{n,k}; the ratios (n+k+s+2)/(2n+s+2) at n=k=0 and (k+t+1)/(2k+t+1) at k=0 are 1
  double logNu = logPoch(a + 1, n - k) + logPoch(b + 1, k) + logPoch(g + 1, k) + logPoch(t + 2, n + k) -
                 std::lgamma(n - k + 1.0) - std::lgamma(k + 1.0) - logPoch(t + 2, k) -
                 logPoch(s + 3, n + k);
  if (n > 0) logNu += std::log(n + k + s + 2) - std::log(2.0 * n + s + 2);
  if (k > 0) logNu += std::log(k + t + 1) - std::log(2.0 * k + t + 1);
  const double second = (spec.kind == FamilyKind::Triangle01) ? g : b;
  const double logSigma = logPoch(a + 1, n - k) - std::lgamma(n - k + 1.0) + logPoch(second + 1, k) -
                          std::lgamma(k + 1.0);
  return 2 * logSigma - logNu;
}

}  // namespace

std::string kindName(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::ProductJacobi: return "product-jacobi";
    case FamilyKind::ProductLaguerre: return "product-laguerre";
    case FamilyKind::Parabolic: return "parabolic";
    case FamilyKind::Triangle01: return "triangle01";
    case FamilyKind::Triangle00: return "triangle00";
  }
  return "unknown";
}

FamilyKind parseKind(const std::string& name) {
  for (FamilyKind k : {FamilyKind::ProductJacobi, FamilyKind::ProductLaguerre, FamilyKind::Parabolic,
                       FamilyKind::Triangle01, FamilyKind::Triangle00})
    if (kindName(k) == name) return k;
  throw UsageError("unknown family '" + name +
                   "' (expected product-jacobi, product-laguerre, parabolic, triangle01, triangle00)");
}

std::string variantName(LaguerreVariant v) {
  return v == LaguerreVariant::EndpointBinomial ? "endpoint-binomial" : "endpoint-one";
}

LaguerreVariant parseVariant(const std::string& name) {
  if (name == "endpoint-binomial") return LaguerreVariant::EndpointBinomial;
  if (name == "endpoint-one") return LaguerreVariant::EndpointOne;
  throw UsageError("unknown Laguerre variant '" + name + "' (expected endpoint-binomial or endpoint-one)");
}

FamilySpec FamilySpec::productJacobi(double a, double b, double c, double d) {
  FamilySpec s;
  s.kind = FamilyKind::ProductJacobi;
  s.alpha = a;
  s.beta = b;
  s.gamma = c;
  s.delta = d;
  s.validate();
  return s;
}

FamilySpec FamilySpec::productLaguerre(double a, double b, LaguerreVariant v) {
  FamilySpec s;
  s.kind = FamilyKind::ProductLaguerre;
  s.alpha = a;
  s.beta = b;
  s.variant = v;
  s.validate();
  return s;
}

FamilySpec FamilySpec::parabolic(double a, double b) {
  FamilySpec s;
  s.kind = FamilyKind::Parabolic;
  s.alpha = a;
  s.beta = b;
  s.validate();
  return s;
}

FamilySpec FamilySpec::triangle01(double a, double b, double c) {
  FamilySpec s;
  s.kind = FamilyKind::Triangle01;
  s.alpha = a;
  s.beta = b;
  s.gamma = c;
  s.validate();
  return s;
}

FamilySpec FamilySpec::triangle00(double a, double b, double c) {
  FamilySpec s = triangle01(a, b, c);
  s.kind = FamilyKind::Triangle00;
  return s;
}

std::vector<std::string> FamilySpec::paramNames() const {
  switch (kind) {
    case FamilyKind::ProductJacobi: return {"alpha", "beta", "gamma", "delta"};
    case FamilyKind::ProductLaguerre:
    case FamilyKind::Parabolic: return {"alpha", "beta"};
    case FamilyKind::Triangle01:
    case FamilyKind::Triangle00: return {"alpha", "beta", "gamma"};
  }
  return {};
}

double FamilySpec::param(const std::string& name) const {
  if (name == "alpha") return alpha;
  if (name == "beta") return beta;
  if (name == "gamma") return gamma;
  if (name == "delta") return delta;
  throw UsageError("unknown parameter '" + name + "'");
}

void FamilySpec::validate() const {
  for (const auto& name : paramNames()) {
    const double v = param(name);
    if (!std::isfinite(v) || !(v > -1.0))
      throw DomainError("parameter " + name + " must be > -1, got " + std::to_string(v));
  }
}

int axisSign(FamilyKind kind, int axis) {
  if (axis != 1 && axis != 2) throw UsageError("axis must be 1 or 2, got " + std::to_string(axis));
  switch (kind) {
    case FamilyKind::ProductJacobi:
    case FamilyKind::Parabolic: return 1;
    case FamilyKind::ProductLaguerre:
    case FamilyKind::Triangle00: return -1;
    case FamilyKind::Triangle01: return axis == 1 ? -1 : 1;
  }
  return 1;
}

Eigen::MatrixXd Band3::dense(int cols) const {
  const int r = rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(r, cols);
  auto put = [&](int i, int j, double v) {
    if (j >= 0 && j < cols) {
      M(i, j) = v;
    } else if (v != 0.0) {
      throw std::logic_error("band entry outside block columns at row " + std::to_string(i));
    }
  };
  for (int i = 0; i < r; ++i) {
    put(i, i - 1, lower(i));
    put(i, i, diag(i));
    put(i, i + 1, upper(i));
  }
  return M;
}

Band3& Band3::operator*=(double s) {
  lower *= s;
  diag *= s;
  upper *= s;
  return *this;
}

Band3& Band3::operator+=(const Band3& o) {
  lower += o.lower;
  diag += o.diag;
  upper += o.upper;
  return *this;
}

BlockCoefficients blockCoefficients(const FamilySpec& spec, int n, int axis) {
  spec.validate();
  checkLevel(n);
  if (axis != 1 && axis != 2) throw UsageError("axis must be 1 or 2, got " + std::to_string(axis));
  BlockCoefficients bc(n, axis);
  switch (spec.kind) {
    case FamilyKind::ProductJacobi:
    case FamilyKind::ProductLaguerre: {
      auto chain = [&](int ax, int h) {
        if (spec.kind == FamilyKind::ProductJacobi)
          return ax == 1 ? jacobiChainCoeffs(spec.alpha, spec.beta, h)
                         : jacobiChainCoeffs(spec.gamma, spec.delta, h);
        return laguerreChainCoeffs(ax == 1 ? spec.alpha : spec.beta, h, spec.variant);
      };
      for (int k = 0; k <= n; ++k) {
        if (axis == 1) {
          const auto c = chain(1, n - k);
          bc.A.diag(k) = c.a;
          bc.B.diag(k) = c.b;
          if (k <= n - 1) bc.C.diag(k) = c.c;
        } else {
          const auto c = chain(2, k);
          bc.A.upper(k) = c.a;
          bc.B.diag(k) = c.b;
          if (k >= 1) bc.C.lower(k) = c.c;
        }
      }
      break;
    }
    case FamilyKind::Parabolic:
    case FamilyKind::Triangle01:
    case FamilyKind::Triangle00: {
      for (int k = 0; k <= n; ++k) {
        PhaseEntries<double> e;
        if (spec.kind == FamilyKind::Parabolic)
          e = parabolicEntries(spec.alpha, spec.beta, n, k);
        else if (spec.kind == FamilyKind::Triangle01)
          e = triangle01Entries(spec.alpha, spec.beta, spec.gamma, n, k);
        else
          e = triangle00Entries(spec.alpha, spec.beta, spec.gamma, n, k);
        if (axis == 1) {
          bc.A.diag(k) = e.a;
          bc.B.diag(k) = e.b;
          bc.C.diag(k) = (k <= n - 1) ? e.c : 0.0;
        } else {
          bc.A.lower(k) = e.a1;
          bc.A.diag(k) = e.a2;
          bc.A.upper(k) = e.a3;
          bc.B.lower(k) = e.b1;
          bc.B.diag(k) = e.b2;
          bc.B.upper(k) = (k <= n - 1) ? e.b3 : 0.0;
          bc.C.lower(k) = (k >= 1) ? e.c1 : 0.0;
          bc.C.diag(k) = (k <= n - 1) ? e.c2 : 0.0;
          bc.C.upper(k) = (k <= n - 2) ? e.c3 : 0.0;
        }
      }
      break;
    }
  }
  return bc;
}

Eigen::VectorXd evalBasisUpTo(const FamilySpec& spec, int nmax, double x, double y) {
  spec.validate();
  checkLevel(nmax);
  Eigen::VectorXd out(stateCount(nmax));
  switch (spec.kind) {
    case FamilyKind::ProductJacobi:
    case FamilyKind::ProductLaguerre: {
      Eigen::VectorXd p, q;
      if (spec.kind == FamilyKind::ProductJacobi) {
        p = evalChainAll<double>([&](int m) { return jacobiChainCoeffs(spec.alpha, spec.beta, m); }, nmax, x);
        q = evalChainAll<double>([&](int m) { return jacobiChainCoeffs(spec.gamma, spec.delta, m); }, nmax, y);
      } else {
        p = evalChainAll<double>(
            [&](int m) { return laguerreChainCoeffs(spec.alpha, m, spec.variant); }, nmax, x, -1.0);
        q = evalChainAll<double>(
            [&](int m) { return laguerreChainCoeffs(spec.beta, m, spec.variant); }, nmax, y, -1.0);
      }
      for (int n = 0; n <= nmax; ++n)
        for (int k = 0; k <= n; ++k) out(flatIndex(n, k)) = p(n - k) * q(k);
      break;
    }
    case FamilyKind::Parabolic: {
      const double a = spec.alpha, b = spec.beta;
      for (int k = 0; k <= nmax; ++k) {
        // x^{k/2} P_k^{(b,b)}(y / sqrt x) as a polynomial, over its value at (1,1)
        const double phase = homogeneousJacobi(b, b, k, y, 0.0, x) / pochRatio(b + 1, k);
        const Eigen::VectorXd lev = evalChainAll<double>(
            [&](int m) { return jacobiChainCoeffs(b + k + 0.5, a, m); }, nmax - k, x);
        for (int n = k; n <= nmax; ++n) out(flatIndex(n, k)) = lev(n - k) * phase;
      }
      break;
    }
    case FamilyKind::Triangle01:
    case FamilyKind::Triangle00: {
      const double a = spec.alpha, b = spec.beta, g = spec.gamma;
      const bool at01 = spec.kind == FamilyKind::Triangle01;
      const double s = 1.0 - x;
      for (int k = 0; k <= nmax; ++k) {
        // (1-x)^k P_k^{(g,b)}(2y/(1-x) - 1), normalized by its value at the corner
        double phase = homogeneousJacobi(g, b, k, 2 * y - s, s, s * s);
        phase /= at01 ? pochRatio(g + 1, k) : ((k % 2 ? -1.0 : 1.0) * pochRatio(b + 1, k));
        const double ap = 2.0 * k + b + g + 1;
        for (int n = k; n <= nmax; ++n) {
          const int m = n - k;
          const double lev = homogeneousJacobi(ap, a, m, 2 * x - 1, 1.0, 1.0) /
                             ((m % 2 ? -1.0 : 1.0) * pochRatio(a + 1, m));
          out(flatIndex(n, k)) = lev * phase;
        }
      }
      break;
    }
  }
  return out;
}

Eigen::VectorXd evalBasis(const FamilySpec& spec, int n, double x, double y) {
  checkLevel(n);
  const Eigen::VectorXd all = evalBasisUpTo(spec, n, x, y);
  return all.segment(flatIndex(n, 0), n + 1);
}

NormBlock normMatrixClosedForm(const FamilySpec& spec, int n) {
  spec.validate();
  checkLevel(n);
  NormBlock nb;
  nb.level = n;
  nb.diag.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    double lg = 0;
    switch (spec.kind) {
      case FamilyKind::ProductJacobi:
        lg = logJacobiNorm1D(spec.alpha, spec.beta, n - k) + logJacobiNorm1D(spec.gamma, spec.delta, k);
        break;
      case FamilyKind::ProductLaguerre:
        lg = logLaguerreNorm1D(spec.alpha, n - k, spec.variant) +
             logLaguerreNorm1D(spec.beta, k, spec.variant);
        break;
      case FamilyKind::Parabolic: lg = logParabolicNorm(spec.alpha, spec.beta, n, k); break;
      case FamilyKind::Triangle01:
      case FamilyKind::Triangle00: lg = logTriangleNorm(spec, n, k); break;
    }
    nb.diag(k) = std::exp(lg);
  }
  if (n == 0) nb.diag(0) = 1.0;
  return nb;
}

QuadratureRule2D domainQuadrature(const FamilySpec& spec, int m) {
  spec.validate();
  if (m < 1) throw UsageError("quadrature order m must be >= 1, got " + std::to_string(m));
  Weight1D wx, wv;
  switch (spec.kind) {
    case FamilyKind::ProductJacobi:
      wx = JacobiWeight{spec.alpha, spec.beta};
      wv = JacobiWeight{spec.gamma, spec.delta};
      break;
    case FamilyKind::ProductLaguerre:
      wx = LaguerreWeight{spec.alpha};
      wv = LaguerreWeight{spec.beta};
      break;
    case FamilyKind::Parabolic:
      wx = JacobiWeight{spec.beta + 0.5, spec.alpha};
      wv = JacobiWeight{spec.beta, spec.beta};
      break;
    case FamilyKind::Triangle01:
    case FamilyKind::Triangle00:
      wx = JacobiWeight{spec.alpha, spec.beta + spec.gamma + 1};
      wv = JacobiWeight{spec.beta, spec.gamma};
      break;
  }
  const auto rx = gauss1DRule<double>(wx, m);
  const auto rv = gauss1DRule<double>(wv, m);
  QuadratureRule2D rule;
  rule.nodes.resize(m * m, 2);
  rule.weights.resize(m * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const int q = i * m + j;
      const double x = rx.nodes(i);
      const double v = rv.nodes(j);
      double y = v;
      if (spec.kind == FamilyKind::Parabolic) y = (2 * v - 1) * std::sqrt(x);
      if (spec.kind == FamilyKind::Triangle01 || spec.kind == FamilyKind::Triangle00) y = (1 - x) * v;
      rule.nodes(q, 0) = x;
      rule.nodes(q, 1) = y;
      rule.weights(q) = rx.weights(i) * rv.weights(j);
    }
  }
  rule.exactness_degree = 2 * m - 1;
  return rule;
}

double orthogonalityResidual(const FamilySpec& spec, int nmax) {
  if (nmax < 0) throw UsageError("nmax must be >= 0");
  const QuadratureRule2D rule = domainQuadrature(spec, nmax + 2);
  const int states = stateCount(nmax);
  Eigen::MatrixXd phi(states, rule.weights.size());
  for (int q = 0; q < rule.weights.size(); ++q) phi.col(q) = evalBasisUpTo(spec, nmax, rule.nodes(q, 0), rule.nodes(q, 1));
  Eigen::VectorXd pi(states);
  for (int n = 0; n <= nmax; ++n) pi.segment(flatIndex(n, 0), n + 1) = normMatrixClosedForm(spec, n).diag;
  const Eigen::MatrixXd G = phi * rule.weights.asDiagonal() * phi.transpose() * pi.asDiagonal();
  return (G - Eigen::MatrixXd::Identity(states, states)).cwiseAbs().maxCoeff();
}

bool insideDomain(const FamilySpec& spec, double x, double y) {
  switch (spec.kind) {
    case FamilyKind::ProductJacobi: return x > 0 && x < 1 && y > 0 && y < 1;
    case FamilyKind::ProductLaguerre: return x > 0 && y > 0;
    case FamilyKind::Parabolic: return y * y < x && x < 1;
    case FamilyKind::Triangle01:
    case FamilyKind::Triangle00: return x > 0 && y > 0 && x + y < 1;
  }
  return false;
}

std::pair<int, int> unflatten(int index) {
  if (index < 0) throw UsageError("flat index must be >= 0");
  int n = static_cast<int>((std::sqrt(8.0 * index + 1) - 1) / 2);
  while (flatIndex(n, 0) > index) --n;
  while (flatIndex(n + 1, 0) <= index) ++n;
  return {n, index - flatIndex(n, 0)};
}

}  // namespace qbd

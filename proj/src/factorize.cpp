#include "qbd/factorize.hpp"

#include <algorithm>
#include <cmath>

namespace qbd {

namespace {

bool inRange(int n, int k, int lo, int hiOffset) { return n >= 0 && k >= lo && k <= n + hiOffset; }

FamilySpec urnFamily(UrnKind kind, const FamilySpec& spec) {
  switch (kind) {
    case UrnKind::ProductJacobiUrn: return FamilySpec::productJacobi(spec.alpha, spec.beta, spec.gamma, spec.delta);
    case UrnKind::ParabolicUrn: return FamilySpec::parabolic(spec.alpha, spec.beta);
    case UrnKind::TriangleComposed: return FamilySpec::triangle01(spec.alpha, spec.beta, spec.gamma);
  }
  return spec;
}

double maxAbs(const Eigen::MatrixXd& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

double LUElements::x2(int n, int k) const {
  if (!inRange(n, k, 0, 0)) return 0;
  return (n - k + alpha + 1) * (beta + k + 1) / ((2 * n + alpha + beta + gamma + 3) * (beta + gamma + 2 * k + 2));
}

double LUElements::x3(int n, int k) const {
  if (!inRange(n, k, 0, 0)) return 0;
  return (n + k + alpha + beta + gamma + 3) * (gamma + k + 1) /
         ((2 * n + alpha + beta + gamma + 3) * (beta + gamma + 2 * k + 2));
}

double LUElements::y2(int n, int k) const {
  if (!inRange(n, k, 0, 0)) return 0;
  return (n + k + beta + gamma + 2) * (beta + k + 1) /
         ((2 * n + alpha + beta + gamma + 3) * (beta + gamma + 2 * k + 2));
}

double LUElements::y3(int n, int k) const {
  if (!inRange(n, k, 0, -1)) return 0;
  return (n - k) * (gamma + k + 1) / ((2 * n + alpha + beta + gamma + 3) * (beta + gamma + 2 * k + 2));
}

double LUElements::s1(int n, int k) const {
  if (!inRange(n, k, 1, 0)) return 0;
  return k * (n - k + alpha + 1) / ((2 * n + alpha + beta + gamma + 2) * (beta + gamma + 2 * k + 1));
}

double LUElements::s2(int n, int k) const {
  if (!inRange(n, k, 0, 0)) return 0;
  const double ratio = k == 0 ? 1.0 : (beta + gamma + k + 1) / (beta + gamma + 2 * k + 1);
  return ratio * (n + k + alpha + beta + gamma + 2) / (2 * n + alpha + beta + gamma + 2);
}

double LUElements::r1(int n, int k) const {
  if (!inRange(n, k, 1, 0)) return 0;
  return k * (n + k + beta + gamma + 1) / ((2 * n + alpha + beta + gamma + 2) * (beta + gamma + 2 * k + 1));
}

double LUElements::r2(int n, int k) const {
  if (!inRange(n, k, 0, -1)) return 0;
  const double ratio = k == 0 ? 1.0 : (beta + gamma + k + 1) / (beta + gamma + 2 * k + 1);
  return ratio * (n - k) / (2 * n + alpha + beta + gamma + 2);
}

LUFactors triangleLU(double alpha, double beta, double gamma, int N) {
  if (N < 0) throw UsageError("N must be >= 0");
  const LUElements e{alpha, beta, gamma};
  std::vector<LevelBlocks> lower, upper;
  for (int n = 0; n <= N; ++n) {
    LevelBlocks L(n), U(n);
    for (int k = 0; k <= n; ++k) {
      L.B.lower(k) = e.s1(n, k);
      L.B.diag(k) = e.s2(n, k);
      L.C.lower(k) = e.r1(n, k);
      L.C.diag(k) = e.r2(n, k);
      U.B.diag(k) = e.y2(n, k);
      U.B.upper(k) = e.y3(n, k);
      U.A.diag(k) = e.x2(n, k);
      U.A.upper(k) = e.x3(n, k);
    }
    lower.push_back(std::move(L));
    upper.push_back(std::move(U));
  }
  return {N, BlockTridiagonal(std::move(lower)), BlockTridiagonal(std::move(upper))};
}

std::string factorModeName(FactorMode m) { return m == FactorMode::LU ? "LU" : "UL-shift"; }

FactorizationReport verifyFactorization(double alpha, double beta, double gamma, int N, FactorMode mode) {
  if (N < 2) throw UsageError("factorization check needs N >= 2");
  const FamilySpec spec = FamilySpec::triangle01(alpha, beta, gamma);
  FactorizationReport rep;
  rep.mode = mode;
  rep.N = N;
  if (mode == FactorMode::LU) {
    const LUFactors f = triangleLU(alpha, beta, gamma, N);
    for (int n = 0; n <= N; ++n) {
      const BlockCoefficients J = blockCoefficients(spec, n, 2);
      const Eigen::MatrixXd S = f.lower.level(n).denseB(), R = f.lower.level(n).denseC();
      const Eigen::MatrixXd X = f.upper.level(n).denseA(), Y = f.upper.level(n).denseB();
      rep.residualA = std::max(rep.residualA, maxAbs(J.denseA() - S * X));
      Eigen::MatrixXd B = S * Y;
      if (n >= 1) {
        B += R * f.upper.level(n - 1).denseA();
        rep.residualC = std::max(rep.residualC, maxAbs(J.denseC() - R * f.upper.level(n - 1).denseB()));
      }
      rep.residualB = std::max(rep.residualB, maxAbs(J.denseB() - B));
    }
    return rep;
  }
  const LUFactors f = triangleLU(alpha, beta - 1, gamma, N + 1);
  for (int n = 0; n <= N; ++n) {
    const BlockCoefficients J = blockCoefficients(spec, n, 2);
    const Eigen::MatrixXd X = f.upper.level(n).denseA(), Y = f.upper.level(n).denseB();
    const Eigen::MatrixXd S = f.lower.level(n).denseB(), R = f.lower.level(n).denseC();
    const Eigen::MatrixXd Snext = f.lower.level(n + 1).denseB(), Rnext = f.lower.level(n + 1).denseC();
    rep.residualA = std::max(rep.residualA, maxAbs(J.denseA() - X * Snext));
    rep.residualB = std::max(rep.residualB, maxAbs(J.denseB() - (Y * S + X * Rnext)));
    if (n >= 1) rep.residualC = std::max(rep.residualC, maxAbs(J.denseC() - Y * R));
  }
  return rep;
}

std::string urnKindName(UrnKind k) {
  switch (k) {
    case UrnKind::ProductJacobiUrn: return "product-jacobi";
    case UrnKind::ParabolicUrn: return "parabolic";
    case UrnKind::TriangleComposed: return "triangle-composed";
  }
  return "product-jacobi";
}

UrnKind parseUrnKind(const std::string& name) {
  if (name == "product-jacobi") return UrnKind::ProductJacobiUrn;
  if (name == "parabolic") return UrnKind::ParabolicUrn;
  if (name == "triangle-composed" || name == "triangle01") return UrnKind::TriangleComposed;
  throw UsageError("unknown urn model '" + name + "'");
}

UrnTable urnTable(UrnKind kind, const FamilySpec& spec, double tau, int n, int k) {
  if (n < 0 || k < 0 || k > n)
    throw UsageError("state (" + std::to_string(n) + "," + std::to_string(k) + ") out of range");
  const FamilySpec fam = urnFamily(kind, spec);
  fam.validate();
  UrnTable t;
  switch (kind) {
    case UrnKind::ProductJacobiUrn: {
      if (!(tau >= 0 && tau <= 1)) throw DomainError("urn coin probability tau must lie in [0, 1]");
      const auto first = jacobiChainCoeffs(fam.alpha, fam.beta, n - k);
      const auto second = jacobiChainCoeffs(fam.gamma, fam.delta, k);
      t[{1, 1}] = (1 - tau) * second.a;
      t[{1, 0}] = tau * first.a;
      if (n - k >= 1) t[{-1, 0}] = tau * first.c;
      if (k >= 1) t[{-1, -1}] = (1 - tau) * second.c;
      t[{0, 0}] = tau * first.b + (1 - tau) * second.b;
      break;
    }
    case UrnKind::ParabolicUrn: {
      const double a = fam.alpha, b = fam.beta;
      const double den = 4.0 * n - 2.0 * k + 2 * a + 2 * b + 3;
      const double blue = k / (2 * b + 2 * k + 1);
      const double red = k == 0 ? 1.0 : (k + 2 * b + 1) / (2 * b + 2 * k + 1);
      if (k >= 1) {
        t[{0, -1}] = blue * 2 * (n - k + a + 1) / den;
        t[{-1, -1}] = blue * (2.0 * n + 2 * b + 1) / den;
      }
      t[{1, 1}] = red * (2.0 * n + 2 * a + 2 * b + 3) / den;
      if (k < n) t[{0, 1}] = red * (2.0 * n - 2 * k) / den;
      break;
    }
    case UrnKind::TriangleComposed: {
      const LUElements e{fam.alpha, fam.beta, fam.gamma};
      t[{1, -1}] = e.s1(n, k) * e.x2(n, k - 1);
      t[{1, 0}] = e.s1(n, k) * e.x3(n, k - 1) + e.s2(n, k) * e.x2(n, k);
      t[{1, 1}] = e.s2(n, k) * e.x3(n, k);
      t[{0, -1}] = e.s1(n, k) * e.y2(n, k - 1) + e.r1(n, k) * e.x2(n - 1, k - 1);
      t[{0, 0}] = e.s1(n, k) * e.y3(n, k - 1) + e.s2(n, k) * e.y2(n, k) + e.r1(n, k) * e.x3(n - 1, k - 1) +
                  e.r2(n, k) * e.x2(n - 1, k);
      t[{0, 1}] = e.s2(n, k) * e.y3(n, k) + e.r2(n, k) * e.x3(n - 1, k);
      t[{-1, -1}] = e.r1(n, k) * e.y2(n - 1, k - 1);
      t[{-1, 0}] = e.r1(n, k) * e.y3(n - 1, k - 1) + e.r2(n, k) * e.y2(n - 1, k);
      t[{-1, 1}] = e.r2(n, k) * e.y3(n - 1, k);
      for (auto it = t.begin(); it != t.end();) {
        const int tn = n + it->first.first, tk = k + it->first.second;
        if (tn < 0 || tk < 0 || tk > tn)
          it = t.erase(it);
        else
          ++it;
      }
      break;
    }
  }
  return t;
}

double moveEntry(const LevelBlocks& lb, int dn, int dk, int k) {
  const int n = lb.level;
  const int tn = n + dn, tk = k + dk;
  if (tn < 0 || tk < 0 || tk > tn || k < 0 || k > n) return 0.0;
  const Band3& band = dn > 0 ? lb.A : dn == 0 ? lb.B : lb.C;
  return dk < 0 ? band.lower(k) : dk == 0 ? band.diag(k) : band.upper(k);
}

double urnConsistencyCheck(UrnKind kind, const FamilySpec& spec, double tau, int N) {
  if (N < 2) throw UsageError("urn consistency check needs N >= 2");
  const FamilySpec fam = urnFamily(kind, spec);
  const BlockTridiagonal J =
      kind == UrnKind::ProductJacobiUrn ? combineOperators(fam, tau, 1 - tau, N) : jacobiOperator(fam, 2, N);
  double worst = 0;
  for (int n = 0; n <= N; ++n) {
    for (int k = 0; k <= n; ++k) {
      const UrnTable t = urnTable(kind, fam, tau, n, k);
      for (int dn = -1; dn <= 1; ++dn)
        for (int dk = -1; dk <= 1; ++dk) {
          const auto it = t.find({dn, dk});
          const double u = it == t.end() ? 0.0 : it->second;
          worst = std::max(worst, std::abs(u - moveEntry(J.level(n), dn, dk, k)));
        }
    }
  }
  return worst;
}

}  // namespace qbd

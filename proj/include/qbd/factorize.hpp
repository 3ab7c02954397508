#pragma once

#include <map>
#include <string>
#include <utility>

#include "qbd/blockmat.hpp"
#include "qbd/model.hpp"

namespace qbd {

/// Elements of the stochastic LU factors of the triangle J_2 at (n, k); zero outside their range.
struct LUElements {
  double alpha{0}, beta{0}, gamma{0};

  double x2(int n, int k) const;
  double x3(int n, int k) const;
  double y2(int n, int k) const;
  double y3(int n, int k) const;
  double s1(int n, int k) const;
  double s2(int n, int k) const;
  double r1(int n, int k) const;
  double r2(int n, int k) const;
};

/// J_L carries S_n on the diagonal and R_n below it; J_U carries Y_n on the diagonal and X_n above.
struct LUFactors {
  int N{0};
  BlockTridiagonal lower;
  BlockTridiagonal upper;
};

/// Factors for levels 0..N.
LUFactors triangleLU(double alpha, double beta, double gamma, int N);

enum class FactorMode { LU, ULShift };
std::string factorModeName(FactorMode m);

struct FactorizationReport {
  FactorMode mode{FactorMode::LU};
  int N{0};
  double residualA{0};
  double residualB{0};
  double residualC{0};
  double maxResidual() const { return std::max({residualA, residualB, residualC}); }
};

/// LU: A - S X, B - (R X_{n-1} + S Y), C - R Y_{n-1} over n <= N. ULShift: factors with
/// beta - 1 multiplied as J_U J_L, i.e. A - X S_{n+1}, B - (Y S + X R_{n+1}), C - Y R, over n <= N.
FactorizationReport verifyFactorization(double alpha, double beta, double gamma, int N, FactorMode mode);

enum class UrnKind { ProductJacobiUrn, ParabolicUrn, TriangleComposed };
std::string urnKindName(UrnKind k);
UrnKind parseUrnKind(const std::string& name);

/// Move (dlevel, dphase) to probability.
using UrnTable = std::map<std::pair<int, int>, double>;

/// Product Jacobi uses spec alpha..delta and tau; parabolic uses alpha, beta; triangle uses
/// alpha, beta, gamma. tau is ignored except for the product Jacobi urn.
UrnTable urnTable(UrnKind kind, const FamilySpec& spec, double tau, int n, int k);

/// Max over states at levels <= N and all nine moves of |urn value - model entry|; the model is
/// tau J_1 + (1 - tau) J_2 for the product Jacobi urn and J_2 otherwise.
double urnConsistencyCheck(UrnKind kind, const FamilySpec& spec, double tau, int N);

/// Entry of the level-n blocks for move (dn, dk) from phase k; zero when the target is invalid.
double moveEntry(const LevelBlocks& lb, int dn, int dk, int k);

}  // namespace qbd

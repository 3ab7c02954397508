#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "qbd/orthopoly.hpp"

namespace qbd {

enum class FamilyKind { ProductJacobi, ProductLaguerre, Parabolic, Triangle01, Triangle00 };

std::string kindName(FamilyKind kind);
FamilyKind parseKind(const std::string& name);
std::string variantName(LaguerreVariant v);
LaguerreVariant parseVariant(const std::string& name);

/// A bivariate family and its parameters. Unused parameters are ignored.
struct FamilySpec {
  FamilyKind kind{FamilyKind::ProductJacobi};
  double alpha{0};
  double beta{0};
  double gamma{0};
  double delta{0};
  LaguerreVariant variant{LaguerreVariant::EndpointBinomial};

  static FamilySpec productJacobi(double a, double b, double c, double d);
  static FamilySpec productLaguerre(double a, double b,
                                    LaguerreVariant v = LaguerreVariant::EndpointBinomial);
  static FamilySpec parabolic(double a, double b);
  static FamilySpec triangle01(double a, double b, double c);
  static FamilySpec triangle00(double a, double b, double c);

  /// Names of the parameters this kind uses, in canonical order.
  std::vector<std::string> paramNames() const;
  double param(const std::string& name) const;
  void validate() const;
};

/// +1 when the axis variable enters the recurrence as x_i, -1 when as -x_i.
int axisSign(FamilyKind kind, int axis);

/// Row r holds entries at columns r-1 (lower), r (diag) and r+1 (upper).
struct Band3 {
  Eigen::VectorXd lower;
  Eigen::VectorXd diag;
  Eigen::VectorXd upper;

  explicit Band3(int rows = 0)
      : lower(Eigen::VectorXd::Zero(rows)),
        diag(Eigen::VectorXd::Zero(rows)),
        upper(Eigen::VectorXd::Zero(rows)) {}
  int rows() const { return static_cast<int>(diag.size()); }
  /// Dense rows x cols matrix; band entries falling outside the columns must be zero.
  Eigen::MatrixXd dense(int cols) const;
  Eigen::VectorXd rowSums() const { return lower + diag + upper; }
  Band3& operator*=(double s);
  Band3& operator+=(const Band3& o);
};

/// Blocks (A_n, B_n, C_n) of one level: shapes (n+1)x(n+2), (n+1)x(n+1), (n+1)xn.
struct LevelBlocks {
  int level{0};
  Band3 A;
  Band3 B;
  Band3 C;

  explicit LevelBlocks(int n = 0) : level(n), A(n + 1), B(n + 1), C(n + 1) {}
  Eigen::MatrixXd denseA() const { return A.dense(level + 2); }
  Eigen::MatrixXd denseB() const { return B.dense(level + 1); }
  Eigen::MatrixXd denseC() const { return C.dense(level); }
  Eigen::VectorXd rowSums() const { return A.rowSums() + B.rowSums() + C.rowSums(); }
};

struct BlockCoefficients : LevelBlocks {
  int axis{1};
  BlockCoefficients(int n, int ax) : LevelBlocks(n), axis(ax) {}
};

struct NormBlock {
  int level{0};
  Eigen::VectorXd diag;
};

/// Tensor rule on the family's domain; nodes are rows (x, y).
struct QuadratureRule2D {
  Eigen::MatrixX2d nodes;
  Eigen::VectorXd weights;
  int exactness_degree{0};
};

BlockCoefficients blockCoefficients(const FamilySpec& spec, int n, int axis);

/// Q_{n,0..n}(x, y) under the family's normalization.
Eigen::VectorXd evalBasis(const FamilySpec& spec, int n, double x, double y);

/// Levels 0..nmax stacked: entry flatIndex(n,k) holds Q_{n,k}(x, y).
Eigen::VectorXd evalBasisUpTo(const FamilySpec& spec, int nmax, double x, double y);

NormBlock normMatrixClosedForm(const FamilySpec& spec, int n);

QuadratureRule2D domainQuadrature(const FamilySpec& spec, int m);

/// Largest deviation of Pi_b <Q_a, Q_b> from the identity over levels <= nmax, by exact quadrature.
double orthogonalityResidual(const FamilySpec& spec, int nmax);

/// True when (x, y) lies strictly inside the family's domain.
bool insideDomain(const FamilySpec& spec, double x, double y);

inline int flatIndex(int n, int k) { return n * (n + 1) / 2 + k; }
inline int stateCount(int N) { return (N + 1) * (N + 2) / 2; }
std::pair<int, int> unflatten(int index);

}  // namespace qbd

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "qbd/families.hpp"

namespace qbd {

/// Level-indexed blocks (A_n, B_n, C_n) for n = 0..levels()-1.
class BlockTridiagonal {
 public:
  BlockTridiagonal() = default;
  explicit BlockTridiagonal(std::vector<LevelBlocks> levels);

  int levels() const { return static_cast<int>(levels_.size()); }
  const LevelBlocks& level(int n) const { return levels_.at(n); }
  LevelBlocks& level(int n) { return levels_.at(n); }

  BlockTridiagonal& operator*=(double s);
  BlockTridiagonal& operator+=(const BlockTridiagonal& o);

 private:
  std::vector<LevelBlocks> levels_;
};

/// J_axis of the family for levels 0..N.
BlockTridiagonal jacobiOperator(const FamilySpec& spec, int axis, int N);

/// tau1 J_1 + tau2 J_2 for levels 0..N.
BlockTridiagonal combineOperators(const FamilySpec& spec, double tau1, double tau2, int N);

/// Dense square truncation over levels 0..N; flat index of (n,k) is n(n+1)/2 + k.
struct DenseTruncation {
  int N{0};
  Eigen::MatrixXd entries;

  int size() const { return static_cast<int>(entries.rows()); }
  double at(int i, int ip, int j, int jp) const { return entries(flatIndex(i, ip), flatIndex(j, jp)); }
};

/// Drops the A_N coupling to level N+1.
DenseTruncation truncate(const BlockTridiagonal& J, int N);

struct StructuralReport {
  int N{0};
  double tol{0};
  /// Smallest singular value over A_{n,i}, C_{n+1,i}, relative to the largest of that matrix.
  double minRelSingularIndividual{0};
  /// Same for the joint stacks A_n and C_{n+1}^T.
  double minRelSingularJoint{0};
  bool rankOk{false};
  /// max |Pi_{n-1} A_{n-1,i} - C_{n,i}^T Pi_n| relative to max |Pi_{n-1} A_{n-1,i}|.
  double symmetrizerResidual{0};
  /// max |Pi_n B_{n,i} - (Pi_n B_{n,i})^T| relative to max |Pi_n B_{n,i}|.
  double asymmetryResidual{0};
  /// max |J_1 J_2 - J_2 J_1| over rows at levels <= N-2, relative to max |J_1 J_2|.
  double commutationResidual{0};
  bool symmetrizerOk{false};
  bool asymmetryOk{false};
  bool commutationOk{false};
  bool passed() const { return rankOk && symmetrizerOk && asymmetryOk && commutationOk; }
};

/// Rank, symmetrization and commutation checks; rank tolerance is relative to the largest
/// singular value of each matrix, identity residuals are relative to the magnitude of their terms.
StructuralReport structuralChecks(const FamilySpec& spec, int N, double tol = 1e-11,
                                  double rankTol = 1e-8);

/// M^n by repeated squaring.
DenseTruncation propagatorPower(const DenseTruncation& M, int n);

/// e^{tM} by uniformization; M must be a (sub)generator.
DenseTruncation propagatorExp(const DenseTruncation& M, double t);

}  // namespace qbd

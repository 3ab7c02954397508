#include "qbd/blockmat.hpp"

#include <algorithm>
#include <cmath>

namespace qbd {

namespace {

double relMinSingular(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

double maxAbs(const Eigen::MatrixXd& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

void checkGenerator(const Eigen::MatrixXd& M) {
  const double scale = std::max(1.0, maxAbs(M));
  for (int i = 0; i < M.rows(); ++i) {
    double sum = 0;
    for (int j = 0; j < M.cols(); ++j) {
      if (i != j && M(i, j) < -1e-14 * scale)
        throw UsageError("exponential requested on a non-generator: negative off-diagonal at (" +
                         std::to_string(i) + "," + std::to_string(j) + ")");
      sum += M(i, j);
    }
    if (sum > 1e-12 * scale)
      throw UsageError("exponential requested on a non-generator: positive row sum at row " +
                       std::to_string(i));
  }
}

}  // namespace

BlockTridiagonal::BlockTridiagonal(std::vector<LevelBlocks> levels) : levels_(std::move(levels)) {
  for (int n = 0; n < static_cast<int>(levels_.size()); ++n) {
    const LevelBlocks& lb = levels_[n];
    if (lb.level != n || lb.A.rows() != n + 1 || lb.B.rows() != n + 1 || lb.C.rows() != n + 1)
      throw UsageError("block shape ladder broken at level " + std::to_string(n));
  }
}

BlockTridiagonal& BlockTridiagonal::operator*=(double s) {
  for (auto& lb : levels_) {
    lb.A *= s;
    lb.B *= s;
    lb.C *= s;
  }
  return *this;
}

BlockTridiagonal& BlockTridiagonal::operator+=(const BlockTridiagonal& o) {
  if (o.levels() != levels()) throw UsageError("level count mismatch in block sum");
  for (int n = 0; n < levels(); ++n) {
    levels_[n].A += o.levels_[n].A;
    levels_[n].B += o.levels_[n].B;
    levels_[n].C += o.levels_[n].C;
  }
  return *this;
}

BlockTridiagonal jacobiOperator(const FamilySpec& spec, int axis, int N) {
  if (N < 0) throw UsageError("truncation level N must be >= 0");
  std::vector<LevelBlocks> levels;
  levels.reserve(N + 1);
  for (int n = 0; n <= N; ++n) levels.push_back(blockCoefficients(spec, n, axis));
  return BlockTridiagonal(std::move(levels));
}

BlockTridiagonal combineOperators(const FamilySpec& spec, double tau1, double tau2, int N) {
  BlockTridiagonal J = jacobiOperator(spec, 1, N);
  J *= tau1;
  BlockTridiagonal J2 = jacobiOperator(spec, 2, N);
  J2 *= tau2;
  J += J2;
  return J;
}

DenseTruncation truncate(const BlockTridiagonal& J, int N) {
  if (N < 0 || N > J.levels() - 1)
    throw UsageError("truncation level N=" + std::to_string(N) + " exceeds available levels " +
                     std::to_string(J.levels() - 1));
  DenseTruncation D;
  D.N = N;
  D.entries = Eigen::MatrixXd::Zero(stateCount(N), stateCount(N));
  for (int n = 0; n <= N; ++n) {
    const LevelBlocks& lb = J.level(n);
    const int r0 = flatIndex(n, 0);
    D.entries.block(r0, r0, n + 1, n + 1) = lb.denseB();
    if (n >= 1) D.entries.block(r0, flatIndex(n - 1, 0), n + 1, n) = lb.denseC();
    if (n < N) D.entries.block(r0, flatIndex(n + 1, 0), n + 1, n + 2) = lb.denseA();
  }
  return D;
}

StructuralReport structuralChecks(const FamilySpec& spec, int N, double tol, double rankTol) {
  if (N < 2) throw UsageError("structural checks need N >= 2");
  StructuralReport rep;
  rep.N = N;
  rep.tol = tol;
  rep.minRelSingularIndividual = 1.0;
  rep.minRelSingularJoint = 1.0;

  std::vector<BlockCoefficients> b1, b2;
  std::vector<Eigen::VectorXd> pi;
  for (int n = 0; n <= N; ++n) {
    b1.push_back(blockCoefficients(spec, n, 1));
    b2.push_back(blockCoefficients(spec, n, 2));
    pi.push_back(normMatrixClosedForm(spec, n).diag);
  }
  for (int n = 0; n < N; ++n) {
    const Eigen::MatrixXd A1 = b1[n].denseA(), A2 = b2[n].denseA();
    const Eigen::MatrixXd C1 = b1[n + 1].denseC(), C2 = b2[n + 1].denseC();
    for (const Eigen::MatrixXd* M : {&A1, &A2, &C1, &C2})
      rep.minRelSingularIndividual = std::min(rep.minRelSingularIndividual, relMinSingular(*M));
    Eigen::MatrixXd Aj(2 * (n + 1), n + 2), Cj(2 * (n + 1), n + 2);
    Aj << A1, A2;
    Cj << C1.transpose(), C2.transpose();
    rep.minRelSingularJoint = std::min({rep.minRelSingularJoint, relMinSingular(Aj), relMinSingular(Cj)});
  }
  rep.rankOk = rep.minRelSingularIndividual > rankTol && rep.minRelSingularJoint > rankTol;

  for (int n = 0; n <= N; ++n) {
    for (const auto* bc : {&b1[n], &b2[n]}) {
      const Eigen::MatrixXd PB = pi[n].asDiagonal() * bc->denseB();
      const double scale = std::max(maxAbs(PB), 1e-300);
      rep.asymmetryResidual = std::max(rep.asymmetryResidual, maxAbs(PB - PB.transpose()) / scale);
      if (n >= 1) {
        const auto& prev = (bc->axis == 1) ? b1[n - 1] : b2[n - 1];
        const Eigen::MatrixXd lhs = pi[n - 1].asDiagonal() * prev.denseA();
        const Eigen::MatrixXd rhs = bc->denseC().transpose() * pi[n].asDiagonal();
        const double s2 = std::max(maxAbs(lhs), 1e-300);
        rep.symmetrizerResidual = std::max(rep.symmetrizerResidual, maxAbs(lhs - rhs) / s2);
      }
    }
  }

  const DenseTruncation T1 = truncate(jacobiOperator(spec, 1, N), N);
  const DenseTruncation T2 = truncate(jacobiOperator(spec, 2, N), N);
  const int rows = stateCount(N - 2);
  const Eigen::MatrixXd P12 = T1.entries.topRows(rows) * T2.entries;
  const Eigen::MatrixXd P21 = T2.entries.topRows(rows) * T1.entries;
  rep.commutationResidual = maxAbs(P12 - P21) / std::max({maxAbs(P12), maxAbs(P21), 1e-300});

  rep.symmetrizerOk = rep.symmetrizerResidual <= tol;
  rep.asymmetryOk = rep.asymmetryResidual <= tol;
  rep.commutationOk = rep.commutationResidual <= tol;
  return rep;
}

DenseTruncation propagatorPower(const DenseTruncation& M, int n) {
  if (n < 0) throw UsageError("power must be >= 0");
  DenseTruncation R;
  R.N = M.N;
  R.entries = Eigen::MatrixXd::Identity(M.size(), M.size());
  Eigen::MatrixXd base = M.entries;
  while (n > 0) {
    if (n & 1) R.entries = R.entries * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return R;
}

DenseTruncation propagatorExp(const DenseTruncation& M, double t) {
  if (!(t >= 0)) throw UsageError("time horizon must be >= 0");
  checkGenerator(M.entries);
  const int T = M.size();
  DenseTruncation R;
  R.N = M.N;
  double lambda = 0;
  for (int i = 0; i < T; ++i) lambda = std::max(lambda, std::abs(M.entries(i, i)));
  if (t == 0 || lambda == 0) {
    R.entries = Eigen::MatrixXd::Identity(T, T);
    return R;
  }
  // split so each piece has a moderate Poisson mean
  const int pieces = std::max(1, static_cast<int>(std::ceil(lambda * t / 30.0)));
  const double mu = lambda * t / pieces;
  const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(T, T) + M.entries / lambda;
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(T, T);
  double weight = std::exp(-mu);
  double mass = weight;
  Eigen::MatrixXd sum = weight * term;
  for (int j = 1; (1.0 - mass > 1e-14 && weight > 1e-30) || j <= mu; ++j) {
    term = term * K;
    weight *= mu / j;
    mass += weight;
    sum += weight * term;
    if (j > 10000) throw NumericError("uniformization failed to converge");
  }
  DenseTruncation piece;
  piece.N = M.N;
  piece.entries = sum;
  return propagatorPower(piece, pieces);
}

}  // namespace qbd

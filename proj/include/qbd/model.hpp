#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "qbd/blockmat.hpp"
#include "qbd/families.hpp"

namespace qbd {

enum class ProcessKind { DiscreteChain, ContinuousGenerator };

std::string processKindName(ProcessKind k);
ProcessKind parseProcessKind(const std::string& name);

struct Tau {
  double tau1{0};
  double tau2{0};
};

/// tau1 J_1 + tau2 J_2 with its probabilistic kind.
struct QbdModel {
  FamilySpec spec;
  Tau tau;
  ProcessKind kind{ProcessKind::DiscreteChain};
};

/// The kind each family supports.
ProcessKind supportedKind(FamilyKind kind);

/// Weights from a single tau: (tau, 1 - tau) for product Jacobi and parabolic, (tau, 1) for
/// triangle01. Two-parameter families have no single-tau form.
Tau tauFromScalar(FamilyKind kind, double tau);

struct TauBounds {
  enum class Shape { Interval, Cone, Ratio };
  Shape shape{Shape::Interval};
  /// Interval: lower <= tau1 <= upper (tau2 implied by the family).
  double lower{0};
  double upper{0};
  /// Ratio: tau2 >= 0 and tau1 / tau2 >= ratioThreshold; tau2 = 0 needs tau1 >= 0.
  double ratioThreshold{0};
  /// Interval only: tau2 = 1 (triangle01) rather than tau2 = 1 - tau1.
  bool tau2IsOne{false};
  /// Closed-form branch used: upper 1..6 and lower 1..2 for triangle01, ratio 1..2 for triangle00.
  int upperCase{0};
  int lowerCase{0};
  std::string upperRule;
  std::string lowerRule;

  bool contains(const Tau& t, double slack = 1e-12) const;
};

TauBounds tauBounds(const FamilySpec& spec, ProcessKind kind);

/// Empirical admissible range from per-entry nonnegativity of tau1 J_1 + tau2 J_2.
/// For triangle01 the range is on tau1 with tau2 = 1; for triangle00 on tau1/tau2.
struct TauScan {
  double lower{-1e300};
  double upper{1e300};
  int lowerLevel{-1}, lowerPhase{-1};
  int upperLevel{-1}, upperPhase{-1};
  bool feasible{true};
};

/// Scan the given levels; phases are all of 0..n when n <= 2*phaseWindow, otherwise both edge
/// windows of width phaseWindow plus geometric interior points.
TauScan scanTriangleTau(const FamilySpec& spec, const std::vector<int>& levels, int phaseWindow = 300);

/// Levels 0..dense followed by geometric levels up to 2^maxExp.
std::vector<int> deepScanLevels(int dense = 300, int maxExp = 24);

/// Smallest entry of the truncated tau1 J_1 + tau2 J_2 over levels <= N; for generators the
/// diagonal is skipped. Reports the state holding it.
struct EntryWitness {
  double value{0};
  int level{0};
  int phase{0};
  std::string where;
};
EntryWitness minTruncatedEntry(const FamilySpec& spec, const Tau& tau, int N, bool includeDiagonal);

/// Validates tau against the closed-form bounds and a truncation scan at N = 40.
QbdModel combine(const FamilySpec& spec, const Tau& tau, ProcessKind kind);
QbdModel combine(const FamilySpec& spec, double tau);

/// Killing rate declared at (n, k): tau1 alpha at phase n plus tau2 beta at phase 0 for the
/// endpoint-binomial product Laguerre generator, zero otherwise.
double declaredDeficit(const QbdModel& model, int n, int k);

/// Largest deviation of row sums at levels <= N-1 from the kind's target: 1 for chains, minus the
/// declared deficit for generators. Relative to max(1, |diagonal|).
double rowSumDefect(const QbdModel& model, int N);

BlockTridiagonal modelOperator(const QbdModel& model, int N);
DenseTruncation truncateModel(const QbdModel& model, int N);

enum class PiMethod { ClosedForm, Recursion };

struct PiRecursionOptions {
  /// Add R (I - C^T G) to the pseudo-inverse G with a random R, scaled to perturbScale times the Frobenius norm of G.
  bool perturbNullSpace{false};
  std::uint64_t seed{12345};
  double perturbScale{1.0};
  double rankTol{1e-8};
};

/// Full Pi_n matrices from the generalized-inverse recursion, Pi_0 = 1.
std::vector<Eigen::MatrixXd> invariantPiMatrices(const FamilySpec& spec, int N,
                                                 const PiRecursionOptions& opt = {});

/// max_n |Pi_n(recursion) - Pi_n(closed form)| / max |Pi_n(closed form)| over n <= N.
double piRecursionDiscrepancy(const FamilySpec& spec, int N, const PiRecursionOptions& opt = {});

std::vector<NormBlock> invariantPi(const FamilySpec& spec, int N, PiMethod method);

struct InvariantMeasure {
  std::vector<Eigen::VectorXd> blocks;
  /// Concatenated over levels in flat-index order.
  Eigen::VectorXd flat() const;
};

InvariantMeasure invariantMeasure(const QbdModel& model, int N);

/// Largest relative balance defect |(pi P - pi)_b| / (sum_a |pi_a P_ab| + pi_b) (discrete) or
/// |(pi A)_b| / sum_a |pi_a A_ab| (continuous) over columns at levels <= N-1; killed columns of
/// continuous models are skipped.
double stationarityResidual(const QbdModel& model, int N);

enum class Recurrence { Transient, NullRecurrent };
std::string recurrenceName(Recurrence r);

struct RecurrenceVerdict {
  Recurrence classification{Recurrence::Transient};
  std::string regime;
  std::string criterion;
  bool criterionSatisfied{false};
};

RecurrenceVerdict classifyRecurrence(const QbdModel& model);

/// Quadrature value of the integral of w / (1 - L) (discrete) or w / L (continuous) at order m;
/// grows without bound in m when the integral diverges.
double recurrenceIntegralDiagnostic(const QbdModel& model, int m);

/// Negated row sums of the generator for states at levels <= N-1, in flat order.
Eigen::VectorXd deficitVector(const QbdModel& model, int N);

}  // namespace qbd

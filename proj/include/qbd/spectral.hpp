#pragma once

#include <Eigen/Dense>

#include "qbd/model.hpp"

namespace qbd {

/// Number of steps (discrete) or elapsed time (continuous).
struct Horizon {
  bool continuous{false};
  int steps{0};
  double time{0};

  static Horizon ofSteps(int n) { return {false, n, 0.0}; }
  static Horizon ofTime(double t) { return {true, 0, t}; }
};

struct TransitionQuery {
  int fromLevel{0};
  int fromPhase{0};
  int toLevel{0};
  int toPhase{0};
  Horizon horizon;

  void validate() const;
};

struct KmOptions {
  /// Continuous horizons: stop when two successive orders agree this closely.
  double escalationTol{1e-11};
  int maxOrder{400};
};

/// Karlin-McGregor transition probabilities between all states at levels <= maxLevel, indexed
/// by flat index. Discrete horizons use a rule exact for the polynomial integrand.
Eigen::MatrixXd kmMatrix(const QbdModel& model, int maxLevel, const Horizon& h, const KmOptions& opt = {});

double kmEntry(const QbdModel& model, const TransitionQuery& q, const KmOptions& opt = {});

/// Quadrature order per variable used for a discrete horizon.
int discreteKmOrder(int maxLevel, int steps);

struct CrossCheckReport {
  int N{0};
  double maxAbsError{0};
  /// Entries compared; zero means the safe range was empty.
  int compared{0};
  int fromStates{0};
  int worstFrom{-1};
  int worstTo{-1};
};

/// Compares kmMatrix against the truncated propagator (P^n or e^{tA}) at truncation N. From-levels
/// are capped at maxFromLevel (negative for no cap); discrete horizons also need i + n <= N,
/// continuous ones need the propagator mass at level N below leakTol.
CrossCheckReport spectralCrossCheck(const QbdModel& model, int N, const Horizon& h, int maxFromLevel = -1,
                                    double leakTol = 1e-12, const KmOptions& opt = {});

}  // namespace qbd

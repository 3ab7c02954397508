#include "qbd/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace qbd {

namespace {

void requireKind(const QbdModel& model, const Horizon& h) {
  const bool continuous = model.kind == ProcessKind::ContinuousGenerator;
  if (continuous != h.continuous)
    throw UsageError(std::string(continuous ? "continuous" : "discrete") + " model needs a " +
                     (continuous ? "time" : "step") + " horizon");
  if (h.continuous ? !(h.time >= 0) : h.steps < 0) throw UsageError("horizon must be nonnegative");
}

Eigen::MatrixXd kmAtOrder(const QbdModel& model, int maxLevel, const Horizon& h, int m) {
  const FamilySpec& spec = model.spec;
  QuadratureRule2D rule = domainQuadrature(spec, m);
  double s1 = axisSign(spec.kind, 1) * model.tau.tau1;
  double s2 = axisSign(spec.kind, 2) * model.tau.tau2;
  if (spec.kind == FamilyKind::ProductLaguerre && h.continuous) {
    // e^{-c x} x^a e^{-x} is again a Laguerre weight after x -> x / (1 + c)
    const double c1 = 1 - s1 * h.time, c2 = 1 - s2 * h.time;
    rule.nodes.col(0) /= c1;
    rule.nodes.col(1) /= c2;
    rule.weights *= std::pow(c1, -(spec.alpha + 1)) * std::pow(c2, -(spec.beta + 1));
    s1 = s2 = 0;
  }
  const int states = stateCount(maxLevel);
  const int nodes = static_cast<int>(rule.weights.size());
  Eigen::MatrixXd phi(states, nodes);
  Eigen::VectorXd wk(nodes);
  for (int q = 0; q < nodes; ++q) {
    const double x = rule.nodes(q, 0), y = rule.nodes(q, 1);
    const double L = s1 * x + s2 * y;
    wk(q) = rule.weights(q) * (h.continuous ? std::exp(L * h.time) : std::pow(L, h.steps));
    phi.col(q) = wk(q) == 0.0 ? Eigen::VectorXd::Zero(states) : evalBasisUpTo(spec, maxLevel, x, y);
  }
  Eigen::VectorXd pi(states);
  for (int n = 0; n <= maxLevel; ++n) pi.segment(flatIndex(n, 0), n + 1) = normMatrixClosedForm(spec, n).diag;
  const Eigen::MatrixXd G = phi * wk.asDiagonal() * phi.transpose();
  return G * pi.asDiagonal();
}

}  // namespace

void TransitionQuery::validate() const {
  if (fromLevel < 0 || toLevel < 0) throw UsageError("levels must be >= 0");
  if (fromPhase < 0 || fromPhase > fromLevel || toPhase < 0 || toPhase > toLevel)
    throw UsageError("phase out of range 0..level");
  if (horizon.continuous ? !(horizon.time >= 0) : horizon.steps < 0)
    throw UsageError("horizon must be nonnegative");
}

int discreteKmOrder(int maxLevel, int steps) {
  const int degree = 2 * maxLevel + steps;
  return (degree + 2) / 2 + 2;
}

Eigen::MatrixXd kmMatrix(const QbdModel& model, int maxLevel, const Horizon& h, const KmOptions& opt) {
  requireKind(model, h);
  if (maxLevel < 0) throw UsageError("maxLevel must be >= 0");
  if (!h.continuous) return kmAtOrder(model, maxLevel, h, discreteKmOrder(maxLevel, h.steps));
  if (model.spec.kind == FamilyKind::ProductLaguerre) return kmAtOrder(model, maxLevel, h, maxLevel + 2);
  int m = maxLevel + 8;
  Eigen::MatrixXd prev = kmAtOrder(model, maxLevel, h, m);
  while (true) {
    const int next = m + 8;
    if (next > opt.maxOrder)
      throw NumericError("quadrature escalation did not converge by order " + std::to_string(opt.maxOrder));
    Eigen::MatrixXd cur = kmAtOrder(model, maxLevel, h, next);
    const double diff = (cur - prev).cwiseAbs().maxCoeff();
    if (diff <= opt.escalationTol) return cur;
    prev = std::move(cur);
    m = next;
  }
}

double kmEntry(const QbdModel& model, const TransitionQuery& q, const KmOptions& opt) {
  q.validate();
  requireKind(model, q.horizon);
  if (!q.horizon.continuous && std::abs(q.toLevel - q.fromLevel) > q.horizon.steps) return 0.0;
  const int L = std::max(q.fromLevel, q.toLevel);
  const Eigen::MatrixXd P = kmMatrix(model, L, q.horizon, opt);
  return P(flatIndex(q.fromLevel, q.fromPhase), flatIndex(q.toLevel, q.toPhase));
}

CrossCheckReport spectralCrossCheck(const QbdModel& model, int N, const Horizon& h, int maxFromLevel,
                                    double leakTol, const KmOptions& opt) {
  requireKind(model, h);
  if (N < 1) throw UsageError("cross-check needs N >= 1");
  CrossCheckReport rep;
  rep.N = N;
  const DenseTruncation M = truncateModel(model, N);
  int fromCap = maxFromLevel < 0 ? N : std::min(maxFromLevel, N);
  Eigen::MatrixXd prop;
  if (h.continuous) {
    prop = propagatorExp(M, h.time).entries;
  } else {
    fromCap = std::min(fromCap, N - h.steps);
    prop = propagatorPower(M, h.steps).entries;
  }
  if (fromCap < 0) return rep;
  std::vector<int> from;
  for (int a = 0; a < stateCount(fromCap); ++a) {
    if (h.continuous) {
      const double leak = prop.row(a).segment(flatIndex(N, 0), N + 1).sum();
      if (!(leak < leakTol)) continue;
    }
    from.push_back(a);
  }
  rep.fromStates = static_cast<int>(from.size());
  if (from.empty()) return rep;
  const int toCap = h.continuous ? N : std::min(N, fromCap + h.steps);
  const Eigen::MatrixXd km = kmMatrix(model, toCap, h, opt);
  for (int a : from) {
    for (int b = 0; b < stateCount(toCap); ++b) {
      const double err = std::abs(km(a, b) - prop(a, b));
      ++rep.compared;
      if (err > rep.maxAbsError || rep.worstFrom < 0) {
        rep.maxAbsError = std::max(rep.maxAbsError, err);
        if (err >= rep.maxAbsError) {
          rep.worstFrom = a;
          rep.worstTo = b;
        }
      }
    }
  }
  return rep;
}

}  // namespace qbd

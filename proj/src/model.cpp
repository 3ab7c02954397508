#include "qbd/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "qbd/coefficients.hpp"

namespace qbd {

namespace {

constexpr int kScanLevel = 40;
constexpr double kTauEps = 1e-14;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string stateLabel(int n, int k) { return "(" + std::to_string(n) + "," + std::to_string(k) + ")"; }

void tighten(TauScan& s, double p, double q, int n, int k) {
  if (p > 0) {
    const double lo = -q / p;
    if (lo > s.lower) {
      s.lower = lo;
      s.lowerLevel = n;
      s.lowerPhase = k;
    }
  } else if (p < 0) {
    const double hi = q / (-p);
    if (hi < s.upper) {
      s.upper = hi;
      s.upperLevel = n;
      s.upperPhase = k;
    }
  } else if (q < -1e-15) {
    s.feasible = false;
  }
}

std::vector<int> phaseSample(int n, int window) {
  std::vector<int> ks;
  if (n <= 2 * window) {
    ks.resize(n + 1);
    for (int k = 0; k <= n; ++k) ks[k] = k;
    return ks;
  }
  std::set<int> s;
  for (int k = 0; k <= window; ++k) {
    s.insert(k);
    s.insert(n - k);
  }
  for (double g = window; g < n; g *= std::pow(2.0, 0.25)) {
    const int k = static_cast<int>(g);
    s.insert(k);
    s.insert(n - k);
  }
  s.insert(n / 2);
  return {s.begin(), s.end()};
}

}  // namespace

std::string processKindName(ProcessKind k) {
  return k == ProcessKind::DiscreteChain ? "discrete" : "continuous";
}

ProcessKind parseProcessKind(const std::string& name) {
  if (name == "discrete") return ProcessKind::DiscreteChain;
  if (name == "continuous") return ProcessKind::ContinuousGenerator;
  throw UsageError("unknown process kind '" + name + "' (expected discrete or continuous)");
}

ProcessKind supportedKind(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::ProductJacobi:
    case FamilyKind::Parabolic:
    case FamilyKind::Triangle01: return ProcessKind::DiscreteChain;
    case FamilyKind::ProductLaguerre:
    case FamilyKind::Triangle00: return ProcessKind::ContinuousGenerator;
  }
  return ProcessKind::DiscreteChain;
}

Tau tauFromScalar(FamilyKind kind, double tau) {
  switch (kind) {
    case FamilyKind::ProductJacobi:
    case FamilyKind::Parabolic: return {tau, 1.0 - tau};
    case FamilyKind::Triangle01: return {tau, 1.0};
    default:
      throw UsageError(kindName(kind) + " takes two weights (tau1, tau2), not a single tau");
  }
}

bool TauBounds::contains(const Tau& t, double slack) const {
  switch (shape) {
    case Shape::Interval: {
      const double expect2 = tau2IsOne ? 1.0 : 1.0 - t.tau1;
      return t.tau1 >= lower - slack && t.tau1 <= upper + slack && std::abs(t.tau2 - expect2) <= slack;
    }
    case Shape::Cone: return t.tau1 >= -slack && t.tau2 >= -slack;
    case Shape::Ratio:
      if (t.tau2 < -slack) return false;
      if (t.tau2 <= slack) return t.tau1 >= -slack;
      return t.tau1 / t.tau2 >= ratioThreshold - slack;
  }
  return false;
}

TauBounds tauBounds(const FamilySpec& spec, ProcessKind kind) {
  spec.validate();
  const ProcessKind want = supportedKind(spec.kind);
  if (kind != want) {
    std::string why;
    switch (spec.kind) {
      case FamilyKind::Triangle01:
        why = "triangle01 gives a continuous-time process only for tau2 = 0 (a multiple of J1); "
              "a discrete chain is possible if and only if tau2 = 1";
        break;
      case FamilyKind::Triangle00:
        why = "triangle00 J2 does not generate a continuous-time QBD process itself and "
              "tau1 J1 + tau2 J2 has zero row sums, so only a generator is possible";
        break;
      case FamilyKind::ProductLaguerre:
        why = "product-laguerre blocks have zero (or negative) row sums, so only a generator is possible";
        break;
      default: why = kindName(spec.kind) + " blocks are stochastic, so only a discrete chain is possible";
    }
    throw UsageError("incompatible kind " + processKindName(kind) + " for " + kindName(spec.kind) + ": " + why);
  }
  TauBounds b;
  switch (spec.kind) {
    case FamilyKind::ProductJacobi:
    case FamilyKind::Parabolic:
      b.shape = TauBounds::Shape::Interval;
      b.lower = 0;
      b.upper = 1;
      b.lowerRule = "tau >= 0";
      b.upperRule = "tau <= 1 (with tau2 = 1 - tau)";
      break;
    case FamilyKind::ProductLaguerre:
      b.shape = TauBounds::Shape::Cone;
      b.lowerRule = "tau1 >= 0 and tau2 >= 0";
      break;
    case FamilyKind::Triangle01: {
      const double a = spec.alpha, be = spec.beta, g = spec.gamma;
      const double t1 = be + g + 1;
      const double K = 1 - (a * a - t1 * t1) / (4 + (a + 3) * (a + be + g + 1));
      const bool bigBeta = be * be >= g * g;
      const double Dmin = bigBeta ? 0.5 : (be + 1) / (be + g + 2);
      b.shape = TauBounds::Shape::Interval;
      b.tau2IsOne = true;
      int alphaCase;
      if (a < -t1)
        alphaCase = 0;
      else if (a * a <= t1 * t1)
        alphaCase = 1;
      else
        alphaCase = 2;
      const double g2 = alphaCase == 0 ? K : alphaCase == 1 ? 1.0 : (be + g + 2) / (a + 1);
      b.upper = Dmin * g2;
      b.upperCase = (bigBeta ? 1 : 4) + alphaCase;
      static const char* rules[] = {
          "tau <= K/2 (beta^2 >= gamma^2, alpha < -(beta+gamma+1))",
          "tau <= 1/2 (beta^2 >= gamma^2, alpha^2 <= (beta+gamma+1)^2)",
          "tau <= (beta+gamma+2)/(2(alpha+1)) (beta^2 >= gamma^2, alpha > beta+gamma+1)",
          "tau <= (beta+1)K/(beta+gamma+2) (beta^2 < gamma^2, alpha < -(beta+gamma+1))",
          "tau <= (beta+1)/(beta+gamma+2) (beta^2 < gamma^2, alpha^2 <= (beta+gamma+1)^2)",
          "tau <= (beta+1)/(alpha+1) (beta^2 < gamma^2, alpha > beta+gamma+1)"};
      b.upperRule = rules[b.upperCase - 1];
      b.lower = -Dmin;
      b.lowerCase = bigBeta ? 1 : 2;
      b.lowerRule = bigBeta ? "tau >= -1/2 (beta^2 >= gamma^2)"
                            : "tau >= -(beta+1)/(beta+gamma+2) (beta^2 < gamma^2)";
      break;
    }
    case FamilyKind::Triangle00: {
      const double be = spec.beta, g = spec.gamma;
      b.shape = TauBounds::Shape::Ratio;
      if (be * be <= g * g) {
        b.ratioThreshold = 0.5;
        b.upperCase = 1;
        b.lowerRule = "tau1/tau2 >= 1/2 (beta^2 <= gamma^2); tau2 = 0 needs tau1 >= 0";
      } else {
        b.ratioThreshold = (be + 1) / (be + g + 2);
        b.upperCase = 2;
        b.lowerRule = "tau1/tau2 >= (beta+1)/(beta+gamma+2) (beta^2 > gamma^2); tau2 = 0 needs tau1 >= 0";
      }
      break;
    }
  }
  return b;
}

std::vector<int> deepScanLevels(int dense, int maxExp) {
  std::set<int> s;
  for (int n = 0; n <= dense; ++n) s.insert(n);
  for (int e = 1; e <= maxExp; ++e) {
    const int p = 1 << e;
    if (p > dense) s.insert(p);
    if (e >= 2 && 3 * (p / 2) > dense) s.insert(3 * (p / 2));
  }
  return {s.begin(), s.end()};
}

TauScan scanTriangleTau(const FamilySpec& spec, const std::vector<int>& levels, int phaseWindow) {
  spec.validate();
  if (spec.kind != FamilyKind::Triangle01 && spec.kind != FamilyKind::Triangle00)
    throw UsageError("tau scan is defined for the triangle families only");
  const bool at01 = spec.kind == FamilyKind::Triangle01;
  TauScan s;
  for (int n : levels) {
    for (int k : phaseSample(n, phaseWindow)) {
      const PhaseEntries<double> e = at01 ? triangle01Entries(spec.alpha, spec.beta, spec.gamma, n, k)
                                          : triangle00Entries(spec.alpha, spec.beta, spec.gamma, n, k);
      tighten(s, e.a, e.a2, n, k);
      if (k <= n - 1) tighten(s, e.c, e.c2, n, k);
      if (at01) tighten(s, e.b, e.b2, n, k);
      for (double q : {e.a1, e.a3, e.b1, e.b3, e.c1, e.c3}) tighten(s, 0.0, q, n, k);
    }
  }
  return s;
}

EntryWitness minTruncatedEntry(const FamilySpec& spec, const Tau& tau, int N, bool includeDiagonal) {
  const BlockTridiagonal J = combineOperators(spec, tau.tau1, tau.tau2, N);
  EntryWitness w;
  w.value = 1e300;
  auto visit = [&](double v, int n, int k, const char* where) {
    if (v < w.value) {
      w.value = v;
      w.level = n;
      w.phase = k;
      w.where = where;
    }
  };
  for (int n = 0; n <= N; ++n) {
    const LevelBlocks& lb = J.level(n);
    for (int k = 0; k <= n; ++k) {
      if (n < N) {
        if (k >= 1) visit(lb.A.lower(k), n, k, "A(k-1)");
        visit(lb.A.diag(k), n, k, "A(k)");
        visit(lb.A.upper(k), n, k, "A(k+1)");
      }
      if (k >= 1) visit(lb.B.lower(k), n, k, "B(k-1)");
      if (includeDiagonal) visit(lb.B.diag(k), n, k, "B(k)");
      if (k <= n - 1) visit(lb.B.upper(k), n, k, "B(k+1)");
      if (n >= 1) {
        if (k >= 1) visit(lb.C.lower(k), n, k, "C(k-1)");
        if (k <= n - 1) visit(lb.C.diag(k), n, k, "C(k)");
        if (k <= n - 2) visit(lb.C.upper(k), n, k, "C(k+1)");
      }
    }
  }
  return w;
}

QbdModel combine(const FamilySpec& spec, const Tau& tau, ProcessKind kind) {
  spec.validate();
  if (!std::isfinite(tau.tau1) || !std::isfinite(tau.tau2)) throw DomainError("tau must be finite");
  const TauBounds b = tauBounds(spec, kind);
  const bool discrete = kind == ProcessKind::DiscreteChain;
  if (b.shape != TauBounds::Shape::Interval && std::abs(tau.tau1) <= kTauEps && std::abs(tau.tau2) <= kTauEps)
    throw DomainError("tau1 = tau2 = 0 gives the zero generator");
  const std::string tauText = "(tau1, tau2) = (" + fmt(tau.tau1) + ", " + fmt(tau.tau2) + ")";
  const EntryWitness w = minTruncatedEntry(spec, tau, kScanLevel, discrete);
  if (!b.contains(tau)) {
    std::string msg = tauText + " outside admissible set: violates " +
                      (b.shape == TauBounds::Shape::Interval
                           ? (tau.tau1 > b.upper ? b.upperRule : b.lowerRule)
                           : b.lowerRule);
    if (b.shape == TauBounds::Shape::Interval) {
      const double expect2 = b.tau2IsOne ? 1.0 : 1.0 - tau.tau1;
      if (std::abs(tau.tau2 - expect2) > 1e-12)
        msg = tauText + " outside admissible set: requires tau2 = " + (b.tau2IsOne ? "1" : "1 - tau1");
    }
    if (w.value < -1e-12) {
      msg += "; witness: entry " + w.where + " = " + fmt(w.value) + " at state " + stateLabel(w.level, w.phase);
    } else if (spec.kind == FamilyKind::Triangle01 || spec.kind == FamilyKind::Triangle00) {
      const TauScan s = scanTriangleTau(spec, deepScanLevels());
      const double r = spec.kind == FamilyKind::Triangle01 ? tau.tau1 : tau.tau1 / tau.tau2;
      if (r > s.upper)
        msg += "; witness: state " + stateLabel(s.upperLevel, s.upperPhase) + " (deep scan)";
      else if (r < s.lower)
        msg += "; witness: state " + stateLabel(s.lowerLevel, s.lowerPhase) + " (deep scan)";
      else
        msg += "; no negative entry found by the deep truncation scan (admissible range about [" + fmt(s.lower) +
               ", " + fmt(s.upper) + "]), the closed-form bound is conservative here";
    }
    throw DomainError(msg);
  }
  if (w.value < -1e-12)
    throw DomainError(tauText + " admitted by the closed-form bound but the N=" + std::to_string(kScanLevel) +
                      " truncation has entry " + w.where + " = " + fmt(w.value) + " at state " +
                      stateLabel(w.level, w.phase));
  QbdModel m{spec, tau, kind};
  const double defect = rowSumDefect(m, kScanLevel);
  if (defect > 1e-12)
    throw ModelIntegrityError("row sums of the N=" + std::to_string(kScanLevel) + " truncation deviate by " +
                              fmt(defect) + " from the " + processKindName(kind) + " target");
  return m;
}

double declaredDeficit(const QbdModel& model, int n, int k) {
  const FamilySpec& s = model.spec;
  if (model.kind != ProcessKind::ContinuousGenerator || s.kind != FamilyKind::ProductLaguerre ||
      s.variant != LaguerreVariant::EndpointBinomial)
    return 0.0;
  return (k == n ? model.tau.tau1 * s.alpha : 0.0) + (k == 0 ? model.tau.tau2 * s.beta : 0.0);
}

double rowSumDefect(const QbdModel& model, int N) {
  if (N < 1) throw UsageError("row-sum check needs N >= 1");
  const bool discrete = model.kind == ProcessKind::DiscreteChain;
  const BlockTridiagonal J = modelOperator(model, N);
  double worst = 0;
  for (int n = 0; n < N; ++n) {
    const Eigen::VectorXd rs = J.level(n).rowSums();
    const double scale = std::max(1.0, J.level(n).B.diag.cwiseAbs().maxCoeff());
    for (int k = 0; k <= n; ++k) {
      const double target = discrete ? 1.0 : -declaredDeficit(model, n, k);
      worst = std::max(worst, std::abs(rs(k) - target) / scale);
    }
  }
  return worst;
}

QbdModel combine(const FamilySpec& spec, double tau) {
  return combine(spec, tauFromScalar(spec.kind, tau), supportedKind(spec.kind));
}

BlockTridiagonal modelOperator(const QbdModel& model, int N) {
  return combineOperators(model.spec, model.tau.tau1, model.tau.tau2, N);
}

DenseTruncation truncateModel(const QbdModel& model, int N) { return truncate(modelOperator(model, N), N); }

std::vector<Eigen::MatrixXd> invariantPiMatrices(const FamilySpec& spec, int N, const PiRecursionOptions& opt) {
  spec.validate();
  if (N < 0) throw UsageError("N must be >= 0");
  std::vector<Eigen::MatrixXd> pi;
  pi.push_back(Eigen::MatrixXd::Ones(1, 1));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  BlockCoefficients prev1 = blockCoefficients(spec, 0, 1), prev2 = blockCoefficients(spec, 0, 2);
  for (int n = 1; n <= N; ++n) {
    const BlockCoefficients cur1 = blockCoefficients(spec, n, 1), cur2 = blockCoefficients(spec, n, 2);
    Eigen::MatrixXd Ct(2 * n, n + 1), rhs(2 * n, n + 1);
    Ct << cur1.denseC().transpose(), cur2.denseC().transpose();
    rhs << pi[n - 1] * prev1.denseA(), pi[n - 1] * prev2.denseA();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ct, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= opt.rankTol * sv(0))
      throw NumericError("joint C_" + std::to_string(n) + "^T is rank deficient: singular value ratio " +
                         fmt(sv(sv.size() - 1) / sv(0)));
    Eigen::MatrixXd G = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
    if (opt.perturbNullSpace) {
      Eigen::MatrixXd R(n + 1, 2 * n);
      for (int i = 0; i < R.rows(); ++i)
        for (int j = 0; j < R.cols(); ++j) R(i, j) = normal(rng);
      R *= opt.perturbScale * G.norm() / R.norm();
      G += R * (Eigen::MatrixXd::Identity(2 * n, 2 * n) - Ct * G);
    }
    pi.push_back(G * rhs);
    prev1 = cur1;
    prev2 = cur2;
  }
  return pi;
}

double piRecursionDiscrepancy(const FamilySpec& spec, int N, const PiRecursionOptions& opt) {
  const auto mats = invariantPiMatrices(spec, N, opt);
  double worst = 0;
  for (int n = 0; n <= N; ++n) {
    const Eigen::VectorXd cf = normMatrixClosedForm(spec, n).diag;
    const Eigen::MatrixXd diff = mats[n] - Eigen::MatrixXd(cf.asDiagonal());
    worst = std::max(worst, diff.cwiseAbs().maxCoeff() / cf.cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<NormBlock> invariantPi(const FamilySpec& spec, int N, PiMethod method) {
  if (N < 0) throw UsageError("N must be >= 0");
  std::vector<NormBlock> out;
  if (method == PiMethod::ClosedForm) {
    for (int n = 0; n <= N; ++n) out.push_back(normMatrixClosedForm(spec, n));
    return out;
  }
  const auto mats = invariantPiMatrices(spec, N);
  for (int n = 0; n <= N; ++n) out.push_back({n, mats[n].diagonal()});
  return out;
}

Eigen::VectorXd InvariantMeasure::flat() const {
  int total = 0;
  for (const auto& b : blocks) total += static_cast<int>(b.size());
  Eigen::VectorXd v(total);
  int at = 0;
  for (const auto& b : blocks) {
    v.segment(at, b.size()) = b;
    at += static_cast<int>(b.size());
  }
  return v;
}

InvariantMeasure invariantMeasure(const QbdModel& model, int N) {
  if (N < 0) throw UsageError("N must be >= 0");
  InvariantMeasure m;
  for (int n = 0; n <= N; ++n) m.blocks.push_back(normMatrixClosedForm(model.spec, n).diag);
  return m;
}

double stationarityResidual(const QbdModel& model, int N) {
  if (N < 2) throw UsageError("stationarity residual needs N >= 2");
  const DenseTruncation M = truncateModel(model, N);
  const Eigen::VectorXd pi = invariantMeasure(model, N).flat();
  const bool discrete = model.kind == ProcessKind::DiscreteChain;
  Eigen::VectorXd deficit = Eigen::VectorXd::Zero(M.size());
  if (!discrete) deficit.head(stateCount(N - 1)) = deficitVector(model, N);
  const int cols = stateCount(N - 1);
  double worst = 0;
  for (int b = 0; b < cols; ++b) {
    if (!discrete && deficit(b) != 0) continue;
    double r = 0, scale = 0;
    for (int a = 0; a < M.size(); ++a) {
      const double t = pi(a) * M.entries(a, b);
      r += t;
      scale += std::abs(t);
    }
    if (discrete) {
      r -= pi(b);
      scale += pi(b);
    }
    worst = std::max(worst, std::abs(r) / std::max(scale, 1e-300));
  }
  return worst;
}

std::string recurrenceName(Recurrence r) { return r == Recurrence::Transient ? "Transient" : "NullRecurrent"; }

RecurrenceVerdict classifyRecurrence(const QbdModel& model) {
  const FamilySpec& s = model.spec;
  const double t1 = model.tau.tau1, t2 = model.tau.tau2;
  RecurrenceVerdict v;
  auto decide = [&](const std::string& regime, const std::string& criterion, bool holds) {
    v.regime = regime;
    v.criterion = criterion;
    v.criterionSatisfied = holds;
    v.classification = holds ? Recurrence::NullRecurrent : Recurrence::Transient;
  };
  const bool zero1 = std::abs(t1) <= kTauEps, zero2 = std::abs(t2) <= kTauEps;
  switch (s.kind) {
    case FamilyKind::ProductJacobi:
      if (zero2)
        decide("tau = 1", "beta <= 0", s.beta <= 0);
      else if (zero1)
        decide("tau = 0", "delta <= 0", s.delta <= 0);
      else
        decide("0 < tau < 1", "beta + delta <= -1", s.beta + s.delta <= -1);
      break;
    case FamilyKind::ProductLaguerre:
      if (zero1)
        decide("tau1 = 0", "beta <= 0", s.beta <= 0);
      else if (zero2)
        decide("tau2 = 0", "alpha <= 0", s.alpha <= 0);
      else
        decide("tau1, tau2 > 0", "alpha + beta <= -1", s.alpha + s.beta <= -1);
      break;
    case FamilyKind::Parabolic:
      if (zero2)
        decide("tau = 1", "alpha <= 0", s.alpha <= 0);
      else
        decide("0 <= tau < 1", "alpha + beta <= -1", s.alpha + s.beta <= -1);
      break;
    case FamilyKind::Triangle01: decide("admissible tau", "alpha + gamma <= -1", s.alpha + s.gamma <= -1); break;
    case FamilyKind::Triangle00:
      if (zero2)
        decide("tau2 = 0, tau1 > 0", "alpha <= 0", s.alpha <= 0);
      else
        decide("admissible tau1/tau2", "alpha + beta <= -1", s.alpha + s.beta <= -1);
      break;
  }
  return v;
}

double recurrenceIntegralDiagnostic(const QbdModel& model, int m) {
  const QuadratureRule2D rule = domainQuadrature(model.spec, m);
  const double s1 = axisSign(model.spec.kind, 1), s2 = axisSign(model.spec.kind, 2);
  double total = 0;
  for (int q = 0; q < rule.weights.size(); ++q) {
    const double L = model.tau.tau1 * s1 * rule.nodes(q, 0) + model.tau.tau2 * s2 * rule.nodes(q, 1);
    const double denom = model.kind == ProcessKind::DiscreteChain ? 1.0 - L : -L;
    total += rule.weights(q) / denom;
  }
  return total;
}

Eigen::VectorXd deficitVector(const QbdModel& model, int N) {
  if (model.kind != ProcessKind::ContinuousGenerator)
    throw UsageError("deficit vector is defined for continuous-time models only");
  if (N < 1) throw UsageError("deficit vector needs N >= 1");
  const BlockTridiagonal J = modelOperator(model, N);
  Eigen::VectorXd d(stateCount(N - 1));
  for (int n = 0; n < N; ++n) {
    const Eigen::VectorXd rs = J.level(n).rowSums();
    const double scale = std::max(1.0, J.level(n).B.diag.cwiseAbs().maxCoeff());
    for (int k = 0; k <= n; ++k) {
      const double v = -rs(k);
      d(flatIndex(n, k)) = std::abs(v) <= 1e-12 * scale ? 0.0 : v;
    }
  }
  return d;
}

}  // namespace qbd

#include <doctest.h>

#include <random>

#include "qbd/model.hpp"

using namespace qbd;

namespace {

const ProcessKind kDiscrete = ProcessKind::DiscreteChain;
const ProcessKind kContinuous = ProcessKind::ContinuousGenerator;

}  // namespace

TEST_CASE("combine builds the documented operators") {
  const QbdModel pj = combine(FamilySpec::productJacobi(0, 0, 0, 0), 0.5);
  CHECK(pj.kind == kDiscrete);
  CHECK(pj.tau.tau2 == 0.5);
  const Eigen::VectorXd rs = truncateModel(pj, 8).entries.rowwise().sum();
  for (int i = 0; i < flatIndex(8, 0); ++i) CHECK(rs(i) == doctest::Approx(1.0).epsilon(1e-14));

  const QbdModel tr = combine(FamilySpec::triangle01(0, 0, 0), 0.25);
  CHECK(tr.tau.tau1 == 0.25);
  CHECK(tr.tau.tau2 == 1.0);

  const QbdModel t00 = combine(FamilySpec::triangle00(0, 0, 0), Tau{1, 2}, kContinuous);
  CHECK(t00.kind == kContinuous);
}

TEST_CASE("combine rejects tau outside the admissible set") {
  CHECK_THROWS_AS(combine(FamilySpec::triangle01(0, 0, 0), 0.6), DomainError);
  try {
    combine(FamilySpec::triangle01(0, 0, 0), 0.6);
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("0.6") != std::string::npos);
    CHECK(msg.find("(") != std::string::npos);
  }
  CHECK_THROWS_AS(combine(FamilySpec::productJacobi(0, 0, 0, 0), 1.2), DomainError);
  CHECK_THROWS_AS(combine(FamilySpec::productLaguerre(0, 0), Tau{-0.1, 1}, kContinuous), DomainError);
  CHECK_THROWS_AS(combine(FamilySpec::productLaguerre(0, 0), Tau{0, 0}, kContinuous), DomainError);
  CHECK_THROWS_AS(combine(FamilySpec::triangle00(0, 0, 0), Tau{0.4, 1}, kContinuous), DomainError);
}

TEST_CASE("combine rejects kinds a family does not support") {
  CHECK_THROWS_AS(combine(FamilySpec::triangle01(0, 0, 0), Tau{0.1, 1}, kContinuous), UsageError);
  CHECK_THROWS_AS(combine(FamilySpec::triangle00(0, 0, 0), Tau{1, 1}, kDiscrete), UsageError);
  CHECK_THROWS_AS(combine(FamilySpec::productLaguerre(0, 0), Tau{0.5, 0.5}, kDiscrete), UsageError);
  CHECK_THROWS_AS(tauBounds(FamilySpec::triangle01(0, 0, 0), kContinuous), UsageError);
}

TEST_CASE("closed-form tau bounds") {
  const auto sym = tauBounds(FamilySpec::triangle01(0, 0, 0), kDiscrete);
  CHECK(sym.shape == TauBounds::Shape::Interval);
  CHECK(sym.tau2IsOne);
  CHECK(sym.lower == doctest::Approx(-0.5));
  CHECK(sym.upper == doctest::Approx(0.5));

  const auto low = tauBounds(FamilySpec::triangle01(0, 0, 3), kDiscrete);
  CHECK(low.lower == doctest::Approx(-0.2));
  CHECK(low.lowerCase == 2);

  const auto pj = tauBounds(FamilySpec::productJacobi(1, 2, 3, 4), kDiscrete);
  CHECK(pj.lower == 0.0);
  CHECK(pj.upper == 1.0);
  CHECK_FALSE(pj.tau2IsOne);

  const auto pl = tauBounds(FamilySpec::productLaguerre(1, 2), kContinuous);
  CHECK(pl.shape == TauBounds::Shape::Cone);
  CHECK(pl.contains(Tau{0, 3}));
  CHECK_FALSE(pl.contains(Tau{-1, 3}));

  const auto t00 = tauBounds(FamilySpec::triangle00(0, 0, 0), kContinuous);
  CHECK(t00.shape == TauBounds::Shape::Ratio);
  CHECK(t00.ratioThreshold == doctest::Approx(0.5));
  CHECK(t00.contains(Tau{1, 2}));
  CHECK(t00.contains(Tau{1, 0}));
  CHECK_FALSE(t00.contains(Tau{-1, 0}));
}

TEST_CASE("triangle01 bounds are sharp in the symmetric case") {
  const auto s = FamilySpec::triangle01(0, 0, 0);
  const auto b = tauBounds(s, kDiscrete);
  CHECK(minTruncatedEntry(s, Tau{b.upper, 1}, 40, true).value >= -1e-12);
  CHECK(minTruncatedEntry(s, Tau{b.upper + 1e-3, 1}, 40, true).value < -1e-5);
  CHECK(minTruncatedEntry(s, Tau{b.lower, 1}, 40, true).value >= -1e-12);
  CHECK(minTruncatedEntry(s, Tau{b.lower - 1e-3, 1}, 40, true).value < -1e-5);
}

TEST_CASE("triangle tau scan locates the entry that goes negative") {
  const auto s = FamilySpec::triangle01(0, 0, 0);
  const auto scan = scanTriangleTau(s, {0, 1, 2, 3, 4, 5, 10, 20, 40});
  CHECK(scan.feasible);
  CHECK(scan.upper >= 0.5);
  CHECK(scan.upper <= 0.5 + 1e-3);
  CHECK(scan.lower <= -0.5);
  CHECK(scan.lower >= -0.5 - 1e-3);
  CHECK(scan.upperLevel >= 0);
  const auto levels = deepScanLevels(10, 6);
  CHECK(levels.front() == 0);
  CHECK(levels.back() >= 64);
  CHECK(levels.back() <= 128);
  CHECK(std::is_sorted(levels.begin(), levels.end()));
}

TEST_CASE("invariant Pi by both routes") {
  for (const auto& s : {FamilySpec::productJacobi(0, 0, 0, 0), FamilySpec::parabolic(0, 0)}) {
    const auto p = invariantPi(s, 0, PiMethod::Recursion);
    REQUIRE(p.size() == 1);
    CHECK(p[0].diag(0) == doctest::Approx(1.0));
  }
  const auto rec = invariantPi(FamilySpec::productJacobi(0, 0, 0, 0), 1, PiMethod::Recursion);
  CHECK(rec[1].diag(0) == doctest::Approx(3.0));
  CHECK(rec[1].diag(1) == doctest::Approx(3.0));

  const auto pr = invariantPi(FamilySpec::parabolic(1, 1), 4, PiMethod::Recursion);
  const auto pc = invariantPi(FamilySpec::parabolic(1, 1), 4, PiMethod::ClosedForm);
  for (int n = 0; n <= 4; ++n) CHECK((pr[n].diag - pc[n].diag).cwiseAbs().maxCoeff() <= 1e-10 * pc[n].diag.maxCoeff());

  const std::vector<double> grid{0, 0.5, 1, 2.5};
  for (double a : grid)
    for (double b : grid) {
      const double c = grid[static_cast<int>(a * 2 + b) % 4];
      for (const auto& s : {FamilySpec::productJacobi(a, b, c, b), FamilySpec::productLaguerre(a, b),
                            FamilySpec::parabolic(a, b), FamilySpec::triangle01(a, b, c),
                            FamilySpec::triangle00(a, b, c)}) {
        CHECK(piRecursionDiscrepancy(s, 10) <= 1e-9);
        PiRecursionOptions opt;
        opt.perturbNullSpace = true;
        opt.seed = 99;
        CHECK(piRecursionDiscrepancy(s, 10, opt) <= 1e-9);
      }
    }
}

TEST_CASE("invariant measure") {
  const QbdModel pj = combine(FamilySpec::productJacobi(0, 0, 0, 0), 0.5);
  const Eigen::VectorXd pi = invariantMeasure(pj, 2).flat();
  Eigen::VectorXd expect(6);
  expect << 1, 3, 3, 5, 9, 5;
  CHECK((pi - expect).cwiseAbs().maxCoeff() <= 1e-12);

  const QbdModel tr = combine(FamilySpec::triangle01(0, 0, 0), 0.1);
  const Eigen::VectorXd pt = invariantMeasure(tr, 6).flat();
  CHECK(pt(0) == 1.0);
  CHECK(pt.minCoeff() > 0);
}

TEST_CASE("stationarity residuals") {
  CHECK(stationarityResidual(combine(FamilySpec::productJacobi(0, 0, 0, 0), 0.5), 8) <= 1e-11);
  CHECK(stationarityResidual(combine(FamilySpec::triangle01(1, 0, 2), 0.0), 8) <= 1e-11);
  CHECK(stationarityResidual(combine(FamilySpec::productLaguerre(1, 1), Tau{1, 1}, kContinuous), 8) <= 1e-11);
  CHECK(stationarityResidual(combine(FamilySpec::parabolic(2, 0.5), 0.3), 10) <= 1e-11);
  CHECK(stationarityResidual(combine(FamilySpec::triangle00(1, 0.5, 2), Tau{1, 1}, kContinuous), 10) <= 1e-11);
}

TEST_CASE("recurrence classification") {
  CHECK(classifyRecurrence(combine(FamilySpec::productJacobi(0, -0.6, 0, -0.6), 0.5)).classification ==
        Recurrence::NullRecurrent);
  CHECK(classifyRecurrence(combine(FamilySpec::productJacobi(0, -0.4, 0, -0.4), 0.5)).classification ==
        Recurrence::Transient);
  CHECK(classifyRecurrence(combine(FamilySpec::triangle01(0, 0, 0), 0.3)).classification == Recurrence::Transient);
  CHECK(classifyRecurrence(combine(FamilySpec::productLaguerre(1, 0), Tau{0, 1}, kContinuous)).classification ==
        Recurrence::NullRecurrent);
  CHECK(classifyRecurrence(combine(FamilySpec::productLaguerre(1, 0.5), Tau{0, 1}, kContinuous)).classification ==
        Recurrence::Transient);
  const auto v = classifyRecurrence(combine(FamilySpec::parabolic(-0.6, -0.5), 1.0));
  CHECK(v.classification == Recurrence::NullRecurrent);
  CHECK_FALSE(v.criterion.empty());
}

TEST_CASE("classification ignores tau within a regime") {
  const auto s = FamilySpec::productJacobi(0.3, -0.7, 1, -0.2);
  const auto base = classifyRecurrence(combine(s, 0.5)).classification;
  for (double t : {0.1, 0.35, 0.8}) CHECK(classifyRecurrence(combine(s, t)).classification == base);
}

TEST_CASE("recurrence diagnostic grows only for divergent integrals") {
  const QbdModel div = combine(FamilySpec::productJacobi(0, -0.6, 0, -0.6), 0.5);
  const QbdModel con = combine(FamilySpec::productJacobi(0, 1, 0, 1), 0.5);
  CHECK(recurrenceIntegralDiagnostic(div, 80) > 1.5 * recurrenceIntegralDiagnostic(div, 10));
  CHECK(std::abs(recurrenceIntegralDiagnostic(con, 80) - recurrenceIntegralDiagnostic(con, 40)) < 1e-6);
}

TEST_CASE("killing deficits") {
  const QbdModel m = combine(FamilySpec::productLaguerre(1, 2), Tau{1, 1}, kContinuous);
  const Eigen::VectorXd d = deficitVector(m, 8);
  CHECK(d(flatIndex(5, 0)) == doctest::Approx(2.0));
  CHECK(d(flatIndex(5, 5)) == doctest::Approx(1.0));
  CHECK(std::abs(d(flatIndex(5, 2))) <= 1e-13);
  CHECK(declaredDeficit(m, 5, 0) == 2.0);
  CHECK(declaredDeficit(m, 0, 0) == 3.0);
  CHECK(rowSumDefect(m, 10) <= 1e-12);
  CHECK_THROWS_AS(deficitVector(combine(FamilySpec::parabolic(0, 0), 0.5), 4), UsageError);

  const QbdModel one =
      combine(FamilySpec::productLaguerre(1, 2, LaguerreVariant::EndpointOne), Tau{1, 1}, kContinuous);
  CHECK(deficitVector(one, 8).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("row sums over random admissible draws") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> p(0, 5), u(0, 1);
  for (int i = 0; i < 5; ++i) {
    CHECK(rowSumDefect(combine(FamilySpec::productJacobi(p(rng), p(rng), p(rng), p(rng)), u(rng)), 40) <= 1e-12);
    CHECK(rowSumDefect(combine(FamilySpec::parabolic(p(rng), p(rng)), u(rng)), 40) <= 1e-12);
    const auto t = FamilySpec::triangle01(p(rng), p(rng), p(rng));
    const auto b = tauBounds(t, kDiscrete);
    CHECK(rowSumDefect(combine(t, b.lower + u(rng) * (b.upper - b.lower)), 40) <= 1e-12);
  }
}

TEST_CASE("process kind names") {
  CHECK(parseProcessKind(processKindName(kDiscrete)) == kDiscrete);
  CHECK(parseProcessKind(processKindName(kContinuous)) == kContinuous);
  CHECK(supportedKind(FamilyKind::Triangle00) == kContinuous);
  CHECK(tauFromScalar(FamilyKind::Parabolic, 0.25).tau2 == 0.75);
}

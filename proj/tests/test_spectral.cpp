#include <doctest.h>

#include "qbd/spectral.hpp"

using namespace qbd;

namespace {

TransitionQuery query(int i, int ip, int j, int jp, Horizon h) { return {i, ip, j, jp, h}; }

}  // namespace

TEST_CASE("zero horizon is the identity") {
  const QbdModel pj = combine(FamilySpec::productJacobi(1, 0.5, 2, 0), 0.3);
  const QbdModel tr = combine(FamilySpec::triangle01(0, 1, 2), 0.1);
  const QbdModel pl = combine(FamilySpec::productLaguerre(1, 1), Tau{1, 1}, ProcessKind::ContinuousGenerator);
  for (const auto* m : {&pj, &tr}) {
    const Eigen::MatrixXd K = kmMatrix(*m, 3, Horizon::ofSteps(0));
    CHECK((K - Eigen::MatrixXd::Identity(K.rows(), K.cols())).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const Eigen::MatrixXd K = kmMatrix(pl, 3, Horizon::ofTime(0));
  CHECK((K - Eigen::MatrixXd::Identity(K.rows(), K.cols())).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("one-step entries match the level-zero coefficients") {
  const QbdModel pj0 = combine(FamilySpec::productJacobi(0, 0, 0, 0), 0.5);
  CHECK(kmEntry(pj0, query(0, 0, 0, 0, Horizon::ofSteps(1))) == doctest::Approx(0.5).epsilon(1e-13));

  const double a = 1.5, b = 0.5, c = 3, d = 2, tau = 0.3;
  const QbdModel pj = combine(FamilySpec::productJacobi(a, b, c, d), tau);
  const double expect = tau * (a + 1) / (a + b + 2) + (1 - tau) * (c + 1) / (c + d + 2);
  CHECK(kmEntry(pj, query(0, 0, 0, 0, Horizon::ofSteps(1))) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(truncateModel(pj, 2).entries(0, 0) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("horizon must match the model kind") {
  const QbdModel pj = combine(FamilySpec::productJacobi(0, 0, 0, 0), 0.5);
  CHECK_THROWS_AS(kmEntry(pj, query(0, 0, 0, 0, Horizon::ofTime(1))), UsageError);
  const QbdModel pl = combine(FamilySpec::productLaguerre(0, 0), Tau{1, 1}, ProcessKind::ContinuousGenerator);
  CHECK_THROWS_AS(kmEntry(pl, query(0, 0, 0, 0, Horizon::ofSteps(1))), UsageError);
  CHECK_THROWS_AS(query(1, 2, 0, 0, Horizon::ofSteps(1)).validate(), UsageError);
  CHECK_THROWS_AS(query(0, 0, 0, 0, Horizon::ofSteps(-1)).validate(), UsageError);
}

TEST_CASE("discrete cross-checks against matrix powers") {
  const QbdModel pj = combine(FamilySpec::productJacobi(0, 0, 0, 0), 0.5);
  const QbdModel tr = combine(FamilySpec::triangle01(0, 0, 0), 0.25);
  const QbdModel pb = combine(FamilySpec::parabolic(1, 0.5), 0.6);
  for (const auto* m : {&pj, &tr, &pb})
    for (int n = 0; n <= 6; ++n) {
      const auto r = spectralCrossCheck(*m, 12, Horizon::ofSteps(n), 4);
      CHECK(r.compared > 0);
      CHECK(r.maxAbsError <= 1e-10);
    }
}

TEST_CASE("continuous cross-checks against the uniformized exponential") {
  const QbdModel t00 = combine(FamilySpec::triangle00(1, 0.5, 2), Tau{1, 1}, ProcessKind::ContinuousGenerator);
  const auto r = spectralCrossCheck(t00, 14, Horizon::ofTime(0.2));
  CHECK(r.compared > 0);
  CHECK(r.maxAbsError <= 1e-8);

  const QbdModel pl = combine(FamilySpec::productLaguerre(1, 1), Tau{1, 1}, ProcessKind::ContinuousGenerator);
  const auto s = spectralCrossCheck(pl, 14, Horizon::ofTime(0.1));
  CHECK(s.compared > 0);
  CHECK(s.maxAbsError <= 1e-8);
  const auto w = spectralCrossCheck(pl, 14, Horizon::ofTime(0.2), -1, 1e-6);
  CHECK(w.compared > 0);
  CHECK(w.maxAbsError <= 1e-8);
}

TEST_CASE("rows sum to one over the reachable range") {
  for (const auto& m : {combine(FamilySpec::productJacobi(0.5, 1, 0, 2), 0.4), combine(FamilySpec::parabolic(0, 1), 0.5),
                        combine(FamilySpec::triangle01(1, 1, 1), -0.2)})
    for (int n : {1, 3, 5}) {
      const int from = 2;
      const Eigen::MatrixXd K = kmMatrix(m, from + n, Horizon::ofSteps(n));
      for (int k = 0; k <= from; ++k) CHECK(std::abs(K.row(flatIndex(from, k)).sum() - 1) <= 1e-9);
    }
}

TEST_CASE("detailed balance against the invariant measure") {
  for (const auto& m : {combine(FamilySpec::productJacobi(0.5, 1, 0, 2), 0.4), combine(FamilySpec::triangle01(0, 2, 1), 0.1),
                        combine(FamilySpec::productLaguerre(0.5, 2), Tau{1, 0.5}, ProcessKind::ContinuousGenerator)}) {
    const Horizon h = m.kind == ProcessKind::DiscreteChain ? Horizon::ofSteps(3) : Horizon::ofTime(0.3);
    const int L = 4;
    const Eigen::MatrixXd K = kmMatrix(m, L, h);
    const Eigen::VectorXd pi = invariantMeasure(m, L).flat();
    const Eigen::MatrixXd F = pi.asDiagonal() * K;
    CHECK((F - F.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, F.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("Chapman-Kolmogorov through the integral representation") {
  const QbdModel m = combine(FamilySpec::productJacobi(1, 0, 0.5, 0.5), 0.7);
  const int a = 2, b = 3, L = 3;
  const Eigen::MatrixXd Kab = kmMatrix(m, L, Horizon::ofSteps(a + b));
  const Eigen::MatrixXd Ka = kmMatrix(m, L + b, Horizon::ofSteps(a));
  const Eigen::MatrixXd Kb = kmMatrix(m, L + b, Horizon::ofSteps(b));
  const Eigen::MatrixXd prod = Ka * Kb;
  const int T = stateCount(L);
  CHECK((Kab - prod.topLeftCorner(T, T)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("quadrature order covers the polynomial degree") {
  CHECK(discreteKmOrder(4, 6) >= (4 + 4 + 6 + 2) / 2);
  CHECK(discreteKmOrder(0, 0) >= 1);
}

#include <doctest.h>

#include <map>
#include <sstream>

#include "qbd/simulate.hpp"

using namespace qbd;

namespace {

const ProcessKind kContinuous = ProcessKind::ContinuousGenerator;

}  // namespace

TEST_CASE("triangle01 first step from the origin") {
  const QbdModel m = combine(FamilySpec::triangle01(0, 0, 0), 0.0);
  Rng rng(42);
  std::map<State, long long> counts;
  const long long steps = 100000;
  for (long long i = 0; i < steps; ++i) ++counts[stepDiscrete(m, {0, 0}, rng)];
  CHECK(counts.size() == 3);
  for (const auto& [s, p] : std::map<State, double>{{{1, 1}, 0.5}, {{1, 0}, 1.0 / 6}, {{0, 0}, 1.0 / 3}}) {
    const double f = static_cast<double>(counts[s]) / steps;
    CHECK(std::abs(f - p) <= 3 * std::sqrt(p * (1 - p) / steps));
  }
}

TEST_CASE("empirical step frequencies match the row") {
  const QbdModel m = combine(FamilySpec::parabolic(0.5, 1), 0.4);
  const State from{3, 1};
  const Eigen::MatrixXd P = truncateModel(m, 5).entries;
  Rng rng(9);
  std::map<State, long long> counts;
  const long long steps = 100000;
  for (long long i = 0; i < steps; ++i) ++counts[stepDiscrete(m, from, rng)];
  for (const auto& [s, c] : counts) {
    const double p = P(flatIndex(from.first, from.second), flatIndex(s.first, s.second));
    CHECK(p > 0);
    CHECK(std::abs(static_cast<double>(c) / steps - p) <= 3 * std::sqrt(p * (1 - p) / steps) + 1e-12);
  }
}

TEST_CASE("product Jacobi with tau one keeps the phase") {
  const QbdModel m = combine(FamilySpec::productJacobi(1, 0, 2, 3), 1.0);
  const TransitionTable table(m, 40);
  for (std::uint64_t p = 0; p < 50; ++p) {
    Rng rng = SeedPolicy{5}.stream(p);
    const Trajectory t = sampleDiscretePath(table, {3, 2}, 30, rng);
    for (const auto& s : t.states) CHECK(s.second == 2);
  }
}

TEST_CASE("discrete paths move between adjacent levels") {
  const QbdModel m = combine(FamilySpec::triangle01(1, 0, 2), 0.2);
  const TransitionTable table(m, 25);
  Rng rng(1);
  const Trajectory t = sampleDiscretePath(table, {2, 1}, 200, rng);
  for (std::size_t i = 1; i < t.states.size(); ++i) CHECK(std::abs(t.states[i].first - t.states[i - 1].first) <= 1);
  CHECK(t.times.empty());
}

TEST_CASE("continuous holding rate and zero horizon") {
  const QbdModel m = combine(FamilySpec::productLaguerre(0, 0), Tau{1, 1}, kContinuous);
  const TransitionTable table(m, 20);
  CHECK(table.rate({0, 0}) == doctest::Approx(2.0));
  Rng rng(3);
  const Trajectory t = sampleContinuousPath(table, {0, 0}, 0.0, rng);
  REQUIRE(t.states.size() == 1);
  CHECK(t.states[0] == State{0, 0});
  CHECK(t.terminal == Terminal::Alive);

  const Trajectory u = sampleContinuousPath(m, {1, 0}, 2.0, rng, 30);
  CHECK(u.times.size() == u.states.size());
  for (std::size_t i = 1; i < u.states.size(); ++i) {
    CHECK(std::abs(u.states[i].first - u.states[i - 1].first) <= 1);
    CHECK(u.times[i] > u.times[i - 1]);
  }
}

TEST_CASE("killing rate at the phase-zero boundary") {
  const double beta = 2, h = 0.01;
  const QbdModel m = combine(FamilySpec::productLaguerre(1, beta), Tau{1, 1}, kContinuous);
  const TransitionTable table(m, 30);
  CHECK(table.deficit({5, 0}) == doctest::Approx(beta));
  const long long paths = 200000;
  long long killed = 0;
  for (long long p = 0; p < paths; ++p) {
    Rng rng = SeedPolicy{17}.stream(static_cast<std::uint64_t>(p));
    if (sampleContinuousPath(table, {5, 0}, h, rng).terminal == Terminal::Killed) ++killed;
  }
  const double frac = static_cast<double>(killed) / paths;
  const double stderr_ = std::sqrt(beta * h / paths);
  CHECK(std::abs(frac - beta * h) <= 4 * stderr_ + 2 * (beta * h) * (beta * h));
}

TEST_CASE("integrity checks on malformed models") {
  QbdModel bad{FamilySpec::productJacobi(0, 0, 0, 0), Tau{0.5, 0.7}, ProcessKind::DiscreteChain};
  CHECK_THROWS_AS(TransitionTable(bad, 5), ModelIntegrityError);
  const QbdModel neg = combine(FamilySpec::productLaguerre(-0.5, 1), Tau{1, 1}, kContinuous);
  CHECK_THROWS_AS(TransitionTable(neg, 5), ModelIntegrityError);
}

TEST_CASE("empirical estimates") {
  const QbdModel m = combine(FamilySpec::productJacobi(0, 0, 0, 0), 0.5);
  const auto id = estimateEmpirical(m, {1, 1, 1, 1, Horizon::ofSteps(0)}, 1000);
  CHECK(id.estimate == 1.0);
  CHECK(id.standardError == 0.0);

  const TransitionQuery q{0, 0, 0, 0, Horizon::ofSteps(2)};
  SimulationOptions opt;
  opt.seed = 2024;
  const auto e = estimateEmpirical(m, q, 1000000, opt);
  const double km = kmEntry(m, q);
  CHECK(std::abs(e.estimate - km) <= 4 * e.standardError);
  CHECK_FALSE(e.biased);

  const auto again = estimateEmpirical(m, q, 1000000, opt);
  CHECK(again.estimate == e.estimate);
  CHECK(again.hits == e.hits);
}

TEST_CASE("estimates do not depend on the worker count") {
  const QbdModel m = combine(FamilySpec::productLaguerre(1, 0.5), Tau{1, 2}, kContinuous);
  const TransitionQuery q{1, 0, 1, 1, Horizon::ofTime(0.3)};
  SimulationOptions opt;
  opt.seed = 77;
  opt.N = 30;
  opt.workers = 1;
  const auto a = estimateEmpirical(m, q, 20000, opt);
  for (int w : {4, 16}) {
    opt.workers = w;
    const auto b = estimateEmpirical(m, q, 20000, opt);
    CHECK(b.estimate == a.estimate);
    CHECK(b.hits == a.hits);
    CHECK(b.killed == a.killed);
    CHECK(b.exits == a.exits);
  }
}

TEST_CASE("seed streams are reproducible") {
  const SeedPolicy s{123};
  Rng a = s.stream(7), b = s.stream(7), c = s.stream(8);
  const auto x = a(), y = b(), z = c();
  CHECK(x == y);
  CHECK(x != z);
}

TEST_CASE("trajectory CSV") {
  const QbdModel m = combine(FamilySpec::productLaguerre(0, 0), Tau{1, 1}, kContinuous);
  Rng rng(1);
  std::vector<Trajectory> paths{sampleContinuousPath(m, {0, 0}, 0.5, rng, 20)};
  std::ostringstream os;
  writeTrajectoriesCsv(os, paths);
  const std::string csv = os.str();
  CHECK(csv.rfind("path,step,level,phase,time,terminal\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(paths[0].states.size()) + 1);
}

TEST_CASE("chi-square independence") {
  const auto indep = chiSquareIndependence({{100, 200, 300}, {200, 400, 600}});
  CHECK(indep.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(indep.dof == 2);
  CHECK(indep.pValue == doctest::Approx(1.0));
  const auto dep = chiSquareIndependence({{500, 10}, {10, 500}, {0, 0}});
  CHECK(dep.dof == 1);
  CHECK(dep.pValue < 1e-10);

  const QbdModel pj = combine(FamilySpec::productJacobi(1, 1, 0.5, 2), 0.5);
  const auto d = independenceDiscrete(pj, 3, {0, 2, 4}, 4, 20000);
  CHECK(d.pValue > 1e-3);
  const QbdModel pl = combine(FamilySpec::productLaguerre(1, 1), Tau{1, 1}, kContinuous);
  const auto c = independenceContinuous(pl, {4, 2}, 0.3, 50000, 6);
  CHECK(c.pValue > 1e-3);
  CHECK_THROWS_AS(independenceDiscrete(combine(FamilySpec::parabolic(0, 0), 0.5), 1, {0}, 2, 10), UsageError);
}

#include "qbd/simulate.hpp"

#include <algorithm>
#include <cassert>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <thread>

namespace qbd {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Runs fn(path) for every path and stores its small integer outcome; the result does not depend
/// on the worker count.
template <class Fn>
std::vector<int> runPaths(long long paths, int workers, Fn&& fn) {
  std::vector<int> out(static_cast<std::size_t>(paths));
  const int w = static_cast<int>(std::max<long long>(1, std::min<long long>(effectiveWorkers(workers), paths)));
  if (w == 1) {
    for (long long p = 0; p < paths; ++p) out[p] = fn(p);
    return out;
  }
  std::vector<std::thread> pool;
  const long long chunk = (paths + w - 1) / w;
  for (int t = 0; t < w; ++t) {
    const long long lo = t * chunk, hi = std::min(paths, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      for (long long p = lo; p < hi; ++p) out[p] = fn(p);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

constexpr State kKilled{-1, -1};

}  // namespace

std::string terminalName(Terminal t) {
  switch (t) {
    case Terminal::Alive: return "alive";
    case Terminal::Killed: return "killed";
    case Terminal::TruncationExit: return "truncation-exit";
  }
  return "alive";
}

Rng SeedPolicy::stream(std::uint64_t path) const {
  return Rng(splitmix64(masterSeed ^ splitmix64(path + 0x632BE59BD9B4E019ULL)));
}

int effectiveWorkers(int requested) {
  int w = std::max(1, requested);
  if (const char* env = std::getenv("QBD_NUM_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) w = std::min(w, cap);
  }
  return w;
}

TransitionTable::TransitionTable(const QbdModel& model, int N)
    : N_(N), continuous_(model.kind == ProcessKind::ContinuousGenerator) {
  if (N < 1) throw UsageError("simulation truncation N must be >= 1");
  const BlockTridiagonal J = modelOperator(model, N);
  const int total = stateCount(N);
  offset_.assign(total + 1, 0);
  rate_.assign(total, 0.0);
  deficit_.assign(total, 0.0);
  for (int n = 0; n <= N; ++n) {
    const LevelBlocks& lb = J.level(n);
    for (int k = 0; k <= n; ++k) {
      const int s = flatIndex(n, k);
      std::vector<std::pair<int, double>> row;
      auto add = [&](int level, int phase, double v) {
        if (phase < 0 || phase > level) return;
        row.emplace_back(flatIndex(level, phase), v);
      };
      if (n < N) {
        add(n + 1, k - 1, lb.A.lower(k));
        add(n + 1, k, lb.A.diag(k));
        add(n + 1, k + 1, lb.A.upper(k));
      }
      add(n, k - 1, lb.B.lower(k));
      add(n, k + 1, lb.B.upper(k));
      if (n >= 1) {
        add(n - 1, k - 1, lb.C.lower(k));
        add(n - 1, k, lb.C.diag(k));
        add(n - 1, k + 1, lb.C.upper(k));
      }
      const double diag = lb.B.diag(k);
      double off = 0;
      for (const auto& [t, v] : row) {
        if (v < -1e-12)
          throw ModelIntegrityError("negative transition entry " + std::to_string(v) + " at state (" +
                                    std::to_string(n) + "," + std::to_string(k) + ")");
        off += std::max(v, 0.0);
      }
      if (continuous_) {
        rate_[s] = -diag;
        deficit_[s] = -diag - off;
        if (deficit_[s] < -1e-12 * std::max(1.0, -diag))
          throw ModelIntegrityError("positive row sum at state (" + std::to_string(n) + "," + std::to_string(k) +
                                    "); the generator cannot be simulated");
        if (deficit_[s] <= 1e-12 * std::max(1.0, -diag)) deficit_[s] = 0.0;
      } else {
        if (diag < -1e-12)
          throw ModelIntegrityError("negative holding probability at state (" + std::to_string(n) + "," +
                                    std::to_string(k) + ")");
        if (n < N && std::abs(off + diag - 1.0) > 1e-9)
          throw ModelIntegrityError("row (" + std::to_string(n) + "," + std::to_string(k) + ") sums to " +
                                    std::to_string(off + diag));
        row.emplace_back(s, std::max(diag, 0.0));
      }
      double acc = 0;
      for (const auto& [t, v] : row) {
        acc += std::max(v, 0.0);
        target_.push_back(t);
        cumulative_.push_back(acc);
      }
      offset_[s + 1] = static_cast<int>(target_.size());
    }
  }
}

State TransitionTable::sampleJump(const State& st, Rng& rng) const {
  const int s = flatIndex(st.first, st.second);
  const int lo = offset_[s], hi = offset_[s + 1];
  double u = uniform01(rng);
  if (continuous_) {
    u *= rate_[s];
    if (u < deficit_[s]) return kKilled;
    u -= deficit_[s];
  } else {
    u *= hi > lo ? cumulative_[hi - 1] : 0.0;
  }
  for (int i = lo; i < hi; ++i)
    if (u < cumulative_[i]) return unflatten(target_[i]);
  return unflatten(target_[hi - 1]);
}

State stepDiscrete(const QbdModel& model, const State& s, Rng& rng) {
  if (model.kind != ProcessKind::DiscreteChain) throw UsageError("stepDiscrete needs a discrete model");
  if (s.first < 0 || s.second < 0 || s.second > s.first) throw UsageError("state out of range");
  const TransitionTable table(model, s.first + 1);
  return table.sampleJump(s, rng);
}

Trajectory sampleDiscretePath(const TransitionTable& table, const State& start, int steps, Rng& rng) {
  Trajectory tr;
  tr.states.push_back(start);
  State s = start;
  for (int i = 0; i < steps; ++i) {
    const State next = table.sampleJump(s, rng);
    assert(std::abs(next.first - s.first) <= 1);
    s = next;
    tr.states.push_back(s);
    if (s.first >= table.N()) {
      tr.terminal = Terminal::TruncationExit;
      break;
    }
  }
  return tr;
}

Trajectory sampleContinuousPath(const TransitionTable& table, const State& start, double t, Rng& rng) {
  if (!table.continuous()) throw UsageError("continuous path needs a continuous model");
  if (!(t >= 0)) throw UsageError("time horizon must be >= 0");
  Trajectory tr;
  tr.states.push_back(start);
  tr.times.push_back(0.0);
  State s = start;
  double now = 0;
  while (true) {
    const double r = table.rate(s);
    if (r <= 0) break;
    now += std::exponential_distribution<double>(r)(rng);
    if (now > t) break;
    const State next = table.sampleJump(s, rng);
    if (next == kKilled) {
      tr.terminal = Terminal::Killed;
      break;
    }
    assert(std::abs(next.first - s.first) <= 1);
    s = next;
    tr.states.push_back(s);
    tr.times.push_back(now);
    if (s.first >= table.N()) {
      tr.terminal = Terminal::TruncationExit;
      break;
    }
  }
  return tr;
}

Trajectory sampleContinuousPath(const QbdModel& model, const State& start, double t, Rng& rng, int N) {
  if (model.kind != ProcessKind::ContinuousGenerator) throw UsageError("continuous path needs a continuous model");
  if (start.first >= N) throw UsageError("start state beyond truncation level");
  const TransitionTable table(model, N);
  return sampleContinuousPath(table, start, t, rng);
}

EmpiricalEstimate estimateEmpirical(const QbdModel& model, const TransitionQuery& q, long long paths,
                                    const SimulationOptions& opt) {
  q.validate();
  if (paths < 1) throw UsageError("paths must be >= 1");
  const bool continuous = model.kind == ProcessKind::ContinuousGenerator;
  if (continuous != q.horizon.continuous) throw UsageError("model kind does not match the query horizon");
  const int N = continuous ? opt.N : q.fromLevel + q.horizon.steps + 1;
  if (q.fromLevel >= N) throw UsageError("start state beyond truncation level");
  const TransitionTable table(model, N);
  const SeedPolicy seeds{opt.seed};
  const State start{q.fromLevel, q.fromPhase}, goal{q.toLevel, q.toPhase};
  const std::vector<int> outcome = runPaths(paths, opt.workers, [&](long long p) {
    Rng rng = seeds.stream(static_cast<std::uint64_t>(p));
    const Trajectory tr = continuous ? sampleContinuousPath(table, start, q.horizon.time, rng)
                                     : sampleDiscretePath(table, start, q.horizon.steps, rng);
    if (tr.terminal == Terminal::TruncationExit) return 3;
    if (tr.terminal == Terminal::Killed) return 2;
    return tr.states.back() == goal ? 1 : 0;
  });
  EmpiricalEstimate e;
  e.paths = paths;
  for (int o : outcome) {
    if (o == 1) ++e.hits;
    if (o == 2) ++e.killed;
    if (o == 3) ++e.exits;
  }
  const long long used = paths - e.exits;
  e.exitFraction = static_cast<double>(e.exits) / static_cast<double>(paths);
  e.biased = e.exitFraction > 1e-3;
  if (used > 0) {
    e.estimate = static_cast<double>(e.hits) / static_cast<double>(used);
    e.standardError = std::sqrt(e.estimate * (1 - e.estimate) / static_cast<double>(used));
  }
  return e;
}

void writeTrajectoriesCsv(std::ostream& os, const std::vector<Trajectory>& paths) {
  os << "path,step,level,phase,time,terminal\n";
  os.precision(17);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const Trajectory& tr = paths[p];
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      os << p << ',' << i << ',' << tr.states[i].first << ',' << tr.states[i].second << ',';
      if (i < tr.times.size()) os << tr.times[i];
      os << ',' << (i + 1 == tr.states.size() ? terminalName(tr.terminal) : "alive") << '\n';
    }
  }
}

IndependenceTest chiSquareIndependence(const std::vector<std::vector<long long>>& raw) {
  std::vector<long long> rowSum, colSum;
  std::vector<std::vector<long long>> t;
  {
    const std::size_t cols = raw.empty() ? 0 : raw[0].size();
    std::vector<long long> cs(cols, 0);
    for (const auto& r : raw)
      for (std::size_t j = 0; j < cols; ++j) cs[j] += r.at(j);
    for (const auto& r : raw) {
      std::vector<long long> kept;
      long long s = 0;
      for (std::size_t j = 0; j < cols; ++j)
        if (cs[j] > 0) {
          kept.push_back(r[j]);
          s += r[j];
        }
      if (s > 0) {
        t.push_back(kept);
        rowSum.push_back(s);
      }
    }
    for (long long c : cs)
      if (c > 0) colSum.push_back(c);
  }
  IndependenceTest res;
  res.table = raw;
  for (long long r : rowSum) res.samples += r;
  const int R = static_cast<int>(t.size()), C = static_cast<int>(colSum.size());
  res.dof = (R - 1) * (C - 1);
  if (res.dof <= 0) {
    res.pValue = 1.0;
    return res;
  }
  const double total = static_cast<double>(res.samples);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) {
      const double expect = static_cast<double>(rowSum[i]) * static_cast<double>(colSum[j]) / total;
      const double d = static_cast<double>(t[i][j]) - expect;
      res.statistic += d * d / expect;
    }
  const boost::math::chi_squared dist(res.dof);
  res.pValue = boost::math::cdf(boost::math::complement(dist, res.statistic));
  return res;
}

IndependenceTest independenceDiscrete(const QbdModel& model, int h0, const std::vector<int>& kStarts, int steps,
                                      long long pathsPerStart, const SimulationOptions& opt) {
  if (model.spec.kind != FamilyKind::ProductJacobi || model.kind != ProcessKind::DiscreteChain)
    throw UsageError("discrete independence test needs a product Jacobi chain");
  if (h0 < 0 || steps < 0 || pathsPerStart < 1 || kStarts.empty()) throw UsageError("bad independence design");
  int maxK = 0;
  for (int k : kStarts) {
    if (k < 0) throw UsageError("phase start must be >= 0");
    maxK = std::max(maxK, k);
  }
  const int N = h0 + maxK + steps + 1;
  const TransitionTable table(model, N);
  const SeedPolicy seeds{opt.seed};
  const long long total = pathsPerStart * static_cast<long long>(kStarts.size());
  const std::vector<int> outcome = runPaths(total, opt.workers, [&](long long p) {
    const int k0 = kStarts[p / pathsPerStart];
    Rng rng = seeds.stream(static_cast<std::uint64_t>(p));
    const Trajectory tr = sampleDiscretePath(table, {h0 + k0, k0}, steps, rng);
    const State& e = tr.states.back();
    return (e.first - e.second) - h0 + steps;
  });
  std::vector<std::vector<long long>> tab(kStarts.size(), std::vector<long long>(2 * steps + 1, 0));
  for (long long p = 0; p < total; ++p) ++tab[p / pathsPerStart][outcome[p]];
  return chiSquareIndependence(tab);
}

IndependenceTest independenceContinuous(const QbdModel& model, const State& start, double t, long long paths,
                                        int cap, const SimulationOptions& opt) {
  if (model.spec.kind != FamilyKind::ProductLaguerre || model.kind != ProcessKind::ContinuousGenerator)
    throw UsageError("continuous independence test needs a product Laguerre generator");
  if (cap < 1 || paths < 1) throw UsageError("bad independence design");
  const TransitionTable table(model, opt.N);
  const SeedPolicy seeds{opt.seed};
  const std::vector<int> outcome = runPaths(paths, opt.workers, [&](long long p) {
    Rng rng = seeds.stream(static_cast<std::uint64_t>(p));
    const Trajectory tr = sampleContinuousPath(table, start, t, rng);
    if (tr.terminal != Terminal::Alive) return -1;
    const State& e = tr.states.back();
    const int h = std::min(e.first - e.second, cap), k = std::min(e.second, cap);
    return h * (cap + 1) + k;
  });
  std::vector<std::vector<long long>> tab(cap + 1, std::vector<long long>(cap + 1, 0));
  for (int o : outcome)
    if (o >= 0) ++tab[o / (cap + 1)][o % (cap + 1)];
  return chiSquareIndependence(tab);
}

}  // namespace qbd

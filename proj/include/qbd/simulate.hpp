#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <utility>
#include <vector>

#include "qbd/model.hpp"
#include "qbd/spectral.hpp"

namespace qbd {

using State = std::pair<int, int>;
using Rng = std::mt19937_64;

enum class Terminal { Alive, Killed, TruncationExit };
std::string terminalName(Terminal t);

struct Trajectory {
  std::vector<State> states;
  /// Jump epochs for continuous models, states[i] entered at times[i]; empty for discrete ones.
  std::vector<double> times;
  Terminal terminal{Terminal::Alive};
};

/// Per-path streams derived from a master seed; a path's stream depends only on (seed, path).
struct SeedPolicy {
  std::uint64_t masterSeed{0};
  Rng stream(std::uint64_t path) const;
};

/// Row structure of the truncated operator over levels 0..N, in sampling form.
class TransitionTable {
 public:
  TransitionTable(const QbdModel& model, int N);

  int N() const { return N_; }
  bool continuous() const { return continuous_; }
  /// Discrete: next state. Continuous: jump target, or (-1,-1) when killed.
  State sampleJump(const State& s, Rng& rng) const;
  /// Total exit rate of a continuous state (= |diagonal|).
  double rate(const State& s) const { return rate_[flatIndex(s.first, s.second)]; }
  double deficit(const State& s) const { return deficit_[flatIndex(s.first, s.second)]; }

 private:
  int N_{0};
  bool continuous_{false};
  std::vector<int> offset_;
  std::vector<int> target_;
  std::vector<double> cumulative_;
  std::vector<double> rate_;
  std::vector<double> deficit_;
};

/// One step of a discrete chain from s.
State stepDiscrete(const QbdModel& model, const State& s, Rng& rng);

/// Path on [0, t]; stops early when killed or on reaching level table.N().
Trajectory sampleContinuousPath(const TransitionTable& table, const State& start, double t, Rng& rng);
Trajectory sampleContinuousPath(const QbdModel& model, const State& start, double t, Rng& rng, int N = 60);

/// n-step path of a discrete chain; stops with TruncationExit on reaching level table.N().
Trajectory sampleDiscretePath(const TransitionTable& table, const State& start, int steps, Rng& rng);

struct SimulationOptions {
  std::uint64_t seed{1};
  int workers{1};
  /// Truncation level for continuous paths; discrete paths use from-level + steps + 1.
  int N{60};
};

struct EmpiricalEstimate {
  double estimate{0};
  double standardError{0};
  long long paths{0};
  long long hits{0};
  long long killed{0};
  long long exits{0};
  double exitFraction{0};
  /// Exit fraction above 1e-3.
  bool biased{false};
};

/// Fraction of non-exited paths in the queried state at the horizon.
EmpiricalEstimate estimateEmpirical(const QbdModel& model, const TransitionQuery& q, long long paths,
                                    const SimulationOptions& opt = {});

/// Workers to use: requested count capped by QBD_NUM_THREADS when set.
int effectiveWorkers(int requested);

/// Columns path, step, level, phase, time, terminal.
void writeTrajectoriesCsv(std::ostream& os, const std::vector<Trajectory>& paths);

struct IndependenceTest {
  double statistic{0};
  int dof{0};
  double pValue{0};
  long long samples{0};
  std::vector<std::vector<long long>> table;
};

/// Discrete product Jacobi: start at (h0 + k0, k0) for each k0 in kStarts, run `steps` steps and
/// tabulate k0 against the h increment. Independence means the h component ignores k.
IndependenceTest independenceDiscrete(const QbdModel& model, int h0, const std::vector<int>& kStarts, int steps,
                                      long long pathsPerStart, const SimulationOptions& opt = {});

/// Continuous product Laguerre: from `start` run to time t and tabulate (h, k) among surviving
/// paths, with values >= cap pooled into the last bucket.
IndependenceTest independenceContinuous(const QbdModel& model, const State& start, double t, long long paths,
                                        int cap, const SimulationOptions& opt = {});

/// Pearson chi-square test of independence on a contingency table; empty rows and columns dropped.
IndependenceTest chiSquareIndependence(const std::vector<std::vector<long long>>& table);

}  // namespace qbd

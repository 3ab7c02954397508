#include "qbd/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>

#include "qbd/factorize.hpp"
#include "qbd/serialize.hpp"
#include "qbd/simulate.hpp"
#include "qbd/spectral.hpp"

namespace qbd {

namespace {

struct Flags {
  std::optional<std::string> family;
  std::optional<double> alpha, beta, gamma, delta;
  std::optional<std::string> variant;
  std::optional<double> tau, tau1, tau2;
  std::optional<int> N;
  std::uint64_t seed{1};
  long long paths{100000};
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> from, to;
  std::optional<int> steps;
  std::optional<double> time;
  int workers{1};
  int precision{4};
  std::optional<double> tol;
};

void addModelFlags(CLI::App* sub, Flags& f) {
  sub->add_option("--family", f.family, "product-jacobi | product-laguerre | parabolic | triangle01 | triangle00");
  sub->add_option("--alpha", f.alpha);
  sub->add_option("--beta", f.beta);
  sub->add_option("--gamma", f.gamma);
  sub->add_option("--delta", f.delta);
  sub->add_option("--variant", f.variant, "product-laguerre: endpoint-binomial | endpoint-one");
  sub->add_option("--tau", f.tau, "single weight: (tau, 1-tau) or (tau, 1) for triangle01");
  sub->add_option("--tau1", f.tau1);
  sub->add_option("--tau2", f.tau2);
  sub->add_option("-N", f.N, "truncation level");
  sub->add_option("--out", f.out, "write the artifact here (atomically)");
  sub->add_option("--format", f.format);
}

State parseState(const std::string& text, const char* flag) {
  int n = 0, k = 0;
  char comma = 0;
  std::istringstream is(text);
  if (!(is >> n >> comma >> k) || comma != ',' || !is.eof())
    throw UsageError(std::string(flag) + " expects level,phase (got '" + text + "')");
  if (n < 0 || k < 0 || k > n) throw UsageError(std::string(flag) + " state out of range: " + text);
  return {n, k};
}

FamilySpec resolveSpec(const Flags& f) {
  if (!f.family) throw UsageError("--family is required");
  FamilySpec s;
  s.kind = parseKind(*f.family);
  const auto names = s.paramNames();
  auto take = [&](const std::optional<double>& v, const char* name, double& dst) {
    if (!v) return;
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw UsageError(std::string("--") + name + " does not apply to " + kindName(s.kind));
    dst = *v;
  };
  take(f.alpha, "alpha", s.alpha);
  take(f.beta, "beta", s.beta);
  take(f.gamma, "gamma", s.gamma);
  take(f.delta, "delta", s.delta);
  if (f.variant) {
    if (s.kind != FamilyKind::ProductLaguerre) throw UsageError("--variant applies to product-laguerre only");
    s.variant = parseVariant(*f.variant);
  }
  s.validate();
  return s;
}

Tau resolveTau(const FamilySpec& s, const Flags& f) {
  const bool single = s.kind == FamilyKind::ProductJacobi || s.kind == FamilyKind::Parabolic ||
                      s.kind == FamilyKind::Triangle01;
  if (f.tau && (f.tau1 || f.tau2)) throw UsageError("--tau cannot be combined with --tau1/--tau2");
  if (f.tau) return tauFromScalar(s.kind, *f.tau);
  if (f.tau1 && f.tau2) return {*f.tau1, *f.tau2};
  if (f.tau1 && single) return tauFromScalar(s.kind, *f.tau1);
  if (f.tau1 || f.tau2) throw UsageError(kindName(s.kind) + " needs both --tau1 and --tau2");
  switch (s.kind) {
    case FamilyKind::ProductJacobi:
    case FamilyKind::Parabolic: return {0.5, 0.5};
    case FamilyKind::Triangle01: return {0.0, 1.0};
    default: return {1.0, 1.0};
  }
}

void requireFormat(const Flags& f, std::initializer_list<const char*> allowed) {
  if (!f.format) return;
  for (const char* a : allowed)
    if (*f.format == a) return;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw UsageError("--format " + *f.format + " not supported here (use " + list + ")");
}

Json baseConfig(const std::string& command, const Flags& f) {
  Json c;
  c["command"] = command;
  if (f.N) c["N"] = *f.N;
  return c;
}

Json modelConfig(const std::string& command, const QbdModel& m, int N) {
  Json c;
  c["command"] = command;
  c["family"] = toJson(m.spec);
  c["tau"] = {m.tau.tau1, m.tau.tau2};
  c["kind"] = processKindName(m.kind);
  c["N"] = N;
  return c;
}

void emitJson(std::ostream& out, const Flags& f, const Json& config, const Json& result) {
  Json doc;
  doc["config"] = config;
  doc["result"] = result;
  const std::string text = doc.dump(2) + "\n";
  if (f.out) {
    writeFileAtomic(*f.out, text);
    Json echo;
    echo["config"] = config;
    echo["written"] = *f.out;
    out << echo.dump(2) << "\n";
  } else {
    out << text;
  }
}

void emitText(std::ostream& out, const Flags& f, const Json& config, const std::string& artifact,
              const std::string& commentPrefix) {
  if (f.out) {
    writeFileAtomic(*f.out, artifact);
    Json echo;
    echo["config"] = config;
    echo["written"] = *f.out;
    out << echo.dump(2) << "\n";
  } else {
    out << commentPrefix << " config: " << config.dump() << "\n" << artifact;
  }
}

QbdModel resolveModel(const Flags& f) {
  const FamilySpec spec = resolveSpec(f);
  return combine(spec, resolveTau(spec, f), supportedKind(spec.kind));
}

int requireN(const Flags& f, int fallback, int minimum) {
  const int N = f.N.value_or(fallback);
  if (N < minimum) throw UsageError("-N must be >= " + std::to_string(minimum));
  return N;
}

Json tauBoundsJson(const TauBounds& b) {
  Json j;
  switch (b.shape) {
    case TauBounds::Shape::Interval:
      j["shape"] = "interval";
      j["lower"] = b.lower;
      j["upper"] = b.upper;
      j["tau2"] = b.tau2IsOne ? "1" : "1 - tau1";
      break;
    case TauBounds::Shape::Cone: j["shape"] = "cone"; break;
    case TauBounds::Shape::Ratio:
      j["shape"] = "ratio";
      j["ratio_threshold"] = b.ratioThreshold;
      break;
  }
  if (b.upperCase) j["upper_case"] = b.upperCase;
  if (b.lowerCase) j["lower_case"] = b.lowerCase;
  if (!b.upperRule.empty()) j["upper_rule"] = b.upperRule;
  if (!b.lowerRule.empty()) j["lower_rule"] = b.lowerRule;
  return j;
}

Json check(const std::string& name, double value, double tol, bool passed) {
  Json j;
  j["name"] = name;
  j["value"] = value;
  j["tolerance"] = tol;
  j["passed"] = passed;
  return j;
}

int cmdFamilies(const Flags& f, std::ostream& out) {
  requireFormat(f, {"json"});
  Json result = Json::array();
  std::vector<FamilySpec> specs;
  if (f.family) {
    specs.push_back(resolveSpec(f));
  } else {
    specs = {FamilySpec::productJacobi(0, 0, 0, 0), FamilySpec::productLaguerre(0, 0), FamilySpec::parabolic(0, 0),
             FamilySpec::triangle01(0, 0, 0), FamilySpec::triangle00(0, 0, 0)};
  }
  for (const auto& s : specs) {
    Json e;
    e["kind"] = kindName(s.kind);
    e["params"] = s.paramNames();
    e["process"] = processKindName(supportedKind(s.kind));
    if (f.family) e["family"] = toJson(s);
    e["tau"] = tauBoundsJson(tauBounds(s, supportedKind(s.kind)));
    result.push_back(e);
  }
  Json config = baseConfig("families", f);
  if (f.family) config["family"] = toJson(specs.front());
  emitJson(out, f, config, result);
  return kExitOk;
}

int cmdBuild(const Flags& f, std::ostream& out) {
  requireFormat(f, {"json", "csv"});
  const QbdModel m = resolveModel(f);
  const int N = requireN(f, 10, 0);
  const DenseTruncation t = truncateModel(m, N);
  const Json config = modelConfig("build", m, N);
  if (f.format.value_or("json") == "csv") {
    std::ostringstream os;
    writeCsv(os, t);
    emitText(out, f, config, os.str(), "#");
  } else {
    emitJson(out, f, config, toJson(t));
  }
  return kExitOk;
}

int cmdValidate(const Flags& f, std::ostream& out) {
  requireFormat(f, {"json"});
  const QbdModel m = resolveModel(f);
  const int N = requireN(f, 10, 2);
  const double tol = f.tol.value_or(1e-11);
  const bool discrete = m.kind == ProcessKind::DiscreteChain;
  Json checks = Json::array();
  bool ok = true;
  auto add = [&](const std::string& name, double value, double t, bool passed) {
    checks.push_back(check(name, value, t, passed));
    ok = ok && passed;
  };
  const double rows = rowSumDefect(m, N);
  add("row_sums", rows, 1e-12, rows <= 1e-12);
  const EntryWitness w = minTruncatedEntry(m.spec, m.tau, N, discrete);
  add("nonnegativity", w.value, 0.0, w.value >= -1e-12);
  const StructuralReport rep = structuralChecks(m.spec, N, tol);
  add("rank_individual", rep.minRelSingularIndividual, 1e-8, rep.minRelSingularIndividual > 1e-8);
  add("rank_joint", rep.minRelSingularJoint, 1e-8, rep.minRelSingularJoint > 1e-8);
  add("symmetrizer", rep.symmetrizerResidual, tol, rep.symmetrizerOk);
  add("asymmetry", rep.asymmetryResidual, tol, rep.asymmetryOk);
  add("commutation", rep.commutationResidual, tol, rep.commutationOk);
  const double stat = stationarityResidual(m, N);
  add("stationarity", stat, 1e-10, stat <= 1e-10);
  const double rec = piRecursionDiscrepancy(m.spec, N);
  add("invariant_recursion", rec, 1e-9, rec <= 1e-9);
  const double orth = orthogonalityResidual(m.spec, std::min(N, 5));
  add("orthogonality", orth, 1e-10, orth <= 1e-10);
  Json result;
  result["passed"] = ok;
  result["checks"] = checks;
  emitJson(out, f, modelConfig("validate", m, N), result);
  return ok ? kExitOk : kExitNumeric;
}

int cmdInvariant(const Flags& f, std::ostream& out) {
  requireFormat(f, {"json"});
  const QbdModel m = resolveModel(f);
  const int N = requireN(f, 10, 2);
  const InvariantMeasure mu = invariantMeasure(m, N);
  Json blocks = Json::array();
  for (const auto& b : mu.blocks) blocks.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  Json result;
  result["pi"] = blocks;
  result["stationarity_residual"] = stationarityResidual(m, N);
  emitJson(out, f, modelConfig("invariant", m, N), result);
  return kExitOk;
}

Horizon resolveHorizon(const QbdModel& m, const Flags& f) {
  if (m.kind == ProcessKind::DiscreteChain) {
    if (f.time) throw UsageError("discrete model takes --steps, not --time");
    if (!f.steps) throw UsageError("--steps is required for a discrete model");
    return Horizon::ofSteps(*f.steps);
  }
  if (f.steps) throw UsageError("continuous model takes --time, not --steps");
  if (!f.time) throw UsageError("--time is required for a continuous model");
  return Horizon::ofTime(*f.time);
}

int cmdTransition(const Flags& f, std::ostream& out) {
  requireFormat(f, {"json"});
  if (!f.from || !f.to) throw UsageError("--from and --to are required");
  const State a = parseState(*f.from, "--from"), b = parseState(*f.to, "--to");
  const QbdModel m = resolveModel(f);
  const Horizon h = resolveHorizon(m, f);
  const TransitionQuery q{a.first, a.second, b.first, b.second, h};
  q.validate();
  const int fallback = h.continuous ? std::max(a.first, b.first) + 20 : std::max({a.first + h.steps, b.first, 1});
  const int N = requireN(f, fallback, std::max({a.first, b.first, 1}));
  const double km = kmEntry(m, q);
  const DenseTruncation M = truncateModel(m, N);
  const Eigen::MatrixXd prop = h.continuous ? propagatorExp(M, h.time).entries : propagatorPower(M, h.steps).entries;
  const int ia = flatIndex(a.first, a.second), ib = flatIndex(b.first, b.second);
  Json result;
  result["km"] = km;
  result["propagator"] = prop(ia, ib);
  result["abs_diff"] = std::abs(km - prop(ia, ib));
  if (h.continuous) {
    result["leak"] = prop.row(ia).segment(flatIndex(N, 0), N + 1).sum();
  } else {
    result["exact_truncation"] = a.first + h.steps <= N;
  }
  Json config = modelConfig("transition", m, N);
  config["from"] = {a.first, a.second};
  config["to"] = {b.first, b.second};
  if (h.continuous)
    config["time"] = h.time;
  else
    config["steps"] = h.steps;
  emitJson(out, f, config, result);
  return kExitOk;
}

int cmdClassify(const Flags& f, std::ostream& out) {
  requireFormat(f, {"json"});
  const QbdModel m = resolveModel(f);
  const RecurrenceVerdict v = classifyRecurrence(m);
  Json result;
  result["classification"] = recurrenceName(v.classification);
  result["regime"] = v.regime;
  result["criterion"] = v.criterion;
  result["criterion_satisfied"] = v.criterionSatisfied;
  result["positive_recurrent"] = false;
  Json diag = Json::object();
  for (int order : {10, 20, 40, 80}) diag[std::to_string(order)] = recurrenceIntegralDiagnostic(m, order);
  result["integral_by_order"] = diag;
  Json config = modelConfig("classify", m, 0);
  config.erase("N");
  emitJson(out, f, config, result);
  return kExitOk;
}

int cmdSimulate(const Flags& f, std::ostream& out) {
  requireFormat(f, {"json", "csv"});
  if (!f.from) throw UsageError("--from is required");
  if (f.paths < 1) throw UsageError("--paths must be >= 1");
  const State a = parseState(*f.from, "--from");
  const QbdModel m = resolveModel(f);
  const Horizon h = resolveHorizon(m, f);
  SimulationOptions opt;
  opt.seed = f.seed;
  opt.workers = f.workers;
  opt.N = requireN(f, h.continuous ? std::max(60, a.first + 20) : a.first + h.steps + 1, a.first + 1);
  Json config = modelConfig("simulate", m, opt.N);
  config["from"] = {a.first, a.second};
  if (h.continuous)
    config["time"] = h.time;
  else
    config["steps"] = h.steps;
  config["seed"] = f.seed;
  config["paths"] = f.paths;
  if (f.format.value_or("json") == "csv") {
    const TransitionTable table(m, opt.N);
    const SeedPolicy seeds{f.seed};
    std::vector<Trajectory> paths;
    for (long long p = 0; p < f.paths; ++p) {
      Rng rng = seeds.stream(static_cast<std::uint64_t>(p));
      paths.push_back(h.continuous ? sampleContinuousPath(table, a, h.time, rng)
                                   : sampleDiscretePath(table, a, h.steps, rng));
    }
    std::ostringstream os;
    writeTrajectoriesCsv(os, paths);
    emitText(out, f, config, os.str(), "#");
    return kExitOk;
  }
  if (!f.to) throw UsageError("--to is required for an estimate");
  const State b = parseState(*f.to, "--to");
  config["to"] = {b.first, b.second};
  const TransitionQuery q{a.first, a.second, b.first, b.second, h};
  const EmpiricalEstimate e = estimateEmpirical(m, q, f.paths, opt);
  Json result;
  result["estimate"] = e.estimate;
  result["standard_error"] = e.standardError;
  result["paths"] = e.paths;
  result["hits"] = e.hits;
  result["killed"] = e.killed;
  result["exit_fraction"] = e.exitFraction;
  result["biased"] = e.biased;
  emitJson(out, f, config, result);
  return kExitOk;
}

bool integral(double v) { return v >= 0 && std::floor(v) == v; }

int cmdFactorize(const Flags& f, std::ostream& out) {
  requireFormat(f, {"json"});
  const FamilySpec spec = resolveSpec(f);
  const int N = requireN(f, 10, 2);
  Json result;
  bool ints = true;
  for (const auto& name : spec.paramNames()) ints = ints && integral(spec.param(name));
  result["integer_parameters"] = ints;
  double tau = 0;
  UrnKind urn;
  switch (spec.kind) {
    case FamilyKind::ProductJacobi: {
      urn = UrnKind::ProductJacobiUrn;
      tau = resolveTau(spec, f).tau1;
      break;
    }
    case FamilyKind::Parabolic: urn = UrnKind::ParabolicUrn; break;
    case FamilyKind::Triangle01: {
      urn = UrnKind::TriangleComposed;
      const LUFactors lu = triangleLU(spec.alpha, spec.beta, spec.gamma, N);
      result["lower"] = toJson(lu.lower);
      result["upper"] = toJson(lu.upper);
      for (FactorMode mode : {FactorMode::LU, FactorMode::ULShift}) {
        const FactorizationReport r = verifyFactorization(spec.alpha, spec.beta, spec.gamma, N, mode);
        Json j;
        j["residual_A"] = r.residualA;
        j["residual_B"] = r.residualB;
        j["residual_C"] = r.residualC;
        j["holds"] = r.maxResidual() <= 1e-12;
        result[mode == FactorMode::LU ? "lu" : "ul_shift"] = j;
      }
      double lowerRows = 0, upperRows = 0;
      for (int n = 0; n <= N; ++n) {
        lowerRows = std::max(lowerRows, (lu.lower.level(n).rowSums().array() - 1).abs().maxCoeff());
        if (n < N) upperRows = std::max(upperRows, (lu.upper.level(n).rowSums().array() - 1).abs().maxCoeff());
      }
      result["lower_row_sum_defect"] = lowerRows;
      result["upper_row_sum_defect"] = upperRows;
      break;
    }
    default: throw UsageError("factorize supports product-jacobi, parabolic and triangle01");
  }
  result["urn_model"] = urnKindName(urn);
  result["urn_consistency"] = urnConsistencyCheck(urn, spec, tau, N);
  if (f.from) {
    const State s = parseState(*f.from, "--from");
    result["urn_table"] = toJson(urnTable(urn, spec, tau, s.first, s.second));
  }
  Json config = baseConfig("factorize", f);
  config["family"] = toJson(spec);
  config["N"] = N;
  if (spec.kind == FamilyKind::ProductJacobi) config["tau"] = tau;
  emitJson(out, f, config, result);
  return kExitOk;
}

std::string formatLabel(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

int cmdDiagram(const Flags& f, std::ostream& out) {
  requireFormat(f, {"dot"});
  if (f.precision < 1 || f.precision > 17) throw UsageError("--precision must lie in 1..17");
  const QbdModel m = resolveModel(f);
  const int N = requireN(f, 3, 0);
  const DenseTruncation t = truncateModel(m, N);
  std::ostringstream os;
  os << "digraph qbd {\n  rankdir=LR;\n";
  for (int i = 0; i < t.size(); ++i) {
    const auto [n, k] = unflatten(i);
    os << "  \"" << n << '_' << k << "\" [label=\"(" << n << ',' << k << ")\"];\n";
  }
  for (int i = 0; i < t.size(); ++i) {
    const auto [n, k] = unflatten(i);
    for (int j = 0; j < t.size(); ++j) {
      const double v = t.entries(i, j);
      if (v == 0.0) continue;
      const auto [p, l] = unflatten(j);
      os << "  \"" << n << '_' << k << "\" -> \"" << p << '_' << l << "\" [label=\"" << formatLabel(v, f.precision)
         << "\"];\n";
    }
  }
  os << "}\n";
  Json config = modelConfig("diagram", m, N);
  config["precision"] = f.precision;
  emitText(out, f, config, os.str(), "//");
  return kExitOk;
}

Json errorBody(const char* type, const std::string& message) {
  Json j;
  j["error"]["type"] = type;
  j["error"]["message"] = message;
  return j;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"QBD processes from bivariate orthogonal polynomials", "qbd"};
  app.require_subcommand(1);
  Flags f;

  auto* families = app.add_subcommand("families", "list families and their admissible tau");
  auto* build = app.add_subcommand("build", "emit the truncated operator");
  auto* validate = app.add_subcommand("validate", "run structural, kind and invariant checks");
  auto* invariant = app.add_subcommand("invariant", "emit the invariant measure and its residual");
  auto* transition = app.add_subcommand("transition", "Karlin-McGregor transition probability");
  auto* classify = app.add_subcommand("classify", "recurrence verdict");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate or trajectories");
  auto* factorize = app.add_subcommand("factorize", "stochastic LU factors and urn consistency");
  auto* diagram = app.add_subcommand("diagram", "DOT graph of allowed transitions");
  for (auto* sub : {families, build, validate, invariant, transition, classify, simulate, factorize, diagram})
    addModelFlags(sub, f);
  for (auto* sub : {transition, simulate}) {
    sub->add_option("--from", f.from, "level,phase");
    sub->add_option("--steps", f.steps);
    sub->add_option("--time", f.time);
  }
  transition->add_option("--to", f.to, "level,phase");
  simulate->add_option("--to", f.to, "level,phase");
  simulate->add_option("--seed", f.seed);
  simulate->add_option("--paths", f.paths);
  simulate->add_option("--workers", f.workers);
  factorize->add_option("--from", f.from, "state whose urn table to print");
  validate->add_option("--tol", f.tol, "identity residual tolerance");
  diagram->add_option("--precision", f.precision, "significant digits of edge labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*families) return cmdFamilies(f, out);
    if (*build) return cmdBuild(f, out);
    if (*validate) return cmdValidate(f, out);
    if (*invariant) return cmdInvariant(f, out);
    if (*transition) return cmdTransition(f, out);
    if (*classify) return cmdClassify(f, out);
    if (*simulate) return cmdSimulate(f, out);
    if (*factorize) return cmdFactorize(f, out);
    if (*diagram) return cmdDiagram(f, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    out << errorBody("domain", e.what()).dump(2) << "\n";
    return kExitDomain;
  } catch (const NumericError& e) {
    out << errorBody("numeric", e.what()).dump(2) << "\n";
    return kExitNumeric;
  } catch (const ModelIntegrityError& e) {
    out << errorBody("model-integrity", e.what()).dump(2) << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}

}  // namespace qbd

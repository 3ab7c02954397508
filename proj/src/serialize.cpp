#include "qbd/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace qbd {

namespace {

Json bandJson(const Band3& b) {
  Json j;
  j["lower"] = std::vector<double>(b.lower.data(), b.lower.data() + b.lower.size());
  j["diag"] = std::vector<double>(b.diag.data(), b.diag.data() + b.diag.size());
  j["upper"] = std::vector<double>(b.upper.data(), b.upper.data() + b.upper.size());
  return j;
}

std::string signedMove(int d) { return d > 0 ? "+" + std::to_string(d) : std::to_string(d); }

}  // namespace

std::string formatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json toJson(const FamilySpec& spec) {
  Json j;
  j["kind"] = kindName(spec.kind);
  Json params = Json::object();
  for (const auto& name : spec.paramNames()) params[name] = spec.param(name);
  j["params"] = params;
  if (spec.kind == FamilyKind::ProductLaguerre) j["variant"] = variantName(spec.variant);
  return j;
}

FamilySpec specFromJson(const Json& j) {
  try {
    FamilySpec s;
    s.kind = parseKind(j.at("kind").get<std::string>());
    const Json& p = j.at("params");
    for (const auto& name : s.paramNames()) {
      const double v = p.at(name).get<double>();
      if (name == "alpha") s.alpha = v;
      if (name == "beta") s.beta = v;
      if (name == "gamma") s.gamma = v;
      if (name == "delta") s.delta = v;
    }
    if (j.contains("variant")) s.variant = parseVariant(j.at("variant").get<std::string>());
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed family JSON: ") + e.what());
  }
}

Json toJson(const QbdModel& model) {
  Json j;
  j["family"] = toJson(model.spec);
  j["tau"] = {model.tau.tau1, model.tau.tau2};
  j["kind"] = processKindName(model.kind);
  return j;
}

QbdModel modelFromJson(const Json& j) {
  try {
    const FamilySpec spec = specFromJson(j.at("family"));
    const Tau tau{j.at("tau").at(0).get<double>(), j.at("tau").at(1).get<double>()};
    return combine(spec, tau, parseProcessKind(j.at("kind").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed model JSON: ") + e.what());
  }
}

Json toJson(const DenseTruncation& t) {
  Json j;
  j["N"] = t.N;
  j["size"] = t.size();
  Json map = Json::array();
  for (int i = 0; i < t.size(); ++i) {
    const auto [n, k] = unflatten(i);
    map.push_back({n, k});
  }
  j["index_map"] = map;
  Json rows = Json::array();
  for (int i = 0; i < t.size(); ++i) {
    std::vector<double> r(t.size());
    for (int c = 0; c < t.size(); ++c) r[c] = t.entries(i, c);
    rows.push_back(r);
  }
  j["entries"] = rows;
  return j;
}

DenseTruncation truncationFromJson(const Json& j) {
  try {
    DenseTruncation t;
    t.N = j.at("N").get<int>();
    const int size = j.at("size").get<int>();
    if (size != stateCount(t.N)) throw UsageError("truncation size does not match N");
    t.entries.resize(size, size);
    const Json& rows = j.at("entries");
    if (static_cast<int>(rows.size()) != size) throw UsageError("truncation entries have wrong row count");
    for (int i = 0; i < size; ++i) {
      if (static_cast<int>(rows[i].size()) != size) throw UsageError("truncation row has wrong length");
      for (int c = 0; c < size; ++c) t.entries(i, c) = rows[i][c].get<double>();
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed truncation JSON: ") + e.what());
  }
}

Json toJson(const BlockTridiagonal& J) {
  Json levels = Json::array();
  for (int n = 0; n < J.levels(); ++n) {
    const LevelBlocks& lb = J.level(n);
    Json l;
    l["level"] = n;
    l["A"] = bandJson(lb.A);
    l["B"] = bandJson(lb.B);
    l["C"] = bandJson(lb.C);
    levels.push_back(l);
  }
  Json j;
  j["levels"] = levels;
  return j;
}

Json toJson(const UrnTable& t) {
  Json j = Json::object();
  for (const auto& [move, v] : t) j[signedMove(move.first) + "," + signedMove(move.second)] = v;
  return j;
}

void writeCsv(std::ostream& os, const DenseTruncation& t) {
  os << "from_level,from_phase,to_level,to_phase,value\n";
  for (int i = 0; i < t.size(); ++i) {
    const auto [n, k] = unflatten(i);
    for (int c = 0; c < t.size(); ++c) {
      const double v = t.entries(i, c);
      if (v == 0.0) continue;
      const auto [m, l] = unflatten(c);
      os << n << ',' << k << ',' << m << ',' << l << ',' << formatDouble(v) << '\n';
    }
  }
}

void writeFileAtomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot open output file " + tmp);
    f << content;
    f.flush();
    if (!f) throw UsageError("failed writing output file " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw UsageError("cannot move output into place at " + path);
  }
}

}  // namespace qbd

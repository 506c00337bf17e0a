#include "tightdual/report.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tightdual/canon.hpp"
#include "tightdual/network.hpp"
#include "tightdual/primal.hpp"

namespace tightdual {

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> record_keys() {
  return {"case",           "formulation",   "config",       "objective",
          "f_clb",          "f_clb_without_constant",        "reference",
          "gap_percent",    "clb_gap_percent", "iterations", "wall_seconds",
          "projection_seconds", "termination", "certified",   "error"};
}

nlohmann::json to_json(const RunRecord& r) {
  return {{"case", r.case_name},
          {"formulation", r.formulation},
          {"config", r.config},
          {"objective", opt(r.objective)},
          {"f_clb", opt(r.f_clb)},
          {"f_clb_without_constant", opt(r.f_clb_without_constant)},
          {"reference", opt(r.reference)},
          {"gap_percent", opt(r.gap_percent)},
          {"clb_gap_percent", opt(r.clb_gap_percent)},
          {"iterations", r.iterations},
          {"wall_seconds", r.wall_seconds},
          {"projection_seconds", r.projection_seconds},
          {"termination", r.termination},
          {"certified", r.certified},
          {"error", r.error}};
}

std::string csv_header() {
  std::string h;
  for (const auto& k : record_keys()) {
    if (k == "config") continue;
    if (!h.empty()) h += ',';
    h += k;
  }
  return h;
}

std::string to_csv_row(const RunRecord& r) {
  const auto j = to_json(r);
  std::ostringstream out;
  out << std::setprecision(17);
  bool first = true;
  for (const auto& k : record_keys()) {
    if (k == "config") continue;
    if (!first) out << ',';
    first = false;
    const auto& v = j.at(k);
    if (v.is_null()) continue;
    if (v.is_string()) {
      std::string s = v.get<std::string>();
      for (char& ch : s) {
        if (ch == ',' || ch == '\n') ch = ' ';
      }
      out << s;
    } else if (v.is_boolean()) {
      out << (v.get<bool>() ? "true" : "false");
    } else if (v.is_number_integer()) {
      out << v.get<long long>();
    } else {
      out << v.get<double>();
    }
  }
  return out.str();
}

const std::map<std::string, double>& bundled_references() {
  static const std::map<std::string, double> refs = {
      {"pglib_opf_case3_lmbd", 5736.17},     {"pglib_opf_case14_ieee", 2175.70},
      {"pglib_opf_case57_ieee", 37529.70},   {"pglib_opf_case118_ieee", 96335.84},
      {"pglib_opf_case300_ieee", 549244.23}, {"pglib_opf_case500_goc", 453838.14},
  };
  return refs;
}

std::map<std::string, double> load_references(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open references file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::map<std::string, double> refs;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [k, v] : j.items()) refs[k] = v.get<double>();
    return refs;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed reference line: " + line);
    const std::string name = trim(line.substr(0, comma));
    const std::string value = trim(line.substr(comma + 1));
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
      if (refs.empty() && name == "case") continue;  // header
      throw std::runtime_error("malformed reference value: " + line);
    }
    refs[name] = v;
  }
  return refs;
}

std::optional<double> lookup_reference(const std::string& case_name,
                                       const std::map<std::string, double>& overrides) {
  if (auto it = overrides.find(case_name); it != overrides.end()) return it->second;
  const auto& b = bundled_references();
  if (auto it = b.find(case_name); it != b.end()) return it->second;
  return std::nullopt;
}

std::string case_name_from_path(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

CaseOutcome run_case(const std::string& path, const SolveConfig& config, double delta,
                     std::optional<double> reference) {
  const auto t0 = std::chrono::steady_clock::now();
  CaseOutcome out;
  auto& r = out.record;
  r.case_name = case_name_from_path(path);
  r.config = to_json(config);
  r.config["delta"] = delta;
  const Network net = load_matpower(path);
  require_buildable(net);
  const CanonicalProblem p = canonicalize(build_primal(net));
  out.report = solve_atd(p, config);
  out.bound = certify(out.report.best_point, p, delta, reference);
  r.objective = out.report.best_objective + p.constant_cost;
  r.f_clb = out.bound.f_clb;
  r.f_clb_without_constant = out.bound.f_clb_without_constant;
  r.iterations = out.report.iterations;
  r.termination = std::string(to_string(out.report.termination));
  r.projection_seconds = out.bound.projection_seconds;
  if (reference) {
    r.reference = reference;
    r.gap_percent = 100.0 * (*r.objective - *reference) / *reference;
    r.clb_gap_percent = 100.0 * (*r.f_clb - *reference) / *reference;
  }
  r.certified = std::isfinite(*r.f_clb);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunRecord failed_record(const std::string& path, const SolveConfig& config,
                        const std::string& error) {
  RunRecord r;
  r.case_name = case_name_from_path(path);
  r.config = to_json(config);
  r.termination = "failed";
  r.error = error;
  return r;
}

nlohmann::json to_json(const DualPoint& d) {
  nlohmann::json j = {{"lambda", d.lambda}, {"cone", d.cone}, {"full", d.full}};
  j["mu"] = d.mu ? nlohmann::json(*d.mu) : nlohmann::json(nullptr);
  return j;
}

DualPoint dual_point_from_json(const nlohmann::json& j) {
  DualPoint d;
  d.lambda = j.at("lambda").get<std::vector<double>>();
  d.cone = j.at("cone").get<std::vector<double>>();
  d.full = j.value("full", false);
  if (j.contains("mu") && !j.at("mu").is_null()) d.mu = j.at("mu").get<std::vector<double>>();
  return d;
}

}  // namespace tightdual

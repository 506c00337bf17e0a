#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tightdual/certify.hpp"
#include "tightdual/fosolve.hpp"

namespace tightdual {

struct RunRecord {
  std::string case_name;
  std::string formulation = "atd";
  nlohmann::json config = nlohmann::json::object();
  std::optional<double> objective;
  std::optional<double> f_clb;
  std::optional<double> f_clb_without_constant;
  std::optional<double> reference;
  // 100·(objective − reference)/reference and the same for f_clb.
  std::optional<double> gap_percent;
  std::optional<double> clb_gap_percent;
  int iterations = 0;
  double wall_seconds = 0.0;
  double projection_seconds = 0.0;
  std::string termination;
  bool certified = false;
  std::string error;
};

/// Every key is always present; absent optionals serialize as null.
nlohmann::json to_json(const RunRecord& r);
std::vector<std::string> record_keys();
std::string csv_header();
std::string to_csv_row(const RunRecord& r);

/// Published Mosek objectives of the relaxation for PGLib cases.
const std::map<std::string, double>& bundled_references();

/// JSON object {"case": value} or CSV lines `case,value`.
std::map<std::string, double> load_references(const std::string& path);

/// Overrides first, then the bundled table; matched on the file stem.
std::optional<double> lookup_reference(const std::string& case_name,
                                       const std::map<std::string, double>& overrides);

std::string case_name_from_path(const std::string& path);

struct CaseOutcome {
  RunRecord record;
  SolveReport report;
  CertifiedBound bound;
};

/// parse → build → canonicalize → solve → project → certify.
CaseOutcome run_case(const std::string& path, const SolveConfig& config, double delta,
                     std::optional<double> reference);

RunRecord failed_record(const std::string& path, const SolveConfig& config,
                        const std::string& error);

nlohmann::json to_json(const DualPoint& d);
DualPoint dual_point_from_json(const nlohmann::json& j);

}  // namespace tightdual

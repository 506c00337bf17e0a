#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "tightdual/canon.hpp"
#include "tightdual/certify.hpp"
#include "tightdual/network.hpp"
#include "tightdual/primal.hpp"
#include "tightdual/report.hpp"

namespace fs = std::filesystem;
using namespace tightdual;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct SolverFlags {
  SolveConfig cfg;
  double delta = kDefaultDelta;
  std::string method = "primal_dual";
  std::string step_rule = "adagrad";

  void add(CLI::App* app) {
    app->add_option("--eps", cfg.eps, "stabilization epsilon")->capture_default_str();
    app->add_option("--delta", delta, "face projection threshold")->capture_default_str();
    app->add_option("--max-iter", cfg.max_iter)->capture_default_str();
    app->add_option("--tol", cfg.tol_rel, "relative progress threshold")->capture_default_str();
    app->add_option("--patience", cfg.patience)->capture_default_str();
    app->add_option("--seed", cfg.seed)->capture_default_str();
    app->add_option("--jitter", cfg.init_jitter, "seeded warm-start perturbation")
        ->capture_default_str();
    app->add_option("--method", method)
        ->check(CLI::IsMember({"primal_dual", "subgradient"}))
        ->capture_default_str();
    app->add_option("--step-rule", step_rule)
        ->check(CLI::IsMember({"constant", "adagrad", "polyak"}))
        ->capture_default_str();
    app->add_option("--step", cfg.step)->capture_default_str();
    app->add_option("--polyak-target", cfg.polyak_target);
    app->add_option("--smoothing", cfg.smoothing)->capture_default_str();
    app->add_option("--primal-weight", cfg.primal_weight, "0 picks it from the data")
        ->capture_default_str();
    app->add_option("--dump-dir", cfg.dump_dir, "where iterates go on numerical failure");
    app->add_flag("--serial", serial, "use the serial reference kernels");
  }

  SolveConfig config() const {
    SolveConfig c = cfg;
    c.method = parse_method(method);
    c.step_rule = parse_step_rule(step_rule);
    c.exec = serial ? Exec::serial : Exec::parallel;
    c.validate();
    return c;
  }

  bool serial = false;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string render(const std::vector<RunRecord>& records, const std::string& format, bool array) {
  if (format == "csv") {
    std::string s = csv_header() + "\n";
    for (const auto& r : records) s += to_csv_row(r) + "\n";
    return s;
  }
  if (!array) return to_json(records.front()).dump(2) + "\n";
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : records) j.push_back(to_json(r));
  return j.dump(2) + "\n";
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("tightdual");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* lvl = std::getenv("TIGHTDUAL_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(lvl));
  }
}

int cmd_solve(const std::string& path, const SolverFlags& flags, std::optional<double> reference,
              const std::string& out, const std::string& format, const std::string& point_out) {
  const SolveConfig cfg = flags.config();
  if (!reference) reference = lookup_reference(case_name_from_path(path), {});
  spdlog::info("solving {} with eps={} max_iter={}", path, cfg.eps, cfg.max_iter);
  CaseOutcome res = run_case(path, cfg, flags.delta, reference);
  const auto& r = res.record;
  spdlog::info("{}: objective {:.6f}, f_clb {:.6f}, {} iterations ({})", r.case_name,
               r.objective.value_or(NAN), r.f_clb.value_or(NAN), r.iterations, r.termination);
  write_text(out, render({r}, format, false));
  if (!point_out.empty()) {
    nlohmann::json j = {{"best", to_json(res.report.best_point)},
                        {"projected", to_json(res.bound.projected)}};
    write_text(point_out, j.dump() + "\n");
  }
  return r.certified ? 0 : kExitFailure;
}

int cmd_certify(const std::string& path, const std::string& point_path, double delta,
                std::optional<double> reference) {
  std::ifstream in(point_path);
  if (!in) throw std::runtime_error("cannot open " + point_path);
  nlohmann::json j = nlohmann::json::parse(in);
  const DualPoint d = dual_point_from_json(j.contains("best") ? j.at("best") : j);
  const auto p = canonicalize(build_primal(load_matpower(path)));
  if (!reference) reference = lookup_reference(case_name_from_path(path), {});
  const auto b = certify(d, p, delta, reference);
  nlohmann::json out = {{"case", case_name_from_path(path)},
                        {"f_clb", b.f_clb},
                        {"f_clb_without_constant", b.f_clb_without_constant},
                        {"delta", b.delta},
                        {"zeroed_cones", std::count(b.cases.begin(), b.cases.end(),
                                                    ProjectionCase::zeroed)},
                        {"projection_seconds", b.projection_seconds}};
  out["reference"] = reference ? nlohmann::json(*reference) : nlohmann::json(nullptr);
  out["gap_percent"] = b.gap ? nlohmann::json(100.0 * *b.gap) : nlohmann::json(nullptr);
  std::cout << out.dump(2) << "\n";
  return 0;
}

std::vector<double> parse_eps_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t pos = 0;
    const double e = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("bad eps value: " + tok);
    v.push_back(e);
  }
  std::sort(v.begin(), v.end());
  return v;
}

int cmd_sweep(const std::string& path, const SolverFlags& flags, const std::string& eps_list,
              const std::string& out) {
  const SolveConfig cfg = flags.config();
  const auto eps = parse_eps_list(eps_list);
  const auto p = canonicalize(build_primal(load_matpower(path)));
  const auto rows = eps_sweep(p, eps, cfg, flags.delta);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_text(out, csv.str());
  const bool ok = std::all_of(rows.begin(), rows.end(),
                              [](const SweepRow& r) { return r.status.rfind("error", 0) != 0; });
  return ok ? 0 : kExitFailure;
}

int cmd_bench(const std::string& dir, const SolverFlags& flags, const std::string& refs_path,
              unsigned jobs, const std::string& out, const std::string& format) {
  const SolveConfig cfg = flags.config();
  std::vector<std::string> cases;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".m") cases.push_back(e.path().string());
    }
  }
  std::sort(cases.begin(), cases.end());
  if (cases.empty()) {
    spdlog::error("no .m case files in {}", dir);
    return kExitUsage;
  }
  const auto overrides = refs_path.empty() ? std::map<std::string, double>{}
                                           : load_references(refs_path);
  std::vector<RunRecord> records(cases.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      const auto& path = cases[i];
      try {
        records[i] = run_case(path, cfg, flags.delta,
                              lookup_reference(case_name_from_path(path), overrides))
                         .record;
      } catch (const std::exception& e) {
        records[i] = failed_record(path, cfg, e.what());
      }
      std::lock_guard lock(log_mu);
      spdlog::info("{}: {}", records[i].case_name,
                   records[i].certified ? "certified" : "failed: " + records[i].error);
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, cases.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  write_text(out, render(records, format, true));
  double gap_sum = 0.0, proj_sum = 0.0;
  int n_gap = 0, n_ok = 0;
  for (const auto& r : records) {
    if (!r.certified) continue;
    ++n_ok;
    proj_sum += r.projection_seconds;
    if (r.gap_percent) {
      gap_sum += *r.gap_percent;
      ++n_gap;
    }
  }
  std::cerr << "summary: " << n_ok << "/" << records.size() << " certified";
  if (n_gap > 0) std::cerr << ", mean gap " << gap_sum / n_gap << " %";
  if (n_ok > 0) std::cerr << ", mean projection time " << proj_sum / n_ok << " s";
  std::cerr << "\n";
  return n_ok == static_cast<int>(records.size()) ? 0 : kExitFailure;
}

int cmd_dump(const std::string& path, const std::string& what, const std::string& out) {
  const Network net = load_matpower(path);
  if (what == "network") {
    nlohmann::json j = net;
    j["findings"] = validate(net);
    write_text(out, j.dump(2) + "\n");
  } else {
    write_text(out, to_json(canonicalize(build_primal(net))).dump() + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Certified lower bounds for the Jabr relaxation of AC optimal power flow"};
  app.require_subcommand(1);

  SolverFlags flags;
  std::string case_path, out, format = "json", point_out, point_in;
  std::optional<double> reference;

  auto* solve = app.add_subcommand("solve", "solve one case and certify the bound");
  solve->add_option("case", case_path, "MATPOWER case file")->required();
  flags.add(solve);
  solve->add_option("--reference", reference, "reference objective for the gap");
  solve->add_option("--out", out, "write the record here instead of stdout");
  solve->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  solve->add_option("--save-point", point_out, "write the best and projected dual points");

  auto* cert = app.add_subcommand("certify", "certify a saved dual point");
  cert->add_option("case", case_path)->required();
  cert->add_option("point", point_in, "JSON from solve --save-point")->required();
  cert->add_option("--delta", flags.delta)->capture_default_str();
  cert->add_option("--reference", reference);

  std::string eps_list = "1e-8,1e-6,1e-4,1e-2,1";
  auto* sweep = app.add_subcommand("sweep", "solve over a list of eps values, CSV output");
  sweep->add_option("case", case_path)->required();
  flags.add(sweep);
  sweep->add_option("--eps-list", eps_list, "comma-separated")->capture_default_str();
  sweep->add_option("--out", out);

  std::string dir, refs;
  unsigned jobs = 0;
  auto* bench = app.add_subcommand("bench", "solve every .m file in a directory");
  bench->add_option("directory", dir)->required();
  flags.add(bench);
  bench->add_option("--references", refs, "JSON object or CSV case,value");
  bench->add_option("--jobs", jobs, "worker count, 0 for all cores")->capture_default_str();
  bench->add_option("--out", out);
  bench->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  std::string what = "network";
  auto* dump = app.add_subcommand("dump", "print the parsed network or canonical blocks");
  dump->add_option("case", case_path)->required();
  dump->add_option("--what", what)->check(CLI::IsMember({"network", "canon"}));
  dump->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(case_path, flags, reference, out, format, point_out);
    if (*cert) return cmd_certify(case_path, point_in, flags.delta, reference);
    if (*sweep) return cmd_sweep(case_path, flags, eps_list, out);
    if (*bench) return cmd_bench(dir, flags, refs, jobs, out, format);
    if (*dump) return cmd_dump(case_path, what, out);
  } catch (const NumericalFailureError& e) {
    spdlog::error("{}", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

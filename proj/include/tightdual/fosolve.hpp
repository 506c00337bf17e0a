#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tightdual/canon.hpp"
#include "tightdual/dual.hpp"

namespace tightdual {

enum class Method { primal_dual, subgradient };
enum class StepRule { constant, adagrad, polyak };
enum class Termination { tolerance, iteration_limit };

std::string_view to_string(Method m);
std::string_view to_string(StepRule r);
std::string_view to_string(Termination t);
Method parse_method(std::string_view s);
StepRule parse_step_rule(std::string_view s);

struct SolveConfig {
  double eps = 1e-6;
  int max_iter = 50000;
  Method method = Method::primal_dual;
  // Subgradient method only.
  StepRule step_rule = StepRule::adagrad;
  double step = 1.0;
  double polyak_target = std::numeric_limits<double>::quiet_NaN();
  // Initial pseudo-Huber width, annealed as 1/sqrt(k+1); 0 disables.
  double smoothing = 0.0;
  double tol_rel = 1e-9;
  int patience = 5000;
  std::uint64_t seed = 0;
  // Relative amplitude of a seeded perturbation of the warm start.
  double init_jitter = 0.0;
  // Primal-dual method only; 0 picks ‖m‖/‖b‖.
  double primal_weight = 0.0;
  int check_every = 10;
  Exec exec = Exec::parallel;
  // Where iterates are written on numerical failure; empty uses the temp dir.
  std::string dump_dir;

  void validate() const;
};

nlohmann::json to_json(const SolveConfig& c);

struct TracePoint {
  int iteration = 0;
  double objective = 0.0;
  double best = 0.0;
  bool operator==(const TracePoint&) const = default;
};

struct SolveReport {
  // Dual-norm objective at best_point, without the c0 constant.
  double best_objective = 0.0;
  DualPoint best_point;
  int iterations = 0;
  Termination termination = Termination::iteration_limit;
  std::vector<TracePoint> trace;
  double primal_weight = 0.0;
};

class NumericalFailureError : public std::runtime_error {
 public:
  NumericalFailureError(const std::string& what, std::string dump_path)
      : std::runtime_error(what), dump_path_(std::move(dump_path)) {}
  const std::string& dump_path() const { return dump_path_; }

 private:
  std::string dump_path_;
};

/// λ = 0, every vec = 0, every scalar2 = 1.
DualPoint warm_start(const CanonicalProblem& p);

/// Maximizes the reduced all-tight dual. The default method alternates a
/// projected primal step on the box with a proximal ascent step on (λ, cones);
/// the subgradient method ascends the dual-norm objective directly.
SolveReport solve_atd(const CanonicalProblem& p, const SolveConfig& config);

/// Bundle for attaching an external nonlinear solver to the all-tight dual in
/// equality form. Variables are z = (λ, μ, reduced cone vector); slot1
/// entries and the cost-epigraph slot2 are present but fixed.
struct NlpSpec {
  std::size_t num_lambda = 0;
  std::size_t num_mu = 0;
  std::size_t num_cone = 0;
  std::vector<double> var_lower;
  std::vector<double> var_upper;
  std::size_t num_constraints = 0;
  // Fixed Jacobian sparsity, row-major.
  std::vector<std::size_t> jac_rows;
  std::vector<std::size_t> jac_cols;

  std::size_t num_vars() const { return num_lambda + num_mu + num_cone; }

  std::function<double(std::span<const double>)> objective;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::function<void(std::span<const double>, std::span<double>)> constraints;
  std::function<void(std::span<const double>, std::span<double>)> jacobian_values;
};

// The callbacks hold a reference to p, which must outlive the spec.
NlpSpec export_nlp(const CanonicalProblem& p, double eps);

}  // namespace tightdual

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tightdual/canon.hpp"

namespace tightdual {

/// Dual variables of the canonical problem. `cone` is laid out like the rows
/// of F: per cone (slot1, slot2, vec...). In reduced form slot1 is not stored
/// (kept at 0) and is implied by the replacement function. The cost-epigraph
/// slot2 is held at 1 in reduced points.
struct DualPoint {
  std::vector<double> lambda;
  std::vector<double> cone;
  bool full = false;
  std::optional<std::vector<double>> mu;
};

class DivisionSingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Exec { serial, parallel };

/// Zero point of the right shape.
DualPoint zero_point(const CanonicalProblem& p, bool full);

/// slot1 := ‖vec‖²/(2·slot2 + ε) on jabr and flow cones, ‖vec‖²/2 on the cost cone.
DualPoint replace(const DualPoint& reduced, double eps, std::span<const ConeRange> cones);

struct AcdResult {
  double objective = 0.0;
  std::vector<double> residual;
};

/// λᵀb + μᵀd − d̃ᵀg and m + Aᵀλ + Cᵀμ − Fᵀd̃ with the bound rows C, d.
AcdResult acd_eval(std::span<const double> lambda, std::span<const double> mu,
                   std::span<const double> d_full, const CanonicalProblem& p);

/// 2·d1·d2 − ‖dvec‖² per cone.
std::vector<double> cone_slacks(std::span<const double> d_full, std::span<const ConeRange> cones);

/// −‖M_σγ‖₁ + γᵀω + λᵀb − d̃ᵀg with γ = m + Aᵀλ − Fᵀd̃, evaluated at a full
/// cone vector as given (no replacement).
double box_dual_value(std::span<const double> lambda, std::span<const double> d_full,
                      const CanonicalProblem& p, Exec exec = Exec::parallel);

struct DualNormResult {
  double value = 0.0;
  std::vector<double> grad_lambda;
  // Derivative with respect to the reduced cone vector; slot1 entries and the
  // cost-epigraph slot2 are 0.
  std::vector<double> grad_cone;
};

/// Dual-norm objective at a reduced point after replace(·, ε), with a
/// supergradient. nu > 0 switches the ℓ1 term to its pseudo-Huber smoothing.
DualNormResult dualnorm_objective(std::span<const double> lambda,
                                  std::span<const double> d_reduced, double eps,
                                  const CanonicalProblem& p, double nu = 0.0,
                                  Exec exec = Exec::parallel);

/// Reusable evaluator for the solver loop.
class DualNormEvaluator {
 public:
  DualNormEvaluator(const CanonicalProblem& p, double eps, Exec exec = Exec::parallel);

  double eps() const { return eps_; }
  const CanonicalProblem& problem() const { return p_; }

  /// Objective only; returns −inf on a singular replacement.
  double value(std::span<const double> lambda, std::span<const double> d_reduced,
               double nu = 0.0);
  /// Objective and supergradient; throws DivisionSingularityError.
  double evaluate(std::span<const double> lambda, std::span<const double> d_reduced,
                  std::span<double> grad_lambda, std::span<double> grad_cone, double nu = 0.0);
  /// The box minimizer x* of the last evaluate call.
  std::span<const double> last_minimizer() const { return x_; }

 private:
  bool fill(std::span<const double> lambda, std::span<const double> d_reduced);

  const CanonicalProblem& p_;
  double eps_;
  Exec exec_;
  std::vector<double> dfull_, gamma_, x_;
};

struct TtdResult {
  double objective = 0.0;
  std::vector<double> residual;
  std::vector<bool> cone_feasible;
  std::vector<double> cone_full;
};

/// Eliminates only the cost-epigraph slot1 (‖vec‖²/2) and evaluates as
/// acd_eval; reports membership of each tuple in the rotated cone.
TtdResult ttd_eval(std::span<const double> lambda, std::span<const double> mu,
                   std::span<const double> d, const CanonicalProblem& p, double tol = 1e-10);

/// μ on bound rows [upper; lower] from ρ = Fᵀd̃ − Aᵀλ − m, split into positive
/// and negative parts so that the paired rows are complementary.
std::vector<double> recover_mu(std::span<const double> lambda, std::span<const double> d_full,
                               const CanonicalProblem& p);

}  // namespace tightdual

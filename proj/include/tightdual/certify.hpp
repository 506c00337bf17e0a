#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tightdual/canon.hpp"
#include "tightdual/dual.hpp"
#include "tightdual/fosolve.hpp"

namespace tightdual {

inline constexpr double kDefaultDelta = 1e-8;

enum class ProjectionCase { zeroed, tightened };

std::string_view to_string(ProjectionCase c);

/// Per cone: scalar2 < δ gives the zero tuple, otherwise slot1 is recomputed
/// as ‖vec‖²/(2·scalar2). Accepts reduced or full points; returns a full one.
DualPoint face_project(const DualPoint& d, double delta, std::span<const ConeRange> cones,
                       std::vector<ProjectionCase>* cases = nullptr);

class ConeInfeasibleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CertifiedBound {
  double f_clb = 0.0;
  double f_clb_without_constant = 0.0;
  DualPoint projected;
  double delta = kDefaultDelta;
  std::vector<ProjectionCase> cases;
  std::optional<double> reference;
  // (f_clb − reference)/reference
  std::optional<double> gap;
  double projection_seconds = 0.0;
};

/// Lower bound from a cone-feasible full point. Throws ConeInfeasibleError
/// when any slack is below −1e-10 (scaled by 1 + ‖vec‖²).
CertifiedBound certified_lower_bound(std::span<const double> lambda, const DualPoint& d_hat,
                                     const CanonicalProblem& p,
                                     std::optional<double> reference = std::nullopt);

/// face_project followed by certified_lower_bound.
CertifiedBound certify(const DualPoint& point, const CanonicalProblem& p,
                       double delta = kDefaultDelta,
                       std::optional<double> reference = std::nullopt);

struct SweepRow {
  double eps = 0.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double f_clb = std::numeric_limits<double>::quiet_NaN();
  std::string status;
};

/// One solve per ε (ascending), each certified after projection. Objective
/// and f_clb include the constant cost. Failures are recorded per row.
std::vector<SweepRow> eps_sweep(const CanonicalProblem& p, std::span<const double> eps_list,
                                const SolveConfig& config, double delta = kDefaultDelta);

/// Header `eps,objective,f_clb,status`.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace tightdual

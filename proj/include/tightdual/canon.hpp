#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tightdual/cones.hpp"
#include "tightdual/primal.hpp"
#include "tightdual/sparse.hpp"

namespace tightdual {

class DegenerateBoxError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Blocks of   min mᵀx  s.t.  Ax + b = 0,  Cx + d ≤ 0,  Fx + g ∈ Q_r (per cone),
/// plus the box normalization ω = ½(x̄ + x̲), σ = ½(x̄ − x̲). C and d are the
/// stacked ±identity bound rows and are only built on request (bound_rows).
struct CanonicalProblem {
  VarLayout layout;
  std::vector<double> m;
  CsrMatrix A;
  CsrMatrix At;
  std::vector<double> b;
  CsrMatrix F;
  CsrMatrix Ft;
  std::vector<double> g;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> omega;
  std::vector<double> sigma;
  std::vector<ConeRange> cones;
  double constant_cost = 0.0;

  std::size_t num_vars() const { return m.size(); }
  std::size_t num_eq() const { return b.size(); }
  std::size_t num_cone_rows() const { return g.size(); }
  std::size_t num_bound_rows() const { return 2 * m.size(); }
};

std::pair<std::vector<double>, std::vector<double>> normalize(const PrimalModel& primal);

CanonicalProblem canonicalize(const PrimalModel& primal);

/// C = [I; −I], d = (−x̄; x̲), so Cx + d ≤ 0 ⇔ x̲ ≤ x ≤ x̄.
std::pair<CsrMatrix, std::vector<double>> bound_rows(const CanonicalProblem& p);

nlohmann::json to_json(const CanonicalProblem& p);

}  // namespace tightdual

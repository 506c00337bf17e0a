#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tightdual/cones.hpp"
#include "tightdual/network.hpp"

namespace tightdual {

struct IndexRange {
  std::size_t begin = 0;
  std::size_t size = 0;

  std::size_t end() const { return begin + size; }
  std::size_t operator[](std::size_t k) const { return begin + k; }
  bool operator==(const IndexRange&) const = default;
};

/// Position of every lifted variable inside the primal vector x, in the order
/// t, P^g, Q^g, P^s, P^r, Q^s, Q^r, s, c, w.
struct VarLayout {
  IndexRange t, pg, qg, ps, pr, qs, qr, s, c, w;

  VarLayout() = default;
  VarLayout(std::size_t generators, std::size_t branches, std::size_t buses);

  std::size_t dim() const { return w.end(); }
};

/// Linear forms of the four branch flows in the lifted variables. Row order
/// P^s (sending), P^r (receiving), Q^s, Q^r; column order w_from, w_to, c, s.
struct FlowCoeffs {
  static constexpr std::size_t kPs = 0, kPr = 1, kQs = 2, kQr = 3;
  static constexpr std::size_t kWFrom = 0, kWTo = 1, kC = 2, kS = 3;

  std::array<std::array<double, 4>, 4> coef{};

  std::array<double, 4> evaluate(double w_from, double w_to, double c, double s) const;
};

class DegenerateImpedanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// π-model with series admittance 1/(r + jx), charging b/2 at each end and an
/// ideal transformer tap·e^{j·shift} on the sending side.
FlowCoeffs branch_coeffs(const Branch& branch);

/// One slot of a cone block: `coeff·x[var]` when var is set, else the constant `coeff`.
struct ConeSlot {
  std::optional<std::size_t> var;
  double coeff = 0.0;

  double value(std::span<const double> x) const { return var ? coeff * x[*var] : coeff; }
  bool operator==(const ConeSlot&) const = default;
};

/// 2·slot1·slot2 ≥ ‖vec‖², slot1, slot2 ≥ 0.
struct ConeBlock {
  ConeKind kind = ConeKind::jabr;
  std::optional<std::size_t> branch;
  ConeSlot slot1;
  ConeSlot slot2;
  std::vector<ConeSlot> vec;
};

/// Σ_k coeff_k·x[col_k] + constant = 0.
struct EqRow {
  std::vector<std::pair<std::size_t, double>> terms;
  double constant = 0.0;
};

struct PrimalModel {
  VarLayout layout;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<EqRow> eq_rows;
  std::vector<ConeBlock> cones;
  std::vector<double> m;
  // Σ c0 over generators, kept out of the conic model.
  double constant_cost = 0.0;

  double objective(std::span<const double> x) const;
};

/// Box bounds: squared voltage limits on w, [0, vmax_i vmax_j] on c,
/// ±vmax_i vmax_j on s, ±rate_a on every flow, generator limits, [0, t̄] on t.
/// Intervals narrower than kMinBoxWidth are widened symmetrically so the box
/// stays strictly nonempty.
std::pair<std::vector<double>, std::vector<double>> default_bounds(const Network& net);

inline constexpr double kMinBoxWidth = 2e-6;

/// Upper bound of the cost-epigraph variable t.
double cost_bound(const Network& net);

PrimalModel build_primal(const Network& net);

}  // namespace tightdual

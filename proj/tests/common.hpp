#pragma once

#include <complex>
#include <random>
#include <string>

#include "tightdual/canon.hpp"
#include "tightdual/network.hpp"
#include "tightdual/primal.hpp"

namespace testutil {

inline std::string data_path(const std::string& file) {
  return std::string(TIGHTDUAL_DATA_DIR) + "/" + file;
}

inline std::string fixture_path(const std::string& file) {
  return std::string(TIGHTDUAL_FIXTURE_DIR) + "/" + file;
}

inline tightdual::CanonicalProblem canon_of(const std::string& path) {
  return tightdual::canonicalize(tightdual::build_primal(tightdual::load_matpower(path)));
}

// Branch flows straight from complex arithmetic on the π-model:
// I_f = (y + jb/2)/|T|²·V_f − y/conj(T)·V_t, I_t = (y + jb/2)·V_t − y/T·V_f,
// S = V·conj(I).
struct ComplexFlows {
  std::complex<double> s_from, s_to;
};

inline ComplexFlows complex_flows(const tightdual::Branch& br, std::complex<double> vf,
                                  std::complex<double> vt) {
  using C = std::complex<double>;
  const C y = 1.0 / C(br.r, br.x);
  const C ysh(0.0, br.b_charge / 2.0);
  const C tap = std::polar(br.tap, br.shift);
  const C i_f = (y + ysh) / std::norm(tap) * vf - y / std::conj(tap) * vt;
  const C i_t = (y + ysh) * vt - y / tap * vf;
  return {vf * std::conj(i_f), vt * std::conj(i_t)};
}

// Cheapest feasible point of the relaxation on a network with one generator
// bus (bus 1) and one load bus (bus 2) joined by one branch. Grid over
// (w1, w2); the load-bus balance fixes (c, s) linearly. A coarse pass is
// followed by refinement around the incumbent. Returns +inf if nothing
// feasible is found.
struct GridResult {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<double> x;
};

inline GridResult two_bus_grid_oracle(const tightdual::Network& net, int coarse = 200,
                                      int rounds = 6) {
  using namespace tightdual;
  const PrimalModel pm = build_primal(net);
  const auto& L = pm.layout;
  const Bus& b1 = net.buses[0];
  const Bus& b2 = net.buses[1];
  const Generator& g = net.generators[0];
  const Branch& br = net.branches[0];
  const FlowCoeffs fc = branch_coeffs(br);
  const auto& k = fc.coef;
  GridResult best;
  auto try_point = [&](double w1, double w2) {
    // Load bus: −pd2 − gs2·w2 = Pr, −qd2 + bs2·w2 = Qr.
    const double rp = -b2.pd - b2.gs * w2 - k[FlowCoeffs::kPr][FlowCoeffs::kWFrom] * w1 -
                      k[FlowCoeffs::kPr][FlowCoeffs::kWTo] * w2;
    const double rq = -b2.qd + b2.bs * w2 - k[FlowCoeffs::kQr][FlowCoeffs::kWFrom] * w1 -
                      k[FlowCoeffs::kQr][FlowCoeffs::kWTo] * w2;
    const double a11 = k[FlowCoeffs::kPr][FlowCoeffs::kC], a12 = k[FlowCoeffs::kPr][FlowCoeffs::kS];
    const double a21 = k[FlowCoeffs::kQr][FlowCoeffs::kC], a22 = k[FlowCoeffs::kQr][FlowCoeffs::kS];
    const double det = a11 * a22 - a12 * a21;
    if (det == 0.0) return;
    const double c = (rp * a22 - a12 * rq) / det;
    const double s = (a11 * rq - a21 * rp) / det;
    if (w1 * w2 < c * c + s * s) return;
    const auto f = fc.evaluate(w1, w2, c, s);
    const double pg = b1.pd + b1.gs * w1 + f[FlowCoeffs::kPs];
    const double qg = b1.qd - b1.bs * w1 + f[FlowCoeffs::kQs];
    std::vector<double> x(L.dim());
    x[L.t[0]] = g.c2 * pg * pg;
    x[L.pg[0]] = pg;
    x[L.qg[0]] = qg;
    x[L.ps[0]] = f[FlowCoeffs::kPs];
    x[L.pr[0]] = f[FlowCoeffs::kPr];
    x[L.qs[0]] = f[FlowCoeffs::kQs];
    x[L.qr[0]] = f[FlowCoeffs::kQr];
    x[L.s[0]] = s;
    x[L.c[0]] = c;
    x[L.w[0]] = w1;
    x[L.w[1]] = w2;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < pm.lower[i] || x[i] > pm.upper[i]) return;
    }
    const double r2 = br.rate_a * br.rate_a;
    if (f[0] * f[0] + f[2] * f[2] > r2 || f[1] * f[1] + f[3] * f[3] > r2) return;
    const double cost = pm.objective(x);
    if (cost < best.cost) {
      best.cost = cost;
      best.x = std::move(x);
    }
  };
  double lo1 = b1.vmin * b1.vmin, hi1 = b1.vmax * b1.vmax;
  double lo2 = b2.vmin * b2.vmin, hi2 = b2.vmax * b2.vmax;
  for (int r = 0; r < rounds; ++r) {
    for (int i = 0; i <= coarse; ++i) {
      for (int j = 0; j <= coarse; ++j) {
        try_point(lo1 + (hi1 - lo1) * i / coarse, lo2 + (hi2 - lo2) * j / coarse);
      }
    }
    if (best.x.empty()) break;
    const double w1 = best.x[L.w[0]], w2 = best.x[L.w[1]];
    const double h1 = 4.0 * (hi1 - lo1) / coarse, h2 = 4.0 * (hi2 - lo2) / coarse;
    lo1 = std::max(b1.vmin * b1.vmin, w1 - h1);
    hi1 = std::min(b1.vmax * b1.vmax, w1 + h1);
    lo2 = std::max(b2.vmin * b2.vmin, w2 - h2);
    hi2 = std::min(b2.vmax * b2.vmax, w2 + h2);
  }
  return best;
}

inline std::vector<double> uniform_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace testutil

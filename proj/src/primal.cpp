#include "tightdual/primal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace tightdual {

VarLayout::VarLayout(std::size_t generators, std::size_t branches, std::size_t buses) {
  std::size_t next = 0;
  auto take = [&next](std::size_t n) {
    IndexRange r{next, n};
    next += n;
    return r;
  };
  t = take(1);
  pg = take(generators);
  qg = take(generators);
  ps = take(branches);
  pr = take(branches);
  qs = take(branches);
  qr = take(branches);
  s = take(branches);
  c = take(branches);
  w = take(buses);
}

std::array<double, 4> FlowCoeffs::evaluate(double w_from, double w_to, double c, double s) const {
  const std::array<double, 4> z{w_from, w_to, c, s};
  std::array<double, 4> out{};
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t k = 0; k < 4; ++k) out[r] += coef[r][k] * z[k];
  }
  return out;
}

FlowCoeffs branch_coeffs(const Branch& br) {
  using cd = std::complex<double>;
  if (br.r == 0.0 && br.x == 0.0) {
    throw DegenerateImpedanceError("branch " + std::to_string(br.from) + "-" +
                                   std::to_string(br.to) + " has zero series impedance");
  }
  const cd ys = 1.0 / cd(br.r, br.x);
  const cd tap = std::polar(br.tap, br.shift);
  const cd half_charge(0.0, 0.5 * br.b_charge);
  const cd yff = (ys + half_charge) / (br.tap * br.tap);
  const cd yft = -ys / std::conj(tap);
  const cd ytf = -ys / tap;
  const cd ytt = ys + half_charge;

  // S_from = conj(yff)·w_from + conj(yft)·(c + js), S_to = conj(ytt)·w_to + conj(ytf)·(c − js).
  FlowCoeffs f;
  f.coef[FlowCoeffs::kPs] = {yff.real(), 0.0, yft.real(), yft.imag()};
  f.coef[FlowCoeffs::kPr] = {0.0, ytt.real(), ytf.real(), -ytf.imag()};
  f.coef[FlowCoeffs::kQs] = {-yff.imag(), 0.0, -yft.imag(), yft.real()};
  f.coef[FlowCoeffs::kQr] = {0.0, -ytt.imag(), -ytf.imag(), -ytf.real()};
  return f;
}

double PrimalModel::objective(std::span<const double> x) const {
  double v = constant_cost;
  for (std::size_t i = 0; i < m.size(); ++i) v += m[i] * x[i];
  return v;
}

double cost_bound(const Network& net) {
  double quad = 0.0, dimless = 0.0;
  for (const auto& g : net.generators) {
    quad += g.c2 * g.pmax * g.pmax;
    dimless += (g.c2 * g.pmax) * (g.c2 * g.pmax);
  }
  return 10.0 * std::max(quad, dimless) + 1.0;
}

std::pair<std::vector<double>, std::vector<double>> default_bounds(const Network& net) {
  require_buildable(net);
  const VarLayout lay(net.generators.size(), net.branches.size(), net.buses.size());
  std::vector<double> lo(lay.dim()), hi(lay.dim());

  lo[lay.t[0]] = 0.0;
  hi[lay.t[0]] = cost_bound(net);
  for (std::size_t k = 0; k < net.generators.size(); ++k) {
    const auto& g = net.generators[k];
    lo[lay.pg[k]] = g.pmin;
    hi[lay.pg[k]] = g.pmax;
    lo[lay.qg[k]] = g.qmin;
    hi[lay.qg[k]] = g.qmax;
  }
  for (std::size_t l = 0; l < net.branches.size(); ++l) {
    const auto& br = net.branches[l];
    for (const auto& flow : {lay.ps, lay.pr, lay.qs, lay.qr}) {
      lo[flow[l]] = -br.rate_a;
      hi[flow[l]] = br.rate_a;
    }
    const double vv = net.buses[*net.bus_index(br.from)].vmax * net.buses[*net.bus_index(br.to)].vmax;
    lo[lay.c[l]] = 0.0;
    hi[lay.c[l]] = vv;
    lo[lay.s[l]] = -vv;
    hi[lay.s[l]] = vv;
  }
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    lo[lay.w[i]] = net.buses[i].vmin * net.buses[i].vmin;
    hi[lay.w[i]] = net.buses[i].vmax * net.buses[i].vmax;
  }
  for (std::size_t i = 0; i < lay.dim(); ++i) {
    if (hi[i] - lo[i] < kMinBoxWidth) {
      const double mid = 0.5 * (lo[i] + hi[i]);
      lo[i] = mid - 0.5 * kMinBoxWidth;
      hi[i] = mid + 0.5 * kMinBoxWidth;
    }
  }
  return {std::move(lo), std::move(hi)};
}

PrimalModel build_primal(const Network& net) {
  require_buildable(net);
  const std::size_t nb = net.buses.size(), ng = net.generators.size(), nl = net.branches.size();
  PrimalModel pm;
  pm.layout = VarLayout(ng, nl, nb);
  const auto& lay = pm.layout;
  std::tie(pm.lower, pm.upper) = default_bounds(net);
  pm.constant_cost = net.constant_cost();

  // Balance rows: P rows [0, nb), Q rows [nb, 2nb). Generation − demand −
  // shunt consumption − outgoing flows = 0.
  pm.eq_rows.resize(2 * nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const auto& b = net.buses[i];
    pm.eq_rows[i].constant = -b.pd;
    pm.eq_rows[nb + i].constant = -b.qd;
    if (b.gs != 0.0) pm.eq_rows[i].terms.emplace_back(lay.w[i], -b.gs);
    if (b.bs != 0.0) pm.eq_rows[nb + i].terms.emplace_back(lay.w[i], b.bs);
  }
  for (std::size_t k = 0; k < ng; ++k) {
    const std::size_t i = *net.bus_index(net.generators[k].bus);
    pm.eq_rows[i].terms.emplace_back(lay.pg[k], 1.0);
    pm.eq_rows[nb + i].terms.emplace_back(lay.qg[k], 1.0);
  }
  std::vector<std::size_t> from(nl), to(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    from[l] = *net.bus_index(net.branches[l].from);
    to[l] = *net.bus_index(net.branches[l].to);
    pm.eq_rows[from[l]].terms.emplace_back(lay.ps[l], -1.0);
    pm.eq_rows[nb + from[l]].terms.emplace_back(lay.qs[l], -1.0);
    pm.eq_rows[to[l]].terms.emplace_back(lay.pr[l], -1.0);
    pm.eq_rows[nb + to[l]].terms.emplace_back(lay.qr[l], -1.0);
  }

  // Flow-definition rows, grouped P^s, P^r, Q^s, Q^r: flow − linear form = 0.
  std::vector<FlowCoeffs> coeffs(nl);
#pragma omp parallel for schedule(static) if (nl >= 4096)
  for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(nl); ++l) {
    coeffs[static_cast<std::size_t>(l)] = branch_coeffs(net.branches[static_cast<std::size_t>(l)]);
  }
  const std::array<IndexRange, 4> flow_vars{lay.ps, lay.pr, lay.qs, lay.qr};
  for (std::size_t q = 0; q < 4; ++q) {
    for (std::size_t l = 0; l < nl; ++l) {
      EqRow row;
      row.terms.emplace_back(flow_vars[q][l], 1.0);
      const std::array<std::size_t, 4> cols{lay.w[from[l]], lay.w[to[l]], lay.c[l], lay.s[l]};
      for (std::size_t k = 0; k < 4; ++k) {
        if (coeffs[l].coef[q][k] != 0.0) row.terms.emplace_back(cols[k], -coeffs[l].coef[q][k]);
      }
      pm.eq_rows.push_back(std::move(row));
    }
  }

  for (std::size_t l = 0; l < nl; ++l) {
    pm.cones.push_back({ConeKind::jabr,
                        l,
                        {lay.w[from[l]], 0.5},
                        {lay.w[to[l]], 1.0},
                        {{lay.c[l], 1.0}, {lay.s[l], 1.0}}});
  }
  for (const auto& [kind, p, q] : {std::tuple{ConeKind::send_flow, lay.ps, lay.qs},
                                   std::tuple{ConeKind::recv_flow, lay.pr, lay.qr}}) {
    for (std::size_t l = 0; l < nl; ++l) {
      const double rate = net.branches[l].rate_a;
      pm.cones.push_back({kind, l, {std::nullopt, 0.5}, {std::nullopt, rate * rate},
                          {{p[l], 1.0}, {q[l], 1.0}}});
    }
  }
  ConeBlock cost{ConeKind::cost_epi, std::nullopt, {std::nullopt, 0.5}, {lay.t[0], 1.0}, {}};
  for (std::size_t k = 0; k < ng; ++k) {
    if (net.generators[k].c2 > 0.0) {
      cost.vec.push_back({lay.pg[k], std::sqrt(net.generators[k].c2)});
    }
  }
  pm.cones.push_back(std::move(cost));

  pm.m.assign(lay.dim(), 0.0);
  pm.m[lay.t[0]] = 1.0;
  for (std::size_t k = 0; k < ng; ++k) pm.m[lay.pg[k]] = net.generators[k].c1;
  return pm;
}

}  // namespace tightdual

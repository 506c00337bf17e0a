#include "tightdual/canon.hpp"

#include <string>

namespace tightdual {

std::pair<std::vector<double>, std::vector<double>> normalize(const PrimalModel& primal) {
  const std::size_t n = primal.lower.size();
  std::vector<double> omega(n), sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    omega[i] = 0.5 * (primal.upper[i] + primal.lower[i]);
    sigma[i] = 0.5 * (primal.upper[i] - primal.lower[i]);
    if (!(sigma[i] > 0.0)) {
      throw DegenerateBoxError("box of variable " + std::to_string(i) + " has zero width");
    }
  }
  return {std::move(omega), std::move(sigma)};
}

CanonicalProblem canonicalize(const PrimalModel& primal) {
  CanonicalProblem p;
  p.layout = primal.layout;
  p.m = primal.m;
  p.lower = primal.lower;
  p.upper = primal.upper;
  p.constant_cost = primal.constant_cost;
  std::tie(p.omega, p.sigma) = normalize(primal);
  const std::size_t n = p.m.size();

  std::vector<Triplet> a;
  p.b.reserve(primal.eq_rows.size());
  for (std::size_t r = 0; r < primal.eq_rows.size(); ++r) {
    for (const auto& [col, val] : primal.eq_rows[r].terms) a.push_back({r, col, val});
    p.b.push_back(primal.eq_rows[r].constant);
  }
  p.A = CsrMatrix::from_triplets(primal.eq_rows.size(), n, std::move(a));
  p.At = p.A.transpose();

  std::vector<Triplet> f;
  std::size_t row = 0;
  auto put = [&](const ConeSlot& slot) {
    if (slot.var) {
      f.push_back({row, *slot.var, slot.coeff});
      p.g.push_back(0.0);
    } else {
      p.g.push_back(slot.coeff);
    }
    ++row;
  };
  for (const auto& cone : primal.cones) {
    p.cones.push_back({cone.kind, row, 2 + cone.vec.size()});
    put(cone.slot1);
    put(cone.slot2);
    for (const auto& slot : cone.vec) put(slot);
  }
  p.F = CsrMatrix::from_triplets(row, n, std::move(f));
  p.Ft = p.F.transpose();
  return p;
}

std::pair<CsrMatrix, std::vector<double>> bound_rows(const CanonicalProblem& p) {
  const std::size_t n = p.num_vars();
  std::vector<Triplet> c;
  c.reserve(2 * n);
  std::vector<double> d(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    c.push_back({i, i, 1.0});
    c.push_back({n + i, i, -1.0});
    d[i] = -p.upper[i];
    d[n + i] = p.lower[i];
  }
  return {CsrMatrix::from_triplets(2 * n, n, std::move(c)), std::move(d)};
}

nlohmann::json to_json(const CanonicalProblem& p) {
  nlohmann::json cones = nlohmann::json::array();
  for (const auto& c : p.cones) {
    cones.push_back({{"kind", std::string(to_string(c.kind))}, {"row", c.row}, {"size", c.size}});
  }
  const auto& l = p.layout;
  auto range = [](const IndexRange& r) { return nlohmann::json::array({r.begin, r.size}); };
  return {{"layout",
           {{"t", range(l.t)},
            {"pg", range(l.pg)},
            {"qg", range(l.qg)},
            {"ps", range(l.ps)},
            {"pr", range(l.pr)},
            {"qs", range(l.qs)},
            {"qr", range(l.qr)},
            {"s", range(l.s)},
            {"c", range(l.c)},
            {"w", range(l.w)}}},
          {"m", p.m},
          {"A", to_triplet_json(p.A)},
          {"b", p.b},
          {"F", to_triplet_json(p.F)},
          {"g", p.g},
          {"lower", p.lower},
          {"upper", p.upper},
          {"omega", p.omega},
          {"sigma", p.sigma},
          {"cones", cones},
          {"constant_cost", p.constant_cost}};
}

}  // namespace tightdual

#include "tightdual/certify.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

#include "tightdual/kernels.hpp"

namespace tightdual {

std::string_view to_string(ProjectionCase c) {
  return c == ProjectionCase::zeroed ? "zeroed" : "tightened";
}

DualPoint face_project(const DualPoint& d, double delta, std::span<const ConeRange> cones,
                       std::vector<ProjectionCase>* cases) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  DualPoint out = d;
  out.full = true;
  out.mu.reset();
  if (cases) cases->assign(cones.size(), ProjectionCase::tightened);
  for (std::size_t k = 0; k < cones.size(); ++k) {
    const auto& c = cones[k];
    double* t = out.cone.data() + c.row;
    if (t[1] < delta) {
      std::fill(t, t + c.size, 0.0);
      if (cases) (*cases)[k] = ProjectionCase::zeroed;
      continue;
    }
    double q = 0.0;
    for (std::size_t j = 2; j < c.size; ++j) q += t[j] * t[j];
    t[0] = q / (2.0 * t[1]);
  }
  return out;
}

CertifiedBound certified_lower_bound(std::span<const double> lambda, const DualPoint& d_hat,
                                     const CanonicalProblem& p, std::optional<double> reference) {
  const auto slack = cone_slacks(d_hat.cone, p.cones);
  for (std::size_t k = 0; k < p.cones.size(); ++k) {
    const auto& c = p.cones[k];
    double q = 0.0;
    for (std::size_t j = c.vec_begin(); j < c.row + c.size; ++j) q += d_hat.cone[j] * d_hat.cone[j];
    const bool neg_scalar = d_hat.cone[c.slot1()] < 0.0 || d_hat.cone[c.slot2()] < 0.0;
    if (neg_scalar || slack[k] < -1e-10 * (1.0 + q)) {
      throw ConeInfeasibleError("dual tuple of cone " + std::to_string(k) +
                                " lies outside the rotated cone");
    }
  }
  CertifiedBound b;
  b.projected = d_hat;
  b.projected.lambda.assign(lambda.begin(), lambda.end());
  b.f_clb_without_constant = box_dual_value(lambda, d_hat.cone, p);
  b.f_clb = b.f_clb_without_constant + p.constant_cost;
  if (reference) {
    b.reference = reference;
    b.gap = (b.f_clb - *reference) / *reference;
  }
  return b;
}

CertifiedBound certify(const DualPoint& point, const CanonicalProblem& p, double delta,
                       std::optional<double> reference) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ProjectionCase> cases;
  const DualPoint d_hat = face_project(point, delta, p.cones, &cases);
  const auto t1 = std::chrono::steady_clock::now();
  CertifiedBound b = certified_lower_bound(point.lambda, d_hat, p, reference);
  b.delta = delta;
  b.cases = std::move(cases);
  b.projection_seconds = std::chrono::duration<double>(t1 - t0).count();
  return b;
}

std::vector<SweepRow> eps_sweep(const CanonicalProblem& p, std::span<const double> eps_list,
                                const SolveConfig& config, double delta) {
  if (eps_list.empty()) throw std::invalid_argument("eps list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw std::invalid_argument("eps values must be positive");
    if (i > 0 && !(eps_list[i] > eps_list[i - 1])) {
      throw std::invalid_argument("eps values must be sorted ascending");
    }
  }
  std::vector<SweepRow> rows;
  for (double eps : eps_list) {
    SweepRow row;
    row.eps = eps;
    try {
      SolveConfig cfg = config;
      cfg.eps = eps;
      const auto rep = solve_atd(p, cfg);
      row.objective = rep.best_objective + p.constant_cost;
      row.f_clb = certify(rep.best_point, p, delta).f_clb;
      row.status = std::string(to_string(rep.termination));
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  // Shortest text that reads back to the same double.
  auto num = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  out << "eps,objective,f_clb,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& ch : status) {
      if (ch == ',' || ch == '\n') ch = ' ';
    }
    out << num(r.eps) << ',' << num(r.objective) << ',' << num(r.f_clb) << ',' << status << '\n';
  }
}

}  // namespace tightdual

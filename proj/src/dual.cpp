#include "tightdual/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tightdual/kernels.hpp"

namespace tightdual {

namespace {

namespace ks = kernels::serial;
namespace kp = kernels::parallel;

void check_sizes(std::span<const double> lambda, std::span<const double> d,
                 const CanonicalProblem& p) {
  if (lambda.size() != p.num_eq() || d.size() != p.num_cone_rows()) {
    throw std::invalid_argument("dual point does not match problem dimensions");
  }
}

}  // namespace

DualPoint zero_point(const CanonicalProblem& p, bool full) {
  DualPoint d;
  d.lambda.assign(p.num_eq(), 0.0);
  d.cone.assign(p.num_cone_rows(), 0.0);
  d.full = full;
  return d;
}

DualPoint replace(const DualPoint& reduced, double eps, std::span<const ConeRange> cones) {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  DualPoint out = reduced;
  for (const auto& c : cones) {
    if (out.cone[c.slot2()] < 0.0) throw std::invalid_argument("negative scalar2");
  }
  if (ks::replace_slot1(cones, out.cone, eps) > 0) {
    throw DivisionSingularityError("scalar2 = 0 with eps = 0 and nonzero vec");
  }
  out.full = true;
  return out;
}

AcdResult acd_eval(std::span<const double> lambda, std::span<const double> mu,
                   std::span<const double> d_full, const CanonicalProblem& p) {
  check_sizes(lambda, d_full, p);
  if (mu.size() != p.num_bound_rows()) throw std::invalid_argument("mu has wrong length");
  const auto [C, d] = bound_rows(p);
  AcdResult r;
  r.objective = ks::dot(lambda, p.b) + ks::dot(mu, d) - ks::dot(d_full, p.g);
  r.residual = p.m;
  ks::spmv_acc(p.At, lambda, 1.0, r.residual);
  ks::spmv_acc(C.transpose(), mu, 1.0, r.residual);
  ks::spmv_acc(p.Ft, d_full, -1.0, r.residual);
  return r;
}

std::vector<double> cone_slacks(std::span<const double> d_full, std::span<const ConeRange> cones) {
  std::vector<double> s(cones.size());
  ks::cone_slacks(cones, d_full, s);
  return s;
}

double box_dual_value(std::span<const double> lambda, std::span<const double> d_full,
                      const CanonicalProblem& p, Exec exec) {
  check_sizes(lambda, d_full, p);
  std::vector<double> gamma = p.m;
  if (exec == Exec::serial) {
    ks::spmv_acc(p.At, lambda, 1.0, gamma);
    ks::spmv_acc(p.Ft, d_full, -1.0, gamma);
    return ks::box_min_value(gamma, p.sigma, p.omega) + ks::dot(lambda, p.b) -
           ks::dot(d_full, p.g);
  }
  kp::spmv_acc(p.At, lambda, 1.0, gamma);
  kp::spmv_acc(p.Ft, d_full, -1.0, gamma);
  return kp::box_min_value(gamma, p.sigma, p.omega) + kp::dot(lambda, p.b) -
         kp::dot(d_full, p.g);
}

DualNormEvaluator::DualNormEvaluator(const CanonicalProblem& p, double eps, Exec exec)
    : p_(p), eps_(eps), exec_(exec) {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  dfull_.resize(p.num_cone_rows());
  gamma_.resize(p.num_vars());
  x_.resize(p.num_vars());
}

bool DualNormEvaluator::fill(std::span<const double> lambda, std::span<const double> d_reduced) {
  check_sizes(lambda, d_reduced, p_);
  std::copy(d_reduced.begin(), d_reduced.end(), dfull_.begin());
  std::copy(p_.m.begin(), p_.m.end(), gamma_.begin());
  if (exec_ == Exec::serial) {
    if (ks::replace_slot1(p_.cones, dfull_, eps_) > 0) return false;
    ks::spmv_acc(p_.At, lambda, 1.0, gamma_);
    ks::spmv_acc(p_.Ft, dfull_, -1.0, gamma_);
  } else {
    if (kp::replace_slot1(p_.cones, dfull_, eps_) > 0) return false;
    kp::spmv_acc(p_.At, lambda, 1.0, gamma_);
    kp::spmv_acc(p_.Ft, dfull_, -1.0, gamma_);
  }
  return true;
}

double DualNormEvaluator::value(std::span<const double> lambda,
                                std::span<const double> d_reduced, double nu) {
  if (!fill(lambda, d_reduced)) return -std::numeric_limits<double>::infinity();
  if (exec_ == Exec::serial) {
    return ks::box_min_value(gamma_, p_.sigma, p_.omega, nu) + ks::dot(lambda, p_.b) -
           ks::dot(dfull_, p_.g);
  }
  return kp::box_min_value(gamma_, p_.sigma, p_.omega, nu) + kp::dot(lambda, p_.b) -
         kp::dot(dfull_, p_.g);
}

double DualNormEvaluator::evaluate(std::span<const double> lambda,
                                   std::span<const double> d_reduced,
                                   std::span<double> grad_lambda, std::span<double> grad_cone,
                                   double nu) {
  if (!fill(lambda, d_reduced)) {
    throw DivisionSingularityError("scalar2 = 0 with eps = 0 and nonzero vec");
  }
  std::copy(p_.b.begin(), p_.b.end(), grad_lambda.begin());
  std::transform(p_.g.begin(), p_.g.end(), grad_cone.begin(), [](double v) { return -v; });
  double val;
  if (exec_ == Exec::serial) {
    val = ks::box_min_value(gamma_, p_.sigma, p_.omega, nu) + ks::dot(lambda, p_.b) -
          ks::dot(dfull_, p_.g);
    ks::box_minimizer(gamma_, p_.sigma, p_.omega, x_, nu);
    ks::spmv_acc(p_.A, x_, 1.0, grad_lambda);
    ks::spmv_acc(p_.F, x_, -1.0, grad_cone);
    ks::reduce_cone_gradient(p_.cones, dfull_, eps_, grad_cone);
  } else {
    val = kp::box_min_value(gamma_, p_.sigma, p_.omega, nu) + kp::dot(lambda, p_.b) -
          kp::dot(dfull_, p_.g);
    kp::box_minimizer(gamma_, p_.sigma, p_.omega, x_, nu);
    kp::spmv_acc(p_.A, x_, 1.0, grad_lambda);
    kp::spmv_acc(p_.F, x_, -1.0, grad_cone);
    kp::reduce_cone_gradient(p_.cones, dfull_, eps_, grad_cone);
  }
  return val;
}

DualNormResult dualnorm_objective(std::span<const double> lambda,
                                  std::span<const double> d_reduced, double eps,
                                  const CanonicalProblem& p, double nu, Exec exec) {
  for (const auto& c : p.cones) {
    if (d_reduced.size() > c.slot2() && d_reduced[c.slot2()] < 0.0) {
      throw std::invalid_argument("negative scalar2");
    }
  }
  DualNormEvaluator ev(p, eps, exec);
  DualNormResult r;
  r.grad_lambda.resize(p.num_eq());
  r.grad_cone.resize(p.num_cone_rows());
  r.value = ev.evaluate(lambda, d_reduced, r.grad_lambda, r.grad_cone, nu);
  return r;
}

TtdResult ttd_eval(std::span<const double> lambda, std::span<const double> mu,
                   std::span<const double> d, const CanonicalProblem& p, double tol) {
  check_sizes(lambda, d, p);
  TtdResult r;
  r.cone_full.assign(d.begin(), d.end());
  for (const auto& c : p.cones) {
    if (c.kind != ConeKind::cost_epi) continue;
    double q = 0.0;
    for (std::size_t k = 0; k < c.vec_size(); ++k) {
      q += r.cone_full[c.vec_begin() + k] * r.cone_full[c.vec_begin() + k];
    }
    r.cone_full[c.slot1()] = 0.5 * q;
  }
  auto acd = acd_eval(lambda, mu, r.cone_full, p);
  r.objective = acd.objective;
  r.residual = std::move(acd.residual);
  const auto slack = cone_slacks(r.cone_full, p.cones);
  r.cone_feasible.resize(p.cones.size());
  for (std::size_t k = 0; k < p.cones.size(); ++k) {
    const auto& c = p.cones[k];
    double q = 0.0;
    for (std::size_t j = 0; j < c.vec_size(); ++j) {
      q += r.cone_full[c.vec_begin() + j] * r.cone_full[c.vec_begin() + j];
    }
    r.cone_feasible[k] = r.cone_full[c.slot1()] >= 0.0 && r.cone_full[c.slot2()] >= 0.0 &&
                         slack[k] >= -tol * (1.0 + q);
  }
  return r;
}

std::vector<double> recover_mu(std::span<const double> lambda, std::span<const double> d_full,
                               const CanonicalProblem& p) {
  check_sizes(lambda, d_full, p);
  const std::size_t n = p.num_vars();
  std::vector<double> rho(n, 0.0);
  ks::spmv(p.Ft, d_full, rho);
  ks::spmv_acc(p.At, lambda, -1.0, rho);
  std::vector<double> mu(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    rho[i] -= p.m[i];
    mu[i] = std::max(rho[i], 0.0);
    mu[n + i] = std::max(-rho[i], 0.0);
  }
  return mu;
}

}  // namespace tightdual

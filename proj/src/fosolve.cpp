#include "tightdual/fosolve.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "tightdual/kernels.hpp"

namespace tightdual {

namespace {

namespace kp = kernels::parallel;
namespace ks = kernels::serial;

double sq(double v) { return v * v; }

std::string dump_iterate(const SolveConfig& cfg, int iteration, const DualPoint& z) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::path dir = cfg.dump_dir.empty() ? fs::temp_directory_path(ec) : fs::path(cfg.dump_dir);
  if (ec) return {};
  fs::create_directories(dir, ec);
  const fs::path path = dir / ("tightdual_iterate_" + std::to_string(iteration) + ".json");
  std::ofstream out(path);
  if (!out) return {};
  out << nlohmann::json{{"iteration", iteration},
                        {"lambda", z.lambda},
                        {"cone", z.cone},
                        {"config", to_json(cfg)}}
             .dump();
  return path.string();
}

[[noreturn]] void numerical_failure(const SolveConfig& cfg, int iteration, const DualPoint& z) {
  const auto path = dump_iterate(cfg, iteration, z);
  throw NumericalFailureError(
      "non-finite dual objective at iteration " + std::to_string(iteration) +
          (path.empty() ? std::string() : ", iterate written to " + path),
      path);
}

void jitter(DualPoint& z, const CanonicalProblem& p, const SolveConfig& cfg) {
  if (cfg.init_jitter <= 0.0) return;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-cfg.init_jitter, cfg.init_jitter);
  for (const auto& c : p.cones) {
    if (c.kind != ConeKind::cost_epi) z.cone[c.slot2()] = std::max(0.0, 1.0 + u(rng));
    for (std::size_t k = 0; k < c.vec_size(); ++k) z.cone[c.vec_begin() + k] = u(rng);
  }
}

// Tracks the running best, the decimated trace and the patience rule.
class Progress {
 public:
  Progress(const SolveConfig& cfg, const DualPoint& z0, double v0) : cfg_(cfg) {
    best_ = v0;
    best_point_ = z0;
    history_.push_back({0, v0});
  }

  // Returns true when the patience window shows no relative progress.
  bool record(int iteration, double value, const DualPoint& z) {
    if (!std::isfinite(value)) numerical_failure(cfg_, iteration, z);
    if (value > best_) {
      best_ = value;
      best_point_ = z;
    }
    trace_.push_back({iteration, value, best_});
    history_.push_back({iteration, best_});
    while (history_.size() > 1 && history_[1].first <= iteration - cfg_.patience) {
      history_.erase(history_.begin());
    }
    const auto& [it0, b0] = history_.front();
    if (iteration - it0 < cfg_.patience) return false;
    return best_ - b0 <= cfg_.tol_rel * std::max(1.0, std::abs(best_));
  }

  double best() const { return best_; }
  const DualPoint& best_point() const { return best_point_; }
  std::vector<TracePoint>& trace() { return trace_; }

 private:
  const SolveConfig& cfg_;
  double best_;
  DualPoint best_point_;
  std::vector<TracePoint> trace_;
  std::vector<std::pair<int, double>> history_;
};

// argmax over (d2 ≥ 0, v) of −d1(d2, v)·a1 − d2·a2 − vᵀav − ‖(d2, v) − (z2, v0)‖²/(2s)
// with d1 = ‖v‖²/(2·d2 + ε). Writes the new (d2, v) into z.
void cone_prox_tuple(const ConeRange& c, const double* a, double s, double eps, double* z) {
  const std::size_t nv = c.vec_size();
  const double a1 = std::max(a[0], 0.0);
  const double a2 = a[1];
  const double z2 = z[c.slot2()];
  double* v = z + c.vec_begin();
  const double* av = a + 2;
  double uu = 0.0;
  for (std::size_t k = 0; k < nv; ++k) uu += sq(v[k] / s - av[k]);
  // ‖v(d2)‖² = uu/(1/s + 2·a1/den)²
  auto dphi = [&](double d2) {
    const double den = 2.0 * d2 + eps;
    if (den == 0.0) {
      if (a1 > 0.0) return uu / (2.0 * a1) - a2 + z2 / s;
      return -a2 + z2 / s;
    }
    const double w = 1.0 / s + 2.0 * a1 / den;
    return a1 * 2.0 * uu / (w * w * den * den) - a2 - (d2 - z2) / s;
  };
  double d2 = 0.0;
  if (dphi(0.0) > 0.0) {
    double lo = 0.0, hi = std::max(z2, 0.0) + 1.0;
    while (dphi(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (dphi(mid) > 0.0 ? lo : hi) = mid;
    }
    d2 = 0.5 * (lo + hi);
  }
  const double den = 2.0 * d2 + eps;
  const double scale = den == 0.0 ? (a1 > 0.0 ? 0.0 : s) : 1.0 / (1.0 / s + 2.0 * a1 / den);
  for (std::size_t k = 0; k < nv; ++k) v[k] = (v[k] / s - av[k]) * scale;
  z[c.slot2()] = d2;
}

// Cost cone: d2 fixed, d1 = ‖v‖²/2.
void cone_prox_cost(const ConeRange& c, const double* a, double s, double* z) {
  const double a1 = std::max(a[0], 0.0);
  double* v = z + c.vec_begin();
  for (std::size_t k = 0; k < c.vec_size(); ++k) v[k] = (v[k] / s - a[2 + k]) / (1.0 / s + a1);
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> abs_row_sums(const CsrMatrix& a) {
  std::vector<double> r(a.rows(), 0.0);
  const auto rp = a.row_ptr();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) r[i] += std::abs(v[k]);
  }
  return r;
}

SolveReport solve_primal_dual(const CanonicalProblem& p, const SolveConfig& cfg) {
  const std::size_t n = p.num_vars();
  const std::size_t ne = p.num_eq();
  const std::size_t nf = p.num_cone_rows();
  const bool par = cfg.exec == Exec::parallel;
  auto spmv_acc = par ? kp::spmv_acc : ks::spmv_acc;
  auto spmv = par ? kp::spmv : ks::spmv;

  double pw = cfg.primal_weight;
  if (pw <= 0.0) {
    const double nb = norm2(p.b), nm = norm2(p.m);
    pw = (nb > 0.0 && nm > 0.0) ? nm / nb : 1.0;
  }

  // Diagonal preconditioning: primal steps from column sums, dual steps from
  // row sums of [A; F], balanced by the primal weight.
  const auto cs_a = abs_row_sums(p.At);
  const auto cs_f = abs_row_sums(p.Ft);
  std::vector<double> tau(n);
  for (std::size_t j = 0; j < n; ++j) tau[j] = 1.0 / (pw * std::max(cs_a[j] + cs_f[j], 1e-12));
  std::vector<double> sig_a = abs_row_sums(p.A);
  for (double& s : sig_a) s = pw / std::max(s, 1e-12);
  const auto rs_f = abs_row_sums(p.F);
  std::vector<double> sig_cone(p.cones.size(), 1.0);
  for (std::size_t k = 0; k < p.cones.size(); ++k) {
    const auto& c = p.cones[k];
    const std::size_t first = c.kind == ConeKind::cost_epi ? c.vec_begin() : c.row;
    // One step per cone: the smallest of its rows' steps.
    double m = 0.0;
    for (std::size_t r = first; r < c.row + c.size; ++r) m = std::max(m, rs_f[r]);
    sig_cone[k] = m > 0.0 ? pw / m : pw;
  }

  DualPoint z = warm_start(p);
  jitter(z, p, cfg);
  DualNormEvaluator ev(p, cfg.eps, cfg.exec);
  Progress prog(cfg, z, ev.value(z.lambda, z.cone));

  std::vector<double> x = p.omega, xn(n), xb(n), grad(n), ax(ne), fx(nf), dfull(nf);
  SolveReport rep;
  rep.primal_weight = pw;
  rep.termination = Termination::iteration_limit;
  int k = 0;
  while (k < cfg.max_iter) {
    // Primal step on the box.
    std::copy(z.cone.begin(), z.cone.end(), dfull.begin());
    ks::replace_slot1(p.cones, dfull, cfg.eps);
    std::copy(p.m.begin(), p.m.end(), grad.begin());
    spmv_acc(p.At, z.lambda, 1.0, grad);
    spmv_acc(p.Ft, dfull, -1.0, grad);
    for (std::size_t j = 0; j < n; ++j) {
      xn[j] = std::clamp(x[j] - tau[j] * grad[j], p.lower[j], p.upper[j]);
      xb[j] = 2.0 * xn[j] - x[j];
    }
    std::swap(x, xn);
    // Dual step at the extrapolated point.
    spmv(p.A, xb, ax);
    for (std::size_t i = 0; i < ne; ++i) z.lambda[i] += sig_a[i] * (ax[i] + p.b[i]);
    spmv(p.F, xb, fx);
    for (std::size_t i = 0; i < nf; ++i) fx[i] += p.g[i];
    const auto ncones = static_cast<std::ptrdiff_t>(p.cones.size());
#pragma omp parallel for schedule(static) if (par && p.cones.size() >= 1024)
    for (std::ptrdiff_t kk = 0; kk < ncones; ++kk) {
      const auto& c = p.cones[static_cast<std::size_t>(kk)];
      const double s = sig_cone[static_cast<std::size_t>(kk)];
      if (c.kind == ConeKind::cost_epi) {
        cone_prox_cost(c, fx.data() + c.row, s, z.cone.data());
      } else {
        cone_prox_tuple(c, fx.data() + c.row, s, cfg.eps, z.cone.data());
      }
    }
    ++k;
    if (k % cfg.check_every == 0 || k == cfg.max_iter) {
      if (prog.record(k, ev.value(z.lambda, z.cone), z)) {
        rep.termination = Termination::tolerance;
        break;
      }
    }
  }
  rep.iterations = k;
  rep.best_objective = prog.best();
  rep.best_point = prog.best_point();
  rep.trace = std::move(prog.trace());
  return rep;
}

SolveReport solve_subgradient(const CanonicalProblem& p, const SolveConfig& cfg) {
  const std::size_t ne = p.num_eq();
  const std::size_t nf = p.num_cone_rows();
  DualPoint z = warm_start(p);
  jitter(z, p, cfg);
  DualNormEvaluator ev(p, cfg.eps, cfg.exec);
  Progress prog(cfg, z, ev.value(z.lambda, z.cone));
  std::vector<double> gl(ne), gc(nf), acc_l(ne, 0.0), acc_c(nf, 0.0);
  SolveReport rep;
  rep.termination = Termination::iteration_limit;
  int k = 0;
  while (k < cfg.max_iter) {
    const double nu = cfg.smoothing > 0.0 ? cfg.smoothing / std::sqrt(k + 1.0) : 0.0;
    const double val = ev.evaluate(z.lambda, z.cone, gl, gc, nu);
    if (!std::isfinite(val)) numerical_failure(cfg, k, z);
    double gnorm2 = 0.0;
    for (double v : gl) gnorm2 += v * v;
    for (double v : gc) gnorm2 += v * v;
    auto step_of = [&](double& acc, double g) {
      switch (cfg.step_rule) {
        case StepRule::constant:
          return cfg.step;
        case StepRule::adagrad:
          acc += g * g;
          return acc > 0.0 ? cfg.step / std::sqrt(acc) : 0.0;
        case StepRule::polyak:
          return gnorm2 > 0.0 ? std::max(cfg.polyak_target - val, 0.0) / gnorm2 : 0.0;
      }
      return 0.0;
    };
    for (std::size_t i = 0; i < ne; ++i) z.lambda[i] += step_of(acc_l[i], gl[i]) * gl[i];
    for (const auto& c : p.cones) {
      for (std::size_t r = c.slot2(); r < c.row + c.size; ++r) {
        if (r == c.slot2() && c.kind == ConeKind::cost_epi) continue;
        z.cone[r] += step_of(acc_c[r], gc[r]) * gc[r];
      }
      z.cone[c.slot2()] = std::max(z.cone[c.slot2()], 0.0);
    }
    ++k;
    if (k % cfg.check_every == 0 || k == cfg.max_iter) {
      if (prog.record(k, ev.value(z.lambda, z.cone), z)) {
        rep.termination = Termination::tolerance;
        break;
      }
    }
  }
  rep.iterations = k;
  rep.best_objective = prog.best();
  rep.best_point = prog.best_point();
  rep.trace = std::move(prog.trace());
  return rep;
}

}  // namespace

std::string_view to_string(Method m) {
  return m == Method::primal_dual ? "primal_dual" : "subgradient";
}

std::string_view to_string(StepRule r) {
  switch (r) {
    case StepRule::constant:
      return "constant";
    case StepRule::adagrad:
      return "adagrad";
    case StepRule::polyak:
      return "polyak";
  }
  return "unknown";
}

std::string_view to_string(Termination t) {
  return t == Termination::tolerance ? "tolerance" : "iteration-limit";
}

Method parse_method(std::string_view s) {
  if (s == "primal_dual") return Method::primal_dual;
  if (s == "subgradient") return Method::subgradient;
  throw std::invalid_argument("unknown method: " + std::string(s));
}

StepRule parse_step_rule(std::string_view s) {
  if (s == "constant") return StepRule::constant;
  if (s == "adagrad") return StepRule::adagrad;
  if (s == "polyak") return StepRule::polyak;
  throw std::invalid_argument("unknown step rule: " + std::string(s));
}

void SolveConfig::validate() const {
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(tol_rel > 0.0)) throw std::invalid_argument("tol_rel must be positive");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  if (check_every < 1) throw std::invalid_argument("check_every must be at least 1");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (smoothing < 0.0 || init_jitter < 0.0 || primal_weight < 0.0) {
    throw std::invalid_argument("negative smoothing, jitter or primal weight");
  }
  if (method == Method::subgradient && step_rule == StepRule::polyak &&
      !std::isfinite(polyak_target)) {
    throw std::invalid_argument("polyak step rule needs a finite target");
  }
}

nlohmann::json to_json(const SolveConfig& c) {
  return {{"eps", c.eps},
          {"max_iter", c.max_iter},
          {"method", std::string(to_string(c.method))},
          {"step_rule", std::string(to_string(c.step_rule))},
          {"step", c.step},
          {"smoothing", c.smoothing},
          {"tol_rel", c.tol_rel},
          {"patience", c.patience},
          {"seed", c.seed},
          {"primal_weight", c.primal_weight},
          {"check_every", c.check_every}};
}

DualPoint warm_start(const CanonicalProblem& p) {
  DualPoint z = zero_point(p, false);
  for (const auto& c : p.cones) z.cone[c.slot2()] = 1.0;
  return z;
}

SolveReport solve_atd(const CanonicalProblem& p, const SolveConfig& config) {
  config.validate();
  if (config.method == Method::subgradient) return solve_subgradient(p, config);
  return solve_primal_dual(p, config);
}

}  // namespace tightdual

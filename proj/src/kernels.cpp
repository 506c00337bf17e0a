#include "tightdual/kernels.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <omp.h>

namespace tightdual {

std::string_view to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::jabr:
      return "jabr";
    case ConeKind::send_flow:
      return "send_flow";
    case ConeKind::recv_flow:
      return "recv_flow";
    case ConeKind::cost_epi:
      return "cost_epi";
  }
  return "unknown";
}

namespace kernels {

namespace {

// Below these sizes a parallel region costs more than it saves.
constexpr std::size_t kMinParallelRows = 2048;
constexpr std::size_t kMinParallelElems = 8192;
constexpr std::size_t kMinParallelCones = 1024;

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline double sq_norm(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += v[k] * v[k];
  return s;
}

inline bool replace_one(const ConeRange& c, double* d, double eps) {
  const double q = sq_norm(d + c.vec_begin(), c.vec_size());
  if (c.kind == ConeKind::cost_epi) {
    d[c.slot1()] = 0.5 * q;
    return true;
  }
  const double den = 2.0 * d[c.slot2()] + eps;
  if (den == 0.0) {
    if (q == 0.0) {
      d[c.slot1()] = 0.0;
      return true;
    }
    d[c.slot1()] = std::numeric_limits<double>::infinity();
    return false;
  }
  d[c.slot1()] = q / den;
  return true;
}

inline double huber_abs(double g, double nu_i) {
  return std::sqrt(g * g + nu_i * nu_i) - nu_i;
}

inline double box_point(double g, double s, double o, double nu) {
  if (nu <= 0.0) return o - s * sign(g);
  const double nu_i = nu / s;
  return o - s * g / std::sqrt(g * g + nu_i * nu_i);
}

inline double box_term(double g, double s, double o, double nu) {
  const double a = nu <= 0.0 ? std::abs(g) : huber_abs(g, nu / s);
  return -s * a + g * o;
}

inline void reduce_one(const ConeRange& c, const double* d, double eps, double* grad) {
  const double g1 = grad[c.slot1()];
  const double* v = d + c.vec_begin();
  double* gv = grad + c.vec_begin();
  grad[c.slot1()] = 0.0;
  if (c.kind == ConeKind::cost_epi) {
    // slot1 = ‖v‖²/2
    for (std::size_t k = 0; k < c.vec_size(); ++k) gv[k] += g1 * v[k];
    grad[c.slot2()] = 0.0;
    return;
  }
  const double den = 2.0 * d[c.slot2()] + eps;
  if (den == 0.0) return;
  const double q = sq_norm(v, c.vec_size());
  for (std::size_t k = 0; k < c.vec_size(); ++k) gv[k] += g1 * 2.0 * v[k] / den;
  grad[c.slot2()] -= g1 * 2.0 * q / (den * den);
}

inline double slack_one(const ConeRange& c, const double* d) {
  return 2.0 * d[c.slot1()] * d[c.slot2()] - sq_norm(d + c.vec_begin(), c.vec_size());
}

template <class BlockFn>
double blocked_sum(std::size_t n, BlockFn&& block) {
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nblocks, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static) if (n >= kMinParallelElems)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    partial[static_cast<std::size_t>(b)] = block(lo, hi);
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
    y[i] = s;
  }
}

void spmv_acc(const CsrMatrix& a, std::span<const double> x, double alpha, std::span<double> y) {
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
    y[i] += alpha * s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double box_min_value(std::span<const double> gamma, std::span<const double> sigma,
                     std::span<const double> omega, double nu) {
  double s = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) s += box_term(gamma[i], sigma[i], omega[i], nu);
  return s;
}

void box_minimizer(std::span<const double> gamma, std::span<const double> sigma,
                   std::span<const double> omega, std::span<double> x, double nu) {
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    x[i] = box_point(gamma[i], sigma[i], omega[i], nu);
  }
}

std::size_t replace_slot1(std::span<const ConeRange> cones, std::span<double> d, double eps) {
  std::size_t singular = 0;
  for (const auto& c : cones) {
    if (!replace_one(c, d.data(), eps)) ++singular;
  }
  return singular;
}

void cone_slacks(std::span<const ConeRange> cones, std::span<const double> d,
                 std::span<double> slack) {
  for (std::size_t k = 0; k < cones.size(); ++k) slack[k] = slack_one(cones[k], d.data());
}

void reduce_cone_gradient(std::span<const ConeRange> cones, std::span<const double> d,
                          double eps, std::span<double> grad_full) {
  for (const auto& c : cones) reduce_one(c, d.data(), eps, grad_full.data());
}

}  // namespace serial

namespace parallel {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static) if (a.rows() >= kMinParallelRows)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
    y[i] = s;
  }
}

void spmv_acc(const CsrMatrix& a, std::span<const double> x, double alpha, std::span<double> y) {
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static) if (a.rows() >= kMinParallelRows)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
    y[i] += alpha * s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

double box_min_value(std::span<const double> gamma, std::span<const double> sigma,
                     std::span<const double> omega, double nu) {
  return blocked_sum(gamma.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += box_term(gamma[i], sigma[i], omega[i], nu);
    return s;
  });
}

void box_minimizer(std::span<const double> gamma, std::span<const double> sigma,
                   std::span<const double> omega, std::span<double> x, double nu) {
  const auto n = static_cast<std::ptrdiff_t>(gamma.size());
#pragma omp parallel for schedule(static) if (gamma.size() >= kMinParallelElems)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    x[i] = box_point(gamma[i], sigma[i], omega[i], nu);
  }
}

std::size_t replace_slot1(std::span<const ConeRange> cones, std::span<double> d, double eps) {
  std::size_t singular = 0;
  const auto n = static_cast<std::ptrdiff_t>(cones.size());
#pragma omp parallel for schedule(static) reduction(+ : singular) \
    if (cones.size() >= kMinParallelCones)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    if (!replace_one(cones[static_cast<std::size_t>(k)], d.data(), eps)) ++singular;
  }
  return singular;
}

void cone_slacks(std::span<const ConeRange> cones, std::span<const double> d,
                 std::span<double> slack) {
  const auto n = static_cast<std::ptrdiff_t>(cones.size());
#pragma omp parallel for schedule(static) if (cones.size() >= kMinParallelCones)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    slack[kk] = slack_one(cones[kk], d.data());
  }
}

void reduce_cone_gradient(std::span<const ConeRange> cones, std::span<const double> d,
                          double eps, std::span<double> grad_full) {
  const auto n = static_cast<std::ptrdiff_t>(cones.size());
#pragma omp parallel for schedule(static) if (cones.size() >= kMinParallelCones)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    reduce_one(cones[static_cast<std::size_t>(k)], d.data(), eps, grad_full.data());
  }
}

}  // namespace parallel

}  // namespace kernels
}  // namespace tightdual

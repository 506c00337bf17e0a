#pragma once

// Data-parallel building blocks of the dual evaluators. Every kernel exists
// twice with the same signature: `serial` is the plain reference kept for
// testing, `parallel` is the OpenMP version used by the library. Reductions
// in `parallel` sum fixed-size blocks in index order, so results do not
// depend on the thread count.

#include <cstddef>
#include <span>

#include "tightdual/cones.hpp"
#include "tightdual/sparse.hpp"

namespace tightdual::kernels {

/// Block length of the deterministic reductions.
inline constexpr std::size_t kReduceBlock = 256;

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
void spmv_acc(const CsrMatrix& a, std::span<const double> x, double alpha, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
/// Σ_i (−σ_i |γ_i| + γ_i ω_i): the box-constrained minimum of γᵀx. With
/// nu > 0, |γ_i| is replaced by the pseudo-Huber sqrt(γ_i² + ν_i²) − ν_i with
/// ν_i = nu/σ_i, so the total smoothing error is at most n·nu.
double box_min_value(std::span<const double> gamma, std::span<const double> sigma,
                     std::span<const double> omega, double nu = 0.0);
/// The matching minimizer: ω_i − σ_i·sign(γ_i) with sign(0) = 0, or its
/// smoothed counterpart ω_i − σ_i·γ_i/sqrt(γ_i² + ν_i²).
void box_minimizer(std::span<const double> gamma, std::span<const double> sigma,
                   std::span<const double> omega, std::span<double> x, double nu = 0.0);
/// Writes slot1 of every cone from its slot2 and vector; returns the number of
/// singular cones (zero denominator with nonzero vector), which are set to +inf.
std::size_t replace_slot1(std::span<const ConeRange> cones, std::span<double> d, double eps);
void cone_slacks(std::span<const ConeRange> cones, std::span<const double> d,
                 std::span<double> slack);
/// Chain rule through the slot1 replacement. `grad_full` holds ∂f/∂d for the
/// full cone vector; on return the slot2 and vector entries hold the
/// derivative with respect to the reduced variables and slot1 entries are 0.
/// The cost-epigraph slot2 is not a variable and gets 0.
void reduce_cone_gradient(std::span<const ConeRange> cones, std::span<const double> d,
                          double eps, std::span<double> grad_full);

}  // namespace serial

namespace parallel {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
void spmv_acc(const CsrMatrix& a, std::span<const double> x, double alpha, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
double box_min_value(std::span<const double> gamma, std::span<const double> sigma,
                     std::span<const double> omega, double nu = 0.0);
void box_minimizer(std::span<const double> gamma, std::span<const double> sigma,
                   std::span<const double> omega, std::span<double> x, double nu = 0.0);
std::size_t replace_slot1(std::span<const ConeRange> cones, std::span<double> d, double eps);
void cone_slacks(std::span<const ConeRange> cones, std::span<const double> d,
                 std::span<double> slack);
void reduce_cone_gradient(std::span<const ConeRange> cones, std::span<const double> d,
                          double eps, std::span<double> grad_full);

}  // namespace parallel

}  // namespace tightdual::kernels

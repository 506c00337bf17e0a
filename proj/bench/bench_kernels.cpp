// Serial reference vs OpenMP kernels. Synthetic problems are sized by the
// benchmark argument; the last group evaluates the full dual on case14.
#include <benchmark/benchmark.h>

#include <random>

#include "tightdual/canon.hpp"
#include "tightdual/dual.hpp"
#include "tightdual/kernels.hpp"
#include "tightdual/network.hpp"
#include "tightdual/primal.hpp"

using namespace tightdual;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double lo = -1, double hi = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Banded matrix with ~8 entries per row, like the balance and flow rows.
CsrMatrix banded(std::size_t n) {
  std::vector<Triplet> t;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < 8; ++k) t.push_back({i, (i + 37 * k) % n, u(rng)});
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

std::vector<ConeRange> jabr_cones(std::size_t count) {
  std::vector<ConeRange> c(count);
  for (std::size_t k = 0; k < count; ++k) c[k] = {ConeKind::jabr, 4 * k, 4};
  return c;
}

template <class Exec>
void BM_spmv(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = banded(n);
  const auto x = random_vec(n, 2);
  std::vector<double> y(n);
  for (auto _ : state) {
    Exec::spmv(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(a.nnz()));
}

template <class Exec>
void BM_box_min_value(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_vec(n, 3), s = random_vec(n, 4, 0.1, 2), w = random_vec(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Exec::box_min_value(g, s, w));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

template <class Exec>
void BM_replace_slot1(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0)) / 4;
  const auto cones = jabr_cones(count);
  auto d = random_vec(4 * count, 6, 0.1, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Exec::replace_slot1(cones, d, 1e-6));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(count));
}

struct Serial {
  static void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) { kernels::serial::spmv(a, x, y); }
  static double box_min_value(auto g, auto s, auto w) { return kernels::serial::box_min_value(g, s, w); }
  static std::size_t replace_slot1(auto c, std::span<double> d, double e) { return kernels::serial::replace_slot1(c, d, e); }
};

struct Parallel {
  static void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) { kernels::parallel::spmv(a, x, y); }
  static double box_min_value(auto g, auto s, auto w) { return kernels::parallel::box_min_value(g, s, w); }
  static std::size_t replace_slot1(auto c, std::span<double> d, double e) { return kernels::parallel::replace_slot1(c, d, e); }
};

void BM_dualnorm_case14(benchmark::State& state) {
  static const CanonicalProblem p =
      canonicalize(build_primal(load_matpower(TIGHTDUAL_DATA_DIR "/pglib_opf_case14_ieee.m")));
  DualPoint d = zero_point(p, false);
  for (const auto& c : p.cones) d.cone[c.slot2()] = 1.0;
  const Exec exec = state.range(0) ? Exec::parallel : Exec::serial;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dualnorm_objective(d.lambda, d.cone, 1e-6, p, 0.0, exec).value);
  }
  state.SetLabel(exec == Exec::parallel ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_spmv<Serial>)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_spmv<Parallel>)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_box_min_value<Serial>)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_box_min_value<Parallel>)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_replace_slot1<Serial>)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_replace_slot1<Parallel>)->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_dualnorm_case14)->Arg(0)->Arg(1);

BENCHMARK_MAIN();

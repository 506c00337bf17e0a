#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "tightdual/canon.hpp"
#include "tightdual/kernels.hpp"

using namespace tightdual;
namespace ks = kernels::serial;

namespace {

const CanonicalProblem& case3() {
  static const CanonicalProblem p = testutil::canon_of(testutil::data_path("pglib_opf_case3_lmbd.m"));
  return p;
}

const CanonicalProblem& case14() {
  static const CanonicalProblem p = testutil::canon_of(testutil::data_path("pglib_opf_case14_ieee.m"));
  return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Normalize, Examples) {
  PrimalModel pm;
  pm.lower = {0.81, -2.5};
  pm.upper = {1.21, 2.5};
  const auto [omega, sigma] = normalize(pm);
  EXPECT_NEAR(omega[0], 1.01, 1e-15);
  EXPECT_NEAR(sigma[0], 0.20, 1e-15);
  EXPECT_EQ(omega[1], 0.0);
  EXPECT_EQ(sigma[1], 2.5);
}

TEST(Normalize, ZeroWidthRejected) {
  PrimalModel pm;
  pm.lower = {1.0};
  pm.upper = {1.0};
  EXPECT_THROW(normalize(pm), DegenerateBoxError);
}

TEST(Normalize, EndpointsMapToUnitBall) {
  const auto& p = case3();
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    EXPECT_NEAR((p.upper[i] - p.omega[i]) / p.sigma[i], 1.0, 1e-12);
    EXPECT_NEAR((p.lower[i] - p.omega[i]) / p.sigma[i], -1.0, 1e-12);
  }
}

TEST(Canonicalize, Shapes) {
  const auto& p = case14();
  EXPECT_EQ(p.A.rows(), 108u);
  EXPECT_EQ(p.A.cols(), p.num_vars());
  EXPECT_EQ(p.F.rows(), p.num_cone_rows());
  EXPECT_EQ(p.cones.size(), 61u);
  // 20 branches × 3 cones × 4 rows + cost cone with empty vector.
  EXPECT_EQ(p.num_cone_rows(), 20u * 12 + 2);
  EXPECT_EQ(p.num_bound_rows(), 2 * p.num_vars());
}

TEST(Canonicalize, ConeRowConstants) {
  const auto& p = case3();
  const Network n = load_matpower(testutil::data_path("pglib_opf_case3_lmbd.m"));
  const auto& l = p.layout;
  for (std::size_t k = 0; k < p.cones.size(); ++k) {
    const auto& c = p.cones[k];
    switch (c.kind) {
      case ConeKind::jabr:
        for (std::size_t r = c.row; r < c.row + c.size; ++r) EXPECT_EQ(p.g[r], 0.0);
        EXPECT_EQ(p.F.at(c.slot1(), l.w[*n.bus_index(n.branches[k].from)]), 0.5);
        break;
      case ConeKind::send_flow:
      case ConeKind::recv_flow: {
        const double rate = n.branches[k % n.branches.size()].rate_a;
        EXPECT_EQ(p.g[c.slot1()], 0.5);
        EXPECT_DOUBLE_EQ(p.g[c.slot2()], rate * rate);
        EXPECT_EQ(p.g[c.vec_begin()], 0.0);
        EXPECT_EQ(p.g[c.vec_begin() + 1], 0.0);
        break;
      }
      case ConeKind::cost_epi:
        EXPECT_EQ(p.g[c.slot1()], 0.5);
        for (std::size_t r = c.slot2(); r < c.row + c.size; ++r) EXPECT_EQ(p.g[r], 0.0);
        break;
    }
  }
}

TEST(Canonicalize, RecvFlowSelectsFlows) {
  const auto& p = case3();
  const auto& l = p.layout;
  const std::size_t nl = 3;
  for (std::size_t b = 0; b < nl; ++b) {
    const auto& c = p.cones[2 * nl + b];
    ASSERT_EQ(c.kind, ConeKind::recv_flow);
    EXPECT_EQ(p.F.at(c.vec_begin(), l.pr[b]), 1.0);
    EXPECT_EQ(p.F.at(c.vec_begin() + 1, l.qr[b]), 1.0);
    EXPECT_EQ(p.F.triplets().size(), p.F.nnz());
  }
}

// d̃ᵀ(Fx + g) against the per-cone expansion taken from the primal model.
TEST(Canonicalize, InnerProductMatchesPerConeExpansion) {
  const PrimalModel pm = build_primal(load_matpower(testutil::data_path("pglib_opf_case3_lmbd.m")));
  const auto p = canonicalize(pm);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = testutil::uniform_vec(rng, p.num_vars(), -2, 2);
    const auto d = testutil::uniform_vec(rng, p.num_cone_rows(), -1, 1);
    std::vector<double> fx(p.num_cone_rows());
    ks::spmv(p.F, x, fx);
    for (std::size_t i = 0; i < fx.size(); ++i) fx[i] += p.g[i];
    const double blocks = ks::dot(d, fx);
    double direct = 0.0;
    std::size_t row = 0;
    for (const auto& cone : pm.cones) {
      direct += d[row++] * cone.slot1.value(x);
      direct += d[row++] * cone.slot2.value(x);
      for (const auto& s : cone.vec) direct += d[row++] * s.value(x);
    }
    EXPECT_NEAR(blocks, direct, 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST(Canonicalize, LagrangianIdentity) {
  for (const auto* pp : {&case3(), &case14()}) {
    const auto& p = *pp;
    const auto [C, d] = bound_rows(p);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = testutil::uniform_vec(rng, p.num_vars(), -2, 2);
      const auto lam = testutil::uniform_vec(rng, p.num_eq(), -5, 5);
      const auto mu = testutil::uniform_vec(rng, p.num_bound_rows(), 0, 3);
      const auto dt = testutil::uniform_vec(rng, p.num_cone_rows(), -2, 2);
      std::vector<double> ax(p.num_eq()), cx(p.num_bound_rows()), fx(p.num_cone_rows());
      ks::spmv(p.A, x, ax);
      ks::spmv(C, x, cx);
      ks::spmv(p.F, x, fx);
      double lhs = ks::dot(p.m, x);
      for (std::size_t i = 0; i < ax.size(); ++i) lhs += lam[i] * (ax[i] + p.b[i]);
      for (std::size_t i = 0; i < cx.size(); ++i) lhs += mu[i] * (cx[i] + d[i]);
      for (std::size_t i = 0; i < fx.size(); ++i) lhs -= dt[i] * (fx[i] + p.g[i]);
      std::vector<double> gamma = p.m;
      ks::spmv_acc(p.At, lam, 1.0, gamma);
      ks::spmv_acc(C.transpose(), mu, 1.0, gamma);
      ks::spmv_acc(p.Ft, dt, -1.0, gamma);
      const double rhs = ks::dot(gamma, x) + ks::dot(lam, p.b) + ks::dot(mu, d) - ks::dot(dt, p.g);
      EXPECT_LE(rel(lhs, rhs), 1e-10);
    }
  }
}

TEST(Canonicalize, BoxEquivalence) {
  const auto& p = case14();
  const auto [C, d] = bound_rows(p);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int inside_count = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(p.num_vars());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = p.lower[i] + u(rng) * (p.upper[i] - p.lower[i]);
    if (trial % 2 == 1) {
      std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
      const std::size_t i = pick(rng);
      x[i] = (u(rng) < 0.5) ? p.lower[i] - 1e-3 - u(rng) : p.upper[i] + 1e-3 + u(rng);
    }
    std::vector<double> cx(p.num_bound_rows());
    ks::spmv(C, x, cx);
    bool rows_ok = true;
    for (std::size_t i = 0; i < cx.size(); ++i) rows_ok = rows_ok && cx[i] + d[i] <= 0.0;
    bool box_ok = true;
    for (std::size_t i = 0; i < x.size(); ++i) box_ok = box_ok && p.lower[i] <= x[i] && x[i] <= p.upper[i];
    EXPECT_EQ(rows_ok, box_ok);
    inside_count += box_ok;
  }
  EXPECT_EQ(inside_count, 500);
}

TEST(Canonicalize, BoundRowStructure) {
  const auto& p = case3();
  const auto [C, d] = bound_rows(p);
  const std::size_t n = p.num_vars();
  EXPECT_EQ(C.nnz(), 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(C.at(i, i), 1.0);
    EXPECT_EQ(C.at(n + i, i), -1.0);
    EXPECT_EQ(d[i], -p.upper[i]);
    EXPECT_EQ(d[n + i], p.lower[i]);
  }
}

// With every scalar slot at 1 and vectors at 0, −d̃ᵀg collects only the
// flow-cone constants and the cost cone's ½.
TEST(Canonicalize, ConstantTermAudit) {
  for (const char* f : {"pglib_opf_case3_lmbd.m", "pglib_opf_case14_ieee.m"}) {
    const Network n = load_matpower(testutil::data_path(f));
    const auto p = canonicalize(build_primal(n));
    std::vector<double> d(p.num_cone_rows(), 0.0);
    for (const auto& c : p.cones) d[c.slot1()] = d[c.slot2()] = 1.0;
    double expected = -0.5;
    for (const auto& br : n.branches) expected -= 2.0 * (0.5 + br.rate_a * br.rate_a);
    const double got = -ks::dot(d, p.g);
    EXPECT_LE(rel(got, expected), 1e-10) << f;
  }
}

TEST(Canonicalize, DebugDump) {
  const auto j = to_json(case3());
  for (const char* k : {"m", "A", "b", "F", "g", "lower", "upper", "omega", "sigma", "cones", "layout"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j["cones"].size(), 10u);
  EXPECT_EQ(from_triplet_json(j["A"]).nnz(), case3().A.nnz());
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "common.hpp"
#include "tightdual/certify.hpp"
#include "tightdual/dual.hpp"
#include "tightdual/fosolve.hpp"

using namespace tightdual;

namespace {

const CanonicalProblem& case3() {
  static const CanonicalProblem p = testutil::canon_of(testutil::data_path("pglib_opf_case3_lmbd.m"));
  return p;
}

const CanonicalProblem& case14() {
  static const CanonicalProblem p = testutil::canon_of(testutil::data_path("pglib_opf_case14_ieee.m"));
  return p;
}

const CanonicalProblem& two_bus() {
  static const CanonicalProblem p = testutil::canon_of(testutil::fixture_path("two_bus.m"));
  return p;
}

const std::vector<ConeRange> kTwoCones{{ConeKind::jabr, 0, 4}, {ConeKind::jabr, 4, 4}};

}  // namespace

TEST(FaceProject, Examples) {
  DualPoint d;
  d.cone = {0, 2, 3, 4, 7, 1e-9, 5, 6};
  std::vector<ProjectionCase> cases;
  const auto out = face_project(d, 1e-8, kTwoCones, &cases);
  EXPECT_TRUE(out.full);
  EXPECT_DOUBLE_EQ(out.cone[0], 25.0 / 4.0);
  EXPECT_EQ(out.cone[1], 2.0);
  for (std::size_t j = 4; j < 8; ++j) EXPECT_EQ(out.cone[j], 0.0);
  EXPECT_EQ(cases, (std::vector<ProjectionCase>{ProjectionCase::tightened, ProjectionCase::zeroed}));
  EXPECT_EQ(to_string(ProjectionCase::zeroed), "zeroed");
}

TEST(FaceProject, Idempotent) {
  std::mt19937_64 rng(1);
  const auto& p = case14();
  for (int t = 0; t < 20; ++t) {
    DualPoint d = zero_point(p, false);
    d.cone = testutil::uniform_vec(rng, p.num_cone_rows(), -2, 2);
    for (const auto& c : p.cones) d.cone[c.slot2()] = std::abs(d.cone[c.slot2()]) * (t % 2 ? 1e-9 : 1.0);
    const auto once = face_project(d, kDefaultDelta, p.cones);
    const auto twice = face_project(once, kDefaultDelta, p.cones);
    EXPECT_EQ(once.cone, twice.cone);
  }
}

TEST(FaceProject, SlacksTight) {
  std::mt19937_64 rng(2);
  const auto& p = case14();
  DualPoint d = zero_point(p, false);
  d.cone = testutil::uniform_vec(rng, p.num_cone_rows(), -2, 2);
  for (const auto& c : p.cones) d.cone[c.slot2()] = std::abs(d.cone[c.slot2()]);
  const auto out = face_project(d, kDefaultDelta, p.cones);
  const auto s = cone_slacks(out.cone, p.cones);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& c = p.cones[k];
    const double scale = 2.0 * std::abs(out.cone[c.slot1()] * out.cone[c.slot2()]);
    EXPECT_LE(std::abs(s[k]), 1e-12 * std::max(1.0, scale));
  }
}

TEST(FaceProject, Errors) {
  DualPoint d;
  d.cone = {0, 2, 3, 4};
  EXPECT_THROW(face_project(d, 0.0, std::vector<ConeRange>{{ConeKind::jabr, 0, 4}}), std::invalid_argument);
}

TEST(FaceProject, NegativeScalarZeroed) {
  DualPoint d;
  d.cone = {5, -1, 3, 4};
  const auto out = face_project(d, 1e-8, std::vector<ConeRange>{{ConeKind::jabr, 0, 4}});
  EXPECT_EQ(out.cone, std::vector<double>(4, 0.0));
}

// At the origin only the box term survives: −Σσ|m| + mᵀω, plus the constant.
TEST(Certify, ZeroPoint) {
  const auto& p = case3();
  const auto b = certify(zero_point(p, false), p);
  double expected = p.constant_cost;
  for (std::size_t i = 0; i < p.num_vars(); ++i) expected += -p.sigma[i] * std::abs(p.m[i]) + p.m[i] * p.omega[i];
  EXPECT_NEAR(b.f_clb, expected, 1e-9 * std::abs(expected));
  EXPECT_EQ(b.f_clb - b.f_clb_without_constant, p.constant_cost);
}

TEST(Certify, InfeasibleInputRejected) {
  const auto& p = case3();
  DualPoint d = zero_point(p, true);
  d.cone[p.cones[0].slot1()] = 1.0;
  d.cone[p.cones[0].slot2()] = 1.0;
  d.cone[p.cones[0].vec_begin()] = 3.0;
  EXPECT_THROW(certified_lower_bound(d.lambda, d, p), ConeInfeasibleError);
  d.cone[p.cones[0].vec_begin()] = 0.0;
  d.cone[p.cones[0].slot2()] = -1.0;
  EXPECT_THROW(certified_lower_bound(d.lambda, d, p), ConeInfeasibleError);
}

TEST(Certify, Case3) {
  const auto& p = case3();
  const auto sol = solve_atd(p, SolveConfig{});
  const auto b = certify(sol.best_point, p, kDefaultDelta, 5736.17);
  // The reference is rounded to two decimals.
  EXPECT_LE(b.f_clb, 5736.17 + 0.005);
  EXPECT_LE(std::abs(b.f_clb - 5736.17) / 5736.17, 1e-3);
  ASSERT_TRUE(b.gap.has_value());
  EXPECT_DOUBLE_EQ(*b.gap, (b.f_clb - 5736.17) / 5736.17);
  EXPECT_LE(b.f_clb, sol.best_objective + p.constant_cost + 1e-9);
}

TEST(Certify, Case14) {
  const auto& p = case14();
  const auto sol = solve_atd(p, SolveConfig{});
  const auto b = certify(sol.best_point, p);
  EXPECT_LE(b.f_clb, 2175.70 + 0.005);
  EXPECT_LE(std::abs(b.f_clb - 2175.70) / 2175.70, 1e-2);
}

// Every certified value is below the true optimum of the two-bus relaxation.
TEST(Certify, SoundOnRandomDualPoints) {
  const Network net = load_matpower(testutil::fixture_path("two_bus.m"));
  const auto oracle = testutil::two_bus_grid_oracle(net);
  const auto& p = two_bus();
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    DualPoint d = zero_point(p, false);
    d.lambda = testutil::uniform_vec(rng, p.num_eq(), -100, 100);
    d.cone = testutil::uniform_vec(rng, p.num_cone_rows(), -10, 10);
    for (const auto& c : p.cones) {
      d.cone[c.slot2()] = c.kind == ConeKind::cost_epi ? 1.0 : std::abs(d.cone[c.slot2()]);
    }
    if (t % 5 == 0) d.cone[p.cones[0].slot2()] = 1e-10;
    const auto b = certify(d, p);
    EXPECT_LE(b.f_clb, oracle.cost);
  }
}

TEST(Sweep, RowsAndCsv) {
  SolveConfig cfg;
  cfg.max_iter = 300;
  const std::vector<double> eps{1e-6, 1e-2};
  const auto rows = eps_sweep(two_bus(), eps, cfg);
  const auto oracle = testutil::two_bus_grid_oracle(load_matpower(testutil::fixture_path("two_bus.m")));
  ASSERT_EQ(rows.size(), 2u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].eps, eps[i]);
    EXPECT_TRUE(std::isfinite(rows[i].f_clb));
    // The ε-objective is not itself a bound, so only the oracle caps f_clb.
    EXPECT_LE(rows[i].f_clb, oracle.cost);
  }
  std::ostringstream out;
  write_sweep_csv(out, rows);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "eps,objective,f_clb,status");
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 2);
}

TEST(Sweep, SingleValue) {
  SolveConfig cfg;
  cfg.max_iter = 100;
  const std::vector<double> eps{1e-4};
  const auto rows = eps_sweep(two_bus(), eps, cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "iteration-limit");
}

TEST(Sweep, InvalidLists) {
  const SolveConfig cfg;
  EXPECT_THROW(eps_sweep(two_bus(), std::vector<double>{}, cfg), std::invalid_argument);
  EXPECT_THROW(eps_sweep(two_bus(), std::vector<double>{1e-2, 1e-4}, cfg), std::invalid_argument);
  EXPECT_THROW(eps_sweep(two_bus(), std::vector<double>{0.0, 1e-4}, cfg), std::invalid_argument);
  EXPECT_THROW(eps_sweep(two_bus(), std::vector<double>{-1.0}, cfg), std::invalid_argument);
}

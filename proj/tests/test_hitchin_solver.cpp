#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace bh;
using namespace bh::test;

namespace {

std::shared_ptr<const TransverseSurface> spectral(int n = 8) { return build_surface(torus_config(n)); }
std::shared_ptr<const TransverseSurface> grid(int n = 4) { return build_surface(l_shape_genus2_config(n)); }

std::vector<std::shared_ptr<const TransverseSurface>> surfaces() {
  return {spectral(), grid(), build_surface(square_torus_config(4))};
}

TEST(Residual, ZeroAndHarmonicPairs) {
  for (auto s : surfaces()) {
    EXPECT_LE(residual(zero_pair(s, 2)).max_norm(), 0.0);
    std::mt19937_64 rng(1);
    const HitchinPair h = random_harmonic_abelian(s, rng, 1.0);
    EXPECT_LE(residual(h).max_norm(), 1e-12);
    const HitchinPair sum = direct_sum(h, random_harmonic_abelian(s, rng, 1.0));
    EXPECT_LE(residual(sum).max_norm(), 1e-12);
  }
}

TEST(Residual, RandomPairIsNonzero) {
  for (auto s : surfaces()) {
    std::mt19937_64 rng(2);
    const HitchinPair p = seed_pair(s, 2, 2, SeedKind::RandomSmooth);
    const auto r = residual(p);
    EXPECT_GT(r.max_norm(), 1e-3);
    EXPECT_NEAR(r.energy(), energy(p), 1e-14 * r.energy());
  }
}

TEST(Energy, GradientMatchesFiniteDifferences) {
  for (auto s : surfaces()) {
    std::mt19937_64 rng(3);
    const HitchinPair p = seed_pair(s, 2, 3, SeedKind::RandomSmooth);
    const RVec x = pair_vector(p), g = energy_gradient(p);
    for (int k = 0; k < 3; ++k) {
      RVec v = random_vector(x.size(), rng);
      v /= v.norm();
      const double h = 1e-4;
      const double fd = (energy(pair_from_vector(s, 2, x + h * v)) - energy(pair_from_vector(s, 2, x - h * v))) / (2 * h);
      EXPECT_NEAR(fd, g.dot(v), 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Energy, GaugeInvariant) {
  for (auto s : surfaces()) {
    std::mt19937_64 rng(4);
    const HitchinPair p = seed_pair(s, 2, 4, SeedKind::RandomSmooth);
    MatCochain g{Form::P0, 2, false, CMat(s->cell_count(Form::P0), 4)};
    const CMat u = exp_cochain(random_constant(*s, Form::P0, 2, rng, 1.0)).cell(0);
    for (Eigen::Index k = 0; k < g.slots(); ++k) g.set_cell(k, u);
    EXPECT_NEAR(energy(gauge_transform(g, p)), energy(p), 1e-10);
  }
}

TEST(Solve, AlreadySolvedNeedsNoIterations) {
  for (auto s : surfaces()) {
    std::mt19937_64 rng(5);
    const HitchinPair h = random_harmonic_abelian(s, rng, 1.0);
    auto [p, rep] = solve(h, SolveConfig{});
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 0);
    EXPECT_LE(max_abs_diff(p.A.data, h.A.data), 0.0);
  }
}

TEST(Solve, ConvergesFromRandomSeeds) {
  for (auto s : surfaces()) {
    for (int rank : {1, 2}) {
      SolveConfig cfg;
      cfg.rank = rank;
      const SeedKind kind = rank == 1 || s->genus() == 1 ? SeedKind::RandomConstant : SeedKind::PerturbedDirectSum;
      auto [p, rep] = solve(seed_pair(s, rank, 6, kind), cfg);
      EXPECT_TRUE(rep.converged) << rep.message;
      EXPECT_LE(rep.residual[0], cfg.residual_tolerance);
      EXPECT_LE(std::max(rep.residual[1], rep.residual[2]), cfg.residual_tolerance);
      EXPECT_LE(flatness_check(p), 2 * cfg.residual_tolerance);
      for (size_t k = 1; k < rep.energy_history.size(); ++k)
        EXPECT_LE(rep.energy_history[k], rep.energy_history[k - 1]);
    }
  }
}

TEST(Solve, RejectsBadTolerance) {
  SolveConfig cfg;
  cfg.residual_tolerance = 0;
  try {
    solve(zero_pair(spectral(), 1), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}

TEST(Solve, BudgetExhaustionIsReported) {
  SolveConfig cfg;
  cfg.max_iterations = 1;
  cfg.residual_tolerance = 1e-14;
  auto [p, rep] = solve(seed_pair(grid(), 2, 7, SeedKind::RandomSmooth), cfg);
  EXPECT_FALSE(rep.converged);
  EXPECT_FALSE(rep.message.empty());
}

TEST(Irreducibility, RankOneAndDirectSums) {
  for (auto s : surfaces()) {
    std::mt19937_64 rng(8);
    const HitchinPair h = random_harmonic_abelian(s, rng, 1.0);
    const auto one = irreducibility(h);
    EXPECT_EQ(one.verdict, Verdict::Irreducible);
    EXPECT_EQ(one.kernel_dim, 1);
    const auto sum = irreducibility(direct_sum(h, random_harmonic_abelian(s, rng, 1.0)));
    EXPECT_EQ(sum.verdict, Verdict::Reducible);
    EXPECT_GE(sum.kernel_dim, 2);
  }
}

TEST(Irreducibility, GenusTwoRankTwoFound) {
  auto s = grid(4);
  SolveConfig cfg;
  cfg.rank = 2;
  const auto found = find_irreducible(s, cfg, 5);
  ASSERT_TRUE(found.found);
  EXPECT_EQ(found.report.ker_d1_dim, 1);
  EXPECT_LE(flatness_check(found.pair), 2 * cfg.residual_tolerance);
}

TEST(Coulomb, ReachesSliceAndKeepsResidual) {
  for (auto s : {spectral(), grid()}) {
    std::mt19937_64 rng(9);
    const HitchinPair ref = direct_sum(random_harmonic_abelian(s, rng, 1.0), random_harmonic_abelian(s, rng, 1.0));
    const auto g = exp_cochain(random_constant(*s, Form::P0, 2, rng, 0.3));
    HitchinPair moved = gauge_transform(g, ref);
    moved.A = moved.A + random_smooth(*s, Form::P1, 2, rng, 0.01, 1);
    const HitchinPair fixed = coulomb_project(moved, ref);
    const RVec slice = RMat(assemble_D1(ref)).transpose() * (pair_vector(fixed) - pair_vector(ref));
    EXPECT_LE(slice.norm(), 1e-9 * (pair_vector(fixed) - pair_vector(ref)).norm() + 1e-14);
    // Non-constant gauges act exactly only in the continuum.
    EXPECT_NEAR(energy(fixed), energy(moved), 1e-3 * energy(moved)) << (s->spectral() ? "spectral" : "grid");
  }
}

TEST(Coulomb, IdempotentOnReference) {
  auto s = grid();
  std::mt19937_64 rng(10);
  const HitchinPair ref = random_harmonic_abelian(s, rng, 1.0);
  const HitchinPair out = coulomb_project(ref, ref);
  EXPECT_LE(max_abs_diff(out.A.data, ref.A.data), 0.0);
}

}  // namespace

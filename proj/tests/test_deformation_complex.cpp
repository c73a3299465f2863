#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace bh;
using namespace bh::test;

namespace {

std::shared_ptr<const TransverseSurface> spectral(int n = 8) { return build_surface(torus_config(n)); }
std::shared_ptr<const TransverseSurface> grid(int n = 4) { return build_surface(l_shape_genus2_config(n)); }

HitchinPair abelian(std::shared_ptr<const TransverseSurface> s, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  return random_harmonic_abelian(s, rng, 1.0);
}

// Solved irreducible rank-2 pair on the genus-2 grid; shared across tests.
const HitchinPair& genus2_rank2() {
  static const HitchinPair p = [] {
    SolveConfig cfg;
    cfg.rank = 2;
    auto found = find_irreducible(grid(4), cfg, 5);
    if (!found.found) throw std::runtime_error("no irreducible rank-2 pair");
    return found.pair;
  }();
  return p;
}

const DeformationComplex& genus2_rank2_complex() {
  static const DeformationComplex c = assemble(genus2_rank2());
  return c;
}

std::pair<double, double> adjoint_defects(const HitchinPair& p, std::uint64_t seed) {
  const auto& s = p.geom();
  const int r = p.rank();
  const RMat D1 = RMat(assemble_D1(p)), D2 = RMat(assemble_D2(p));
  std::mt19937_64 rng(seed);
  double e1 = 0, e2 = 0;
  for (int k = 0; k < 3; ++k) {
    const RVec u = random_vector(D1.rows(), rng), w = random_vector(D2.rows(), rng);
    const RVec t1 = D1.transpose() * u, t2 = D2.transpose() * w;
    e1 = std::max(e1, (to_vector(s, D1_adjoint(p, tangent_from_vector(s, r, u))) - t1).norm() / t1.norm());
    e2 = std::max(e2, (to_vector(s, D2_adjoint(p, triple_from_vector(s, r, w))) - t2).norm() / t2.norm());
  }
  return {e1, e2};
}

TEST(Complex, D2D1VanishesAtSolvedPairs) {
  for (auto s : {spectral(), grid(), build_surface(square_torus_config(4))}) {
    const auto c = assemble(abelian(s));
    EXPECT_LE(RMat(c.D2 * c.D1).cwiseAbs().maxCoeff(), 1e-12);
  }
  auto s = spectral();
  SolveConfig cfg;
  cfg.rank = 2;
  auto [p, rep] = solve(seed_pair(s, 2, 3, SeedKind::RandomConstant), cfg);
  ASSERT_TRUE(rep.converged);
  const auto c = assemble(p, {{false, false, false}, false});
  EXPECT_LE(RMat(c.D2 * c.D1).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Adjoints, SpectralMatchTransposes) {
  for (int n : {8, 16}) {
    auto s = spectral(n);
    std::mt19937_64 rng(2);
    const HitchinPair p = make_pair(s, random_smooth(*s, Form::P1, 2, rng, 0.5), random_smooth(*s, Form::P1, 2, rng, 0.5));
    const auto [e1, e2] = adjoint_defects(p, 5);
    EXPECT_LE(e1, 1e-12);
    EXPECT_LE(e2, 1e-12);
  }
}

TEST(Adjoints, GridFirstAdjointExactSecondConverges) {
  std::vector<double> e2s;
  for (int n : {4, 8}) {
    auto s = grid(n);
    std::mt19937_64 rng(2);
    const HitchinPair p = make_pair(s, random_smooth(*s, Form::P1, 2, rng, 0.5), random_smooth(*s, Form::P1, 2, rng, 0.5));
    const auto [e1, e2] = adjoint_defects(p, 5);
    EXPECT_LE(e1, 1e-12);
    e2s.push_back(e2);
  }
  EXPECT_GE(std::log2(e2s[0] / e2s[1]), 1.0);
}

TEST(Complex, RowCountsAndOverflow) {
  auto s = spectral();
  const auto d = complex_dims(*s, 2);
  EXPECT_EQ(d.c1, 2 * d.p1);
  EXPECT_EQ(d.c2, 2 * d.p2 + d.d2);
  try {
    assemble(zero_pair(spectral(64), 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AssemblyOverflow);
  }
}

TEST(Cohomology, AbelianDimensions) {
  struct Case {
    std::shared_ptr<const TransverseSurface> s;
    std::array<int, 3> dims;
  };
  for (const auto& k : {Case{spectral(), {1, 4, 3}}, Case{grid(), {1, 8, 3}},
                        Case{build_surface(square_torus_config(4)), {1, 4, 3}}}) {
    const auto h = harmonic_spaces(assemble(abelian(k.s)));
    EXPECT_EQ(h.dims, k.dims);
    EXPECT_EQ(h.dims[1], dimension_formula(1, k.s->genus()));
  }
}

TEST(Cohomology, DirectSumIsReducible) {
  auto s = spectral();
  const auto p = direct_sum(abelian(s, 1), abelian(s, 2));
  const auto h = harmonic_spaces(assemble(p));
  EXPECT_EQ(h.dims[0], 2);
}

TEST(Cohomology, GenusTwoRankTwo) {
  const auto& c = genus2_rank2_complex();
  const auto h = harmonic_spaces(c);
  EXPECT_EQ(h.dims[0], 1);
  EXPECT_EQ(h.dims[1], dimension_formula(2, 2));
  EXPECT_EQ(h.dims[2], 3);
  for (double a : h2_alignment(c)) EXPECT_GE(a, 1 - 1e-10);
}

TEST(Index, MatchesFormula) {
  struct Case {
    std::shared_ptr<const TransverseSurface> s;
    int genus;
  };
  for (const auto& k : {Case{spectral(), 1}, Case{grid(), 2}}) {
    const auto r = basic_index(assemble(abelian(k.s)));
    EXPECT_EQ(r.kernel, dimension_formula(1, k.genus));
    EXPECT_EQ(r.index, index_formula(1, k.genus));
  }
  const auto r2 = basic_index(genus2_rank2_complex());
  EXPECT_EQ(r2.index, index_formula(2, 2));
  EXPECT_EQ(r2.index, 16);
}

TEST(Index, Formulas) {
  EXPECT_EQ(dimension_formula(1, 1), 4);
  EXPECT_EQ(dimension_formula(2, 2), 20);
  EXPECT_EQ(dimension_formula(1, 2), 8);
  EXPECT_EQ(index_formula(1, 1), 0);
  EXPECT_EQ(index_formula(1, 2), 4);
  EXPECT_EQ(index_formula(2, 2), 16);
}

TEST(Hodge, DecompositionAndOrthogonality) {
  for (auto s : {spectral(), grid()}) {
    const auto c = assemble(abelian(s));
    std::mt19937_64 rng(3);
    for (int level : {0, 1, 2}) {
      const RVec v = random_vector(c.level_size(level), rng);
      const auto h = hodge_decompose(c, level, v);
      EXPECT_LE((h.harmonic + h.exact + h.coexact - v).norm(), 1e-9 * v.norm());
      EXPECT_LE(std::abs(h.harmonic.dot(h.exact)), 1e-9 * v.squaredNorm());
      EXPECT_LE(std::abs(h.harmonic.dot(h.coexact)), 1e-9 * v.squaredNorm());
      EXPECT_LE(std::abs(h.exact.dot(h.coexact)), 1e-9 * v.squaredNorm());
    }
  }
}

TEST(Green, DenseMatchesConjugateGradient) {
  for (auto s : {spectral(), grid()}) {
    const auto c = assemble(abelian(s));
    std::mt19937_64 rng(4);
    for (int level : {0, 1, 2}) {
      const RVec v = random_vector(c.level_size(level), rng);
      const RVec a = green_apply(c, level, v, GreenMethod::Dense);
      const RVec b = green_apply(c, level, v, GreenMethod::ConjugateGradient);
      EXPECT_LE((a - b).norm(), 1e-9 * a.norm());
      const RVec hv = harmonic_project(c, level, v);
      EXPECT_LE(green_apply(c, level, hv).norm(), 1e-10 * std::max(1.0, hv.norm()));
      const RVec lw = c.laplacian(level) * v;
      EXPECT_LE((green_apply(c, level, lw) - (v - hv)).norm(), 1e-9 * v.norm());
    }
  }
}

TEST(Kuranishi, OriginAndAbelianCase) {
  for (auto s : {spectral(), grid()}) {
    const auto c = assemble(abelian(s));
    std::mt19937_64 rng(5);
    EXPECT_LE(kuranishi_map(c, RVec::Zero(c.dims.c1)).norm(), 0.0);
    const RVec a = harmonic_project(c, 1, random_vector(c.dims.c1, rng));
    EXPECT_LE((kuranishi_map(c, a) - a).norm(), 1e-12 * a.norm());
  }
}

TEST(Kuranishi, DerivativeAtOriginIsIdentity) {
  const auto& c = genus2_rank2_complex();
  std::mt19937_64 rng(6);
  const RVec a = harmonic_project(c, 1, random_vector(c.dims.c1, rng)).normalized();
  std::vector<double> err;
  for (double t : {1e-2, 1e-3}) err.push_back((kuranishi_map(c, t * a) / t - a).norm());
  EXPECT_LE(err[1], 1e-2);
  EXPECT_NEAR(err[0] / err[1], 10.0, 0.5);
}

TEST(Kuranishi, InverseResiduals) {
  const auto& c = genus2_rank2_complex();
  std::mt19937_64 rng(7);
  const RVec g = harmonic_project(c, 1, random_vector(c.dims.c1, rng)).normalized();
  for (double eps : {0.05, 0.01}) {
    const auto k = kuranishi_inverse(c, g, eps, {1e-13, 200, 1e6});
    EXPECT_LE(k.slice_residual, 1e-12);
    EXPECT_LE(k.harmonic_residual, 1e-12);
    EXPECT_LE((kuranishi_map(c, k.beta) - eps * g).norm(), 1e-12);
  }
}

TEST(Kuranishi, SliceInverseIsD2TransposeGreenOnExactComplex) {
  for (auto s : {spectral(), grid()}) {
    const auto c = assemble(abelian(s));
    std::mt19937_64 rng(8);
    for (int k = 0; k < 3; ++k) {
      const RVec y = random_vector(c.dims.c2, rng);
      const RVec want = c.D2.transpose() * green_apply(c, 2, y, GreenMethod::Dense);
      EXPECT_LE((chart_correction(c, y) - want).norm(), 1e-9 * want.norm());
    }
  }
}

TEST(Kuranishi, UnavailableWithoutSpectra) {
  const auto c = assemble(abelian(spectral()), {{false, false, true}, true});
  try {
    chart_correction(c, RVec::Zero(c.dims.c2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GapTooSmall);
  }
}

TEST(Kuranishi, ChartTangentSolvesLinearizedEquation) {
  const auto& c = genus2_rank2_complex();
  std::mt19937_64 rng(9);
  const RVec g = harmonic_project(c, 1, random_vector(c.dims.c1, rng)).normalized();
  const RVec X = harmonic_project(c, 1, random_vector(c.dims.c1, rng)).normalized();
  const auto k = kuranishi_inverse(c, g, 0.02, {1e-13, 200, 1e6});
  const RVec Xbar = chart_tangent(c, k.beta, X);
  EXPECT_LE((harmonic_project(c, 1, Xbar) - X).norm(), 1e-12);
  EXPECT_LE((c.D1.transpose() * Xbar).norm(), 1e-12);
}

}  // namespace

#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

using namespace bh;
using namespace bh::test;

namespace {

std::shared_ptr<const TransverseSurface> spectral(int n = 8) { return build_surface(torus_config(n)); }
std::shared_ptr<const TransverseSurface> grid(int n = 4) { return build_surface(l_shape_genus2_config(n)); }

CMat random_unitary(int r, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMat m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  return unitary_part(m);
}

MatCochain constant_gauge(const TransverseSurface& s, const CMat& u) {
  const int r = int(u.rows());
  MatCochain g{Form::P0, r, false, CMat(s.cell_count(Form::P0), r * r)};
  for (Eigen::Index k = 0; k < g.slots(); ++k) g.set_cell(k, u);
  return g;
}

HitchinPair random_pair(std::shared_ptr<const TransverseSurface> s, int r, std::mt19937_64& rng) {
  return make_pair(s, random_smooth(*s, Form::P1, r, rng, 0.5), random_smooth(*s, Form::P1, r, rng, 0.5));
}

TEST(LieBasis, OrthonormalAndSkew) {
  for (int r : {1, 2, 3}) {
    const auto b = lie_basis(r);
    ASSERT_EQ(int(b.size()), r * r);
    for (size_t i = 0; i < b.size(); ++i) {
      EXPECT_LE(max_abs(b[i] + b[i].adjoint()), 0.0);
      for (size_t j = 0; j < b.size(); ++j)
        EXPECT_NEAR(-(b[i] * b[j]).trace().real(), i == j ? 1.0 : 0.0, 1e-15);
    }
  }
}

TEST(Coordinates, RoundTripAndInner) {
  for (auto s : {spectral(), grid()}) {
    std::mt19937_64 rng(1);
    for (Form f : {Form::P0, Form::P1, Form::P2, Form::D2}) {
      const RVec v = random_vector(vector_size(*s, f, 2), rng), w = random_vector(vector_size(*s, f, 2), rng);
      const MatCochain a = from_vector(*s, f, 2, v), b = from_vector(*s, f, 2, w);
      EXPECT_LE(skew_defect(a), 1e-13);
      EXPECT_LE((to_vector(*s, a) - v).norm(), 1e-12 * v.norm());
      EXPECT_NEAR(inner(*s, a, b), v.dot(w), 1e-11 * v.norm() * w.norm());
    }
  }
}

TEST(Skew, NotSkewRaised) {
  auto s = spectral();
  MatCochain a = zero_mat(*s, Form::P1, 2, false);
  a.data.col(entry_index(0, 1, 2)).setConstant(1.0);
  EXPECT_THROW(mark_skew(a), Error);
  try {
    mark_skew(a);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSkew);
  }
}

TEST(Bracket, GradedIdentities) {
  for (auto s : {spectral(), grid()}) {
    std::mt19937_64 rng(2);
    const auto a = random_skew(*s, Form::P1, 2, rng), b = random_skew(*s, Form::P1, 2, rng);
    const auto f = random_skew(*s, Form::P0, 2, rng);
    EXPECT_LE(max_abs_diff(graded_bracket(*s, a, a).data, 2.0 * wedge(*s, a, a).data), 1e-13);
    EXPECT_LE(max_abs_diff(graded_bracket(*s, a, b).data, graded_bracket(*s, b, a).data), 1e-13);
    EXPECT_LE(max_abs_diff(graded_bracket(*s, f, a).data, -graded_bracket(*s, a, f).data), 1e-13);
    EXPECT_TRUE(graded_bracket(*s, a, b).skew);
    EXPECT_LE(skew_defect(graded_bracket(*s, a, b)), 1e-13);
    const auto a1 = random_skew(*s, Form::P1, 1, rng), b1 = random_skew(*s, Form::P1, 1, rng);
    EXPECT_LE(graded_bracket(*s, a1, b1).data.cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_THROW(graded_bracket(*s, a, random_skew(*s, Form::P1, 3, rng)), Error);
    EXPECT_THROW(graded_bracket(*s, graded_bracket(*s, a, b), a), Error);
  }
}

// [*A, B] = -[A, *B] coefficient-wise.
TEST(Bracket, StarIdentitySpectral) {
  auto s = spectral(16);
  std::mt19937_64 rng(3);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const auto a = random_skew(*s, Form::P1, 2, rng), b = random_skew(*s, Form::P1, 2, rng);
    const auto lhs = graded_bracket(*s, rotate(*s, a), b), rhs = graded_bracket(*s, a, rotate(*s, b));
    worst = std::max(worst, max_abs_diff(lhs.data, -rhs.data) / std::max(1.0, lhs.data.cwiseAbs().maxCoeff()));
  }
  EXPECT_LE(worst, 1e-13);
}

// Entry-wise oracle: (nabla psi)_ij = d psi_ij + sum_k (A_ik ^ psi_kj - (-1)^p psi_ik ^ A_kj).
TEST(CovariantD, EntrywiseOracle) {
  for (auto s : {spectral(4), spectral(8), grid()}) {
    std::mt19937_64 rng(4);
    const int r = 2;
    const HitchinPair p = random_pair(s, r, rng);
    for (Form f : {Form::P0, Form::P1}) {
      const auto psi = random_skew(*s, f, r, rng);
      const auto got = covariant_d(p, psi);
      const double sign = degree(f) % 2 ? -1.0 : 1.0;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          CVec want = d(*s, entry(psi, i, j)).values;
          for (int k = 0; k < r; ++k)
            want += wedge(*s, entry(p.A, i, k), entry(psi, k, j)).values -
                    sign * wedge(*s, entry(psi, i, k), entry(p.A, k, j)).values;
          EXPECT_LE((entry(got, i, j).values - want).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
  }
}

TEST(CovariantD, IdentityIsCentral) {
  auto s = spectral();
  std::mt19937_64 rng(5);
  const HitchinPair p = random_pair(s, 2, rng);
  const auto f = random_cochain(*s, Form::P0, rng);
  MatCochain fid = cplx(0, 1) * identity_times(f, 2);
  const auto got = covariant_d(p, fid);
  const auto want = cplx(0, 1) * identity_times(d(*s, f), 2);
  EXPECT_LE(max_abs_diff(got.data, want.data), 1e-12);
  const HitchinPair z = zero_pair(s, 2);
  EXPECT_LE(covariant_d(z, cplx(0, 2.0) * identity_times(constant_cochain(*s, Form::P0, 1.0), 2)).data.cwiseAbs().maxCoeff(),
            1e-13);
}

TEST(Curvature, Basics) {
  for (auto s : {spectral(), grid()}) {
    std::mt19937_64 rng(6);
    EXPECT_LE(curvature(zero_pair(s, 2)).data.cwiseAbs().maxCoeff(), 0.0);
    // rank 1, closed A
    const auto f = random_cochain(*s, Form::P0, rng);
    MatCochain A = cplx(0, 1) * identity_times(d(*s, f), 1);
    A.skew = true;
    HitchinPair p = make_pair(s, A, zero_mat(*s, Form::P1, 1));
    EXPECT_LE(curvature(p).data.cwiseAbs().maxCoeff(), 1e-12);
    const HitchinPair q = random_pair(s, 2, rng);
    EXPECT_LE(skew_defect(curvature(q)), 1e-13);
  }
}

TEST(Gauge, ConstantUnitaryCovariance) {
  for (auto s : {spectral(), grid()}) {
    std::mt19937_64 rng(7);
    const HitchinPair p = random_pair(s, 2, rng);
    const CMat u = random_unitary(2, rng);
    const auto g = constant_gauge(*s, u);
    const HitchinPair q = gauge_transform(g, p);
    const auto F = curvature(p), Fq = curvature(q);
    for (Eigen::Index k = 0; k < F.slots(); ++k)
      EXPECT_LE(max_abs(Fq.cell(k) - u.adjoint() * F.cell(k) * u), 1e-12);
    const auto rp = residual(p), rq = residual(q);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(rp.norms[c], rq.norms[c], 1e-10);
    EXPECT_NEAR(energy(p), energy(q), 1e-10);
  }
}

TEST(Gauge, IdentityAndErrors) {
  for (auto s : {spectral(), grid()}) {
    std::mt19937_64 rng(8);
    const HitchinPair p = random_pair(s, 2, rng);
    const HitchinPair q = gauge_transform(constant_gauge(*s, CMat::Identity(2, 2)), p);
    EXPECT_LE(max_abs_diff(q.A.data, p.A.data), 1e-13);
    EXPECT_LE(max_abs_diff(q.Phi.data, p.Phi.data), 1e-13);
    try {
      gauge_transform(constant_gauge(*s, 2.0 * CMat::Identity(2, 2)), p);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NotUnitary);
    }
  }
}

TEST(Gauge, SmoothTransformOnGrid) {
  auto s = grid(8);
  std::mt19937_64 rng(9);
  const HitchinPair p = random_pair(s, 2, rng);
  const auto xi = random_smooth(*s, Form::P0, 2, rng, 0.3);
  const auto g = exp_cochain(xi);
  EXPECT_LE(unitarity_defect(g), 1e-12);
  const HitchinPair q = gauge_transform(g, p);
  EXPECT_LE(skew_defect(q.A), 1e-12);
  const auto rp = residual(p), rq = residual(q);
  EXPECT_NEAR(rq.norms[0], rp.norms[0], 0.1 * rp.norms[0]);
}

TEST(Degree, ChosenCurvature) {
  for (auto s : {spectral(), grid()}) {
    for (int k : {-2, 0, 1, 3}) {
      const double c = 2 * std::numbers::pi * k / s->total_area();
      MatCochain F = cplx(0, c) * identity_times(area_form(*s, Form::P2), 1);
      EXPECT_NEAR(degree_of_curvature(*s, F), k, 1e-12);
    }
    EXPECT_THROW(degree_of_curvature(*s, zero_mat(*s, Form::P1, 1)), Error);
    std::mt19937_64 rng(10);
    EXPECT_NEAR(degree_of_bundle(random_pair(s, 2, rng)), 0.0, 1e-10);
  }
}

TEST(Higgs, RoundTrip) {
  for (auto s : {spectral(), grid()}) {
    std::mt19937_64 rng(11);
    const HitchinPair p = random_pair(s, 2, rng);
    const auto h = to_higgs(p);
    const HitchinPair q = from_higgs(s, h);
    EXPECT_LE(max_abs_diff(q.A.data, p.A.data), 1e-13);
    EXPECT_LE(max_abs_diff(q.Phi.data, p.Phi.data), 1e-13);
  }
}

TEST(Higgs, ThetaTypeSpectral) {
  auto s = spectral(16);
  std::mt19937_64 rng(12);
  const HitchinPair p = random_pair(s, 2, rng);
  const auto h = to_higgs(p);
  // theta is of type (1,0): theta ^ theta vanishes and * theta = -i theta.
  EXPECT_LE(theta_wedge_theta(p, h).data.cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE(max_abs_diff(rotate(*s, h.theta).data, cplx(0, -1) * h.theta.data), 1e-13);
  EXPECT_LE(max_abs_diff(rotate(*s, h.dbar).data, cplx(0, 1) * h.dbar.data), 1e-13);
}

TEST(Flatness, SolvedPairs) {
  for (auto s : {spectral(), grid()}) {
    SolveConfig cfg;
    auto [p, rep] = solve(seed_pair(s, 1, 3, SeedKind::RandomSmooth), cfg);
    ASSERT_TRUE(rep.converged);
    EXPECT_LE(flatness_check(p), 2 * cfg.residual_tolerance);
    EXPECT_LE(std::abs(degree_of_bundle(p)), 1e-8);
  }
}

}  // namespace

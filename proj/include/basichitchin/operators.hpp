#pragma once

#include <vector>

#include "matrix_forms.hpp"

namespace bh {

// Element of the middle space: (alpha_1, alpha_2) = (connection part, Higgs part).
struct TangentVector {
  MatCochain a;
  MatCochain b;
};

// Element of the last space: three 2-cochains; the third one is dual.
struct CurvatureTriple {
  MatCochain x;
  MatCochain y;
  MatCochain z;
};

inline TangentVector operator+(const TangentVector& u, const TangentVector& v) { return {u.a + v.a, u.b + v.b}; }
inline TangentVector operator-(const TangentVector& u, const TangentVector& v) { return {u.a - v.a, u.b - v.b}; }
inline TangentVector operator*(double c, const TangentVector& u) { return {c * u.a, c * u.b}; }
inline CurvatureTriple operator+(const CurvatureTriple& u, const CurvatureTriple& v) {
  return {u.x + v.x, u.y + v.y, u.z + v.z};
}
inline CurvatureTriple operator-(const CurvatureTriple& u, const CurvatureTriple& v) {
  return {u.x - v.x, u.y - v.y, u.z - v.z};
}
inline CurvatureTriple operator*(double c, const CurvatureTriple& u) { return {c * u.x, c * u.y, c * u.z}; }

// Dimensions of the three coordinate spaces of the complex.
struct ComplexDims {
  Eigen::Index c0 = 0, c1 = 0, c2 = 0;
  Eigen::Index p1 = 0, p2 = 0, d2 = 0;  // per-block sizes
};

inline ComplexDims complex_dims(const TransverseSurface& s, int rank) {
  ComplexDims d;
  d.c0 = vector_size(s, Form::P0, rank);
  d.p1 = vector_size(s, Form::P1, rank);
  d.p2 = vector_size(s, Form::P2, rank);
  d.d2 = vector_size(s, Form::D2, rank);
  d.c1 = 2 * d.p1;
  d.c2 = 2 * d.p2 + d.d2;
  return d;
}

inline RVec to_vector(const TransverseSurface& s, const TangentVector& t) {
  RVec a = to_vector(s, t.a), b = to_vector(s, t.b);
  RVec out(a.size() + b.size());
  out << a, b;
  return out;
}

inline RVec to_vector(const TransverseSurface& s, const CurvatureTriple& t) {
  RVec x = to_vector(s, t.x), y = to_vector(s, t.y), z = to_vector(s, t.z);
  RVec out(x.size() + y.size() + z.size());
  out << x, y, z;
  return out;
}

inline TangentVector tangent_from_vector(const TransverseSurface& s, int rank, const RVec& v) {
  const auto n = vector_size(s, Form::P1, rank);
  return {from_vector(s, Form::P1, rank, v.head(n)), from_vector(s, Form::P1, rank, v.tail(n))};
}

inline CurvatureTriple triple_from_vector(const TransverseSurface& s, int rank, const RVec& v) {
  const auto n = vector_size(s, Form::P2, rank);
  const auto m = vector_size(s, Form::D2, rank);
  return {from_vector(s, Form::P2, rank, v.segment(0, n)), from_vector(s, Form::P2, rank, v.segment(n, n)),
          from_vector(s, Form::D2, rank, v.segment(2 * n, m))};
}

inline TangentVector zero_tangent(const TransverseSurface& s, int rank) {
  return {zero_mat(s, Form::P1, rank), zero_mat(s, Form::P1, rank)};
}

// D1 f = (nabla f, [Phi, f]).
inline TangentVector apply_D1(const HitchinPair& p, const MatCochain& f) {
  return {covariant_d(p, f), graded_bracket(p.geom(), p.Phi, f)};
}

// D2 (a, b) = (nabla a - [Phi, b], nabla b + [a, Phi], nabla *b + [a, *Phi]).
inline CurvatureTriple apply_D2(const HitchinPair& p, const TangentVector& t) {
  const auto& s = p.geom();
  const MatCochain starb = hodge_star(s, t.b), starPhi = hodge_star(s, p.Phi);
  return {covariant_d(p, t.a) - graded_bracket(s, p.Phi, t.b),
          covariant_d(p, t.b) + graded_bracket(s, t.a, p.Phi),
          covariant_d(p, starb) + graded_bracket(s, t.a, starPhi)};
}

// (F - Phi^Phi, nabla Phi, nabla *Phi).
inline CurvatureTriple hitchin_fields(const HitchinPair& p) {
  const auto& s = p.geom();
  return {curvature(p) - phi_wedge_phi(p), covariant_d(p, p.Phi), covariant_d(p, hodge_star(s, p.Phi))};
}

// Quadratic part of the equations at pair + alpha:
// (a^a - b^b, [a, b], [a, *b]).
inline CurvatureTriple tilde_wedge(const TransverseSurface& s, const TangentVector& t) {
  return {0.5 * graded_bracket(s, t.a, t.a) - 0.5 * graded_bracket(s, t.b, t.b), graded_bracket(s, t.a, t.b),
          graded_bracket(s, t.a, hodge_star(s, t.b))};
}

// Symmetric bilinear form with tilde_wedge(t) = modified_bracket(t, t) / 2.
inline CurvatureTriple modified_bracket(const TransverseSurface& s, const TangentVector& u, const TangentVector& v) {
  return {graded_bracket(s, u.a, v.a) - graded_bracket(s, u.b, v.b),
          graded_bracket(s, u.a, v.b) + graded_bracket(s, v.a, u.b),
          graded_bracket(s, u.a, hodge_star(s, v.b)) + graded_bracket(s, v.a, hodge_star(s, u.b))};
}

inline double norm(const TransverseSurface& s, const TangentVector& t) {
  return std::sqrt(inner(s, t.a, t.a) + inner(s, t.b, t.b));
}

inline double norm(const TransverseSurface& s, const CurvatureTriple& t) {
  return std::sqrt(inner(s, t.x, t.x) + inner(s, t.y, t.y) + inner(s, t.z, t.z));
}

inline TangentVector pair_difference(const HitchinPair& p, const HitchinPair& q) { return {p.A - q.A, p.Phi - q.Phi}; }

inline HitchinPair shifted(const HitchinPair& p, const TangentVector& t) {
  HitchinPair out = p;
  out.A = p.A + t.a;
  out.Phi = p.Phi + t.b;
  return out;
}

// Formal adjoints written with the star operator, for comparison with the
// assembled transposes. With <X, Y> = -int Tr(X ^ *Y):
//   D1^*(a, b) = -*nabla*a - *[Phi, *b]
//   D2^*(x, y, z) = (-*nabla*x - *[Phi, *y] - *[*Phi, *z], *[Phi, *x] - *nabla*y - nabla*z)
inline MatCochain D1_adjoint(const HitchinPair& p, const TangentVector& t) {
  const auto& s = p.geom();
  auto st = [&](const MatCochain& m) { return hodge_star(s, m); };
  return -st(covariant_d(p, st(t.a))) - st(graded_bracket(s, p.Phi, st(t.b)));
}

inline TangentVector D2_adjoint(const HitchinPair& p, const CurvatureTriple& w) {
  const auto& s = p.geom();
  auto st = [&](const MatCochain& m) { return hodge_star(s, m); };
  const MatCochain sx = st(w.x), sy = st(w.y), sz = st(w.z), sPhi = st(p.Phi);
  return {-st(covariant_d(p, sx)) - st(graded_bracket(s, p.Phi, sy)) - st(graded_bracket(s, sPhi, sz)),
          st(graded_bracket(s, p.Phi, sx)) - st(covariant_d(p, sy)) - covariant_d(p, sz)};
}

namespace detail {

inline SpMat columns_to_sparse(const std::vector<RVec>& cols, Eigen::Index rows) {
  std::vector<Eigen::Triplet<double>> trip;
  for (size_t j = 0; j < cols.size(); ++j) {
    const double cut = 1e-15 * std::max(1.0, cols[j].cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < rows; ++i)
      if (std::abs(cols[j][i]) > cut) trip.emplace_back(i, Eigen::Index(j), cols[j][i]);
  }
  SpMat m(rows, Eigen::Index(cols.size()));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace detail

// Coordinate matrices of D1 and D2, assembled column by column.
inline SpMat assemble_D1(const HitchinPair& p) {
  const auto& s = p.geom();
  const int r = p.rank();
  const auto dims = complex_dims(s, r);
  std::vector<RVec> cols(dims.c0);
  RVec e = RVec::Zero(dims.c0);
  for (Eigen::Index j = 0; j < dims.c0; ++j) {
    e[j] = 1.0;
    cols[j] = to_vector(s, apply_D1(p, from_vector(s, Form::P0, r, e)));
    e[j] = 0.0;
  }
  return detail::columns_to_sparse(cols, dims.c1);
}

inline SpMat assemble_D2(const HitchinPair& p) {
  const auto& s = p.geom();
  const int r = p.rank();
  const auto dims = complex_dims(s, r);
  std::vector<RVec> cols(dims.c1);
  RVec e = RVec::Zero(dims.c1);
  for (Eigen::Index j = 0; j < dims.c1; ++j) {
    e[j] = 1.0;
    cols[j] = to_vector(s, apply_D2(p, tangent_from_vector(s, r, e)));
    e[j] = 0.0;
  }
  return detail::columns_to_sparse(cols, dims.c2);
}

}  // namespace bh

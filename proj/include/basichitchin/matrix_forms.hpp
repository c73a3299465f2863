#pragma once

#include <memory>
#include <numbers>
#include <vector>

#include "surface.hpp"

namespace bh {

inline int entry_index(int i, int j, int r) { return i + r * j; }

// Basis of u(r), orthonormal for <X,Y> = -tr(XY): i E_jj, then for j < k
// (E_jk - E_kj)/sqrt2 and i (E_jk + E_kj)/sqrt2.
inline std::vector<CMat> lie_basis(int r) {
  std::vector<CMat> b;
  const cplx i(0, 1);
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < r; ++j) {
    CMat t = CMat::Zero(r, r);
    t(j, j) = i;
    b.push_back(t);
  }
  for (int j = 0; j < r; ++j)
    for (int k = j + 1; k < r; ++k) {
      CMat t = CMat::Zero(r, r);
      t(j, k) = s;
      t(k, j) = -s;
      b.push_back(t);
      CMat u = CMat::Zero(r, r);
      u(j, k) = i * s;
      u(k, j) = i * s;
      b.push_back(u);
    }
  return b;
}

// Cochain with values in r x r complex matrices. Column i + r*j of `data`
// holds entry (i, j) over all slots of the form type.
struct MatCochain {
  Form form = Form::P1;
  int rank = 1;
  bool skew = false;
  CMat data;

  int degree() const { return bh::degree(form); }
  Eigen::Index slots() const { return data.rows(); }

  CMat cell(Eigen::Index k) const {
    CMat m(rank, rank);
    for (int j = 0; j < rank; ++j)
      for (int i = 0; i < rank; ++i) m(i, j) = data(k, entry_index(i, j, rank));
    return m;
  }
  void set_cell(Eigen::Index k, const CMat& m) {
    for (int j = 0; j < rank; ++j)
      for (int i = 0; i < rank; ++i) data(k, entry_index(i, j, rank)) = m(i, j);
  }
};

inline MatCochain zero_mat(const TransverseSurface& s, Form f, int rank, bool skew = true) {
  return {f, rank, skew, CMat::Zero(s.cell_count(f), rank * rank)};
}

inline void check_compatible(const MatCochain& a, const MatCochain& b) {
  if (a.rank != b.rank) throw Error(ErrorCode::RankMismatch, "rank " + std::to_string(a.rank) + " vs " + std::to_string(b.rank));
  if (a.form != b.form)
    throw Error(ErrorCode::DegreeMismatch, std::string(to_string(a.form)) + " vs " + to_string(b.form));
}

inline MatCochain operator+(const MatCochain& a, const MatCochain& b) {
  check_compatible(a, b);
  return {a.form, a.rank, a.skew && b.skew, a.data + b.data};
}
inline MatCochain operator-(const MatCochain& a, const MatCochain& b) {
  check_compatible(a, b);
  return {a.form, a.rank, a.skew && b.skew, a.data - b.data};
}
inline MatCochain operator-(const MatCochain& a) { return {a.form, a.rank, a.skew, -a.data}; }
inline MatCochain operator*(double c, const MatCochain& a) { return {a.form, a.rank, a.skew, c * a.data}; }
inline MatCochain operator*(cplx c, const MatCochain& a) {
  return {a.form, a.rank, a.skew && c.imag() == 0.0, c * a.data};
}

// Pointwise conjugate transpose.
inline MatCochain adjoint(const MatCochain& a) {
  MatCochain out = a;
  const int r = a.rank;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) out.data.col(entry_index(i, j, r)) = a.data.col(entry_index(j, i, r)).conjugate();
  return out;
}

inline double skew_defect(const MatCochain& a) { return max_abs(a.data + adjoint(a).data); }

inline MatCochain mark_skew(MatCochain a, double tol = 1e-12) {
  const double scale = std::max(1.0, max_abs(a.data));
  if (skew_defect(a) > tol * scale) throw Error(ErrorCode::NotSkew, "cochain is not skew-hermitian");
  a.skew = true;
  return a;
}

inline MatCochain identity_times(const ScalarCochain& f, int rank) {
  MatCochain out{f.form, rank, false, CMat::Zero(f.size(), rank * rank)};
  for (int i = 0; i < rank; ++i) out.data.col(entry_index(i, i, rank)) = f.values;
  return out;
}

inline ScalarCochain entry(const MatCochain& a, int i, int j) {
  return {a.form, a.data.col(entry_index(i, j, a.rank))};
}

inline ScalarCochain trace(const MatCochain& a) {
  ScalarCochain t{a.form, CVec::Zero(a.slots())};
  for (int i = 0; i < a.rank; ++i) t.values += a.data.col(entry_index(i, i, a.rank));
  return t;
}

// C = A B per slot, on column-blocked r x r data.
inline CMat cellwise_product(const CMat& A, const CMat& B, int r) {
  CMat C = CMat::Zero(A.rows(), r * r);
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i)
        C.col(entry_index(i, k, r)) += A.col(entry_index(i, j, r)).cwiseProduct(B.col(entry_index(j, k, r)));
  return C;
}

inline MatCochain wedge(const TransverseSurface& s, const MatCochain& a, const MatCochain& b) {
  if (a.rank != b.rank) throw Error(ErrorCode::RankMismatch, "wedge of different ranks");
  const Form to = product_form(a.form, b.form);
  const int r = a.rank;
  if (s.pairs_on_edges(a.form, b.form)) {
    const double sign = is_dual(a.form) ? -1.0 : 1.0;
    return {to, r, false, s.split_to_vertices(sign * cellwise_product(a.data, b.data, r))};
  }
  const Location loc = s.spectral() ? Location::Vertex : natural_location(to);
  auto sa = [&](int c) { return s.sample(a.form, loc, c, a.data); };
  auto sb = [&](int c) { return s.sample(b.form, loc, c, b.data); };
  std::vector<CMat> out;
  if (a.degree() == 1 && b.degree() == 1) {
    out.push_back(cellwise_product(sa(0), sb(1), r) - cellwise_product(sa(1), sb(0), r));
  } else if (a.degree() == 0) {
    const CMat f = sa(0);
    for (int c = 0; c < components(b.form); ++c) out.push_back(cellwise_product(f, sb(c), r));
  } else {
    const CMat f = sb(0);
    for (int c = 0; c < components(a.form); ++c) out.push_back(cellwise_product(sa(c), f, r));
  }
  return {to, r, false, s.deposit(to, out)};
}

// [a, b] = a^b - (-1)^{pq} b^a.
inline MatCochain graded_bracket(const TransverseSurface& s, const MatCochain& a, const MatCochain& b) {
  const int sign = (a.degree() * b.degree()) % 2 ? -1 : 1;
  MatCochain ab = wedge(s, a, b), ba = wedge(s, b, a);
  MatCochain out{ab.form, ab.rank, a.skew && b.skew, ab.data - double(sign) * ba.data};
  return out;
}

inline MatCochain d(const TransverseSurface& s, const MatCochain& a) {
  return {d_target(a.form), a.rank, a.skew, s.d(a.form, a.data)};
}

inline MatCochain hodge_star(const TransverseSurface& s, const MatCochain& a) {
  return {star_target(a.form), a.rank, a.skew, s.star(a.form, a.data)};
}

inline MatCochain rotate(const TransverseSurface& s, const MatCochain& a) {
  return {Form::P1, a.rank, a.skew, s.rotate(a.data)};
}

// Real part of the sesquilinear L2 product -int Tr(a ^ *b^dagger).
inline double inner(const TransverseSurface& s, const MatCochain& a, const MatCochain& b) {
  check_compatible(a, b);
  const RVec w = s.weights(a.form);
  return (w.asDiagonal() * a.data.conjugate().cwiseProduct(b.data).real()).sum();
}

inline double norm(const TransverseSurface& s, const MatCochain& a) { return std::sqrt(std::max(0.0, inner(s, a, a))); }

// ---- real coordinates of skew cochains ----

inline Eigen::Index vector_size(const TransverseSurface& s, Form f, int rank) {
  return s.dof(f) * rank * rank;
}

inline RVec to_vector(const TransverseSurface& s, const MatCochain& a) {
  const int r = a.rank, n = r * r;
  const auto basis = lie_basis(r);
  CMat P(a.slots(), n);  // generator coefficient fields -tr(T_a X)
  for (int g = 0; g < n; ++g) {
    CVec acc = CVec::Zero(a.slots());
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < r; ++k)
        if (basis[g](k, i) != 0.0) acc -= basis[g](k, i) * a.data.col(entry_index(i, k, r));
    P.col(g) = acc;
  }
  RMat c = s.to_coords(a.form, P);
  return Eigen::Map<const RVec>(c.data(), c.size());
}

inline MatCochain from_vector(const TransverseSurface& s, Form f, int rank, const RVec& v) {
  const int n = rank * rank;
  const Eigen::Index m = s.dof(f);
  if (v.size() != m * n) throw Error(ErrorCode::DegreeMismatch, "vector length does not match cochain space");
  RMat coords = Eigen::Map<const RMat>(v.data(), m, n);
  CMat fields = s.from_coords(f, coords);
  const auto basis = lie_basis(rank);
  MatCochain out{f, rank, true, CMat::Zero(fields.rows(), n)};
  for (int g = 0; g < n; ++g)
    for (int j = 0; j < rank; ++j)
      for (int i = 0; i < rank; ++i)
        if (basis[g](i, j) != 0.0) out.data.col(entry_index(i, j, rank)) += basis[g](i, j) * fields.col(g).real().cast<cplx>();
  return out;
}

// ---- Hitchin pairs ----

struct HitchinPair {
  std::shared_ptr<const TransverseSurface> surface;
  MatCochain A;
  MatCochain Phi;

  int rank() const { return A.rank; }
  const TransverseSurface& geom() const { return *surface; }
};

inline HitchinPair make_pair(std::shared_ptr<const TransverseSurface> s, MatCochain A, MatCochain Phi) {
  if (A.form != Form::P1 || Phi.form != Form::P1)
    throw Error(ErrorCode::DegreeMismatch, "connection and Higgs field must be primal 1-cochains");
  if (A.rank != Phi.rank) throw Error(ErrorCode::RankMismatch, "A and Phi ranks differ");
  if (A.slots() != s->cell_count(Form::P1) || Phi.slots() != s->cell_count(Form::P1))
    throw Error(ErrorCode::DegreeMismatch, "cochain does not belong to this surface");
  return {std::move(s), mark_skew(std::move(A), 1e-10), mark_skew(std::move(Phi), 1e-10)};
}

inline HitchinPair zero_pair(std::shared_ptr<const TransverseSurface> s, int rank) {
  auto z = zero_mat(*s, Form::P1, rank);
  return {s, z, z};
}

// Pair coordinates: [A ; Phi].
inline RVec pair_vector(const HitchinPair& p) {
  RVec a = to_vector(p.geom(), p.A), b = to_vector(p.geom(), p.Phi);
  RVec out(a.size() + b.size());
  out << a, b;
  return out;
}

inline HitchinPair pair_from_vector(std::shared_ptr<const TransverseSurface> s, int rank, const RVec& v) {
  const Eigen::Index n = vector_size(*s, Form::P1, rank);
  auto A = from_vector(*s, Form::P1, rank, v.head(n));
  auto Phi = from_vector(*s, Form::P1, rank, v.tail(n));
  return {std::move(s), std::move(A), std::move(Phi)};
}

inline MatCochain covariant_d(const HitchinPair& p, const MatCochain& psi) {
  if (psi.degree() > 1) throw Error(ErrorCode::DegreeOutOfRange, "covariant_d of a 2-cochain");
  return d(p.geom(), psi) + graded_bracket(p.geom(), p.A, psi);
}

inline MatCochain curvature(const HitchinPair& p) {
  return d(p.geom(), p.A) + 0.5 * graded_bracket(p.geom(), p.A, p.A);
}

inline MatCochain phi_wedge_phi(const HitchinPair& p) { return 0.5 * graded_bracket(p.geom(), p.Phi, p.Phi); }

// (1/2 pi i) times the integral of the trace.
inline double degree_of_curvature(const TransverseSurface& s, const MatCochain& F) {
  if (F.degree() != 2) throw Error(ErrorCode::DegreeMismatch, "degree needs a 2-cochain");
  const cplx total = integrate(s, trace(F));
  return (total / cplx(0, 2 * std::numbers::pi)).real();
}

inline double degree_of_bundle(const HitchinPair& p) { return degree_of_curvature(p.geom(), curvature(p)); }

// ---- gauge action ----

inline CMat unitary_part(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

inline double unitarity_defect(const MatCochain& g) {
  double worst = 0;
  const CMat I = CMat::Identity(g.rank, g.rank);
  for (Eigen::Index k = 0; k < g.slots(); ++k) {
    CMat c = g.cell(k);
    worst = std::max(worst, max_abs(c.adjoint() * c - I));
  }
  return worst;
}

// g = exp(xi) for a skew 0-cochain xi.
inline MatCochain exp_cochain(const MatCochain& xi) {
  MatCochain g{xi.form, xi.rank, false, CMat(xi.slots(), xi.rank * xi.rank)};
  for (Eigen::Index k = 0; k < xi.slots(); ++k) {
    CMat h = cplx(0, -1) * xi.cell(k);  // hermitian
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    CVec ph(xi.rank);
    for (int i = 0; i < xi.rank; ++i) ph[i] = std::polar(1.0, es.eigenvalues()[i]);
    g.set_cell(k, es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
  }
  return g;
}

namespace detail {

// Full-grid spectral derivative of collocation values (Nyquist mode dropped).
inline CMat full_derivative(const SpectralData& sp, const CMat& X, int axis) {
  const int N = sp.N;
  CMat F(N, N), Fi(N, N);
  RVec k(N);
  for (int a = 0; a < N; ++a) {
    int kk = a <= N / 2 ? a : a - N;
    if (N % 2 == 0 && a == N / 2) kk = 0;
    k[a] = 2 * std::numbers::pi * kk / sp.L;
    for (int j = 0; j < N; ++j) {
      F(a, j) = std::polar(1.0, -2 * std::numbers::pi * a * j / N) / double(N);
      Fi(j, a) = std::polar(1.0, 2 * std::numbers::pi * a * j / N);
    }
  }
  CMat out(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    Eigen::Map<const CMat> G(X.col(c).data(), N, N);
    CMat C = F * G * F.transpose();
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) C(a, b) *= cplx(0, axis == 0 ? k[a] : k[b]);
    Eigen::Map<CMat> O(out.col(c).data(), N, N);
    O = Fi * C * Fi.transpose();
  }
  return out;
}

}  // namespace detail

// A -> g^-1 A g + g^-1 dg, Phi -> g^-1 Phi g. On the grid the edge transport
// uses the unitary part of the endpoint average.
inline HitchinPair gauge_transform(const MatCochain& g, const HitchinPair& p) {
  const auto& s = p.geom();
  const int r = p.rank();
  if (g.form != Form::P0 || g.rank != r) throw Error(ErrorCode::DegreeMismatch, "gauge transformation must be a rank-matched 0-cochain");
  if (unitarity_defect(g) > 1e-10) throw Error(ErrorCode::NotUnitary, "gauge transformation is not pointwise unitary");
  MatCochain gi = adjoint(g);
  HitchinPair out = p;
  if (s.spectral()) {
    const auto P = s.spectral_data().points();
    CMat dgx = detail::full_derivative(s.spectral_data(), g.data, 0);
    CMat dgy = detail::full_derivative(s.spectral_data(), g.data, 1);
    for (int c = 0; c < 2; ++c) {
      CMat Ac = p.A.data.middleRows(c * P, P), Pc = p.Phi.data.middleRows(c * P, P);
      CMat a = cellwise_product(cellwise_product(gi.data, Ac, r), g.data, r) +
               cellwise_product(gi.data, c == 0 ? dgx : dgy, r);
      out.A.data.middleRows(c * P, P) = a;
      out.Phi.data.middleRows(c * P, P) = cellwise_product(cellwise_product(gi.data, Pc, r), g.data, r);
    }
    out.A.data = s.project(Form::P1, out.A.data);
    out.Phi.data = s.project(Form::P1, out.Phi.data);
  } else {
    const auto& gd = s.grid_data();
    for (int e = 0; e < gd.E; ++e) {
      const CMat gt = g.cell(gd.tail[e]), gh = g.cell(gd.head[e]);
      const CMat u = unitary_part(0.5 * (gt + gh));
      CMat shift = u.adjoint() * (gh - gt);
      shift = 0.5 * (shift - shift.adjoint()).eval();
      out.A.set_cell(e, u.adjoint() * p.A.cell(e) * u + shift);
      out.Phi.set_cell(e, u.adjoint() * p.Phi.cell(e) * u);
    }
  }
  out.A = mark_skew(out.A, 1e-9);
  out.Phi = mark_skew(out.Phi, 1e-9);
  return out;
}

// ---- Higgs and flat-bundle views ----

struct HiggsData {
  MatCochain dbar;   // (0,1)-part of the connection form
  MatCochain theta;  // (1,0)-part of i Phi
};

inline HiggsData to_higgs(const HitchinPair& p) {
  const auto& s = p.geom();
  const cplx i(0, 1);
  MatCochain RA = rotate(s, p.A), RPhi = rotate(s, p.Phi);
  HiggsData h;
  h.dbar = {Form::P1, p.rank(), false, 0.5 * (p.A.data - i * RA.data)};
  h.theta = {Form::P1, p.rank(), false, 0.5 * (i * p.Phi.data - RPhi.data)};
  return h;
}

inline HitchinPair from_higgs(std::shared_ptr<const TransverseSurface> s, const HiggsData& h) {
  MatCochain A = h.dbar - adjoint(h.dbar);
  MatCochain Phi = cplx(0, -1) * (h.theta + adjoint(h.theta));
  return make_pair(std::move(s), std::move(A), std::move(Phi));
}

// || dbar_E theta || with dbar_E = d + [A^{0,1}, .] acting on the (1,0)-form theta.
inline double dbar_theta_norm(const HitchinPair& p, const HiggsData& h) {
  const auto& s = p.geom();
  MatCochain t = d(s, h.theta) + graded_bracket(s, h.dbar, h.theta);
  return norm(s, t);
}

inline MatCochain theta_wedge_theta(const HitchinPair& p, const HiggsData& h) { return wedge(p.geom(), h.theta, h.theta); }

// Curvature of D = nabla + i Phi: F - Phi^Phi + i nabla Phi.
inline MatCochain flat_curvature(const HitchinPair& p) {
  return curvature(p) - phi_wedge_phi(p) + cplx(0, 1) * covariant_d(p, p.Phi);
}

inline double flatness_check(const HitchinPair& p) { return norm(p.geom(), flat_curvature(p)); }

}  // namespace bh

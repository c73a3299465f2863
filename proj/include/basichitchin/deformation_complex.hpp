#pragma once

#include <array>
#include <vector>

#include "hitchin_solver.hpp"

namespace bh {

inline constexpr Eigen::Index kDenseLimit = 4000;

struct HarmonicSpaces {
  std::array<int, 3> dims{};
  std::array<RMat, 3> bases;
  std::array<GapCount, 3> gaps;
};

// Deformation complex at a pair, in orthonormal real coordinates. Adjoints are
// transposes; the Laplacian spectra are computed densely at assembly.
struct DeformationComplex {
  HitchinPair pair;
  ComplexDims dims;
  SpMat D1, D2;
  double pair_residual = 0.0;
  bool residual_warning = false;
  std::array<SymmetricSpectrum, 3> spectra;
  // Inverse of D2 restricted to the slice complement of H1; maps the
  // complement of H2 into ker D1^T. Equals D2^T G on an exact complex.
  RMat slice_inverse;

  const TransverseSurface& geom() const { return pair.geom(); }
  int rank() const { return pair.rank(); }

  Eigen::Index level_size(int level) const { return level == 0 ? dims.c0 : level == 1 ? dims.c1 : dims.c2; }

  SpMat laplacian(int level) const {
    switch (level) {
      case 0: return SpMat(D1.transpose() * D1);
      case 1: return SpMat(D1 * SpMat(D1.transpose())) + SpMat(SpMat(D2.transpose()) * D2);
      default: return SpMat(D2 * SpMat(D2.transpose()));
    }
  }
};

struct AssembleOptions {
  std::array<bool, 3> spectra{true, true, true};
  bool slice_inverse = true;
};

namespace detail {

inline RMat build_slice_inverse(const DeformationComplex& c) {
  const auto& s0 = c.spectra[0];
  const auto& s1 = c.spectra[1];
  require_gap(s0.gap, "H0");
  require_gap(s1.gap, "H1");
  const RMat D1 = RMat(c.D1);
  const Eigen::Index n0 = s0.values.size(), z0 = s0.gap.dim, z1 = s1.gap.dim;
  // Orthonormal basis of im D1 from the spectrum of D1^T D1, then H1.
  RMat A(c.dims.c1, (n0 - z0) + z1);
  A.leftCols(n0 - z0) = D1 * s0.vectors.rightCols(n0 - z0) *
                        s0.values.tail(n0 - z0).cwiseSqrt().cwiseInverse().asDiagonal();
  A.rightCols(z1) = s1.kernel();
  Eigen::HouseholderQR<RMat> qr(A);
  const RMat Q = qr.householderQ();
  const RMat K = Q.rightCols(c.dims.c1 - A.cols());
  const RMat M = RMat(c.D2) * K;
  Eigen::CompleteOrthogonalDecomposition<RMat> cod(M);
  return K * cod.pseudoInverse();
}

}  // namespace detail

inline DeformationComplex assemble(const HitchinPair& p, const AssembleOptions& opt = {}) {
  DeformationComplex c;
  c.pair = p;
  c.dims = complex_dims(p.geom(), p.rank());
  if (std::max({c.dims.c0, c.dims.c1, c.dims.c2}) > kDenseLimit)
    throw Error(ErrorCode::AssemblyOverflow, "complex of size " + std::to_string(c.dims.c1) +
                                                 " exceeds the dense spectral limit " + std::to_string(kDenseLimit));
  c.pair_residual = residual(p).max_norm();
  c.residual_warning = c.pair_residual > 1e-6;
  c.D1 = assemble_D1(p);
  c.D2 = assemble_D2(p);
  for (int k = 0; k < 3; ++k)
    if (opt.spectra[k]) c.spectra[k] = symmetric_spectrum(RMat(c.laplacian(k)));
  if (opt.slice_inverse && opt.spectra[0] && opt.spectra[1] && c.spectra[0].gap.certified &&
      c.spectra[1].gap.certified)
    c.slice_inverse = detail::build_slice_inverse(c);
  return c;
}

inline HarmonicSpaces harmonic_spaces(const DeformationComplex& c) {
  HarmonicSpaces h;
  static const char* names[] = {"H0", "H1", "H2"};
  for (int k = 0; k < 3; ++k) {
    require_gap(c.spectra[k].gap, names[k]);
    h.dims[k] = c.spectra[k].gap.dim;
    h.bases[k] = c.spectra[k].kernel();
    h.gaps[k] = c.spectra[k].gap;
  }
  return h;
}

inline RVec harmonic_project(const DeformationComplex& c, int level, const RVec& v) {
  const auto& s = c.spectra[level];
  require_gap(s.gap, "harmonic projection");
  const RMat B = s.kernel();
  return B * (B.transpose() * v);
}

enum class GreenMethod { Auto, Dense, ConjugateGradient };

// G v: inverse of the Laplacian on the orthogonal complement of the harmonic space.
inline RVec green_apply(const DeformationComplex& c, int level, const RVec& v, GreenMethod method = GreenMethod::Auto,
                        double cg_tol = 1e-13) {
  const auto& s = c.spectra[level];
  require_gap(s.gap, "Green operator");
  const int z = s.gap.dim;
  const RMat B = s.kernel();
  const RVec w = v - B * (B.transpose() * v);
  if (method == GreenMethod::Auto) method = c.level_size(level) < kDenseLimit ? GreenMethod::Dense : GreenMethod::ConjugateGradient;
  if (method == GreenMethod::Dense) {
    const auto n = s.values.size();
    const RMat V = s.vectors.rightCols(n - z);
    const RVec inv = s.values.tail(n - z).cwiseInverse();
    return V * (inv.asDiagonal() * (V.transpose() * w));
  }
  const SpMat L = c.laplacian(level);
  RVec x = RVec::Zero(w.size()), r = w, p = r;
  double rr = r.squaredNorm();
  const double target = cg_tol * cg_tol * std::max(rr, 1e-300);
  const int max_it = int(10 * w.size() + 100);
  for (int it = 0; it < max_it && rr > target; ++it) {
    RVec Ap = L * p;
    Ap -= B * (B.transpose() * Ap);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0)) throw Error(ErrorCode::CGDivergence, "non-positive curvature in CG");
    const double a = rr / pAp;
    x += a * p;
    r -= a * Ap;
    const double rr2 = r.squaredNorm();
    p = r + (rr2 / rr) * p;
    rr = rr2;
  }
  if (!(rr <= target * 1e4)) throw Error(ErrorCode::CGDivergence, "CG did not converge");
  return x - B * (B.transpose() * x);
}

// v = H v + D D^T G v + D^T D G v at the given level.
struct HodgeParts {
  RVec harmonic, exact, coexact;
};

inline HodgeParts hodge_decompose(const DeformationComplex& c, int level, const RVec& v) {
  HodgeParts h;
  h.harmonic = harmonic_project(c, level, v);
  const RVec g = green_apply(c, level, v);
  const Eigen::Index n = v.size();
  h.exact = RVec::Zero(n);
  h.coexact = RVec::Zero(n);
  if (level == 1) {
    h.exact = c.D1 * (c.D1.transpose() * g);
    h.coexact = c.D2.transpose() * (c.D2 * g);
  } else if (level == 2) {
    h.exact = c.D2 * (c.D2.transpose() * g);
  } else {
    h.coexact = c.D1.transpose() * (c.D1 * g);
  }
  return h;
}

// ---- Kuranishi map and chart ----

inline RVec tilde_wedge_vector(const DeformationComplex& c, const RVec& alpha) {
  const auto& s = c.geom();
  return to_vector(s, tilde_wedge(s, tangent_from_vector(s, c.rank(), alpha)));
}

inline RVec modified_bracket_vector(const DeformationComplex& c, const RVec& u, const RVec& v) {
  const auto& s = c.geom();
  return to_vector(s, modified_bracket(s, tangent_from_vector(s, c.rank(), u), tangent_from_vector(s, c.rank(), v)));
}

// Correction term of the chart: D2^T G y on an exact complex, computed with the
// slice-restricted inverse so that results stay in ker D1^T.
inline RVec chart_correction(const DeformationComplex& c, const RVec& y) {
  if (c.slice_inverse.size() == 0) throw Error(ErrorCode::GapTooSmall, "slice inverse unavailable (uncertified H0 or H1)");
  return c.slice_inverse * y;
}

// k(alpha) = alpha + D2^T G (alpha ^~ alpha).
inline RVec kuranishi_map(const DeformationComplex& c, const RVec& alpha) {
  return alpha + chart_correction(c, tilde_wedge_vector(c, alpha));
}

struct FixedPointOptions {
  double tolerance = 1e-14;  // relative increment
  int max_iterations = 200;
  double max_norm = 1e6;
};

struct KuranishiInverse {
  RVec beta;
  int iterations = 0;
  double slice_residual = 0.0;     // ||D1^T beta||
  double equation_residual = 0.0;  // ||D2 beta + beta ^~ beta||
  double harmonic_residual = 0.0;  // ||H beta - eps gamma||
  std::vector<double> increments;
};

// Solves k(beta) = eps * gamma by the Picard iteration
// beta <- eps gamma - D2^T G (beta ^~ beta).
inline KuranishiInverse kuranishi_inverse(const DeformationComplex& c, const RVec& gamma, double eps,
                                          const FixedPointOptions& opt = {}) {
  KuranishiInverse out;
  const RVec target = eps * gamma;
  RVec beta = target;
  int growth = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const RVec next = target - chart_correction(c, tilde_wedge_vector(c, beta));
    const double inc = (next - beta).norm();
    out.increments.push_back(inc);
    beta = next;
    out.iterations = it + 1;
    if (!std::isfinite(inc) || beta.norm() > opt.max_norm)
      throw Error(ErrorCode::FixedPointDivergence, "Kuranishi iteration left the bounded region");
    if (inc <= opt.tolerance * std::max(beta.norm(), 1e-300) || inc == 0.0) break;
    if (out.increments.size() > 1 && inc > out.increments[out.increments.size() - 2]) {
      if (++growth >= 3) throw Error(ErrorCode::FixedPointDivergence, "Kuranishi increments grow");
    } else {
      growth = 0;
    }
    if (it + 1 == opt.max_iterations) throw Error(ErrorCode::FixedPointDivergence, "Kuranishi iteration did not settle");
  }
  out.beta = beta;
  out.slice_residual = (c.D1.transpose() * beta).norm();
  out.equation_residual = (c.D2 * beta + tilde_wedge_vector(c, beta)).norm();
  out.harmonic_residual = (harmonic_project(c, 1, beta) - target).norm();
  return out;
}

// Extension of a harmonic direction X to the chart point alpha: the solution
// of D2 Xbar + [alpha, Xbar]~ = 0 with Xbar - X in the range of the correction.
inline RVec chart_tangent(const DeformationComplex& c, const RVec& alpha, const RVec& X,
                          const FixedPointOptions& opt = {1e-13, 200, 1e6}) {
  RVec Xbar = X;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iterations; ++it) {
    const RVec next = X - chart_correction(c, modified_bracket_vector(c, alpha, Xbar));
    const double inc = (next - Xbar).norm();
    Xbar = next;
    if (!std::isfinite(inc)) throw Error(ErrorCode::FixedPointDivergence, "chart tangent iteration");
    if (inc <= opt.tolerance * std::max(Xbar.norm(), 1e-300) || inc == 0.0) return Xbar;
    if (inc > prev && it > 3) throw Error(ErrorCode::FixedPointDivergence, "chart tangent increments grow");
    prev = inc;
  }
  throw Error(ErrorCode::FixedPointDivergence, "chart tangent iteration did not settle");
}

// ---- index and dimension ----

struct IndexResult {
  int kernel = 0;    // dim ker D-hat = dim H1
  int cokernel = 0;  // dim ker D-hat*
  int index = 0;
  GapCount kernel_gap, cokernel_gap;
};

// D-hat alpha = (D2 alpha, D1^T alpha) in coordinates.
inline IndexResult basic_index(const DeformationComplex& c) {
  IndexResult r;
  const RMat D1 = RMat(c.D1), D2 = RMat(c.D2);
  RMat Dh(c.dims.c2 + c.dims.c0, c.dims.c1);
  Dh << D2, D1.transpose();
  r.kernel_gap = c.spectra[1].gap;
  require_gap(r.kernel_gap, "ker D-hat");
  auto co = symmetric_spectrum(Dh * Dh.transpose());
  r.cokernel_gap = co.gap;
  require_gap(co.gap, "ker D-hat*");
  r.kernel = r.kernel_gap.dim;
  r.cokernel = co.gap.dim;
  r.index = r.kernel - r.cokernel;
  return r;
}

inline int dimension_formula(int rank, int genus) { return 4 * rank * rank * (genus - 1) + 4; }

inline int index_formula(int rank, int genus) { return -2 * rank * rank * (2 - 2 * genus); }

// Coordinates of i * area * Id in one slot of the last space (normalized).
inline RVec canonical_h2_vector(const DeformationComplex& c, int slot) {
  const auto& s = c.geom();
  const int r = c.rank();
  const Form f = slot == 2 ? Form::D2 : Form::P2;
  MatCochain m = identity_times(area_form(s, f), r);
  m = cplx(0, 1) * m;
  m.skew = true;
  RVec part = to_vector(s, m);
  RVec v = RVec::Zero(c.dims.c2);
  v.segment(slot * c.dims.p2, part.size()) = part;
  return v / v.norm();
}

// ||H2 e|| / ||e|| for the three canonical vectors.
inline std::array<double, 3> h2_alignment(const DeformationComplex& c) {
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) out[k] = harmonic_project(c, 2, canonical_h2_vector(c, k)).norm();
  return out;
}

}  // namespace bh

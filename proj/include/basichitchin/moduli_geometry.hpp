#pragma once

#include <algorithm>
#include <cstdlib>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "deformation_complex.hpp"

namespace bh {

enum class Quaternion { I, J, K };

inline std::string to_string(Quaternion q) { return q == Quaternion::I ? "I" : q == Quaternion::J ? "J" : "K"; }

// Star endomorphism on the coordinates of one block of 1-cochains.
inline RVec star_vector(const TransverseSurface& s, int rank, const RVec& v) {
  return to_vector(s, rotate(s, from_vector(s, Form::P1, rank, v)));
}

// I(a1, a2) = (*a1, -*a2), J = (-a2, a1), K = (-*a2, -*a1).
inline RVec quaternion_apply(Quaternion q, const TransverseSurface& s, int rank, const RVec& alpha) {
  const Eigen::Index n = alpha.size() / 2;
  const RVec a1 = alpha.head(n), a2 = alpha.tail(n);
  RVec out(alpha.size());
  switch (q) {
    case Quaternion::I: out << star_vector(s, rank, a1), -star_vector(s, rank, a2); break;
    case Quaternion::J: out << -a2, a1; break;
    case Quaternion::K: out << -star_vector(s, rank, a2), -star_vector(s, rank, a1); break;
  }
  return out;
}

inline TangentVector quaternion_apply(Quaternion q, const TransverseSurface& s, const TangentVector& t) {
  return tangent_from_vector(s, t.a.rank, quaternion_apply(q, s, t.a.rank, to_vector(s, t)));
}

// g(alpha, beta) = -int Tr(a1 ^ *b1 + a2 ^ *b2); the coordinates are orthonormal for it.
inline double metric_g(const RVec& alpha, const RVec& beta) { return alpha.dot(beta); }

inline double metric_g(const TransverseSurface& s, const TangentVector& u, const TangentVector& v) {
  return inner(s, u.a, v.a) + inner(s, u.b, v.b);
}

namespace detail {

inline double trace_integral(const TransverseSurface& s, const MatCochain& a, const MatCochain& b) {
  return integrate(s, trace(wedge(s, a, b))).real();
}

}  // namespace detail

// Kahler forms evaluated through wedge products:
// omega_I = int Tr(a1^b1 - a2^b2), omega_J = int Tr(a1^*b2 - a2^*b1),
// omega_K = -int Tr(a1^b2 + a2^b1).
inline double kahler_form(Quaternion q, const TransverseSurface& s, const TangentVector& u, const TangentVector& v) {
  using detail::trace_integral;
  switch (q) {
    case Quaternion::I: return trace_integral(s, u.a, v.a) - trace_integral(s, u.b, v.b);
    case Quaternion::J:
      return trace_integral(s, u.a, hodge_star(s, v.b)) - trace_integral(s, u.b, hodge_star(s, v.a));
    default: return -(trace_integral(s, u.a, v.b) + trace_integral(s, u.b, v.a));
  }
}

inline double kahler_form(Quaternion q, const TransverseSurface& s, int rank, const RVec& u, const RVec& v) {
  return kahler_form(q, s, tangent_from_vector(s, rank, u), tangent_from_vector(s, rank, v));
}

struct ModuliTangentFrame {
  RMat basis;  // c1 x n, orthonormal
  RMat gram;
  std::array<RMat, 3> quaternion;  // B^T Q B
  std::array<RMat, 3> omega;
  std::array<double, 3> preservation{};  // max column norm of (1 - BB^T) Q B

  int dim() const { return int(basis.cols()); }
};

inline ModuliTangentFrame tangent_frame(const DeformationComplex& c) {
  const auto& s = c.geom();
  const int r = c.rank();
  require_gap(c.spectra[1].gap, "H1");
  ModuliTangentFrame f;
  f.basis = c.spectra[1].kernel();
  const int n = f.dim();
  f.gram = f.basis.transpose() * f.basis;
  std::vector<TangentVector> tv;
  for (int j = 0; j < n; ++j) tv.push_back(tangent_from_vector(s, r, f.basis.col(j)));
  for (int q = 0; q < 3; ++q) {
    RMat QB(f.basis.rows(), n);
    for (int j = 0; j < n; ++j) QB.col(j) = quaternion_apply(Quaternion(q), s, r, f.basis.col(j));
    f.quaternion[q] = f.basis.transpose() * QB;
    const RMat off = QB - f.basis * f.quaternion[q];
    f.preservation[q] = n ? off.colwise().norm().maxCoeff() : 0.0;
    f.omega[q] = RMat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f.omega[q](i, j) = kahler_form(Quaternion(q), s, tv[i], tv[j]);
  }
  return f;
}

struct QuaternionCheck {
  std::array<double, 3> square_defect{};  // ||Q^2 + Id||
  double product_defect = 0.0;            // ||IJ - K||
  std::array<double, 3> isometry_defect{};  // ||Q^T Q - Id||
  std::array<double, 3> compatibility{};    // max |omega_Q - g(., Q .)|
  std::array<double, 3> omega_skew{};
  std::array<double, 3> preservation{};
  double gram_defect = 0.0;
  bool dim_divisible_by_4 = false;

  double algebra_max() const {
    return std::max({square_defect[0], square_defect[1], square_defect[2], product_defect, isometry_defect[0],
                     isometry_defect[1], isometry_defect[2]});
  }
  double compatibility_max() const { return std::max({compatibility[0], compatibility[1], compatibility[2]}); }
  double preservation_max() const { return std::max({preservation[0], preservation[1], preservation[2]}); }
};

inline QuaternionCheck check_frame(const ModuliTangentFrame& f) {
  QuaternionCheck out;
  const int n = f.dim();
  const RMat Id = RMat::Identity(n, n);
  auto maxabs = [](const RMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; };
  for (int q = 0; q < 3; ++q) {
    const RMat& Q = f.quaternion[q];
    out.square_defect[q] = maxabs(Q * Q + Id);
    out.isometry_defect[q] = maxabs(Q.transpose() * Q - Id);
    // g(b_i, Q b_j) = (B^T Q B)_ij when Q preserves the span.
    out.compatibility[q] = maxabs(f.omega[q] - f.gram * Q);
    out.omega_skew[q] = maxabs(f.omega[q] + f.omega[q].transpose());
    out.preservation[q] = f.preservation[q];
  }
  out.product_defect = maxabs(f.quaternion[0] * f.quaternion[1] - f.quaternion[2]);
  out.gram_defect = maxabs(f.gram - Id);
  out.dim_divisible_by_4 = n % 4 == 0;
  return out;
}

// Pointwise compatibility on full tangent vectors, independent of the frame:
// max over pairs |omega_Q(u, v) - g(u, Q v)|.
inline double compatibility_defect(Quaternion q, const TransverseSurface& s, int rank, const RMat& vectors) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < vectors.cols(); ++i)
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
      const double w = kahler_form(q, s, rank, vectors.col(i), vectors.col(j));
      const double g = metric_g(vectors.col(i), quaternion_apply(q, s, rank, vectors.col(j)));
      worst = std::max(worst, std::abs(w - g));
    }
  return worst;
}

// ---- normal coordinates ----

inline int thread_count() {
  if (const char* env = std::getenv("BHIT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct NormalCoordinateRow {
  double eps = 0.0;
  double dg = 0.0;      // |g(+eps) - g(-eps)| / (2 eps)
  double domega = 0.0;  // same for omega_I
  int iterations = 0;
};

struct NormalCoordinateReport {
  int x = 0, y = 0, z = 0;  // basis directions
  std::vector<NormalCoordinateRow> rows;
  double slope_g = 0.0, slope_omega = 0.0;  // log-log slope, NaN if all values are at roundoff
  double max_dg = 0.0, max_domega = 0.0;
};

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace detail {

struct ChartSample {
  double g = 0.0, omega = 0.0;
  int iterations = 0;
};

// g and omega_I of the horizontal parts of Ybar, Zbar at the chart point c(t).
inline ChartSample chart_sample(const DeformationComplex& c, const RVec& X, const RVec& Y, const RVec& Z, double t) {
  const auto& s = c.geom();
  const int r = c.rank();
  FixedPointOptions opt;
  opt.tolerance = 1e-12;
  const auto k = kuranishi_inverse(c, X, t, opt);
  const RVec Yb = chart_tangent(c, k.beta, Y), Zb = chart_tangent(c, k.beta, Z);
  const HitchinPair q = shifted(c.pair, tangent_from_vector(s, r, k.beta));
  const RMat D1 = RMat(assemble_D1(q));
  Eigen::CompleteOrthogonalDecomposition<RMat> cod(D1);
  auto horizontal = [&](const RVec& v) -> RVec { return v - D1 * cod.solve(v); };
  const RVec hY = horizontal(Yb), hZ = horizontal(Zb);
  return {metric_g(hY, hZ), kahler_form(Quaternion::I, s, r, hY, hZ), k.iterations};
}

}  // namespace detail

// Centered differences of g(Ybar, Zbar) and omega_I(Ybar, Zbar) along the chart
// curve t -> c(t X) through the slice origin.
inline NormalCoordinateReport normal_coordinate_check(const DeformationComplex& c, const ModuliTangentFrame& f, int x,
                                                      int y, int z, const std::vector<double>& steps) {
  NormalCoordinateReport rep;
  rep.x = x;
  rep.y = y;
  rep.z = z;
  const RVec X = f.basis.col(x), Y = f.basis.col(y), Z = f.basis.col(z);
  std::vector<double> ts;
  for (double e : steps) {
    ts.push_back(e);
    ts.push_back(-e);
  }
  std::vector<detail::ChartSample> samples(ts.size());
  const size_t batch = size_t(thread_count());
  for (size_t start = 0; start < ts.size(); start += batch) {
    std::vector<std::future<detail::ChartSample>> jobs;
    for (size_t i = start; i < std::min(ts.size(), start + batch); ++i)
      jobs.push_back(std::async(batch > 1 ? std::launch::async : std::launch::deferred,
                                [&, i] { return detail::chart_sample(c, X, Y, Z, ts[i]); }));
    for (size_t i = 0; i < jobs.size(); ++i) samples[start + i] = jobs[i].get();
  }
  std::vector<double> dg, dw;
  for (size_t i = 0; i < steps.size(); ++i) {
    const auto& p = samples[2 * i];
    const auto& m = samples[2 * i + 1];
    NormalCoordinateRow row;
    row.eps = steps[i];
    row.dg = std::abs(p.g - m.g) / (2 * steps[i]);
    row.domega = std::abs(p.omega - m.omega) / (2 * steps[i]);
    row.iterations = std::max(p.iterations, m.iterations);
    rep.rows.push_back(row);
    dg.push_back(row.dg);
    dw.push_back(row.domega);
    rep.max_dg = std::max(rep.max_dg, row.dg);
    rep.max_domega = std::max(rep.max_domega, row.domega);
  }
  rep.slope_g = loglog_slope(steps, dg);
  rep.slope_omega = loglog_slope(steps, dw);
  return rep;
}

// Pass rule: slope >= min_slope, or every derivative below the absolute floor.
inline bool normal_coordinate_pass(double slope, double max_value, double min_slope = 1.8, double floor = 1e-12) {
  return max_value <= floor || (std::isfinite(slope) && slope >= min_slope);
}

}  // namespace bh

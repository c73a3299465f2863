#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "linalg.hpp"

namespace bh {

// Cochain spaces. Primal k-cochains live on k-cells; dual k-cochains live on
// the dual (2-k)-cells, so D0 sits on faces, D1 on edges and D2 on vertices.
// The spectral torus has a single set of collocation points and the dual flag
// is bookkeeping only.
enum class Form { P0, P1, P2, D0, D1, D2 };

constexpr int degree(Form f) {
  switch (f) {
    case Form::P0:
    case Form::D0: return 0;
    case Form::P1:
    case Form::D1: return 1;
    default: return 2;
  }
}

constexpr bool is_dual(Form f) { return f == Form::D0 || f == Form::D1 || f == Form::D2; }

inline Form make_form(int deg, bool dual) {
  switch (deg) {
    case 0: return dual ? Form::D0 : Form::P0;
    case 1: return dual ? Form::D1 : Form::P1;
    case 2: return dual ? Form::D2 : Form::P2;
  }
  throw Error(ErrorCode::DegreeOutOfRange, "degree " + std::to_string(deg) + " outside 0..2");
}

inline const char* to_string(Form f) {
  static const char* names[] = {"P0", "P1", "P2", "D0", "D1", "D2"};
  return names[static_cast<int>(f)];
}

inline Form form_from_string(const std::string& s) {
  for (int i = 0; i < 6; ++i)
    if (s == to_string(static_cast<Form>(i))) return static_cast<Form>(i);
  throw Error(ErrorCode::InvalidConfig, "unknown form type '" + s + "'");
}

constexpr int components(Form f) { return degree(f) == 1 ? 2 : 1; }

inline Form star_target(Form f) { return make_form(2 - degree(f), !is_dual(f)); }

inline Form d_target(Form f) {
  if (degree(f) >= 2) throw Error(ErrorCode::DegreeOutOfRange, std::string("d of ") + to_string(f));
  return make_form(degree(f) + 1, is_dual(f));
}

inline Form product_form(Form a, Form b) {
  const int p = degree(a) + degree(b);
  if (p > 2)
    throw Error(ErrorCode::DegreeOutOfRange,
                std::string("product of ") + to_string(a) + " and " + to_string(b));
  return make_form(p, is_dual(a) || is_dual(b));
}

enum class Location { Vertex, Edge, Face };

constexpr Location natural_location(Form f) {
  switch (f) {
    case Form::P0:
    case Form::D2: return Location::Vertex;
    case Form::P1:
    case Form::D1: return Location::Edge;
    default: return Location::Face;
  }
}

struct ScalarCochain {
  Form form = Form::P0;
  CVec values;

  int degree() const { return bh::degree(form); }
  Eigen::Index size() const { return values.size(); }
};

// Point in local square coordinates; spectral surfaces use square 0.
struct Site {
  int square = 0;
  double x = 0, y = 0;
};

// A vector-valued field on the surface sampled in local coordinates. Degree-0
// and degree-2 forms use only the first component (a density for 2-forms).
using FieldFn = std::function<std::array<cplx, 2>(double x, double y)>;

namespace detail {

struct SpectralData {
  int N = 0, K = 0, m = 0;
  double L = 1.0;
  CMat E;     // N x m, E(j, k+K) = exp(2 pi i k j / N)
  CMat Einv;  // m x N
  RVec wave;  // 2 pi k / L

  void init(int n, double area) {
    N = n;
    K = (N - 1) / 3;
    m = 2 * K + 1;
    L = std::sqrt(area);
    E.resize(N, m);
    wave.resize(m);
    for (int k = -K; k <= K; ++k) {
      wave[k + K] = 2 * std::numbers::pi * k / L;
      for (int j = 0; j < N; ++j) E(j, k + K) = std::polar(1.0, 2 * std::numbers::pi * k * j / N);
    }
    Einv = E.adjoint() / double(N);
  }

  // Grid values are indexed ix + N*iy; coefficients (kx+K) + m*(ky+K).
  CMat forward(const cplx* g) const {
    Eigen::Map<const CMat> G(g, N, N);
    return Einv * G * Einv.transpose();
  }
  void inverse(const CMat& C, cplx* g) const {
    Eigen::Map<CMat> G(g, N, N);
    G.noalias() = E * C * E.transpose();
  }
  void project(cplx* g) const { inverse(forward(g), g); }
  Eigen::Index points() const { return Eigen::Index(N) * N; }
};

struct GridData {
  int S = 0, n = 0;
  double h = 0, side = 0;
  int V = 0, E = 0, F = 0;
  std::vector<int> tail, head;
  std::vector<char> is_x;
  std::vector<std::array<int, 2>> edge_faces;  // x-edge {below, above}; y-edge {left, right}
  std::vector<std::array<int, 4>> face_edges;  // bottom, top, left, right
  std::vector<std::array<int, 4>> face_verts;  // (i,j) (i+1,j) (i,j+1) (i+1,j+1)
  std::vector<double> dual_area;
  std::vector<Site> vertex_site, edge_site, face_site;  // edge_site is the edge start point
  SpMat d0, d1;
  std::map<std::tuple<int, int, int>, SpMatC> samplers;  // (form, location, component)
  SpMatC rotation;
};

class UnionFind {
 public:
  explicit UnionFind(int n) : p_(n) { std::iota(p_.begin(), p_.end(), 0); }
  int find(int a) {
    while (p_[a] != a) a = p_[a] = p_[p_[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) p_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> p_;
};

// Rank over Z/p with p = 2^31 - 1. Surface cellular homology has no torsion,
// so this equals the rational rank.
inline int rank_mod_p(const SpMat& m) {
  constexpr std::int64_t p = 2147483647;
  auto inv = [](std::int64_t a) {
    std::int64_t r = 1, e = p - 2;
    a %= p;
    if (a < 0) a += p;
    while (e) {
      if (e & 1) r = r * a % p;
      a = a * a % p;
      e >>= 1;
    }
    return r;
  };
  SpMat t = m.transpose();  // rows of m as columns
  std::map<int, std::map<int, std::int64_t>> pivots;
  int rank = 0;
  for (int r = 0; r < t.outerSize(); ++r) {
    std::map<int, std::int64_t> row;
    for (SpMat::InnerIterator it(t, r); it; ++it) {
      std::int64_t v = std::llround(it.value()) % p;
      if (v < 0) v += p;
      if (v) row[int(it.index())] = v;
    }
    while (!row.empty()) {
      auto [c, v] = *row.begin();
      auto pit = pivots.find(c);
      if (pit == pivots.end()) {
        const std::int64_t iv = inv(v);
        for (auto& [k, x] : row) x = x * iv % p;
        pivots.emplace(c, std::move(row));
        ++rank;
        break;
      }
      for (const auto& [k, x] : pit->second) {
        std::int64_t nv = (row[k] - v * x) % p;
        if (nv < 0) nv += p;
        if (nv)
          row[k] = nv;
        else
          row.erase(k);
      }
    }
  }
  return rank;
}

inline double simpson(const std::function<double(double)>& f, double a, double b) {
  return (b - a) / 6.0 * (f(a) + 4 * f(0.5 * (a + b)) + f(b));
}

}  // namespace detail

class TransverseSurface {
 public:
  explicit TransverseSurface(const GeometryConfig& cfg) : cfg_(cfg) {
    if (cfg.backend == Backend::SpectralTorus) {
      if (cfg.genus != 1)
        throw Error(ErrorCode::GenusMismatch, "spectral torus backend requires genus 1, got " +
                                                  std::to_string(cfg.genus));
      if (cfg.resolution < 4)
        throw Error(ErrorCode::InvalidConfig, "spectral resolution must be at least 4");
      sp_.init(cfg.resolution, cfg.total_area);
    } else {
      build_grid();
    }
  }

  const GeometryConfig& config() const { return cfg_; }
  Backend backend() const { return cfg_.backend; }
  bool spectral() const { return cfg_.backend == Backend::SpectralTorus; }
  int genus() const { return cfg_.genus; }
  int resolution() const { return cfg_.resolution; }
  double total_area() const { return cfg_.total_area; }

  // Mesh width: grid spacing, or the collocation spacing on the torus.
  double mesh_width() const { return spectral() ? sp_.L / sp_.N : g_.h; }
  // Local coordinates are periodic with this period (torus side / square side).
  double period() const { return spectral() ? sp_.L : g_.side; }
  int retained_modes() const { return spectral() ? sp_.m : 0; }

  const detail::SpectralData& spectral_data() const { return sp_; }
  const detail::GridData& grid_data() const { return g_; }

  Eigen::Index location_count(Location loc) const {
    if (spectral()) return sp_.points();
    switch (loc) {
      case Location::Vertex: return g_.V;
      case Location::Edge: return g_.E;
      default: return g_.F;
    }
  }

  // Number of complex slots holding a cochain of this type.
  Eigen::Index cell_count(Form f) const {
    if (spectral()) return sp_.points() * components(f);
    return location_count(natural_location(f));
  }

  // Real coordinate dimension of the real cochains of this type.
  Eigen::Index dof(Form f) const {
    if (spectral()) return Eigen::Index(sp_.m) * sp_.m * components(f);
    return cell_count(f);
  }

  int euler_characteristic() const {
    return int(dof(Form::P0)) - int(dof(Form::P1)) + int(dof(Form::P2));
  }

  std::array<int, 3> betti_numbers() const {
    int r0, r1;
    if (spectral()) {
      r0 = r1 = sp_.m * sp_.m - 1;  // every nonzero wave vector has a nonzero multiplier
    } else {
      r0 = detail::rank_mod_p(g_.d0);
      r1 = detail::rank_mod_p(g_.d1);
    }
    const int n0 = int(dof(Form::P0)), n1 = int(dof(Form::P1)), n2 = int(dof(Form::P2));
    return {n0 - r0, n1 - r0 - r1, n2 - r1};
  }

  // ---- linear operators on column blocks (slots x columns) ----

  CMat d(Form from, const CMat& X) const {
    check_rows(from, X);
    const Form to = d_target(from);
    if (spectral()) {
      const auto P = sp_.points();
      CMat out(cell_count(to), X.cols());
      for (Eigen::Index c = 0; c < X.cols(); ++c) {
        if (degree(from) == 0) {
          CMat C = sp_.forward(X.col(c).data());
          CMat Cx = C, Cy = C;
          for (int a = 0; a < sp_.m; ++a)
            for (int b = 0; b < sp_.m; ++b) {
              Cx(a, b) *= cplx(0, sp_.wave[a]);
              Cy(a, b) *= cplx(0, sp_.wave[b]);
            }
          sp_.inverse(Cx, out.col(c).data());
          sp_.inverse(Cy, out.col(c).data() + P);
        } else {
          CMat Ca = sp_.forward(X.col(c).data());
          CMat Cb = sp_.forward(X.col(c).data() + P);
          CMat C(sp_.m, sp_.m);
          for (int a = 0; a < sp_.m; ++a)
            for (int b = 0; b < sp_.m; ++b)
              C(a, b) = cplx(0, sp_.wave[a]) * Cb(a, b) - cplx(0, sp_.wave[b]) * Ca(a, b);
          sp_.inverse(C, out.col(c).data());
        }
      }
      return out;
    }
    switch (from) {
      case Form::P0: return g_.d0.cast<cplx>() * X;
      case Form::P1: return g_.d1.cast<cplx>() * X;
      case Form::D0: return SpMat(g_.d1.transpose()).cast<cplx>() * X;
      default: return -(SpMat(g_.d0.transpose()).cast<cplx>() * X);
    }
  }

  // Hodge star between primal and dual cochains; star(star(x)) = (-1)^{k(2-k)} x.
  CMat star(Form from, const CMat& X) const {
    check_rows(from, X);
    if (spectral()) {
      if (degree(from) != 1) return X;
      const auto P = sp_.points();
      CMat out(X.rows(), X.cols());
      out.topRows(P) = -X.bottomRows(P);
      out.bottomRows(P) = X.topRows(P);
      return out;
    }
    const double h2 = g_.h * g_.h;
    switch (from) {
      case Form::P0: return dual_area_diag() * X;
      case Form::D2: return dual_area_diag().inverse() * X;
      case Form::P1: return X;
      case Form::D1: return -X;
      case Form::P2: return X / h2;
      default: return X * h2;
    }
  }

  // The star as an endomorphism of primal 1-cochains. Exact on the torus; on
  // the grid it is the staggered rotation and squares to -Id only up to tau_star.
  CMat rotate(const CMat& X) const {
    check_rows(Form::P1, X);
    if (spectral()) return star(Form::P1, X);
    return g_.rotation * X;
  }

  // Grid products of a primal with a dual 1-cochain: each edge crosses one dual
  // edge, and the product of the two values is split between the endpoints.
  bool pairs_on_edges(Form a, Form b) const {
    return !spectral() && degree(a) == 1 && degree(b) == 1 && is_dual(a) != is_dual(b);
  }

  CMat split_to_vertices(const CMat& edge_values) const {
    CMat out = CMat::Zero(g_.V, edge_values.cols());
    for (int e = 0; e < g_.E; ++e) {
      out.row(g_.tail[e]) += 0.5 * edge_values.row(e);
      out.row(g_.head[e]) += 0.5 * edge_values.row(e);
    }
    return out;
  }

  // Component `comp` of a cochain, as densities at the given locations.
  CMat sample(Form f, Location loc, int comp, const CMat& X) const {
    check_rows(f, X);
    if (spectral()) return X.middleRows(comp * sp_.points(), sp_.points());
    return g_.samplers.at({static_cast<int>(f), static_cast<int>(loc), comp}) * X;
  }

  // Inverse of sampling at the natural location of `target`; comps holds one
  // block per component. Spectral products are projected back to the band.
  CMat deposit(Form target, const std::vector<CMat>& comps) const {
    if (int(comps.size()) != components(target))
      throw Error(ErrorCode::DegreeMismatch, "deposit: wrong number of components");
    const Eigen::Index cols = comps[0].cols();
    if (spectral()) {
      const auto P = sp_.points();
      CMat out(cell_count(target), cols);
      for (size_t c = 0; c < comps.size(); ++c) out.middleRows(c * P, P) = comps[c];
      for (Eigen::Index j = 0; j < cols; ++j)
        for (size_t c = 0; c < comps.size(); ++c) sp_.project(out.col(j).data() + c * P);
      return out;
    }
    const double h = g_.h;
    CMat out(cell_count(target), cols);
    switch (target) {
      case Form::P0:
      case Form::D0: return comps[0];
      case Form::D2: return dual_area_diag() * comps[0];
      case Form::P2: return comps[0] * (h * h);
      case Form::P1:
        for (int e = 0; e < g_.E; ++e) out.row(e) = (g_.is_x[e] ? comps[0].row(e) : comps[1].row(e)) * h;
        return out;
      default:
        for (int e = 0; e < g_.E; ++e) out.row(e) = g_.is_x[e] ? comps[1].row(e) * h : comps[0].row(e) * (-h);
        return out;
    }
  }

  // Band projection (identity on the grid).
  CMat project(Form f, CMat X) const {
    if (!spectral()) return X;
    const auto P = sp_.points();
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      for (int c = 0; c < components(f); ++c) sp_.project(X.col(j).data() + c * P);
    return X;
  }

  // Quadrature weights of the discrete L2 product, per slot.
  RVec weights(Form f) const {
    if (spectral()) return RVec::Constant(cell_count(f), sp_.L * sp_.L / double(sp_.points()));
    const double h2 = g_.h * g_.h;
    RVec w(cell_count(f));
    switch (f) {
      case Form::P0:
        for (int v = 0; v < g_.V; ++v) w[v] = g_.dual_area[v];
        break;
      case Form::D2:
        for (int v = 0; v < g_.V; ++v) w[v] = 1.0 / g_.dual_area[v];
        break;
      case Form::P1:
      case Form::D1: w.setOnes(); break;
      case Form::P2: w.setConstant(1.0 / h2); break;
      case Form::D0: w.setConstant(h2); break;
    }
    return w;
  }

  // Real parts of cochain columns to orthonormal real coordinates.
  RMat to_coords(Form f, const CMat& X) const {
    check_rows(f, X);
    RMat out(dof(f), X.cols());
    if (spectral()) {
      const int m = sp_.m, M = m * m, c0 = sp_.K + m * sp_.K;
      const double L = sp_.L, s2 = std::sqrt(2.0) * L;
      for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (int c = 0; c < components(f); ++c) {
          CVec re = X.col(j).segment(c * sp_.points(), sp_.points()).real().cast<cplx>();
          CMat C = sp_.forward(re.data());
          const cplx* cd = C.data();
          double* o = out.col(j).data() + c * M;
          o[c0] = L * cd[c0].real();
          for (int q = c0 + 1; q < M; ++q) {
            o[q] = s2 * cd[q].real();
            o[M - 1 - q] = -s2 * cd[q].imag();
          }
        }
      return out;
    }
    const RVec sw = weights(f).cwiseSqrt();
    return sw.asDiagonal() * X.real();
  }

  CMat from_coords(Form f, const RMat& Y) const {
    if (Y.rows() != dof(f)) throw Error(ErrorCode::DegreeMismatch, "coordinate length mismatch");
    CMat out(cell_count(f), Y.cols());
    if (spectral()) {
      const int m = sp_.m, M = m * m, c0 = sp_.K + m * sp_.K;
      const double L = sp_.L, s2 = std::sqrt(2.0) * L;
      CMat C(m, m);
      for (Eigen::Index j = 0; j < Y.cols(); ++j)
        for (int c = 0; c < components(f); ++c) {
          const double* y = Y.col(j).data() + c * M;
          cplx* cd = C.data();
          cd[c0] = y[c0] / L;
          for (int q = c0 + 1; q < M; ++q) {
            cd[q] = cplx(y[q], -y[M - 1 - q]) / s2;
            cd[M - 1 - q] = std::conj(cd[q]);
          }
          sp_.inverse(C, out.col(j).data() + c * sp_.points());
        }
      return out;
    }
    const RVec isw = weights(f).cwiseSqrt().cwiseInverse();
    return (isw.asDiagonal() * Y).cast<cplx>();
  }

  // Sites at the natural slots of a cochain type.
  const std::vector<Site>& sites(Location loc) const {
    switch (loc) {
      case Location::Vertex: return g_.vertex_site;
      case Location::Edge: return g_.edge_site;
      default: return g_.face_site;
    }
  }

  // Discretize a smooth field given in local coordinates (periodic with period()).
  ScalarCochain discretize(Form f, const FieldFn& field) const {
    ScalarCochain out{f, CVec(cell_count(f))};
    if (spectral()) {
      const int N = sp_.N;
      const double dx = sp_.L / N;
      const auto P = sp_.points();
      for (int iy = 0; iy < N; ++iy)
        for (int ix = 0; ix < N; ++ix) {
          auto v = field(ix * dx, iy * dx);
          for (int c = 0; c < components(f); ++c) out.values[c * P + ix + N * iy] = v[c];
        }
      CMat tmp = out.values;
      out.values = project(f, tmp).col(0);
      return out;
    }
    const double h = g_.h;
    auto re = [&](int c) { return [&, c](double x, double y) { return field(x, y)[c]; }; };
    auto line = [&](int c, double x0, double y0, double dxv, double dyv) {
      auto fc = re(c);
      std::array<cplx, 3> v{fc(x0, y0), fc(x0 + dxv / 2, y0 + dyv / 2), fc(x0 + dxv, y0 + dyv)};
      return (v[0] + 4.0 * v[1] + v[2]) / 6.0 * h;
    };
    auto square = [&](double xc, double yc) {
      cplx s = 0;
      const double o[3] = {-h / 2, 0, h / 2}, w[3] = {1, 4, 1};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += w[a] * w[b] * field(xc + o[a], yc + o[b])[0];
      return s / 36.0 * h * h;
    };
    switch (f) {
      case Form::P0:
        for (int v = 0; v < g_.V; ++v) out.values[v] = field(g_.vertex_site[v].x, g_.vertex_site[v].y)[0];
        break;
      case Form::D2:
        for (int v = 0; v < g_.V; ++v)
          out.values[v] = field(g_.vertex_site[v].x, g_.vertex_site[v].y)[0] * g_.dual_area[v];
        break;
      case Form::P2:
        for (int q = 0; q < g_.F; ++q) out.values[q] = square(g_.face_site[q].x, g_.face_site[q].y);
        break;
      case Form::D0:
        for (int q = 0; q < g_.F; ++q) out.values[q] = field(g_.face_site[q].x, g_.face_site[q].y)[0];
        break;
      case Form::P1:
        for (int e = 0; e < g_.E; ++e) {
          const auto& s = g_.edge_site[e];
          out.values[e] = g_.is_x[e] ? line(0, s.x, s.y, h, 0) : line(1, s.x, s.y, 0, h);
        }
        break;
      case Form::D1:
        for (int e = 0; e < g_.E; ++e) {
          const auto& s = g_.edge_site[e];
          out.values[e] = g_.is_x[e] ? line(1, s.x + h / 2, s.y - h / 2, 0, h)
                                     : -line(0, s.x - h / 2, s.y + h / 2, h, 0);
        }
        break;
    }
    return out;
  }

  // Defect ||R^2 w + w|| / ||w|| of the 1-cochain rotation on a fixed smooth form.
  double star_defect() const {
    const double a = period(), tp = 2 * std::numbers::pi / a;
    ScalarCochain w = discretize(Form::P1, [&](double x, double y) {
      return std::array<cplx, 2>{std::sin(tp * (x + 2 * y)) + 0.5 * std::cos(tp * y),
                                 std::cos(tp * (2 * x - y)) - 0.3 * std::sin(tp * x)};
    });
    CMat W = w.values;
    CMat r = rotate(rotate(W)) + W;
    const RVec wt = weights(Form::P1);
    auto nrm = [&](const CMat& v) { return std::sqrt((wt.asDiagonal() * v.cwiseAbs2()).sum()); };
    return nrm(r) / nrm(W);
  }

 private:
  void check_rows(Form f, const CMat& X) const {
    if (X.rows() != cell_count(f))
      throw Error(ErrorCode::DegreeMismatch, std::string("cochain of type ") + to_string(f) + " has " +
                                                 std::to_string(X.rows()) + " slots, expected " +
                                                 std::to_string(cell_count(f)));
  }

  Eigen::DiagonalMatrix<double, Eigen::Dynamic> dual_area_diag() const {
    return Eigen::Map<const RVec>(g_.dual_area.data(), g_.V).asDiagonal();
  }

  void build_grid();

  GeometryConfig cfg_;
  detail::SpectralData sp_;
  detail::GridData g_;
};

inline void TransverseSurface::build_grid() {
  const auto& glu = cfg_.gluing;
  const int S = cfg_.square_count();
  if (S == 0) throw Error(ErrorCode::InvalidGluing, "grid backend needs a gluing table");
  std::map<EdgeRef, int> used;
  std::vector<int> right(S, -1), top(S, -1);
  for (const auto& raw : glu) {
    const EdgeGluing g = canonical(raw);
    for (const EdgeRef& r : {g.from, g.to})
      if (used[r]++)
        throw Error(ErrorCode::InvalidGluing, "side " + std::string(1, side_letter(r.side)) + " of square " +
                                                  std::to_string(r.square) + " glued twice");
    if (g.from.side == Side::Right && g.to.side == Side::Left)
      right[g.from.square] = g.to.square;
    else if (g.from.side == Side::Top && g.to.side == Side::Bottom)
      top[g.from.square] = g.to.square;
    else
      throw Error(ErrorCode::InvalidGluing, "only Right->Left and Top->Bottom translations are allowed");
  }
  for (int s = 0; s < S; ++s)
    if (right[s] < 0 || top[s] < 0)
      throw Error(ErrorCode::InvalidGluing, "square " + std::to_string(s) + " has an unglued side");

  const int n = cfg_.resolution;
  auto& g = g_;
  g.S = S;
  g.n = n;
  g.side = std::sqrt(cfg_.total_area / S);
  g.h = g.side / n;
  const int n1 = n + 1;
  auto vraw = [&](int s, int i, int j) { return s * n1 * n1 + j * n1 + i; };
  auto xraw = [&](int s, int i, int j) { return s * n * n1 + j * n + i; };
  auto yraw = [&](int s, int i, int j) { return s * n1 * n + j * n1 + i; };
  detail::UnionFind uv(S * n1 * n1), ux(S * n * n1), uy(S * n1 * n);
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j <= n; ++j) uv.unite(vraw(s, n, j), vraw(right[s], 0, j));
    for (int i = 0; i <= n; ++i) uv.unite(vraw(s, i, n), vraw(top[s], i, 0));
    for (int i = 0; i < n; ++i) ux.unite(xraw(s, i, n), xraw(top[s], i, 0));
    for (int j = 0; j < n; ++j) uy.unite(yraw(s, n, j), yraw(right[s], 0, j));
  }
  auto compact = [](detail::UnionFind& uf, int total, std::vector<int>& id) {
    id.assign(total, -1);
    int c = 0;
    for (int k = 0; k < total; ++k)
      if (uf.find(k) == k) id[k] = c++;
    for (int k = 0; k < total; ++k) id[k] = id[uf.find(k)];
    return c;
  };
  std::vector<int> vid, xid, yid;
  g.V = compact(uv, S * n1 * n1, vid);
  const int Ex = compact(ux, S * n * n1, xid);
  const int Ey = compact(uy, S * n1 * n, yid);
  g.E = Ex + Ey;
  g.F = S * n * n;
  g.tail.assign(g.E, -1);
  g.head.assign(g.E, -1);
  g.is_x.assign(g.E, 0);
  g.edge_faces.assign(g.E, {-1, -1});
  g.edge_site.assign(g.E, {});
  g.vertex_site.assign(g.V, {});
  g.face_site.resize(g.F);
  g.face_edges.resize(g.F);
  g.face_verts.resize(g.F);
  g.dual_area.assign(g.V, 0.0);
  const double h = g.h;

  for (int s = 0; s < S; ++s) {
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) g.vertex_site[vid[vraw(s, i, j)]] = {s, i * h, j * h};
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i < n; ++i) {
        const int e = xid[xraw(s, i, j)];
        g.is_x[e] = 1;
        g.tail[e] = vid[vraw(s, i, j)];
        g.head[e] = vid[vraw(s, i + 1, j)];
        g.edge_site[e] = {s, i * h, j * h};
      }
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= n; ++i) {
        const int e = Ex + yid[yraw(s, i, j)];
        g.tail[e] = vid[vraw(s, i, j)];
        g.head[e] = vid[vraw(s, i, j + 1)];
        g.edge_site[e] = {s, i * h, j * h};
      }
  }
  for (int s = 0; s < S; ++s)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int f = s * n * n + j * n + i;
        const int b = xid[xraw(s, i, j)], t = xid[xraw(s, i, j + 1)];
        const int l = Ex + yid[yraw(s, i, j)], r = Ex + yid[yraw(s, i + 1, j)];
        g.face_edges[f] = {b, t, l, r};
        g.face_verts[f] = {vid[vraw(s, i, j)], vid[vraw(s, i + 1, j)], vid[vraw(s, i, j + 1)],
                           vid[vraw(s, i + 1, j + 1)]};
        g.face_site[f] = {s, (i + 0.5) * h, (j + 0.5) * h};
        g.edge_faces[b][1] = f;
        g.edge_faces[t][0] = f;
        g.edge_faces[l][1] = f;
        g.edge_faces[r][0] = f;
        for (int v : g.face_verts[f]) g.dual_area[v] += 0.25 * h * h;
      }
  for (int e = 0; e < g.E; ++e)
    if (g.edge_faces[e][0] < 0 || g.edge_faces[e][1] < 0)
      throw Error(ErrorCode::InvalidGluing, "edge without two adjacent faces");

  std::vector<Eigen::Triplet<double>> t0, t1;
  for (int e = 0; e < g.E; ++e) {
    t0.emplace_back(e, g.head[e], 1.0);
    t0.emplace_back(e, g.tail[e], -1.0);
  }
  for (int f = 0; f < g.F; ++f) {
    const auto& fe = g.face_edges[f];
    t1.emplace_back(f, fe[0], 1.0);
    t1.emplace_back(f, fe[3], 1.0);
    t1.emplace_back(f, fe[1], -1.0);
    t1.emplace_back(f, fe[2], -1.0);
  }
  g.d0.resize(g.E, g.V);
  g.d0.setFromTriplets(t0.begin(), t0.end());
  g.d1.resize(g.F, g.E);
  g.d1.setFromTriplets(t1.begin(), t1.end());
  g.d0.prune(0.0);
  g.d1.prune(0.0);

  const int chi = g.V - g.E + g.F;
  if (chi != 2 - 2 * cfg_.genus)
    throw Error(ErrorCode::GenusMismatch, "declared genus " + std::to_string(cfg_.genus) +
                                              " but the gluing has Euler characteristic " +
                                              std::to_string(chi));

  // Incidence lists for vertex sampling.
  std::vector<std::vector<int>> vx(g.V), vy(g.V), vf(g.V);
  for (int e = 0; e < g.E; ++e) {
    auto& lst = g.is_x[e] ? vx : vy;
    lst[g.tail[e]].push_back(e);
    lst[g.head[e]].push_back(e);
  }
  for (int f = 0; f < g.F; ++f)
    for (int v : g.face_verts[f]) vf[v].push_back(f);

  using T = Eigen::Triplet<cplx>;
  auto make = [](Eigen::Index rows, Eigen::Index cols, const std::vector<T>& t) {
    SpMatC m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  };
  auto put = [&](Form f, Location loc, int comp, Eigen::Index rows, Eigen::Index cols, const std::vector<T>& t) {
    g.samplers[{static_cast<int>(f), static_cast<int>(loc), comp}] = make(rows, cols, t);
  };
  const int V = g.V, E = g.E, F = g.F;
  // The four edges of the other orientation around edge e (from its two faces).
  auto cross_edges = [&](int e) {
    std::array<int, 4> out;
    int k = 0;
    for (int f : g.edge_faces[e]) {
      const auto& fe = g.face_edges[f];
      if (g.is_x[e]) {
        out[k++] = fe[2];
        out[k++] = fe[3];
      } else {
        out[k++] = fe[0];
        out[k++] = fe[1];
      }
    }
    return out;
  };

  // Scalar-type sampling: P0 (vertex values), D0 (face values), P2/D2 densities.
  for (Form f : {Form::P0, Form::D0, Form::P2, Form::D2}) {
    const Eigen::Index cols = cell_count(f);
    for (Location loc : {Location::Vertex, Location::Edge, Location::Face}) {
      std::vector<T> t;
      const bool on_vertices = f == Form::P0 || f == Form::D2;
      auto scale = [&](int cell) -> double {
        if (f == Form::P2) return 1.0 / (h * h);
        if (f == Form::D2) return 1.0 / g.dual_area[cell];
        return 1.0;
      };
      if (loc == Location::Vertex) {
        for (int v = 0; v < V; ++v) {
          if (on_vertices) {
            t.emplace_back(v, v, scale(v));
          } else {
            for (int q : vf[v]) t.emplace_back(v, q, scale(q) / double(vf[v].size()));
          }
        }
        put(f, loc, 0, V, cols, t);
      } else if (loc == Location::Edge) {
        for (int e = 0; e < E; ++e) {
          if (on_vertices) {
            t.emplace_back(e, g.tail[e], 0.5 * scale(g.tail[e]));
            t.emplace_back(e, g.head[e], 0.5 * scale(g.head[e]));
          } else {
            for (int q : g.edge_faces[e]) t.emplace_back(e, q, 0.5 * scale(q));
          }
        }
        put(f, loc, 0, E, cols, t);
      } else {
        for (int q = 0; q < F; ++q) {
          if (on_vertices) {
            for (int v : g.face_verts[q]) t.emplace_back(q, v, 0.25 * scale(v));
          } else {
            t.emplace_back(q, q, scale(q));
          }
        }
        put(f, loc, 0, F, cols, t);
      }
    }
  }

  // 1-cochains. Primal edge values are cx*h on x-edges and cy*h on y-edges;
  // dual values are cy*h on (duals of) x-edges and -cx*h on y-edges.
  for (Form f : {Form::P1, Form::D1}) {
    const double sx = f == Form::P1 ? 1.0 : -1.0;  // how the x component is read from y-edges (dual) / x-edges (primal)
    std::vector<T> ex, ey, fx, fy, vxs, vys;
    for (int e = 0; e < E; ++e) {
      const auto ce = cross_edges(e);
      if (f == Form::P1) {
        if (g.is_x[e]) {
          ex.emplace_back(e, e, 1.0 / h);
          for (int c : ce) ey.emplace_back(e, c, 0.25 / h);
        } else {
          ey.emplace_back(e, e, 1.0 / h);
          for (int c : ce) ex.emplace_back(e, c, 0.25 / h);
        }
      } else {
        if (g.is_x[e]) {
          ey.emplace_back(e, e, 1.0 / h);
          for (int c : ce) ex.emplace_back(e, c, -0.25 / h);
        } else {
          ex.emplace_back(e, e, -1.0 / h);
          for (int c : ce) ey.emplace_back(e, c, 0.25 / h);
        }
      }
    }
    for (int q = 0; q < F; ++q) {
      const auto& fe = g.face_edges[q];
      if (f == Form::P1) {
        fx.emplace_back(q, fe[0], 0.5 / h);
        fx.emplace_back(q, fe[1], 0.5 / h);
        fy.emplace_back(q, fe[2], 0.5 / h);
        fy.emplace_back(q, fe[3], 0.5 / h);
      } else {
        fy.emplace_back(q, fe[0], 0.5 / h);
        fy.emplace_back(q, fe[1], 0.5 / h);
        fx.emplace_back(q, fe[2], -0.5 / h);
        fx.emplace_back(q, fe[3], -0.5 / h);
      }
    }
    for (int v = 0; v < V; ++v) {
      for (int e : vx[v]) (f == Form::P1 ? vxs : vys).emplace_back(v, e, 1.0 / (h * double(vx[v].size())));
      for (int e : vy[v]) (f == Form::P1 ? vys : vxs).emplace_back(v, e, sx / (h * double(vy[v].size())));
    }
    put(f, Location::Edge, 0, E, E, ex);
    put(f, Location::Edge, 1, E, E, ey);
    put(f, Location::Face, 0, F, E, fx);
    put(f, Location::Face, 1, F, E, fy);
    put(f, Location::Vertex, 0, V, E, vxs);
    put(f, Location::Vertex, 1, V, E, vys);
  }

  // Staggered rotation: sample both components on edges, rotate, redeposit.
  {
    const SpMatC& Sx = g.samplers.at({static_cast<int>(Form::P1), static_cast<int>(Location::Edge), 0});
    const SpMatC& Sy = g.samplers.at({static_cast<int>(Form::P1), static_cast<int>(Location::Edge), 1});
    std::vector<T> dx, dy;
    for (int e = 0; e < E; ++e) (g.is_x[e] ? dx : dy).emplace_back(e, e, h);
    SpMatC Dx = make(E, E, dx), Dy = make(E, E, dy);
    g.rotation = SpMatC(Dy * Sx) - SpMatC(Dx * Sy);
    g.rotation.prune(cplx(0.0));
  }
}

inline std::shared_ptr<const TransverseSurface> build_surface(const GeometryConfig& cfg) {
  return std::make_shared<const TransverseSurface>(cfg);
}

// ---- scalar cochain operations ----

inline ScalarCochain zero_cochain(const TransverseSurface& s, Form f) {
  return {f, CVec::Zero(s.cell_count(f))};
}

inline ScalarCochain constant_cochain(const TransverseSurface& s, Form f, cplx value) {
  return s.discretize(f, [value](double, double) { return std::array<cplx, 2>{value, value}; });
}

inline ScalarCochain d(const TransverseSurface& s, const ScalarCochain& w) {
  return {d_target(w.form), s.d(w.form, w.values).col(0)};
}

inline ScalarCochain hodge_star(const TransverseSurface& s, const ScalarCochain& w) {
  return {star_target(w.form), s.star(w.form, w.values).col(0)};
}

inline ScalarCochain star1(const TransverseSurface& s, const ScalarCochain& w) {
  if (w.form != Form::P1) throw Error(ErrorCode::DegreeOutOfRange, "star1 expects a primal 1-cochain");
  return {Form::P1, s.rotate(w.values).col(0)};
}

inline ScalarCochain star0_2(const TransverseSurface& s, const ScalarCochain& f) {
  if (f.form != Form::P0) throw Error(ErrorCode::DegreeOutOfRange, "star0_2 expects a primal 0-cochain");
  return hodge_star(s, f);
}

inline ScalarCochain star2_0(const TransverseSurface& s, const ScalarCochain& a) {
  if (a.form != Form::D2) throw Error(ErrorCode::DegreeOutOfRange, "star2_0 expects the area-type 2-cochain");
  return hodge_star(s, a);
}

// Area form as a cochain of type P2 or D2; its integral is total_area.
inline ScalarCochain area_form(const TransverseSurface& s, Form f = Form::P2) {
  if (f == Form::D2) return star0_2(s, constant_cochain(s, Form::P0, 1.0));
  return constant_cochain(s, f, 1.0);
}

// Sum of the 2-cochain over the surface.
inline cplx integrate(const TransverseSurface& s, const ScalarCochain& a) {
  if (a.degree() != 2) throw Error(ErrorCode::DegreeMismatch, "integrate expects a 2-cochain");
  if (s.spectral()) return a.values.sum() * (s.total_area() / double(a.size()));
  return a.values.sum();
}

inline ScalarCochain wedge(const TransverseSurface& s, const ScalarCochain& a, const ScalarCochain& b) {
  const Form to = product_form(a.form, b.form);
  if (s.pairs_on_edges(a.form, b.form)) {
    const double sign = is_dual(a.form) ? -1.0 : 1.0;
    return {to, s.split_to_vertices(sign * a.values.cwiseProduct(b.values)).col(0)};
  }
  const Location loc = s.spectral() ? Location::Vertex : natural_location(to);
  const CMat A = a.values, B = b.values;
  auto sa = [&](int c) { return s.sample(a.form, loc, c, A); };
  auto sb = [&](int c) { return s.sample(b.form, loc, c, B); };
  std::vector<CMat> out;
  if (a.degree() == 1 && b.degree() == 1) {
    out.push_back(sa(0).cwiseProduct(sb(1)) - sa(1).cwiseProduct(sb(0)));
  } else if (a.degree() == 0) {
    const CMat f = sa(0);
    for (int c = 0; c < components(b.form); ++c) out.push_back(f.cwiseProduct(sb(c)));
  } else {
    const CMat f = sb(0);
    for (int c = 0; c < components(a.form); ++c) out.push_back(sa(c).cwiseProduct(f));
  }
  return {to, s.deposit(to, out).col(0)};
}

inline double inner(const TransverseSurface& s, const ScalarCochain& a, const ScalarCochain& b) {
  if (a.form != b.form) throw Error(ErrorCode::DegreeMismatch, "inner product of different cochain types");
  const RVec w = s.weights(a.form);
  return (a.values.conjugate().cwiseProduct(b.values)).real().dot(w);
}

inline double norm(const TransverseSurface& s, const ScalarCochain& a) { return std::sqrt(inner(s, a, a)); }

inline std::pair<ScalarCochain, ScalarCochain> complex_split(const TransverseSurface& s, const ScalarCochain& w) {
  if (w.form != Form::P1) throw Error(ErrorCode::DegreeOutOfRange, "complex_split expects a 1-cochain");
  const CVec r = s.rotate(w.values).col(0);
  const cplx i(0, 1);
  return {{Form::P1, 0.5 * (w.values + i * r)}, {Form::P1, 0.5 * (w.values - i * r)}};
}

// Dense coordinate matrix of a linear map between scalar cochain types.
template <class Op>
RMat coordinate_matrix(const TransverseSurface& s, Form from, Form to, Op op) {
  const Eigen::Index n = s.dof(from);
  RMat I = RMat::Identity(n, n);
  return s.to_coords(to, op(s.from_coords(from, I)));
}

// L2-orthonormal basis (coordinates) of harmonic real 1-cochains.
inline RMat harmonic_one_forms(const TransverseSurface& s) {
  RMat D0 = coordinate_matrix(s, Form::P0, Form::P1, [&](const CMat& X) { return s.d(Form::P0, X); });
  RMat D1 = coordinate_matrix(s, Form::P1, Form::P2, [&](const CMat& X) { return s.d(Form::P1, X); });
  RMat lap = D0 * D0.transpose() + D1.transpose() * D1;
  auto spec = symmetric_spectrum(lap);
  require_gap(spec.gap, "harmonic 1-forms");
  return spec.kernel();
}

}  // namespace bh

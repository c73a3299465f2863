#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "operators.hpp"

namespace bh {

struct ResidualTriple {
  CurvatureTriple fields;
  std::array<double, 3> norms{};

  double max_norm() const { return std::max({norms[0], norms[1], norms[2]}); }
  double energy() const { return norms[0] * norms[0] + norms[1] * norms[1] + norms[2] * norms[2]; }
};

inline ResidualTriple residual(const HitchinPair& p) {
  const auto& s = p.geom();
  ResidualTriple r;
  r.fields = hitchin_fields(p);
  r.norms = {norm(s, r.fields.x), norm(s, r.fields.y), norm(s, r.fields.z)};
  return r;
}

inline double energy(const HitchinPair& p) { return residual(p).energy(); }

// Gradient of the energy in pair coordinates: 2 J^T r with J the linearization D2.
inline RVec energy_gradient(const HitchinPair& p) {
  const RVec r = to_vector(p.geom(), hitchin_fields(p));
  return 2.0 * (assemble_D2(p).transpose() * r);
}

enum class Verdict { Irreducible, Reducible, Undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Irreducible: return "irreducible";
    case Verdict::Reducible: return "reducible";
    default: return "undetermined";
  }
}

struct IrreducibilityResult {
  Verdict verdict = Verdict::Undetermined;
  int kernel_dim = -1;
  GapCount gap;
};

inline IrreducibilityResult irreducibility_from_D1(const SpMat& D1) {
  const RMat D = RMat(D1);
  auto spec = symmetric_spectrum(D.transpose() * D);
  IrreducibilityResult out;
  out.gap = spec.gap;
  out.kernel_dim = spec.gap.dim;
  if (!spec.gap.certified)
    out.verdict = Verdict::Undetermined;
  else
    out.verdict = spec.gap.dim == 1 ? Verdict::Irreducible : Verdict::Reducible;
  return out;
}

inline IrreducibilityResult irreducibility(const HitchinPair& p) { return irreducibility_from_D1(assemble_D1(p)); }

// ---- Coulomb gauge ----

// Gauge-transforms `pair` so that D1(reference)^T (pair - reference) = 0,
// by Newton iteration on xi with g = exp(xi).
inline HitchinPair coulomb_project(const HitchinPair& pair, const HitchinPair& reference, double tol = 1e-9,
                                   int max_iterations = 30) {
  const auto& s = pair.geom();
  const int r = pair.rank();
  const RMat D1ref = RMat(assemble_D1(reference));
  const RVec ref = pair_vector(reference);
  HitchinPair cur = pair;
  double prev = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (int it = 0; it <= max_iterations; ++it) {
    const RVec diff = pair_vector(cur) - ref;
    const RVec res = D1ref.transpose() * diff;
    const double rn = res.norm();
    if (!std::isfinite(rn)) throw Error(ErrorCode::NaNDetected, "coulomb_project");
    if (rn <= tol * std::max(diff.norm(), 1e-300) || rn < 1e-15) return cur;
    if (rn > 0.9 * prev && ++stalls > 3) break;
    prev = std::min(prev, rn);
    if (it == max_iterations) break;
    const RMat M = D1ref.transpose() * RMat(assemble_D1(cur));
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(M);
    const RVec xi = -cod.solve(res);
    cur = gauge_transform(exp_cochain(from_vector(s, Form::P0, r, xi)), cur);
  }
  throw Error(ErrorCode::NewtonStall, "Coulomb gauge iteration did not reach the slice");
}

// ---- solver ----

struct SolveConfig {
  int max_iterations = 200;
  double residual_tolerance = 1e-8;
  int gauge_refix_period = 10;
  std::uint64_t seed = 1;
  int rank = 1;
  int max_backtracks = 40;
  double armijo = 1e-4;
  bool classify = true;
};

struct SolveReport {
  std::array<double, 3> residual{};
  int iterations = 0;
  std::vector<double> energy_history;
  Verdict verdict = Verdict::Undetermined;
  int ker_d1_dim = -1;
  double degree = 0.0;
  double wall_seconds = 0.0;
  bool converged = false;
  int refixes = 0;
  int gradient_steps = 0;
  std::string message;
};

namespace detail {

// Minimum-norm Gauss-Newton step, with the energy directional derivative.
inline RVec gauss_newton_step(const SpMat& J, const RVec& r) {
  const RMat Jd = RMat(J);
  Eigen::CompleteOrthogonalDecomposition<RMat> cod(Jd);
  return -cod.solve(r);
}

}  // namespace detail

// Minimizes the energy from `initial`. Never throws on non-convergence: the
// report carries converged = false and a message.
inline std::pair<HitchinPair, SolveReport> solve(const HitchinPair& initial, const SolveConfig& cfg) {
  if (!(cfg.residual_tolerance > 0)) throw Error(ErrorCode::InvalidConfig, "tolerance must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const auto sp = initial.surface;
  const auto& s = *sp;
  const int r = initial.rank();
  SolveReport rep;
  HitchinPair cur = initial;
  ResidualTriple res = residual(cur);
  double E = res.energy();
  rep.energy_history.push_back(E);

  auto finish = [&](bool converged, const std::string& msg) {
    rep.converged = converged;
    rep.message = msg;
    rep.residual = res.norms;
    rep.degree = degree_of_bundle(cur);
    if (cfg.classify) {
      try {
        auto irr = irreducibility(cur);
        rep.verdict = irr.verdict;
        rep.ker_d1_dim = irr.kernel_dim;
      } catch (const Error&) {
        rep.verdict = Verdict::Undetermined;
      }
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::make_pair(cur, rep);
  };

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (!std::isfinite(E)) throw Error(ErrorCode::NaNDetected, "energy became non-finite");
    if (res.max_norm() <= cfg.residual_tolerance) return finish(true, "converged");

    if (cfg.gauge_refix_period > 0 && it > 0 && it % cfg.gauge_refix_period == 0 &&
        res.max_norm() > 100 * cfg.residual_tolerance) {
      try {
        HitchinPair fixed = coulomb_project(cur, initial);
        ResidualTriple fres = residual(fixed);
        if (fres.energy() <= E) {
          cur = fixed;
          res = fres;
          E = res.energy();
          ++rep.refixes;
        }
      } catch (const Error&) {
      }
    }

    const SpMat J = assemble_D2(cur);
    const RVec rv = to_vector(s, res.fields);
    const RVec x = pair_vector(cur);
    const RVec grad = 2.0 * (J.transpose() * rv);

    auto line_search = [&](const RVec& dir, double slope) -> std::optional<std::pair<HitchinPair, ResidualTriple>> {
      if (!(slope < 0)) return std::nullopt;
      double t = 1.0;
      for (int k = 0; k < cfg.max_backtracks; ++k, t *= 0.5) {
        HitchinPair trial = pair_from_vector(sp, r, x + t * dir);
        ResidualTriple tres = residual(trial);
        const double Et = tres.energy();
        if (std::isfinite(Et) && Et <= E + cfg.armijo * t * slope) return std::make_pair(trial, tres);
      }
      return std::nullopt;
    };

    RVec dir = detail::gauss_newton_step(J, rv);
    auto step = line_search(dir, grad.dot(dir));
    if (!step) {
      const double gn = grad.norm();
      if (gn == 0) return finish(false, "stationary point with nonzero residual");
      step = line_search(-grad / gn * std::sqrt(E), -gn * std::sqrt(E));
      ++rep.gradient_steps;
    }
    if (!step) return finish(false, "line search failed");
    cur = step->first;
    res = step->second;
    E = res.energy();
    rep.energy_history.push_back(E);
    rep.iterations = it + 1;
  }
  if (res.max_norm() <= cfg.residual_tolerance) return finish(true, "converged");
  return finish(false, "iteration budget exhausted");
}

// ---- seeds ----

// Smooth random skew field: trigonometric modes up to max_mode with decaying
// normal coefficients, pulled back from the covering torus.
inline MatCochain random_smooth(const TransverseSurface& s, Form f, int rank, std::mt19937_64& rng, double amplitude,
                                int max_mode = 2) {
  std::normal_distribution<double> nd;
  const auto basis = lie_basis(rank);
  const double tp = 2 * std::numbers::pi / s.period();
  MatCochain out = zero_mat(s, f, rank);
  for (const auto& T : basis) {
    struct Mode {
      int kx, ky;
      double c[2], d[2];
    };
    std::vector<Mode> modes;
    for (int kx = -max_mode; kx <= max_mode; ++kx)
      for (int ky = -max_mode; ky <= max_mode; ++ky) {
        if (kx < 0 || (kx == 0 && ky < 0)) continue;
        const double w = amplitude / (1.0 + kx * kx + ky * ky);
        modes.push_back({kx, ky, {w * nd(rng), w * nd(rng)}, {w * nd(rng), w * nd(rng)}});
      }
    ScalarCochain field = s.discretize(f, [&](double x, double y) {
      std::array<cplx, 2> v{0.0, 0.0};
      for (const auto& m : modes) {
        const double ph = tp * (m.kx * x + m.ky * y);
        for (int c = 0; c < 2; ++c) v[c] += m.c[c] * std::cos(ph) + m.d[c] * std::sin(ph);
      }
      return v;
    });
    for (int j = 0; j < rank; ++j)
      for (int i = 0; i < rank; ++i)
        if (T(i, j) != 0.0) out.data.col(entry_index(i, j, rank)) += T(i, j) * field.values.real().cast<cplx>();
  }
  return out;
}

inline MatCochain random_constant(const TransverseSurface& s, Form f, int rank, std::mt19937_64& rng, double amplitude) {
  return random_smooth(s, f, rank, rng, amplitude, 0);
}

// Rank-1 harmonic pair: A = i a, Phi = i phi with a, phi random harmonic 1-forms.
inline HitchinPair random_harmonic_abelian(std::shared_ptr<const TransverseSurface> s, std::mt19937_64& rng,
                                           double amplitude, const RMat* harmonic = nullptr) {
  RMat H = harmonic ? *harmonic : harmonic_one_forms(*s);
  std::normal_distribution<double> nd;
  RVec ca(H.cols()), cp(H.cols());
  for (Eigen::Index k = 0; k < H.cols(); ++k) {
    ca[k] = amplitude * nd(rng);
    cp[k] = amplitude * nd(rng);
  }
  // rank-1 coordinates are those of the single generator i.
  auto A = from_vector(*s, Form::P1, 1, H * ca);
  auto Phi = from_vector(*s, Form::P1, 1, H * cp);
  return {s, A, Phi};
}

inline MatCochain direct_sum(const MatCochain& a, const MatCochain& b) {
  if (a.form != b.form) throw Error(ErrorCode::DegreeMismatch, "direct sum of different types");
  const int r = a.rank + b.rank;
  MatCochain out{a.form, r, a.skew && b.skew, CMat::Zero(a.slots(), r * r)};
  for (int j = 0; j < a.rank; ++j)
    for (int i = 0; i < a.rank; ++i) out.data.col(entry_index(i, j, r)) = a.data.col(entry_index(i, j, a.rank));
  for (int j = 0; j < b.rank; ++j)
    for (int i = 0; i < b.rank; ++i)
      out.data.col(entry_index(a.rank + i, a.rank + j, r)) = b.data.col(entry_index(i, j, b.rank));
  return out;
}

inline HitchinPair direct_sum(const HitchinPair& p, const HitchinPair& q) {
  return {p.surface, direct_sum(p.A, q.A), direct_sum(p.Phi, q.Phi)};
}

enum class SeedKind { RandomSmooth, RandomConstant, PerturbedDirectSum };

inline HitchinPair seed_pair(std::shared_ptr<const TransverseSurface> s, int rank, std::uint64_t seed, SeedKind kind,
                             double amplitude = 0.5) {
  std::mt19937_64 rng(seed);
  switch (kind) {
    case SeedKind::RandomConstant:
      return {s, random_constant(*s, Form::P1, rank, rng, amplitude), random_constant(*s, Form::P1, rank, rng, amplitude)};
    case SeedKind::RandomSmooth:
      return {s, random_smooth(*s, Form::P1, rank, rng, amplitude), random_smooth(*s, Form::P1, rank, rng, amplitude)};
    case SeedKind::PerturbedDirectSum: {
      const RMat H = harmonic_one_forms(*s);
      HitchinPair base = random_harmonic_abelian(s, rng, amplitude, &H);
      for (int k = 1; k < rank; ++k) base = direct_sum(base, random_harmonic_abelian(s, rng, amplitude, &H));
      base.A = base.A + random_smooth(*s, Form::P1, rank, rng, 0.5 * amplitude, 1);
      base.Phi = base.Phi + random_smooth(*s, Form::P1, rank, rng, 0.5 * amplitude, 1);
      return base;
    }
  }
  return zero_pair(s, rank);
}

struct IrreducibleSearch {
  HitchinPair pair;
  SolveReport report;
  int attempts = 0;
  std::uint64_t seed = 0;
  bool found = false;
};

// Solves from perturbed direct-sum seeds until an irreducible pair is certified
// or the retry budget is spent. The last attempt is returned either way.
inline IrreducibleSearch find_irreducible(std::shared_ptr<const TransverseSurface> s, const SolveConfig& cfg,
                                          int retries, double amplitude = 0.5) {
  IrreducibleSearch out{zero_pair(s, cfg.rank), {}, 0, cfg.seed, false};
  for (int k = 0; k <= retries; ++k) {
    const std::uint64_t seed = cfg.seed + std::uint64_t(k);
    HitchinPair init = seed_pair(s, cfg.rank, seed, cfg.rank == 1 ? SeedKind::RandomSmooth : SeedKind::PerturbedDirectSum,
                                 amplitude);
    SolveConfig c = cfg;
    c.seed = seed;
    c.classify = true;
    auto [p, rep] = solve(init, c);
    out = {p, rep, k + 1, seed, rep.converged && rep.verdict == Verdict::Irreducible};
    if (out.found) break;
  }
  return out;
}

}  // namespace bh

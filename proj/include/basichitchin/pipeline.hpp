#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "checkpoint.hpp"
#include "moduli_geometry.hpp"

namespace bh {

using json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {"solve",     "flat",  "complex",    "cohomology", "dimension",
                                                 "index",     "quaternion", "compat", "kuranishi", "normal"};
  return names;
}

struct ExperimentConfig {
  std::string name = "experiment";
  std::string geometry_path;               // read when set
  std::optional<GeometryConfig> geometry;  // used when no path is given
  int rank = 1;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
  int retries = 5;
  int max_iterations = 200;
  std::string output_dir;           // no files are written when empty
  std::vector<std::string> checks;  // empty selects all
  std::vector<double> chart_steps{0.1, 0.05, 0.02, 0.01, 0.005};
  std::vector<double> normal_steps{1e-2, 5e-3, 2.5e-3};
  int complex_samples = 100;
};

inline void validate(const ExperimentConfig& c) {
  if (!c.geometry_path.empty() && !std::filesystem::exists(c.geometry_path))
    throw Error(ErrorCode::IOError, "geometry file '" + c.geometry_path + "' does not exist");
  if (c.geometry_path.empty() && !c.geometry) throw Error(ErrorCode::InvalidConfig, "no geometry given");
  if (!(c.tolerance > 0)) throw Error(ErrorCode::InvalidConfig, "tolerance must be positive");
  if (c.rank < 1) throw Error(ErrorCode::InvalidConfig, "rank must be at least 1");
  if (c.retries < 0 || c.max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "bad retry or iteration budget");
  for (double e : c.chart_steps)
    if (!(e > 0)) throw Error(ErrorCode::InvalidConfig, "chart steps must be positive");
  for (double e : c.normal_steps)
    if (!(e > 0)) throw Error(ErrorCode::InvalidConfig, "normal-coordinate steps must be positive");
  for (const auto& k : c.checks)
    if (std::find(known_checks().begin(), known_checks().end(), k) == known_checks().end())
      throw Error(ErrorCode::InvalidConfig, "unknown check '" + k + "'");
}

inline GeometryConfig resolve_geometry(const ExperimentConfig& c) {
  return c.geometry_path.empty() ? *c.geometry : read_geometry_config(c.geometry_path);
}

// Presets: torus-r1, torus-r2 (spectral, 8 collocation points per axis),
// genus2-r1, genus2-r2 (L-shaped surface, 4 points per unit length).
inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "torus-r1" || name == "torus-r2") {
    c.geometry = torus_config(8);
  } else if (name == "genus2-r1" || name == "genus2-r2") {
    c.geometry = l_shape_genus2_config(4);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown preset '" + name + "'");
  }
  c.rank = name.back() == '2' ? 2 : 1;
  return c;
}

enum class Status { Pass, Fail, Undetermined };

inline std::string to_string(Status s) {
  return s == Status::Pass ? "pass" : s == Status::Fail ? "fail" : "undetermined";
}

struct CheckResult {
  std::string name;
  Status status = Status::Undetermined;
  json measured = json::object();
  json expected = json::object();  // name -> {value, basis}
  json diagnostics = json::object();
  std::string note;
};

struct VerificationReport {
  int schema_version = kReportSchemaVersion;
  std::string name;
  json geometry = json::object();
  json solve = json::object();
  json environment = json::object();
  std::vector<CheckResult> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == Status::Pass; });
  }

  json to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["name"] = name;
    j["geometry"] = geometry;
    j["solve"] = solve;
    j["environment"] = environment;
    j["checks"] = json::array();
    for (const auto& c : checks)
      j["checks"].push_back({{"name", c.name},
                             {"status", to_string(c.status)},
                             {"measured", c.measured},
                             {"expected", c.expected},
                             {"diagnostics", c.diagnostics},
                             {"note", c.note}});
    j["all_pass"] = all_pass();
    return j;
  }
};

inline json expected_value(json value, const std::string& basis) { return {{"value", std::move(value)}, {"basis", basis}}; }

inline json environment_stamp() {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"threads", thread_count()},
          {"utc", stamp}};
}

inline json geometry_json(const TransverseSurface& s) {
  const auto b = s.betti_numbers();
  json j = {{"backend", to_string(s.backend())},
            {"genus", s.genus()},
            {"resolution", s.resolution()},
            {"total_area", s.total_area()},
            {"euler_characteristic", s.euler_characteristic()},
            {"betti", {b[0], b[1], b[2]}},
            {"config", format_geometry_config(s.config())}};
  if (!s.spectral()) j["star_defect"] = s.star_defect();
  return j;
}

// Rethrows with the module name prepended.
template <class F>
auto in_module(const std::string& module, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), module + ": " + e.what());
  }
}

struct SolveStage {
  HitchinPair pair;
  SolveReport report;
  int attempts = 1;
  std::uint64_t seed = 0;
};

// Rank one and the torus use a single solve; rank >= 2 on the torus starts from
// constant-coefficient data; higher genus searches for an irreducible pair.
inline SolveStage solve_stage(const ExperimentConfig& c) {
  return in_module("hitchin_solver", [&] {
    auto s = build_surface(resolve_geometry(c));
    SolveConfig sc;
    sc.rank = c.rank;
    sc.seed = c.seed;
    sc.residual_tolerance = c.tolerance;
    sc.max_iterations = c.max_iterations;
    if (c.rank > 1 && s->genus() >= 2) {
      auto found = find_irreducible(s, sc, c.retries);
      return SolveStage{found.pair, found.report, found.attempts, found.seed};
    }
    const SeedKind kind = c.rank == 1 ? SeedKind::RandomSmooth : SeedKind::RandomConstant;
    auto [p, rep] = solve(seed_pair(s, c.rank, c.seed, kind), sc);
    return SolveStage{p, rep, 1, c.seed};
  });
}

inline json solve_json(const SolveStage& st) {
  const auto& r = st.report;
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"residual", {r.residual[0], r.residual[1], r.residual[2]}},
          {"verdict", to_string(r.verdict)},
          {"ker_d1_dim", r.ker_d1_dim},
          {"degree", r.degree},
          {"attempts", st.attempts},
          {"seed", st.seed},
          {"refixes", r.refixes},
          {"gradient_steps", r.gradient_steps},
          {"message", r.message}};
}

namespace detail {

inline bool selected(const ExperimentConfig& c, const std::string& name) {
  return c.checks.empty() || std::find(c.checks.begin(), c.checks.end(), name) != c.checks.end();
}

inline CheckResult undetermined(const std::string& name, const std::string& note) {
  CheckResult r;
  r.name = name;
  r.note = note;
  return r;
}

inline Status pass_if(bool ok) { return ok ? Status::Pass : Status::Fail; }

}  // namespace detail

// Runs the selected checks on a given pair.
inline std::vector<CheckResult> analyze_pair(const HitchinPair& p, const ExperimentConfig& c) {
  using detail::pass_if;
  using detail::selected;
  std::vector<CheckResult> out;
  const auto& s = p.geom();
  const int r = p.rank();
  const auto res = residual(p);
  const double tol = c.tolerance;
  const bool solved = res.max_norm() <= tol;
  const std::string unsolved = "pair residual " + std::to_string(res.max_norm()) + " above tolerance";

  if (selected(c, "solve")) {
    CheckResult k{"solve"};
    k.measured = {{"residual", res.max_norm()}};
    k.expected["residual"] = expected_value(tol, "upper bound");
    k.status = pass_if(solved);
    out.push_back(k);
  }
  if (selected(c, "flat")) {
    CheckResult k{"flat"};
    const double flat = flatness_check(p), deg = degree_of_bundle(p);
    k.measured = {{"flat_curvature", flat}, {"degree", deg}};
    k.expected["flat_curvature"] = expected_value(2 * tol, "upper bound, twice the residual tolerance");
    k.expected["degree"] = expected_value(1e-8, "upper bound on |deg|");
    k.status = solved ? pass_if(flat <= 2 * tol && std::abs(deg) <= 1e-8) : Status::Undetermined;
    if (!solved) k.note = unsolved;
    out.push_back(k);
  }

  const bool need_complex = std::any_of(known_checks().begin() + 2, known_checks().end(),
                                        [&](const std::string& n) { return selected(c, n); });
  if (!need_complex) return out;
  std::optional<DeformationComplex> cx;
  std::string cx_error;
  try {
    cx = in_module("deformation_complex", [&] { return assemble(p); });
  } catch (const Error& e) {
    cx_error = e.what();
  }
  auto missing = [&](const std::string& name) { out.push_back(detail::undetermined(name, cx_error)); };
  const Verdict verdict = cx ? irreducibility_from_D1(cx->D1).verdict : Verdict::Undetermined;
  const bool irreducible = verdict == Verdict::Irreducible;

  if (selected(c, "complex")) {
    if (!cx) {
      missing("complex");
    } else {
      CheckResult k{"complex"};
      std::mt19937_64 rng(c.seed);
      std::normal_distribution<double> nd;
      double worst = 0.0;
      for (int i = 0; i < c.complex_samples; ++i) {
        RVec x(cx->dims.c0);
        for (auto& v : x) v = nd(rng);
        worst = std::max(worst, (cx->D2 * (cx->D1 * x)).norm() / x.norm());
      }
      k.measured = {{"max_ratio", worst}, {"samples", c.complex_samples}};
      k.expected["max_ratio"] = expected_value(1e-7, "upper bound on |D2 D1 x| / |x|");
      k.status = solved ? pass_if(worst <= 1e-7) : Status::Undetermined;
      if (!solved) k.note = unsolved;
      out.push_back(k);
    }
  }

  std::optional<HarmonicSpaces> hs;
  std::string hs_error;
  if (cx) {
    try {
      hs = in_module("deformation_complex", [&] { return harmonic_spaces(*cx); });
    } catch (const Error& e) {
      hs_error = e.what();
    }
  }
  auto gaps_json = [&] {
    json g = json::array();
    for (int k = 0; k < 3; ++k) {
      const auto& gp = cx->spectra[k].gap;
      g.push_back({{"dim", gp.dim}, {"largest_zero", gp.largest_zero}, {"first_nonzero", gp.first_nonzero},
                   {"lambda_max", gp.lambda_max}, {"certified", gp.certified}});
    }
    return g;
  };

  if (selected(c, "cohomology")) {
    if (!cx) {
      missing("cohomology");
    } else if (!hs) {
      out.push_back(detail::undetermined("cohomology", hs_error));
    } else {
      CheckResult k{"cohomology"};
      const auto al = h2_alignment(*cx);
      const double align = std::min({al[0], al[1], al[2]});
      k.measured = {{"h0", hs->dims[0]}, {"h1", hs->dims[1]}, {"h2", hs->dims[2]}, {"h2_alignment", align},
                    {"verdict", to_string(verdict)}};
      k.expected["h0"] = expected_value(1, "irreducible pairs");
      k.expected["h2"] = expected_value(3, "irreducible pairs");
      k.expected["h2_alignment"] = expected_value(1 - 1e-6, "lower bound");
      k.diagnostics["gaps"] = gaps_json();
      if (!irreducible) {
        k.status = Status::Undetermined;
        k.note = "pair is not certified irreducible";
      } else {
        k.status = pass_if(solved && hs->dims[0] == 1 && hs->dims[2] == 3 && align >= 1 - 1e-6);
      }
      out.push_back(k);
    }
  }
  if (selected(c, "dimension")) {
    if (!cx) {
      missing("dimension");
    } else if (!hs) {
      out.push_back(detail::undetermined("dimension", hs_error));
    } else {
      CheckResult k{"dimension"};
      const int want = dimension_formula(r, s.genus());
      k.measured = {{"h1", hs->dims[1]}};
      k.expected["h1"] = expected_value(want, "4 r^2 (g - 1) + 4");
      k.diagnostics["verdict"] = to_string(verdict);
      if (!irreducible) {
        k.status = Status::Undetermined;
        k.note = "formula applies to irreducible pairs";
      } else {
        k.status = pass_if(hs->dims[1] == want);
      }
      out.push_back(k);
    }
  }
  if (selected(c, "index")) {
    if (!cx) {
      missing("index");
    } else {
      try {
        const auto ix = in_module("deformation_complex", [&] { return basic_index(*cx); });
        CheckResult k{"index"};
        const int want = index_formula(r, s.genus());
        k.measured = {{"index", ix.index}, {"kernel", ix.kernel}, {"cokernel", ix.cokernel}};
        k.expected["index"] = expected_value(want, "-2 r^2 (2 - 2g)");
        k.diagnostics["cokernel_gap"] = {{"largest_zero", ix.cokernel_gap.largest_zero},
                                         {"first_nonzero", ix.cokernel_gap.first_nonzero}};
        k.status = pass_if(ix.index == want);
        out.push_back(k);
      } catch (const Error& e) {
        out.push_back(detail::undetermined("index", e.what()));
      }
    }
  }

  const bool need_frame = selected(c, "quaternion") || selected(c, "compat") || selected(c, "normal");
  std::optional<ModuliTangentFrame> frame;
  if (need_frame && hs) frame = in_module("moduli_geometry", [&] { return tangent_frame(*cx); });
  const std::string frame_note = !cx ? cx_error : hs_error;

  if (selected(c, "quaternion")) {
    if (!frame) {
      out.push_back(detail::undetermined("quaternion", frame_note));
    } else {
      const auto q = check_frame(*frame);
      CheckResult k{"quaternion"};
      k.measured = {{"algebra", q.algebra_max()}, {"preservation", q.preservation_max()},
                    {"dim_h1", frame->dim()}, {"dim_mod_4", frame->dim() % 4}};
      k.expected["algebra"] = expected_value(1e-8, "upper bound");
      k.expected["preservation"] = expected_value(1e-8, "upper bound");
      k.expected["dim_mod_4"] = expected_value(0, "quaternionic dimension");
      k.status = pass_if(q.algebra_max() <= 1e-8 && q.preservation_max() <= 1e-8 && q.dim_divisible_by_4);
      if (!irreducible) k.note = "pair is not certified irreducible";
      out.push_back(k);
    }
  }
  if (selected(c, "compat")) {
    if (!frame) {
      out.push_back(detail::undetermined("compat", frame_note));
    } else {
      CheckResult k{"compat"};
      std::array<double, 3> d{};
      for (int q = 0; q < 3; ++q) d[q] = compatibility_defect(Quaternion(q), s, r, frame->basis);
      const double worst = std::max({d[0], d[1], d[2]});
      k.measured = {{"I", d[0]}, {"J", d[1]}, {"K", d[2]}, {"max", worst}};
      k.expected["max"] = expected_value(1e-9, "upper bound on |omega_Q(a,b) - g(a,Qb)|");
      k.status = pass_if(worst <= 1e-9);
      out.push_back(k);
    }
  }
  if (selected(c, "kuranishi")) {
    if (!hs) {
      out.push_back(detail::undetermined("kuranishi", frame_note));
    } else {
      CheckResult k{"kuranishi"};
      double eps0 = 0.0, worst_harm = 0.0;
      json rows = json::array();
      bool monotone = true;
      std::vector<double> steps = c.chart_steps;
      std::sort(steps.begin(), steps.end());
      try {
        for (double e : steps) {
          double slice = 0, eq = 0, harm = 0;
          for (int j = 0; j < hs->dims[1]; j += std::max(1, hs->dims[1] / 4)) {
            const auto ki = kuranishi_inverse(*cx, hs->bases[1].col(j), e);
            slice = std::max(slice, ki.slice_residual);
            eq = std::max(eq, ki.equation_residual);
            harm = std::max(harm, ki.harmonic_residual);
          }
          rows.push_back({{"eps", e}, {"slice", slice}, {"equation", eq}, {"harmonic", harm}});
          worst_harm = std::max(worst_harm, harm);
          if (monotone && slice <= 1e-8 && eq <= 1e-8)
            eps0 = e;
          else
            monotone = false;
        }
      } catch (const Error& e) {
        k.note = std::string("deformation_complex: ") + e.what();
      }
      k.measured = {{"eps0", eps0}, {"harmonic_residual", worst_harm}};
      k.expected["eps0"] = expected_value(json(">0"), "largest step with slice and equation residuals <= 1e-8");
      k.expected["harmonic_residual"] = expected_value(1e-9, "upper bound");
      k.diagnostics["sweep"] = rows;
      k.status = solved ? pass_if(eps0 > 0 && worst_harm <= 1e-9) : Status::Undetermined;
      if (!solved) k.note = unsolved;
      out.push_back(k);
    }
  }
  if (selected(c, "normal")) {
    if (!frame) {
      out.push_back(detail::undetermined("normal", frame_note));
    } else if (frame->dim() < 3 || c.normal_steps.size() < 2) {
      out.push_back(detail::undetermined("normal", "needs dim H1 >= 3 and two steps"));
    } else {
      CheckResult k{"normal"};
      try {
        const auto nc = in_module("moduli_geometry",
                                  [&] { return normal_coordinate_check(*cx, *frame, 0, 1, 2, c.normal_steps); });
        json rows = json::array();
        for (const auto& row : nc.rows)
          rows.push_back({{"eps", row.eps}, {"dg", row.dg}, {"domega", row.domega}});
        const bool g_ok = normal_coordinate_pass(nc.slope_g, nc.max_dg);
        const bool w_ok = normal_coordinate_pass(nc.slope_omega, nc.max_domega);
        k.measured = {{"slope_g", std::isfinite(nc.slope_g) ? json(nc.slope_g) : json(nullptr)},
                      {"slope_omega", std::isfinite(nc.slope_omega) ? json(nc.slope_omega) : json(nullptr)},
                      {"max_dg", nc.max_dg},
                      {"max_domega", nc.max_domega}};
        k.expected["slope"] = expected_value(1.8, "lower bound, or all derivatives <= 1e-12");
        k.diagnostics["sweep"] = rows;
        k.diagnostics["directions"] = {nc.x, nc.y, nc.z};
        k.status = solved ? pass_if(g_ok && w_ok) : Status::Undetermined;
        if (!solved) k.note = unsolved;
      } catch (const Error& e) {
        k.note = e.what();
      }
      out.push_back(k);
    }
  }
  return out;
}

inline VerificationReport analyze_report(const HitchinPair& p, const ExperimentConfig& c) {
  VerificationReport rep;
  rep.name = c.name;
  rep.geometry = geometry_json(p.geom());
  rep.environment = environment_stamp();
  rep.checks = analyze_pair(p, c);
  return rep;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IOError, "cannot write '" + path + "'");
  f << j.dump(2) << "\n";
}

// solve, assemble, harmonic spaces, index, moduli checks; one checkpoint and one report.
inline VerificationReport run_pipeline(const ExperimentConfig& c) {
  validate(c);
  const auto t0 = std::chrono::steady_clock::now();
  const SolveStage st = solve_stage(c);
  VerificationReport rep = analyze_report(st.pair, c);
  rep.solve = solve_json(st);
  rep.solve["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!c.output_dir.empty()) {
    std::filesystem::create_directories(c.output_dir);
    save_pair(c.output_dir + "/pair.ckpt", st.pair);
    write_json(c.output_dir + "/report.json", rep.to_json());
  }
  return rep;
}

// ---- tables ----

namespace detail {

inline std::string cell(const json& v) {
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(6) << v.get<double>();
    return os.str();
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IOError, "cannot write '" + path + "'");
  f << text;
  if (!f) throw Error(ErrorCode::IOError, "write failed for '" + path + "'");
}

}  // namespace detail

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string text() const {
    std::vector<size_t> w(header.size());
    for (size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
    for (const auto& r : rows)
      for (size_t i = 0; i < r.size(); ++i) w[i] = std::max(w[i], r[i].size());
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
      for (size_t i = 0; i < r.size(); ++i) os << (i ? "  " : "") << std::left << std::setw(int(w[i])) << r[i];
      os << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
  }

  std::string csv() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
      for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
  }

  // Writes prefix.txt and prefix.csv.
  void write(const std::string& prefix) const {
    detail::write_text(prefix + ".txt", text());
    detail::write_text(prefix + ".csv", csv());
  }
};

// One row per measured quantity: check, status, quantity, value, expected.
inline Table report_table(const VerificationReport& rep) {
  Table t{{"check", "status", "quantity", "value", "expected"}, {}};
  for (const auto& c : rep.checks)
    for (const auto& [key, val] : c.measured.items()) {
      const std::string want = c.expected.contains(key) ? detail::cell(c.expected[key]["value"]) : "";
      t.rows.push_back({c.name, to_string(c.status), key, detail::cell(val), want});
    }
  return t;
}

inline Table emit_table(const VerificationReport& rep, const std::string& prefix) {
  Table t = report_table(rep);
  t.write(prefix);
  return t;
}

struct DimensionRow {
  int rank = 1, genus = 1;
  int h0 = -1, h1 = -1, h2 = -1, index = 0;
  Verdict verdict = Verdict::Undetermined;
  std::string note;
};

// Torus rows use the spectral backend, higher genus the L-shaped surface.
inline std::vector<DimensionRow> dimension_sweep(const std::vector<int>& ranks, const std::vector<int>& genera,
                                                 std::uint64_t seed = 1, int retries = 5) {
  std::vector<DimensionRow> rows;
  for (int g : genera)
    for (int r : ranks) {
      DimensionRow row;
      row.rank = r;
      row.genus = g;
      ExperimentConfig c;
      if (g == 1)
        c.geometry = torus_config(8);
      else if (g == 2)
        c.geometry = l_shape_genus2_config(4);
      else
        throw Error(ErrorCode::InvalidConfig, "dimension sweep supports genus 1 and 2");
      c.rank = r;
      c.seed = seed;
      c.retries = retries;
      try {
        const auto st = solve_stage(c);
        const auto cx = assemble(st.pair);
        row.verdict = irreducibility_from_D1(cx.D1).verdict;
        row.h0 = cx.spectra[0].gap.dim;
        row.h1 = cx.spectra[1].gap.dim;
        row.h2 = cx.spectra[2].gap.dim;
        row.index = basic_index(cx).index;
      } catch (const Error& e) {
        row.note = e.what();
      }
      rows.push_back(row);
    }
  return rows;
}

inline Table dimension_table(const std::vector<DimensionRow>& rows) {
  Table t{{"rank", "genus", "verdict", "h0", "h1", "h2", "dim_formula", "index", "index_formula", "note"}, {}};
  for (const auto& r : rows)
    t.rows.push_back({std::to_string(r.rank), std::to_string(r.genus), to_string(r.verdict), std::to_string(r.h0),
                      std::to_string(r.h1), std::to_string(r.h2), std::to_string(dimension_formula(r.rank, r.genus)),
                      std::to_string(r.index), std::to_string(index_formula(r.rank, r.genus)), r.note});
  return t;
}

inline Table normal_table(const NormalCoordinateReport& nc) {
  Table t{{"eps", "dg", "domega", "slope_g", "slope_omega"}, {}};
  for (const auto& r : nc.rows)
    t.rows.push_back({detail::cell(r.eps), detail::cell(r.dg), detail::cell(r.domega), detail::cell(nc.slope_g),
                      detail::cell(nc.slope_omega)});
  return t;
}

}  // namespace bh

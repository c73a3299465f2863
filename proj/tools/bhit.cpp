// bhit: solve, deform, moduli, verify-all, dim-table.
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <basichitchin/pipeline.hpp>

namespace {

using namespace bh;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int print_report(const VerificationReport& rep, const std::string& path) {
  if (!path.empty()) {
    if (auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) std::filesystem::create_directories(dir);
    write_json(path, rep.to_json());
  }
  std::cout << report_table(rep).text();
  std::cout << (rep.all_pass() ? "all checks pass\n" : "some checks did not pass\n");
  return rep.all_pass() ? 0 : 1;
}

struct Common {
  std::string geometry, preset;
  int rank = 1;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int retries = 5;
  int iterations = 200;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--geometry", geometry, "geometry config file");
    app->add_option("--preset", preset, "torus-r1 | torus-r2 | genus2-r1 | genus2-r2");
    app->add_option("--rank", rank, "bundle rank");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--tol", tol, "residual tolerance");
    app->add_option("--retries", retries, "extra seeds tried for an irreducible pair");
    app->add_option("--iterations", iterations, "solver iteration cap");
    app->add_option("--out", out, "output directory");
  }

  ExperimentConfig config() const {
    ExperimentConfig c;
    if (!preset.empty()) c = bh::preset(preset);
    if (!geometry.empty()) {
      c.geometry_path = geometry;
      c.name = std::filesystem::path(geometry).stem().string();
    }
    if (preset.empty()) c.rank = rank;
    else if (rank != 1) c.rank = rank;
    c.seed = seed;
    c.tolerance = tol;
    c.retries = retries;
    c.max_iterations = iterations;
    c.output_dir = out;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hitchin pairs on quotient surfaces: solver, deformation complex and moduli checks"};
  app.require_subcommand(1);

  Common solve_opts;
  auto* solve_cmd = app.add_subcommand("solve", "solve the Hitchin equations and write a checkpoint");
  solve_opts.add(solve_cmd);

  std::string deform_pair, deform_report;
  std::vector<double> steps;
  auto* deform_cmd = app.add_subcommand("deform", "assemble the deformation complex at a checkpointed pair");
  deform_cmd->add_option("--pair", deform_pair, "pair checkpoint")->required()->check(CLI::ExistingFile);
  deform_cmd->add_option("--report", deform_report, "report path");
  deform_cmd->add_option("--steps", steps, "Kuranishi chart steps");

  std::string moduli_pair, moduli_checks = "quaternion,compat,normal", moduli_report;
  auto* moduli_cmd = app.add_subcommand("moduli", "quaternion, compatibility and normal-coordinate checks");
  moduli_cmd->add_option("--pair", moduli_pair, "pair checkpoint")->required()->check(CLI::ExistingFile);
  moduli_cmd->add_option("--check", moduli_checks, "comma separated subset of quaternion,compat,normal");
  moduli_cmd->add_option("--report", moduli_report, "report path");

  Common verify_opts;
  std::string checks;
  auto* verify_cmd = app.add_subcommand("verify-all", "solve, then run every check; exit 0 iff all pass");
  verify_opts.add(verify_cmd);
  verify_cmd->add_option("--checks", checks, "comma separated check subset");

  std::string ranks = "1,2", genera = "1,2", table_out;
  std::uint64_t table_seed = 1;
  auto* table_cmd = app.add_subcommand("dim-table", "cohomology dimensions and index over ranks and genera");
  table_cmd->add_option("--ranks", ranks, "comma separated ranks");
  table_cmd->add_option("--genera", genera, "comma separated genera (1 or 2)");
  table_cmd->add_option("--seed", table_seed, "random seed");
  table_cmd->add_option("--out", table_out, "prefix for .txt and .csv output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      auto c = solve_opts.config();
      validate(c);
      const auto st = solve_stage(c);
      std::cout << format_geometry_config(st.pair.geom().config());
      std::cout << solve_json(st).dump(2) << "\n";
      if (!c.output_dir.empty()) {
        std::filesystem::create_directories(c.output_dir);
        save_pair(c.output_dir + "/pair.ckpt", st.pair);
        write_json(c.output_dir + "/solve.json", solve_json(st));
      }
      return st.report.converged ? 0 : 1;
    }
    if (*deform_cmd) {
      ExperimentConfig c;
      c.name = "deform";
      c.checks = {"complex", "cohomology", "dimension", "index", "kuranishi"};
      if (!steps.empty()) c.chart_steps = steps;
      const auto pair = load_pair(deform_pair);
      return print_report(analyze_report(pair, c), deform_report);
    }
    if (*moduli_cmd) {
      ExperimentConfig c;
      c.name = "moduli";
      c.checks = split_list(moduli_checks);
      validate(ExperimentConfig{c.name, "", GeometryConfig{}, 1, 1, 1e-8, 0, 1, "", c.checks});
      const auto pair = load_pair(moduli_pair);
      return print_report(analyze_report(pair, c), moduli_report);
    }
    if (*verify_cmd) {
      auto c = verify_opts.config();
      c.checks = split_list(checks);
      const auto rep = run_pipeline(c);
      return print_report(rep, "");
    }
    if (*table_cmd) {
      std::vector<int> rs, gs;
      for (const auto& s : split_list(ranks)) rs.push_back(std::stoi(s));
      for (const auto& s : split_list(genera)) gs.push_back(std::stoi(s));
      const Table t = dimension_table(dimension_sweep(rs, gs, table_seed));
      if (!table_out.empty()) t.write(table_out);
      std::cout << t.text();
      return 0;
    }
  } catch (const bh::Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "test_util.hpp"

using namespace bh;
using namespace bh::test;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bhit_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const CheckResult& find_check(const VerificationReport& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.name == name) return c;
  throw std::runtime_error("missing check " + name);
}

TEST(Checkpoint, RoundTripIsExact) {
  for (auto cfg : {torus_config(8), l_shape_genus2_config(4)}) {
    auto s = build_surface(cfg);
    const HitchinPair p = seed_pair(s, 2, 3, SeedKind::RandomSmooth);
    std::stringstream ss;
    write_pair(ss, p);
    const HitchinPair q = read_pair(ss);
    EXPECT_EQ(q.rank(), 2);
    EXPECT_EQ(q.geom().backend(), s->backend());
    EXPECT_EQ(q.geom().genus(), s->genus());
    EXPECT_LE(max_abs_diff(q.A.data, p.A.data), 0.0);
    EXPECT_LE(max_abs_diff(q.Phi.data, p.Phi.data), 0.0);
    EXPECT_EQ(format_geometry_config(q.geom().config()), format_geometry_config(cfg));
  }
}

TEST(Checkpoint, FileRoundTripAndErrors) {
  const fs::path dir = scratch("ckpt");
  auto s = build_surface(torus_config(8));
  const HitchinPair p = seed_pair(s, 1, 4, SeedKind::RandomSmooth);
  save_pair((dir / "p.ckpt").string(), p);
  EXPECT_LE(max_abs_diff(load_pair((dir / "p.ckpt").string()).A.data, p.A.data), 0.0);
  try {
    load_pair((dir / "missing.ckpt").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IOError);
  }
  {
    std::ofstream f(dir / "bad.ckpt");
    f << "not a checkpoint\n";
  }
  EXPECT_THROW(load_pair((dir / "bad.ckpt").string()), Error);
  std::stringstream ss;
  write_cochain(ss, *s, p.A);
  auto other = build_surface(torus_config(16));
  try {
    read_cochain(ss, *other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IOError);
  }
  fs::remove_all(dir);
}

TEST(Config, ValidateRejectsBadInput) {
  auto expect_code = [](const ExperimentConfig& c, ErrorCode code) {
    try {
      validate(c);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  ExperimentConfig ok = preset("torus-r1");
  EXPECT_NO_THROW(validate(ok));
  ExperimentConfig c = ok;
  c.tolerance = -1;
  expect_code(c, ErrorCode::InvalidConfig);
  c = ok;
  c.rank = 0;
  expect_code(c, ErrorCode::InvalidConfig);
  c = ok;
  c.checks = {"solve", "nonsense"};
  expect_code(c, ErrorCode::InvalidConfig);
  c = ok;
  c.normal_steps = {1e-2, 0.0};
  expect_code(c, ErrorCode::InvalidConfig);
  c = ok;
  c.geometry_path = "/nonexistent/geometry.cfg";
  expect_code(c, ErrorCode::IOError);
  c = ExperimentConfig{};
  expect_code(c, ErrorCode::InvalidConfig);
  EXPECT_THROW(preset("sphere-r1"), Error);
}

TEST(Config, PresetsResolve) {
  EXPECT_EQ(preset("torus-r2").rank, 2);
  EXPECT_EQ(resolve_geometry(preset("genus2-r1")).genus, 2);
  EXPECT_EQ(resolve_geometry(preset("torus-r1")).genus, 1);
}

TEST(Tables, TextAndCsv) {
  Table empty{{"a", "bb"}, {}};
  EXPECT_EQ(empty.csv(), "a,bb\n");
  EXPECT_EQ(empty.text(), "a  bb\n");
  Table t{{"x", "y"}, {{"1", "long"}, {"22", "z"}}};
  EXPECT_EQ(t.csv(), "x,y\n1,long\n22,z\n");
  EXPECT_EQ(t.text(), "x   y   \n1   long\n22  z   \n");
  const fs::path dir = scratch("tables");
  t.write((dir / "t").string());
  std::ifstream f(dir / "t.csv");
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), t.csv());
  EXPECT_THROW(t.write("/nonexistent/dir/t"), Error);
  fs::remove_all(dir);
}

TEST(Report, SchemaAndTable) {
  VerificationReport rep;
  rep.name = "demo";
  CheckResult k{"solve"};
  k.status = Status::Pass;
  k.measured = {{"residual", 1e-10}};
  k.expected["residual"] = expected_value(1e-8, "upper bound");
  rep.checks.push_back(k);
  const json j = rep.to_json();
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  for (const char* key : {"name", "geometry", "solve", "environment", "checks", "all_pass"}) EXPECT_TRUE(j.contains(key));
  EXPECT_EQ(j["checks"][0]["status"], "pass");
  EXPECT_EQ(j["checks"][0]["expected"]["residual"]["basis"], "upper bound");
  EXPECT_TRUE(j["all_pass"].get<bool>());
  const Table t = report_table(rep);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "solve");
  EXPECT_EQ(t.rows[0][4], "1e-08");
  rep.checks.push_back(CheckResult{"flat", Status::Undetermined});
  EXPECT_FALSE(rep.all_pass());
}

TEST(Pipeline, TorusRankOne) {
  const fs::path dir = scratch("torus");
  ExperimentConfig c = preset("torus-r1");
  c.output_dir = dir.string();
  const auto rep = run_pipeline(c);
  EXPECT_TRUE(rep.all_pass()) << rep.to_json().dump(2);
  EXPECT_EQ(find_check(rep, "dimension").measured["h1"], 4);
  EXPECT_EQ(find_check(rep, "index").measured["index"], 0);
  EXPECT_TRUE(fs::exists(dir / "pair.ckpt"));
  std::ifstream f(dir / "report.json");
  const json j = json::parse(f);
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["checks"].size(), known_checks().size());
  const HitchinPair p = load_pair((dir / "pair.ckpt").string());
  EXPECT_LE(residual(p).max_norm(), c.tolerance);
  fs::remove_all(dir);
}

TEST(Pipeline, GenusTwoRankOne) {
  ExperimentConfig c = preset("genus2-r1");
  c.checks = {"solve", "flat", "complex", "cohomology", "dimension", "index", "compat", "kuranishi"};
  const auto rep = run_pipeline(c);
  EXPECT_TRUE(rep.all_pass()) << rep.to_json().dump(2);
  EXPECT_EQ(find_check(rep, "dimension").measured["h1"], 8);
  EXPECT_EQ(find_check(rep, "index").measured["index"], 4);
}

TEST(Pipeline, CheckSubsetAndUnsolvedPair) {
  ExperimentConfig c = preset("torus-r1");
  c.checks = {"solve", "flat"};
  auto s = build_surface(torus_config(8));
  const auto rep = analyze_report(seed_pair(s, 1, 5, SeedKind::RandomSmooth), c);
  ASSERT_EQ(rep.checks.size(), 2u);
  EXPECT_EQ(rep.checks[0].status, Status::Fail);
  EXPECT_EQ(rep.checks[1].status, Status::Undetermined);
  EXPECT_FALSE(rep.checks[1].note.empty());
}

TEST(Pipeline, DimensionTable) {
  const auto rows = dimension_sweep({1}, {1, 2});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].h1, 4);
  EXPECT_EQ(rows[1].h1, 8);
  EXPECT_EQ(rows[1].index, 4);
  const Table t = dimension_table(rows);
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.header.size(), t.rows[0].size());
  EXPECT_THROW(dimension_sweep({1}, {3}), Error);
}

}  // namespace

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hypolab/config.hpp"
#include "hypolab/experiments.hpp"
#include "hypolab/integrate.hpp"
#include "hypolab/presets.hpp"
#include "hypolab/rng.hpp"

using namespace hypolab;
namespace fs = std::filesystem;

namespace {

Scenario scenario_from(const std::string& text) { return parse_config(text); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void check_table_shape(const ResultTable& t) {
  CHECK(!t.name.empty());
  CHECK(!t.header.empty());
  for (const auto& row : t.rows) CHECK(row.size() == t.header.size());
}

const ResultTable& table_named(const RunResult& r, const std::string& name) {
  for (const ResultTable& t : r.tables)
    if (t.name == name) return t;
  FAIL("missing table ", name);
  return r.tables.front();
}

// Build-dir scratch space; each case uses its own subdirectory.
fs::path scratch_dir(const std::string& leaf) {
  fs::path dir = fs::temp_directory_path() / "hypolab_experiments" / leaf;
  fs::remove_all(dir);
  return dir;
}

const char* kIdentityConfig =
    "[problem]\n"
    "preset = ou-2mode\n"
    "[experiment]\n"
    "kind = identity-check\n"
    "seed = 42\n"
    "steps = 32\n"
    "triples = 2\n"
    "[output]\n"
    "dir = %DIR%\n"
    "basename = idrun\n";

Scenario identity_scenario(const fs::path& dir) {
  std::string text = kIdentityConfig;
  text.replace(text.find("%DIR%"), 5, dir.string());
  return scenario_from(text);
}

}  // namespace

TEST_CASE("format_double emits shortest round-trip form") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-0.5) == "-0.5");
  CHECK(format_double(0.1) == "0.1");
  for (double x : {1.0 / 3.0, 2.0 / 7.0, 3.141592653589793, 1e-300, 1.7e308, -6.25e-4,
                   5e-324, 1234567.890625}) {
    std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
    std::string again = format_double(std::strtod(s.c_str(), nullptr));
    CHECK(again == s);
  }
}

TEST_CASE("csv_text joins with commas and ends every line with newline") {
  ResultTable t{"demo", {"a", "b"}, {{"1", "2"}, {"3.5", "x"}}};
  CHECK(csv_text(t) == "a,b\n1,2\n3.5,x\n");
  ResultTable empty{"demo", {"only"}, {}};
  CHECK(csv_text(empty) == "only\n");
}

TEST_CASE("trajectory and path tables carry time plus one column per component") {
  CompiledProblem p = compile(make_preset("ou-2mode"));
  BrownianPath path = sample_path(8, p.noise_dim, p.horizon, 5);
  Trajectory traj = integrate(p, path);

  ResultTable tt = trajectory_table(traj);
  CHECK(tt.header == std::vector<std::string>{"time", "u1", "u2"});
  CHECK(tt.rows.size() == traj.steps + 1);
  CHECK(tt.rows.front()[0] == "0");
  CHECK(tt.rows.front()[1] == format_double(traj.state(0)[0]));
  CHECK(tt.rows.back()[0] == format_double(p.horizon));
  check_table_shape(tt);

  ResultTable pt = path_table(path);
  CHECK(pt.header == std::vector<std::string>{"time", "w1", "w2"});
  CHECK(pt.rows.size() == path.steps + 1);
  CHECK(pt.rows.front()[1] == "0");
  CHECK(pt.rows.back()[1] == format_double(path.value(path.steps, 0)));
  check_table_shape(pt);
}

TEST_CASE("hormander scenario produces a verdict and depth counts") {
  Scenario s = scenario_from(
      "[problem]\n"
      "preset = ou-2mode\n"
      "[experiment]\n"
      "kind = hormander-check\n"
      "[output]\n"
      "dir = unused\n");
  RunResult r = run_scenario(s);
  REQUIRE(!r.verdict_json.empty());
  auto v = nlohmann::json::parse(r.verdict_json);
  CHECK(v["verdict"] == "SPANS");
  CHECK(v["rank"] == 2);
  CHECK(v["target_dim"] == 2);
  CHECK(v["exact"] == true);
  CHECK(v["lambda_size"].get<int>() >= 2);
  CHECK(!v.contains("certificate"));

  const ResultTable& depths = table_named(r, "depth_counts");
  CHECK(depths.header == std::vector<std::string>{"depth", "words"});
  CHECK(!depths.rows.empty());
  for (const ResultTable& t : r.tables) check_table_shape(t);
  REQUIRE(!r.notes.empty());
  CHECK(r.notes.front().find("SPANS") != std::string::npos);
}

TEST_CASE("tail scenario tables agree with the eps grid and sample count") {
  Scenario s = scenario_from(
      "[problem]\n"
      "preset = ou-2mode\n"
      "[experiment]\n"
      "kind = malliavin-tail\n"
      "seed = 9\n"
      "steps = 32\n"
      "samples = 120\n"
      "modes = 1\n"
      "eps_min = 1/1000\n"
      "eps_max = 1/10\n"
      "per_decade = 2\n"
      "[output]\n"
      "dir = unused\n");
  RunResult r = run_scenario(s);
  CHECK(r.verdict_json.empty());

  const ResultTable& tail = table_named(r, "tail");
  CHECK(tail.rows.size() == 5);  // two decades at 2 per decade, endpoints included
  double prev = 1e9;
  for (const auto& row : tail.rows) {
    double eps = std::strtod(row[0].c_str(), nullptr);
    double freq = std::strtod(row[1].c_str(), nullptr);
    CHECK(eps < prev);
    prev = eps;
    CHECK(freq >= 0.0);
    CHECK(freq <= 1.0);
    CHECK(row[2] == "120");
  }

  const ResultTable& raw = table_named(r, "samples");
  CHECK(raw.rows.size() == 120);
  for (const auto& row : raw.rows) {
    CHECK(std::strtod(row[1].c_str(), nullptr) >= 0.0);
  }

  const ResultTable& fit = table_named(r, "fit");
  REQUIRE(fit.rows.size() == 1);
  CHECK(std::strtod(fit.rows[0][4].c_str(), nullptr) ==
        doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(std::strtod(fit.rows[0][5].c_str(), nullptr) ==
        doctest::Approx(1e-1).epsilon(1e-12));
  for (const ResultTable& t : r.tables) check_table_shape(t);
}

TEST_CASE("density scenario evaluates the query lattice row-major") {
  Scenario s = scenario_from(
      "[problem]\n"
      "preset = ou-1mode\n"
      "[experiment]\n"
      "kind = density\n"
      "seed = 3\n"
      "steps = 16\n"
      "samples = 60\n"
      "modes = 1\n"
      "query_min = -2\n"
      "query_max = 2\n"
      "query_points = 5\n"
      "[output]\n"
      "dir = unused\n");
  RunResult r = run_scenario(s);

  const ResultTable& dens = table_named(r, "density");
  CHECK(dens.header == std::vector<std::string>{"x1", "density"});
  REQUIRE(dens.rows.size() == 5);
  CHECK(dens.rows.front()[0] == "-2");
  CHECK(dens.rows.back()[0] == "2");
  double mass = 0.0;
  for (const auto& row : dens.rows) {
    double d = std::strtod(row[1].c_str(), nullptr);
    CHECK(d >= 0.0);
    mass += d;
  }
  CHECK(mass > 0.0);

  const ResultTable& raw = table_named(r, "samples");
  CHECK(raw.header == std::vector<std::string>{"path_index", "u1"});
  CHECK(raw.rows.size() == 60);

  const ResultTable& meta = table_named(r, "density_meta");
  REQUIRE(meta.rows.size() == 1);
  CHECK(meta.rows[0][2] == "0");  // nondegenerate spread
  CHECK(std::strtod(meta.rows[0][1].c_str(), nullptr) > 0.0);
  for (const ResultTable& t : r.tables) check_table_shape(t);
}

TEST_CASE("norris scenario reports per-eps counts with consistent arithmetic") {
  Scenario s = scenario_from(
      "[problem]\n"
      "preset = ou-1mode\n"
      "[experiment]\n"
      "kind = norris-dichotomy\n"
      "seed = 7\n"
      "steps = 16\n"
      "d = 1\n"
      "m = 1\n"
      "family = constant\n"
      "paths = 5\n"
      "procs = 4\n"
      "eps_min = 1/100\n"
      "eps_max = 1/10\n"
      "per_decade = 1\n"
      "[output]\n"
      "dir = unused\n");
  RunResult r = run_scenario(s);

  const ResultTable& viol = table_named(r, "violations");
  CHECK(viol.header ==
        std::vector<std::string>{"eps", "trials", "violations", "frequency", "stderr",
                                 "path_hits", "path_fraction", "paths", "procs", "steps",
                                 "seed", "family"});
  REQUIRE(viol.rows.size() == 2);
  for (const auto& row : viol.rows) {
    CHECK(row[1] == "20");  // 5 paths x 4 processes
    long hits = std::strtol(row[2].c_str(), nullptr, 10);
    double freq = std::strtod(row[3].c_str(), nullptr);
    long path_hits = std::strtol(row[5].c_str(), nullptr, 10);
    CHECK(freq == doctest::Approx(static_cast<double>(hits) / 20.0).epsilon(1e-12));
    CHECK(path_hits <= hits);
    CHECK(path_hits <= 5);
    CHECK(row[7] == "5");
    CHECK(row[8] == "4");
    CHECK(row[11] == "constant");
  }
  for (const ResultTable& t : r.tables) check_table_shape(t);
}

TEST_CASE("identity scenario verifies duality, shift, and expansion order") {
  Scenario s = identity_scenario(scratch_dir("identity"));
  RunResult r = run_scenario(s);

  const ResultTable& idt = table_named(r, "identities");
  REQUIRE(idt.rows.size() == 2);
  for (const auto& row : idt.rows) {
    CHECK(std::strtod(row[1].c_str(), nullptr) <= 1e-9);   // duality gap
    CHECK(std::strtod(row[2].c_str(), nullptr) <= 1e-7);   // FD vs Jacobian (linear drift)
    CHECK(std::strtod(row[3].c_str(), nullptr) <= 1e-12);  // decay + lambda*phi - 1
    CHECK(std::strtod(row[4].c_str(), nullptr) <= 0.5);  // shifted reconstruction is O(dt)
    CHECK(std::strtod(row[5].c_str(), nullptr) <= 1e-6);   // reduced vs direct form
  }

  const ResultTable& exp_t = table_named(r, "expansion");
  REQUIRE(exp_t.rows.size() == 3);
  double dt0 = std::strtod(exp_t.rows[0][0].c_str(), nullptr);
  double dt1 = std::strtod(exp_t.rows[1][0].c_str(), nullptr);
  double dt2 = std::strtod(exp_t.rows[2][0].c_str(), nullptr);
  CHECK(dt0 == doctest::Approx(2.0 * dt1).epsilon(1e-12));
  CHECK(dt1 == doctest::Approx(2.0 * dt2).epsilon(1e-12));

  const ResultTable& fit = table_named(r, "expansion_fit");
  REQUIRE(fit.rows.size() == 1);
  double order = std::strtod(fit.rows[0][0].c_str(), nullptr);
  CHECK(order > 0.4);
  CHECK(order < 1.7);
  for (const ResultTable& t : r.tables) check_table_shape(t);
}

TEST_CASE("run_scenario is pure: repeated runs give identical tables") {
  Scenario s = identity_scenario(scratch_dir("purity"));
  RunResult a = run_scenario(s);
  RunResult b = run_scenario(s);
  REQUIRE(a.tables.size() == b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) {
    CHECK(csv_text(a.tables[i]) == csv_text(b.tables[i]));
  }
  CHECK(a.verdict_json == b.verdict_json);
  CHECK(a.notes == b.notes);
}

TEST_CASE("write_outputs reruns byte-identical except manifest timing") {
  fs::path dir = scratch_dir("rerun");
  Scenario s = identity_scenario(dir);

  RunResult first = run_scenario(s);
  std::vector<std::string> written = write_outputs(first, 0.25);
  REQUIRE(written.size() == first.tables.size() + 2);  // config + tables + manifest

  std::map<std::string, std::string> snapshot;
  for (const std::string& p : written) {
    CHECK(fs::exists(p));
    snapshot[fs::path(p).filename().string()] = read_file(p);
  }
  CHECK(snapshot.count("idrun.config.txt") == 1);
  CHECK(snapshot.count("idrun.manifest.json") == 1);
  CHECK(snapshot.count("idrun.verdict.json") == 0);
  CHECK(snapshot.at("idrun.config.txt") == resolved_config_text(s));

  auto manifest = nlohmann::json::parse(snapshot.at("idrun.manifest.json"));
  CHECK(manifest["kind"] == "identity-check");
  CHECK(manifest["problem"] == "ou-2mode");
  CHECK(manifest["seed"] == 42);
  CHECK(manifest["wall_seconds"] == 0.25);
  CHECK(manifest["files"].size() == written.size() - 1);  // everything but itself

  RunResult second = run_scenario(s);
  std::vector<std::string> rewritten = write_outputs(second, 0.75);
  REQUIRE(rewritten == written);
  for (const std::string& p : rewritten) {
    std::string name = fs::path(p).filename().string();
    std::string body = read_file(p);
    if (name == "idrun.manifest.json") {
      auto a = nlohmann::json::parse(snapshot.at(name));
      auto b = nlohmann::json::parse(body);
      a.erase("generated_at");
      b.erase("generated_at");
      a.erase("wall_seconds");
      b.erase("wall_seconds");
      CHECK(a == b);
    } else {
      CHECK(body == snapshot.at(name));
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("write_outputs emits the verdict file for span checks") {
  fs::path dir = scratch_dir("verdict");
  Scenario s = scenario_from(
      "[problem]\n"
      "preset = ou-1mode\n"
      "[experiment]\n"
      "kind = hormander-check\n"
      "[output]\n"
      "dir = " +
      dir.string() +
      "\n"
      "basename = span\n");
  RunResult r = run_scenario(s);
  write_outputs(r, 0.1);
  CHECK(fs::exists(dir / "span.verdict.json"));
  auto v = nlohmann::json::parse(read_file(dir / "span.verdict.json"));
  CHECK(v["verdict"] == "SPANS");
  auto manifest = nlohmann::json::parse(read_file(dir / "span.manifest.json"));
  CHECK(manifest["seed"].is_null());
  fs::remove_all(dir);
}

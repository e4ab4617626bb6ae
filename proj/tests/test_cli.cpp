#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hypolab/presets.hpp"

#ifndef HYPOLAB_CLI_PATH
#error "HYPOLAB_CLI_PATH must point at the built binary"
#endif

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch_dir(const std::string& leaf) {
  fs::path dir = fs::temp_directory_path() / "hypolab_cli" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  fs::path out = dir / "stdout.txt";
  fs::path err = dir / "stderr.txt";
  std::string cmd = std::string(HYPOLAB_CLI_PATH) + " " + args + " >" + out.string() +
                    " 2>" + err.string();
  int status = std::system(cmd.c_str());
  CliResult r;
  REQUIRE(status != -1);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

}  // namespace

TEST_CASE("version and preset listing succeed") {
  fs::path dir = scratch_dir("info");
  CliResult v = run_cli("--version", dir);
  CHECK(v.code == 0);
  CHECK(v.out.find("hypolab 0.1.0") != std::string::npos);

  CliResult l = run_cli("list-presets", dir);
  CHECK(l.code == 0);
  for (const hypolab::PresetInfo& info : hypolab::preset_list()) {
    CAPTURE(info.name);
    CHECK(l.out.find(info.name) != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("argument errors exit with code 2") {
  fs::path dir = scratch_dir("args");
  CHECK(run_cli("frobnicate", dir).code == 2);
  CHECK(run_cli("hormander-check", dir).code == 2);       // missing --preset
  CHECK(run_cli("run /no/such/config.ini", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("malformed config exits 2 with line and column") {
  fs::path dir = scratch_dir("badcfg");
  fs::path cfg = dir / "bad.ini";
  write_file(cfg,
             "[problem]\n"
             "preset = ou-2mode\n"
             "frequency = 3\n"
             "[experiment]\n"
             "kind = hormander-check\n");
  CliResult r = run_cli("run " + cfg.string(), dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("config error at 3:1") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("run executes a config file and writes the output set") {
  fs::path dir = scratch_dir("run");
  fs::path cfg = dir / "span.ini";
  write_file(cfg,
             "[problem]\n"
             "preset = ou-2mode\n"
             "[experiment]\n"
             "kind = hormander-check\n"
             "[output]\n"
             "dir = " +
                 (dir / "out").string() +
                 "\n"
                 "basename = span\n");
  CliResult r = run_cli("run " + cfg.string(), dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("hormander: SPANS rank 2/2") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "span.config.txt"));
  CHECK(fs::exists(dir / "out" / "span.verdict.json"));
  CHECK(fs::exists(dir / "out" / "span.depth_counts.csv"));
  CHECK(fs::exists(dir / "out" / "span.manifest.json"));
  fs::remove_all(dir);
}

TEST_CASE("kind subcommands build the same scenario as a config file") {
  fs::path dir = scratch_dir("subcmd");
  CliResult r = run_cli("hormander-check --preset ou-2mode --out " + (dir / "a").string() +
                            " --basename sub",
                        dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "a" / "sub.verdict.json"));
  std::string resolved = slurp(dir / "a" / "sub.config.txt");
  CHECK(resolved.find("name = ou-2mode") != std::string::npos);
  CHECK(resolved.find("preset") == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("monte carlo kinds refuse to run without a seed") {
  fs::path dir = scratch_dir("noseed");
  CliResult r = run_cli("identity-check --preset ou-2mode --steps 16 --triples 1 --out " +
                            (dir / "x").string(),
                        dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("seed") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("trajectory blow-up exits 3") {
  fs::path dir = scratch_dir("blowup");
  fs::path cfg = dir / "spike.ini";
  write_file(cfg,
             "[problem]\n"
             "name = spike\n"
             "dim = 1\n"
             "lambda = 1\n"
             "f = 1 : 1 1 1 : 1\n"
             "noise = 0\n"
             "horizon = 1\n"
             "u0 = 3\n"
             "[experiment]\n"
             "kind = identity-check\n"
             "seed = 1\n"
             "steps = 400\n"
             "triples = 1\n"
             "[output]\n"
             "dir = " +
                 (dir / "out").string() + "\n");
  CliResult r = run_cli("run " + cfg.string(), dir);
  CHECK(r.code == 3);
  CHECK(r.err.find("numerical abort") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("word budget overflow exits 4") {
  fs::path dir = scratch_dir("budget");
  CliResult r = run_cli("hormander-check --preset burgers-8 --word-budget 2 --out " +
                            (dir / "x").string(),
                        dir);
  CHECK(r.code == 4);
  CHECK(r.err.find("budget exceeded") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("simulate exports trajectory and path, byte-stable across reruns") {
  fs::path dir = scratch_dir("simulate");
  std::string common = "simulate --preset ou-2mode --steps 64 --seed 11 --basename sim";
  CliResult a = run_cli(common + " --out " + (dir / "a").string(), dir);
  CHECK(a.code == 0);
  REQUIRE(fs::exists(dir / "a" / "sim.trajectory.csv"));
  REQUIRE(fs::exists(dir / "a" / "sim.path.csv"));

  CliResult b = run_cli(common + " --out " + (dir / "b").string(), dir);
  CHECK(b.code == 0);
  CHECK(slurp(dir / "a" / "sim.trajectory.csv") == slurp(dir / "b" / "sim.trajectory.csv"));
  CHECK(slurp(dir / "a" / "sim.path.csv") == slurp(dir / "b" / "sim.path.csv"));

  CliResult c = run_cli(common + " --shifted --out " + (dir / "c").string(), dir);
  CHECK(c.code == 0);
  CHECK(slurp(dir / "c" / "sim.path.csv") == slurp(dir / "a" / "sim.path.csv"));
  CHECK(slurp(dir / "c" / "sim.trajectory.csv") != slurp(dir / "a" / "sim.trajectory.csv"));
  fs::remove_all(dir);
}

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hypolab/errors.hpp"
#include "hypolab/experiments.hpp"
#include "hypolab/presets.hpp"

namespace {

using namespace hypolab;

// Flags shared by every kind subcommand; set ones become config lines, so
// the strict parser is the single source of validation and defaults.
struct CommonFlags {
  std::string preset;
  std::string horizon;
  std::string u0;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string basename;
  CLI::Option* horizon_opt = nullptr;
  CLI::Option* u0_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* base_opt = nullptr;
};

struct KeyedFlag {
  std::string key;    // config key
  std::string value;  // rendered value
  CLI::Option* opt = nullptr;
};

struct KindCommand {
  CLI::App* sub = nullptr;
  std::string kind;
  CommonFlags common;
  std::vector<KeyedFlag> flags;
};

void add_common(KindCommand& cmd) {
  CLI::App* sub = cmd.sub;
  sub->add_option("--preset", cmd.common.preset, "named problem (see list-presets)")
      ->required();
  cmd.common.horizon_opt =
      sub->add_option("--horizon", cmd.common.horizon, "override the time horizon T");
  cmd.common.u0_opt =
      sub->add_option("--u0", cmd.common.u0, "override the initial state (comma list)");
  cmd.common.seed_opt = sub->add_option("--seed", cmd.common.seed, "master seed");
  cmd.common.out_opt = sub->add_option("--out", cmd.common.out_dir, "output directory");
  cmd.common.base_opt =
      sub->add_option("--basename", cmd.common.basename, "output file stem");
}

template <class T>
void add_keyed(KindCommand& cmd, const std::string& flag, const std::string& key, T& slot,
               const std::string& help) {
  KeyedFlag kf;
  kf.key = key;
  kf.opt = cmd.sub->add_option(flag, slot, help);
  cmd.flags.push_back(kf);
}

std::string render_config(const KindCommand& cmd,
                          const std::vector<std::pair<std::string, std::string>>& set_keys) {
  std::ostringstream o;
  o << "[problem]\n";
  o << "preset = " << cmd.common.preset << "\n";
  if (cmd.common.horizon_opt->count()) o << "horizon = " << cmd.common.horizon << "\n";
  if (cmd.common.u0_opt->count()) o << "u0 = " << cmd.common.u0 << "\n";
  o << "\n[experiment]\n";
  o << "kind = " << cmd.kind << "\n";
  if (cmd.common.seed_opt->count()) o << "seed = " << cmd.common.seed << "\n";
  for (const auto& [key, value] : set_keys) o << key << " = " << value << "\n";
  o << "\n[output]\n";
  if (cmd.common.out_opt->count()) o << "dir = " << cmd.common.out_dir << "\n";
  if (cmd.common.base_opt->count()) o << "basename = " << cmd.common.basename << "\n";
  return o.str();
}

int execute(const Scenario& scenario) {
  auto t0 = std::chrono::steady_clock::now();
  RunResult result = run_scenario(scenario);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<std::string> written = write_outputs(result, wall);
  for (const std::string& note : result.notes) std::cout << note << "\n";
  for (const std::string& path : written) std::cout << "wrote " << path << "\n";
  return 0;
}

int run_list_presets() {
  std::cout << "name            dim  noise  depth  target  description\n";
  for (const PresetInfo& info : preset_list()) {
    ProblemSpec spec = make_preset(info.name);
    spec.validate();
    int target = spec.span_target > 0 ? spec.span_target : spec.dim;
    std::ostringstream row;
    row << info.name;
    std::string pad(info.name.size() < 15 ? 15 - info.name.size() : 1, ' ');
    row << pad << " " << spec.dim << "    " << spec.noise_dim() << "      "
        << spec.bracket_depth << "      " << target << "      " << info.description;
    std::cout << row.str() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypoellipticity lab for truncated semilinear SPDEs"};
  app.set_version_flag("--version", "hypolab 0.1.0");
  app.require_subcommand(1);

  // run: full config file, optional overrides
  std::string config_path, run_out, run_base;
  std::uint64_t run_seed = 0;
  CLI::App* run_cmd = app.add_subcommand("run", "run a scenario from a config file");
  run_cmd->add_option("config", config_path, "config file path")->required();
  CLI::Option* run_seed_opt = run_cmd->add_option("--seed", run_seed, "override the master seed");
  CLI::Option* run_out_opt = run_cmd->add_option("--out", run_out, "override the output directory");
  CLI::Option* run_base_opt =
      run_cmd->add_option("--basename", run_base, "override the output file stem");

  CLI::App* list_cmd = app.add_subcommand("list-presets", "print the preset table");

  // one subcommand per experiment kind
  KindCommand hormander{app.add_subcommand("hormander-check",
                                           "bracket generation and span verdict"),
                        "hormander-check"};
  add_common(hormander);
  int h_depth = 0, h_target = 0;
  std::uint64_t h_budget = 0;
  bool h_approx = false;
  add_keyed(hormander, "--depth-limit", "depth_limit", h_depth, "word depth cap");
  add_keyed(hormander, "--target-dim", "target_dim", h_target, "span target dimension");
  add_keyed(hormander, "--word-budget", "word_budget", h_budget, "a-priori word cap");
  CLI::Option* h_approx_opt = hormander.sub->add_flag(
      "--approx", h_approx, "SVD rank instead of exact rational elimination");

  KindCommand tail{app.add_subcommand("malliavin-tail",
                                      "small-eigenvalue tail of the projected matrix"),
                   "malliavin-tail"};
  add_common(tail);
  std::uint64_t t_steps = 0;
  int t_modes = 0, t_samples = 0, t_decade = 0;
  std::string t_emin, t_emax;
  add_keyed(tail, "--steps", "steps", t_steps, "time steps per trajectory");
  add_keyed(tail, "--modes", "modes", t_modes, "leading modes N of the projection");
  add_keyed(tail, "--samples", "samples", t_samples, "Monte-Carlo sample count");
  add_keyed(tail, "--eps-min", "eps_min", t_emin, "smallest threshold");
  add_keyed(tail, "--eps-max", "eps_max", t_emax, "largest threshold");
  add_keyed(tail, "--per-decade", "per_decade", t_decade, "grid points per decade");

  KindCommand dens{app.add_subcommand("density", "kernel density of the projected state"),
                   "density"};
  add_common(dens);
  std::uint64_t d_steps = 0;
  int d_modes = 0, d_samples = 0, d_points = 0;
  std::string d_qmin, d_qmax;
  add_keyed(dens, "--steps", "steps", d_steps, "time steps per trajectory");
  add_keyed(dens, "--modes", "modes", d_modes, "leading modes N (at most 3)");
  add_keyed(dens, "--samples", "samples", d_samples, "Monte-Carlo sample count");
  add_keyed(dens, "--query-min", "query_min", d_qmin, "query lattice lower edge");
  add_keyed(dens, "--query-max", "query_max", d_qmax, "query lattice upper edge");
  add_keyed(dens, "--query-points", "query_points", d_points, "lattice points per axis");

  KindCommand norris{app.add_subcommand("norris-dichotomy",
                                        "violation curve over a process family"),
                     "norris-dichotomy"};
  add_common(norris);
  std::uint64_t n_steps = 0;
  int n_d = 0, n_m = 0, n_paths = 0, n_procs = 0, n_decade = 0;
  std::string n_family, n_emin, n_emax;
  add_keyed(norris, "--d", "d", n_d, "noise channels");
  add_keyed(norris, "--m", "m", n_m, "polynomial order");
  add_keyed(norris, "--family", "family", n_family, "constant | adversarial");
  add_keyed(norris, "--paths", "paths", n_paths, "Brownian paths");
  add_keyed(norris, "--procs", "procs", n_procs, "processes per path");
  add_keyed(norris, "--steps", "steps", n_steps, "grid steps on [0,1]");
  add_keyed(norris, "--eps-min", "eps_min", n_emin, "smallest eps");
  add_keyed(norris, "--eps-max", "eps_max", n_emax, "largest eps");
  add_keyed(norris, "--per-decade", "per_decade", n_decade, "grid points per decade");

  KindCommand ident{app.add_subcommand("identity-check",
                                       "duality, shift and expansion residuals"),
                    "identity-check"};
  add_common(ident);
  std::uint64_t i_steps = 0;
  int i_triples = 0;
  add_keyed(ident, "--steps", "steps", i_steps, "time steps per trajectory");
  add_keyed(ident, "--triples", "triples", i_triples, "random probe triples");

  // simulate: plain trajectory/path export, no experiment wrapper
  std::string sim_preset, sim_out = "out", sim_base = "simulate";
  std::uint64_t sim_steps = 1000, sim_seed = 0, sim_index = 0;
  bool sim_shifted = false;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "export one trajectory and its path");
  sim_cmd->add_option("--preset", sim_preset, "named problem")->required();
  sim_cmd->add_option("--steps", sim_steps, "time steps");
  sim_cmd->add_option("--seed", sim_seed, "master seed")->required();
  sim_cmd->add_option("--path-index", sim_index, "path index within the ensemble");
  sim_cmd->add_flag("--shifted", sim_shifted, "integrate the shifted equation");
  sim_cmd->add_option("--out", sim_out, "output directory");
  sim_cmd->add_option("--basename", sim_base, "output file stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(run_cmd)) {
      Scenario scenario = load_config(config_path);
      if (run_seed_opt->count()) {
        scenario.params.seed = run_seed;
        scenario.params.has_seed = true;
      }
      if (run_out_opt->count()) scenario.out_dir = run_out;
      if (run_base_opt->count()) scenario.basename = run_base;
      return execute(scenario);
    }
    if (app.got_subcommand(list_cmd)) return run_list_presets();
    if (app.got_subcommand(sim_cmd)) {
      ProblemSpec spec = make_preset(sim_preset);
      CompiledProblem p = compile(spec);
      BrownianPath path = sample_path(sim_steps, p.noise_dim, p.horizon, sim_seed, sim_index);
      Trajectory traj = sim_shifted ? integrate_shifted(p, path) : integrate(p, path);
      std::filesystem::create_directories(sim_out);
      auto emit = [&](const std::string& name, const std::string& body) {
        std::filesystem::path file = std::filesystem::path(sim_out) / name;
        std::ofstream out(file, std::ios::binary);
        out << body;
        std::cout << "wrote " << file.string() << "\n";
      };
      emit(sim_base + ".trajectory.csv", csv_text(trajectory_table(traj)));
      emit(sim_base + ".path.csv", csv_text(path_table(path)));
      return 0;
    }
    for (KindCommand* cmd : {&hormander, &tail, &dens, &norris, &ident}) {
      if (!app.got_subcommand(cmd->sub)) continue;
      std::vector<std::pair<std::string, std::string>> set_keys;
      for (const KeyedFlag& kf : cmd->flags) {
        if (kf.opt->count()) set_keys.emplace_back(kf.key, kf.opt->as<std::string>());
      }
      if (cmd == &hormander && h_approx_opt->count()) {
        set_keys.emplace_back("exact", "false");
      }
      Scenario scenario = parse_config(render_config(*cmd, set_keys));
      return execute(scenario);
    }
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const ConfigError& e) {
    if (e.line > 0) {
      std::cerr << "config error at " << e.line << ":" << e.col << ": " << e.what() << "\n";
    } else {
      std::cerr << "config error: " << e.what() << "\n";
    }
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 4;
  } catch (const BlowUpError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

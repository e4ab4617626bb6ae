#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "hypolab/config.hpp"
#include "hypolab/integrate.hpp"

namespace hypolab {

// Shortest round-trip decimal form (to_chars); the one formatter every CSV
// cell goes through, so identical runs write identical bytes.
std::string format_double(double x);

struct ResultTable {
  std::string name;  // file stem suffix: <basename>.<name>.csv
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Header + rows, comma separated, '\n' line ends, trailing newline.
std::string csv_text(const ResultTable& t);

struct RunResult {
  Scenario scenario;
  std::vector<ResultTable> tables;
  std::string verdict_json;        // nonempty for kinds with a verdict
  std::vector<std::string> notes;  // one line per headline fact
};

// Dispatches on the scenario kind; pure given (config, seed).
RunResult run_scenario(const Scenario& s);

// Writes every table, the resolved config, the verdict (if any), and a
// manifest into s.out_dir; returns the paths written. Only the manifest
// carries timing, so reruns reproduce every other file byte for byte.
std::vector<std::string> write_outputs(const RunResult& r, double wall_seconds);

// Columnar exports: time then one column per mode / channel.
ResultTable trajectory_table(const Trajectory& traj);
ResultTable path_table(const BrownianPath& path);

}  // namespace hypolab

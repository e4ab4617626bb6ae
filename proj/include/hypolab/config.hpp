#pragma once
#include <cstdint>
#include <string>

#include "hypolab/problem.hpp"

namespace hypolab {

enum class ExperimentKind {
  HormanderCheck,
  MalliavinTail,
  Density,
  NorrisDichotomy,
  IdentityCheck,
};

const char* kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

// Monte-Carlo kinds refuse to run without an explicit master seed.
bool kind_needs_seed(ExperimentKind k);

struct ExperimentParams {
  ExperimentKind kind = ExperimentKind::HormanderCheck;
  bool has_seed = false;
  std::uint64_t seed = 0;

  // hormander-check; 0 defers to the problem's defaults
  int depth_limit = 0;
  int target_dim = 0;
  unsigned long long word_budget = 2'000'000;
  bool exact = true;

  // shared simulation grid
  std::size_t steps = 1000;

  // malliavin-tail / density
  int modes = 1;  // N, leading-mode projection size
  int samples = 1000;
  Rational eps_min = Rational(1, 1000000);
  Rational eps_max = Rational(1, 10);
  int per_decade = 12;

  // density query lattice (per-dimension uniform grid)
  Rational query_min = Rational(-3);
  Rational query_max = Rational(3);
  int query_points = 61;

  // norris-dichotomy
  int d = 1;
  int m = 1;
  std::string family = "adversarial";  // constant | adversarial
  int paths = 1000;
  int procs = 100;

  // identity-check
  int triples = 20;
};

struct Scenario {
  ProblemSpec problem;
  ExperimentParams params;
  std::string out_dir = "out";
  std::string basename;  // empty: derived from the kind
};

// Strict sectioned key = value text: sections [problem], [experiment],
// [output]; '#' comments; unknown sections/keys and malformed values are
// ConfigErrors carrying 1-based line/column.
Scenario parse_config(const std::string& text);
Scenario load_config(const std::string& path);

// Canonical fully-resolved form; parsing it back yields the same scenario
// (round-trip contract). Every run records this next to its outputs.
std::string resolved_config_text(const Scenario& s);

// FNV-1a 64 over the resolved text; the manifest's config identity.
std::uint64_t config_hash(const Scenario& s);

}  // namespace hypolab

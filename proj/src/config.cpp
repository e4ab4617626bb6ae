#include "hypolab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hypolab/errors.hpp"
#include "hypolab/presets.hpp"

namespace hypolab {
namespace {

struct Entry {
  std::string value;
  int line = 0;
  int col = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

long long parse_int(const std::string& field, const Entry& e, const std::string& text) {
  long long v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || p != last) {
    throw ConfigError(field + ": expected an integer, got '" + text + "'", e.line, e.col);
  }
  return v;
}

std::uint64_t parse_uint(const std::string& field, const Entry& e) {
  std::uint64_t v = 0;
  const char* first = e.value.data();
  const char* last = e.value.data() + e.value.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || p != last) {
    throw ConfigError(field + ": expected a nonnegative integer, got '" + e.value + "'",
                      e.line, e.col);
  }
  return v;
}

bool parse_bool(const std::string& field, const Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError(field + ": expected true or false, got '" + e.value + "'", e.line,
                    e.col);
}

Rational parse_rat(const std::string& field, const Entry& e, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const std::exception&) {
    throw ConfigError(field + ": bad number '" + text + "'", e.line, e.col);
  }
}

std::vector<Rational> parse_rat_list(const std::string& field, const Entry& e) {
  std::vector<Rational> out;
  for (const std::string& tok : split(e.value, ',')) {
    if (tok.empty()) {
      throw ConfigError(field + ": empty list entry", e.line, e.col);
    }
    out.push_back(parse_rat(field, e, tok));
  }
  return out;
}

// One record per monomial: "out : j1 j2 .. jk : coeff", 1-based indices,
// records joined with ';'. The coefficient is the ordinary polynomial
// coefficient of the monomial u_{j1}...u_{jk} in component `out`.
void parse_poly_records(const std::string& field, const Entry& e, int dim,
                        int min_degree, int max_degree,
                        std::map<int, PolyMap<Rational>>& by_degree) {
  for (const std::string& rec : split(e.value, ';')) {
    if (rec.empty()) {
      throw ConfigError(field + ": empty record", e.line, e.col);
    }
    std::vector<std::string> fields = split(rec, ':');
    if (fields.size() != 3) {
      throw ConfigError(field + ": record needs 'out : slots : coeff', got '" + rec + "'",
                        e.line, e.col);
    }
    long long out = parse_int(field, e, fields[0]);
    if (out < 1 || out > dim) {
      throw ConfigError(field + ": output index " + fields[0] + " outside 1.." +
                            std::to_string(dim),
                        e.line, e.col);
    }
    std::vector<std::string> slots = split_ws(fields[1]);
    int deg = static_cast<int>(slots.size());
    if (deg < min_degree || deg > max_degree) {
      throw ConfigError(field + ": record '" + rec + "' has " + std::to_string(deg) +
                            " argument slots, expected " + std::to_string(min_degree) +
                            ".." + std::to_string(max_degree),
                        e.line, e.col);
    }
    Multiset J;
    for (const std::string& s : slots) {
      long long j = parse_int(field, e, s);
      if (j < 1 || j > dim) {
        throw ConfigError(field + ": argument index " + s + " outside 1.." +
                              std::to_string(dim),
                          e.line, e.col);
      }
      J.push_back(static_cast<std::uint32_t>(j - 1));
    }
    std::sort(J.begin(), J.end());
    Rational c = parse_rat(field, e, fields[2]);
    auto it = by_degree.try_emplace(deg, PolyMap<Rational>(deg, dim)).first;
    it->second.add_coeff(static_cast<std::uint32_t>(out - 1), J,
                         c / Rational(multiset_multiplicity(J)));
  }
}

std::string poly_records_text(const PolySum<Rational>& sum) {
  // Canonical order: degree ascending, then the map's own (out, multiset)
  // table order; coefficients printed as polynomial coefficients.
  std::vector<const PolyMap<Rational>*> parts;
  for (const auto& p : sum.parts()) parts.push_back(&p);
  std::sort(parts.begin(), parts.end(),
            [](const PolyMap<Rational>* a, const PolyMap<Rational>* b) {
              return a->degree() < b->degree();
            });
  std::string out;
  for (const PolyMap<Rational>* part : parts) {
    for (const auto& [key, c] : part->table()) {
      if (!out.empty()) out += " ; ";
      out += std::to_string(key.first + 1);
      out += " :";
      for (std::uint32_t j : key.second) {
        out += ' ';
        out += std::to_string(j + 1);
      }
      out += " : ";
      out += rational_to_string(c * Rational(multiset_multiplicity(key.second)));
    }
  }
  return out;
}

std::string rat_list_text(const std::vector<Rational>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += rational_to_string(v[i]);
  }
  return out;
}

const std::set<std::string> kProblemKeys = {
    "name",    "preset", "dim", "lambda",      "f",
    "linear",  "noise",  "horizon", "u0",      "span_target",
    "bracket_depth"};
const std::set<std::string> kExperimentKeys = {
    "kind",      "seed",    "depth_limit", "target_dim",   "word_budget",
    "exact",     "steps",   "modes",       "samples",      "eps_min",
    "eps_max",   "per_decade", "query_min", "query_max",   "query_points",
    "d",         "m",       "family",      "paths",        "procs",
    "triples"};
const std::set<std::string> kOutputKeys = {"dir", "basename"};

const std::set<std::string>& keys_for_kind(ExperimentKind k) {
  static const std::set<std::string> hormander = {"depth_limit", "target_dim",
                                                  "word_budget", "exact"};
  static const std::set<std::string> tail = {"steps",   "modes",   "samples",
                                             "eps_min", "eps_max", "per_decade"};
  static const std::set<std::string> density = {"steps",     "modes",     "samples",
                                                "query_min", "query_max", "query_points"};
  static const std::set<std::string> norris = {"d",     "m",     "family",
                                               "paths", "procs", "steps",
                                               "eps_min", "eps_max", "per_decade"};
  static const std::set<std::string> identity = {"steps", "triples"};
  switch (k) {
    case ExperimentKind::HormanderCheck: return hormander;
    case ExperimentKind::MalliavinTail: return tail;
    case ExperimentKind::Density: return density;
    case ExperimentKind::NorrisDichotomy: return norris;
    case ExperimentKind::IdentityCheck: return identity;
  }
  throw ConfigError("unknown experiment kind");
}

struct RawConfig {
  Section problem;
  Section experiment;
  Section output;
  bool has_problem = false;
  bool has_experiment = false;
};

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  Section* current = nullptr;
  const std::set<std::string>* allowed = nullptr;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    std::string body = trim(line);
    if (body.empty()) continue;
    int col = static_cast<int>(b) + 1;
    if (body.front() == '[') {
      if (body.back() != ']') {
        throw ConfigError("unterminated section header", lineno, col);
      }
      std::string name = trim(body.substr(1, body.size() - 2));
      if (name == "problem") {
        current = &raw.problem;
        allowed = &kProblemKeys;
        raw.has_problem = true;
      } else if (name == "experiment") {
        current = &raw.experiment;
        allowed = &kExperimentKeys;
        raw.has_experiment = true;
      } else if (name == "output") {
        current = &raw.output;
        allowed = &kOutputKeys;
      } else {
        throw ConfigError("unknown section [" + name + "]", lineno, col);
      }
      continue;
    }
    std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value'", lineno, col);
    }
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("missing key before '='", lineno, col);
    }
    if (current == nullptr) {
      throw ConfigError("key '" + key + "' outside any section", lineno, col);
    }
    if (allowed->count(key) == 0) {
      throw ConfigError("unknown key '" + key + "'", lineno, col);
    }
    auto [it, inserted] = current->emplace(key, Entry{value, lineno, col});
    (void)it;
    if (!inserted) {
      throw ConfigError("duplicate key '" + key + "'", lineno, col);
    }
  }
  return raw;
}

const Entry* find(const Section& s, const std::string& key) {
  auto it = s.find(key);
  return it == s.end() ? nullptr : &it->second;
}

ProblemSpec build_problem(const Section& sec) {
  const Entry* preset = find(sec, "preset");
  ProblemSpec spec;
  if (preset != nullptr) {
    static const std::set<std::string> fixed = {"name", "dim", "lambda", "f", "linear"};
    for (const auto& [key, entry] : sec) {
      if (fixed.count(key)) {
        throw ConfigError("problem: '" + key + "' cannot be combined with a preset",
                          entry.line, entry.col);
      }
    }
    try {
      spec = make_preset(preset->value);
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("problem: ") + ex.what(), preset->line, preset->col);
    }
  } else {
    const Entry* dim = find(sec, "dim");
    if (dim == nullptr) {
      throw ConfigError("problem: 'dim' is required when no preset is named");
    }
    long long n = parse_int("dim", *dim, dim->value);
    if (n < 1 || n > 4096) {
      throw ConfigError("dim: expected a value in 1..4096, got '" + dim->value + "'",
                        dim->line, dim->col);
    }
    spec.dim = static_cast<int>(n);
    if (const Entry* name = find(sec, "name")) spec.name = name->value;
    const Entry* lambda = find(sec, "lambda");
    if (lambda == nullptr) {
      throw ConfigError("problem: 'lambda' is required when no preset is named");
    }
    spec.lambda = parse_rat_list("lambda", *lambda);
    spec.F = PolySum<Rational>(spec.dim);
    if (const Entry* f = find(sec, "f")) {
      std::map<int, PolyMap<Rational>> by_degree;
      parse_poly_records("f", *f, spec.dim, 2, CompiledProblem::kMaxDegree, by_degree);
      for (auto& [deg, map] : by_degree) {
        (void)deg;
        spec.F.add(map);
      }
    }
    spec.linear_correction = PolyMap<Rational>(1, spec.dim);
    if (const Entry* lin = find(sec, "linear")) {
      std::map<int, PolyMap<Rational>> by_degree;
      parse_poly_records("linear", *lin, spec.dim, 1, 1, by_degree);
      spec.linear_correction = by_degree.at(1);
    }
  }
  if (const Entry* noise = find(sec, "noise")) {
    std::vector<std::vector<Rational>> cols;
    for (const std::string& col : split(noise->value, '|')) {
      Entry sub{col, noise->line, noise->col};
      cols.push_back(parse_rat_list("noise", sub));
    }
    spec.noise = std::move(cols);
  } else if (preset == nullptr) {
    throw ConfigError("problem: 'noise' is required when no preset is named");
  }
  if (const Entry* h = find(sec, "horizon")) {
    spec.horizon = parse_rat("horizon", *h, h->value);
  }
  if (const Entry* u0 = find(sec, "u0")) {
    spec.u0 = parse_rat_list("u0", *u0);
  }
  if (const Entry* st = find(sec, "span_target")) {
    spec.span_target = static_cast<int>(parse_int("span_target", *st, st->value));
  }
  if (const Entry* bd = find(sec, "bracket_depth")) {
    spec.bracket_depth = static_cast<int>(parse_int("bracket_depth", *bd, bd->value));
  }
  spec.validate();
  return spec;
}

ExperimentParams build_experiment(const Section& sec) {
  const Entry* kind = find(sec, "kind");
  if (kind == nullptr) {
    throw ConfigError("experiment: 'kind' is required");
  }
  ExperimentParams p;
  try {
    p.kind = kind_from_name(kind->value);
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("kind: ") + ex.what(), kind->line, kind->col);
  }
  const std::set<std::string>& allowed = keys_for_kind(p.kind);
  for (const auto& [key, entry] : sec) {
    if (key == "kind" || key == "seed") continue;
    if (allowed.count(key) == 0) {
      throw ConfigError("key '" + key + "' does not apply to kind '" +
                            std::string(kind_name(p.kind)) + "'",
                        entry.line, entry.col);
    }
  }
  if (const Entry* seed = find(sec, "seed")) {
    p.seed = parse_uint("seed", *seed);
    p.has_seed = true;
  }
  if (kind_needs_seed(p.kind) && !p.has_seed) {
    throw ConfigError("experiment: 'seed' is required for kind '" +
                      std::string(kind_name(p.kind)) + "'");
  }

  auto get_int = [&sec](const char* key, long long lo, long long hi, long long& out) {
    if (const Entry* e = find(sec, key)) {
      long long v = parse_int(key, *e, e->value);
      if (v < lo || v > hi) {
        throw ConfigError(std::string(key) + ": expected a value in " +
                              std::to_string(lo) + ".." + std::to_string(hi) + ", got '" +
                              e->value + "'",
                          e->line, e->col);
      }
      out = v;
    }
  };
  auto get_rat = [&sec](const char* key, Rational& out) {
    if (const Entry* e = find(sec, key)) out = parse_rat(key, *e, e->value);
  };

  long long v;
  v = p.depth_limit;
  get_int("depth_limit", 0, 64, v);
  p.depth_limit = static_cast<int>(v);
  v = p.target_dim;
  get_int("target_dim", 0, 4096, v);
  p.target_dim = static_cast<int>(v);
  if (const Entry* wb = find(sec, "word_budget")) {
    p.word_budget = parse_uint("word_budget", *wb);
    if (p.word_budget == 0) {
      throw ConfigError("word_budget: must be positive", wb->line, wb->col);
    }
  }
  if (const Entry* ex = find(sec, "exact")) p.exact = parse_bool("exact", *ex);

  v = static_cast<long long>(p.steps);
  get_int("steps", 1, 100'000'000, v);
  p.steps = static_cast<std::size_t>(v);
  v = p.modes;
  get_int("modes", 1, 4096, v);
  p.modes = static_cast<int>(v);
  v = p.samples;
  get_int("samples", 1, 100'000'000, v);
  p.samples = static_cast<int>(v);
  get_rat("eps_min", p.eps_min);
  get_rat("eps_max", p.eps_max);
  v = p.per_decade;
  get_int("per_decade", 1, 1000, v);
  p.per_decade = static_cast<int>(v);
  if (p.eps_min <= 0 || p.eps_max <= 0) {
    throw ConfigError("eps_min/eps_max: thresholds must be positive");
  }
  if (p.eps_min >= p.eps_max) {
    throw ConfigError("eps_min: must be smaller than eps_max");
  }

  get_rat("query_min", p.query_min);
  get_rat("query_max", p.query_max);
  v = p.query_points;
  get_int("query_points", 2, 100000, v);
  p.query_points = static_cast<int>(v);
  if (p.query_min >= p.query_max) {
    throw ConfigError("query_min: must be smaller than query_max");
  }

  v = p.d;
  get_int("d", 1, 64, v);
  p.d = static_cast<int>(v);
  v = p.m;
  get_int("m", 0, 16, v);
  p.m = static_cast<int>(v);
  if (const Entry* fam = find(sec, "family")) {
    if (fam->value != "constant" && fam->value != "adversarial") {
      throw ConfigError("family: expected 'constant' or 'adversarial', got '" +
                            fam->value + "'",
                        fam->line, fam->col);
    }
    p.family = fam->value;
  }
  v = p.paths;
  get_int("paths", 1, 100'000'000, v);
  p.paths = static_cast<int>(v);
  v = p.procs;
  get_int("procs", 1, 1'000'000, v);
  p.procs = static_cast<int>(v);
  if (p.kind == ExperimentKind::NorrisDichotomy && p.family == "adversarial" && p.m < 1) {
    throw ConfigError("m: the adversarial family needs order m >= 1");
  }

  v = p.triples;
  get_int("triples", 1, 100000, v);
  p.triples = static_cast<int>(v);
  return p;
}

}  // namespace

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::HormanderCheck: return "hormander-check";
    case ExperimentKind::MalliavinTail: return "malliavin-tail";
    case ExperimentKind::Density: return "density";
    case ExperimentKind::NorrisDichotomy: return "norris-dichotomy";
    case ExperimentKind::IdentityCheck: return "identity-check";
  }
  return "unknown";
}

ExperimentKind kind_from_name(const std::string& name) {
  if (name == "hormander-check") return ExperimentKind::HormanderCheck;
  if (name == "malliavin-tail") return ExperimentKind::MalliavinTail;
  if (name == "density") return ExperimentKind::Density;
  if (name == "norris-dichotomy") return ExperimentKind::NorrisDichotomy;
  if (name == "identity-check") return ExperimentKind::IdentityCheck;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

bool kind_needs_seed(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::HormanderCheck: return false;
    case ExperimentKind::MalliavinTail:
    case ExperimentKind::Density:
    case ExperimentKind::NorrisDichotomy:
    case ExperimentKind::IdentityCheck: return true;
  }
  return true;
}

Scenario parse_config(const std::string& text) {
  RawConfig raw = tokenize(text);
  if (!raw.has_problem) {
    throw ConfigError("missing [problem] section");
  }
  if (!raw.has_experiment) {
    throw ConfigError("missing [experiment] section");
  }
  Scenario s;
  s.problem = build_problem(raw.problem);
  s.params = build_experiment(raw.experiment);
  if (const Entry* dir = find(raw.output, "dir")) s.out_dir = dir->value;
  if (const Entry* base = find(raw.output, "basename")) s.basename = base->value;
  if (s.basename.empty()) s.basename = kind_name(s.params.kind);
  if (s.params.kind == ExperimentKind::Density && s.params.modes > 3) {
    throw ConfigError("modes: density estimation supports at most 3 modes");
  }
  if (s.params.target_dim > s.problem.dim) {
    throw ConfigError("target_dim: exceeds the problem dimension " +
                      std::to_string(s.problem.dim));
  }
  if (s.params.modes > s.problem.dim &&
      (s.params.kind == ExperimentKind::MalliavinTail ||
       s.params.kind == ExperimentKind::Density)) {
    throw ConfigError("modes: exceeds the problem dimension " +
                      std::to_string(s.problem.dim));
  }
  return s;
}

Scenario load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string resolved_config_text(const Scenario& s) {
  const ProblemSpec& p = s.problem;
  const ExperimentParams& e = s.params;
  std::ostringstream o;
  o << "[problem]\n";
  o << "name = " << p.name << "\n";
  o << "dim = " << p.dim << "\n";
  o << "lambda = " << rat_list_text(p.lambda) << "\n";
  if (!p.F.is_zero()) o << "f = " << poly_records_text(p.F) << "\n";
  if (!p.linear_correction.is_zero()) {
    PolySum<Rational> lin(p.dim);
    lin.add(p.linear_correction);
    o << "linear = " << poly_records_text(lin) << "\n";
  }
  o << "noise = ";
  for (std::size_t i = 0; i < p.noise.size(); ++i) {
    if (i) o << " | ";
    o << rat_list_text(p.noise[i]);
  }
  o << "\n";
  o << "horizon = " << rational_to_string(p.horizon) << "\n";
  if (!p.u0.empty()) o << "u0 = " << rat_list_text(p.u0) << "\n";
  o << "span_target = " << p.span_target << "\n";
  o << "bracket_depth = " << p.bracket_depth << "\n";
  o << "\n[experiment]\n";
  o << "kind = " << kind_name(e.kind) << "\n";
  if (e.has_seed) o << "seed = " << e.seed << "\n";
  switch (e.kind) {
    case ExperimentKind::HormanderCheck:
      o << "depth_limit = " << e.depth_limit << "\n";
      o << "target_dim = " << e.target_dim << "\n";
      o << "word_budget = " << e.word_budget << "\n";
      o << "exact = " << (e.exact ? "true" : "false") << "\n";
      break;
    case ExperimentKind::MalliavinTail:
      o << "steps = " << e.steps << "\n";
      o << "modes = " << e.modes << "\n";
      o << "samples = " << e.samples << "\n";
      o << "eps_min = " << rational_to_string(e.eps_min) << "\n";
      o << "eps_max = " << rational_to_string(e.eps_max) << "\n";
      o << "per_decade = " << e.per_decade << "\n";
      break;
    case ExperimentKind::Density:
      o << "steps = " << e.steps << "\n";
      o << "modes = " << e.modes << "\n";
      o << "samples = " << e.samples << "\n";
      o << "query_min = " << rational_to_string(e.query_min) << "\n";
      o << "query_max = " << rational_to_string(e.query_max) << "\n";
      o << "query_points = " << e.query_points << "\n";
      break;
    case ExperimentKind::NorrisDichotomy:
      o << "d = " << e.d << "\n";
      o << "m = " << e.m << "\n";
      o << "family = " << e.family << "\n";
      o << "paths = " << e.paths << "\n";
      o << "procs = " << e.procs << "\n";
      o << "steps = " << e.steps << "\n";
      o << "eps_min = " << rational_to_string(e.eps_min) << "\n";
      o << "eps_max = " << rational_to_string(e.eps_max) << "\n";
      o << "per_decade = " << e.per_decade << "\n";
      break;
    case ExperimentKind::IdentityCheck:
      o << "steps = " << e.steps << "\n";
      o << "triples = " << e.triples << "\n";
      break;
  }
  o << "\n[output]\n";
  o << "dir = " << s.out_dir << "\n";
  o << "basename = " << s.basename << "\n";
  return o.str();
}

std::uint64_t config_hash(const Scenario& s) {
  std::string text = resolved_config_text(s);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace hypolab

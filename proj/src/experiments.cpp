#include "hypolab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "hypolab/errors.hpp"
#include "hypolab/kernels.hpp"
#include "hypolab/malliavin.hpp"
#include "hypolab/norris.hpp"
#include "hypolab/span.hpp"

namespace hypolab {
namespace {

constexpr const char* kToolVersion = "0.1.0";

// Probe draws live far above the path streams so one master seed cannot
// alias a Brownian channel.
constexpr std::uint64_t kProbeStream = 0x9D06ull << 32;

using json = nlohmann::json;

std::string format_uint(std::uint64_t v) { return std::to_string(v); }
std::string format_int(long long v) { return std::to_string(v); }

std::vector<double> unit_draw(std::uint64_t seed, std::uint64_t stream, int n) {
  std::vector<double> v = GaussianStream(seed, stream).draw(static_cast<std::size_t>(n));
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s == 0.0) {
    v.assign(static_cast<std::size_t>(n), 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= s;
  return v;
}

double sup_abs_diff(const double* a, const double* b, int n) {
  double r = 0.0;
  for (int i = 0; i < n; ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

// Least-squares slope of log y against log x over positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxx == 0.0 ? 0.0 : sxy / sxx;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult run_hormander(const Scenario& s) {
  RunResult r;
  r.scenario = s;
  const ProblemSpec& prob = s.problem;
  int depth = s.params.depth_limit > 0 ? s.params.depth_limit : prob.bracket_depth;
  int target = s.params.target_dim > 0 ? s.params.target_dim
               : prob.span_target > 0  ? prob.span_target
                                       : prob.dim;
  GenerateOptions opt;
  opt.word_budget = s.params.word_budget;
  opt.constants_only = true;
  HormanderReport rep = hormander_verdict(prob, depth, target, opt, s.params.exact);

  json v;
  v["verdict"] = rep.span.verdict == SpanVerdict::SPANS ? "SPANS" : "DEFICIENT";
  v["rank"] = rep.span.rank;
  v["target_dim"] = rep.span.target_dim;
  v["dim"] = prob.dim;
  v["sigma_min"] = rep.span.sigma_min;
  v["exact"] = rep.span.exact;
  v["depth_limit"] = rep.depth_limit;
  v["minimal_depth"] = rep.minimal_depth;
  v["lambda_size"] = rep.lambda_size;
  v["element_count"] = rep.element_count;
  v["dedup_count"] = rep.dedup_count;
  v["per_depth_counts"] = rep.per_depth_counts;
  json wit = json::array();
  for (const auto& [word, vec] : rep.witness) {
    json w;
    w["word"] = word;
    w["vector"] = vec;
    wit.push_back(std::move(w));
  }
  v["witness"] = std::move(wit);
  if (!rep.span.certificate.empty()) v["certificate"] = rep.span.certificate;
  r.verdict_json = v.dump(2);
  r.verdict_json.push_back('\n');

  ResultTable depths{"depth_counts", {"depth", "words"}, {}};
  for (std::size_t k = 0; k < rep.per_depth_counts.size(); ++k) {
    depths.rows.push_back({format_uint(k + 1), format_uint(rep.per_depth_counts[k])});
  }
  r.tables.push_back(std::move(depths));

  if (!rep.span.certificate.empty()) {
    ResultTable cert{"certificate", {"mode", "value"}, {}};
    for (std::size_t i = 0; i < rep.span.certificate.size(); ++i) {
      cert.rows.push_back({format_uint(i + 1), format_double(rep.span.certificate[i])});
    }
    r.tables.push_back(std::move(cert));
  }

  std::ostringstream note;
  note << "hormander: " << (rep.span.verdict == SpanVerdict::SPANS ? "SPANS" : "DEFICIENT")
       << " rank " << rep.span.rank << "/" << rep.span.target_dim << " at depth <= "
       << rep.depth_limit << " (lambda size " << rep.lambda_size << ", minimal depth "
       << rep.minimal_depth << ")";
  r.notes.push_back(note.str());
  return r;
}

RunResult run_tail(const Scenario& s) {
  RunResult r;
  r.scenario = s;
  CompiledProblem p = compile(s.problem);
  std::vector<double> grid = log_eps_grid(to_double(s.params.eps_min),
                                          to_double(s.params.eps_max), s.params.per_decade);
  TailFit fit = tail_fit(p, s.params.seed, s.params.steps, s.params.modes,
                         s.params.samples, grid);

  ResultTable tail{"tail", {"eps", "frequency", "samples", "seed", "steps", "modes"}, {}};
  for (std::size_t k = 0; k < fit.epsilons.size(); ++k) {
    tail.rows.push_back({format_double(fit.epsilons[k]), format_double(fit.frequencies[k]),
                         format_int(fit.sample_count), format_uint(s.params.seed),
                         format_uint(s.params.steps), format_int(s.params.modes)});
  }
  r.tables.push_back(std::move(tail));

  ResultTable raw{"samples", {"path_index", "lambda_min", "seed"}, {}};
  for (std::size_t i = 0; i < fit.samples.size(); ++i) {
    raw.rows.push_back(
        {format_uint(i), format_double(fit.samples[i]), format_uint(s.params.seed)});
  }
  r.tables.push_back(std::move(raw));

  ResultTable f{"fit",
                {"fit_valid", "fitted_p", "stderr_p", "sample_count", "eps_min", "eps_max",
                 "per_decade", "seed"},
                {}};
  f.rows.push_back({fit.fit_valid ? "1" : "0", format_double(fit.fitted_p),
                    format_double(fit.stderr_p), format_int(fit.sample_count),
                    format_double(grid.back()), format_double(grid.front()),
                    format_int(s.params.per_decade), format_uint(s.params.seed)});
  r.tables.push_back(std::move(f));

  std::ostringstream note;
  if (fit.fit_valid) {
    note << "tail: fitted p = " << format_double(fit.fitted_p) << " (stderr "
         << format_double(fit.stderr_p) << ") over " << fit.sample_count << " samples";
  } else {
    note << "tail: fit withheld (fewer than 3 grid points with frequency strictly inside "
            "(0,1)) over "
         << fit.sample_count << " samples";
  }
  r.notes.push_back(note.str());
  return r;
}

RunResult run_density(const Scenario& s) {
  RunResult r;
  r.scenario = s;
  CompiledProblem p = compile(s.problem);
  const int N = s.params.modes;
  const int m = s.params.samples;

  std::vector<std::vector<double>> samples;
  samples.reserve(static_cast<std::size_t>(m));
  ResultTable raw{"samples", {"path_index"}, {}};
  for (int k = 0; k < N; ++k) raw.header.push_back("u" + std::to_string(k + 1));
  for (int pi = 0; pi < m; ++pi) {
    BrownianPath path = sample_path(s.params.steps, p.noise_dim, p.horizon, s.params.seed,
                                    static_cast<std::uint64_t>(pi));
    Trajectory traj = integrate(p, path);
    const double* last = traj.state(traj.steps);
    samples.emplace_back(last, last + N);
    std::vector<std::string> row{format_int(pi)};
    for (int k = 0; k < N; ++k) row.push_back(format_double(last[k]));
    raw.rows.push_back(std::move(row));
  }

  const int qp = s.params.query_points;
  double total = std::pow(static_cast<double>(qp), N);
  if (total > 1e6) {
    throw ConfigError("query_points: lattice of " + std::to_string(qp) + "^" +
                      std::to_string(N) + " points exceeds 1000000");
  }
  const double lo = to_double(s.params.query_min);
  const double hi = to_double(s.params.query_max);
  std::vector<double> axis(static_cast<std::size_t>(qp));
  for (int i = 0; i < qp; ++i) {
    axis[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(qp - 1);
  }
  std::vector<std::vector<double>> queries;
  queries.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(N, 0);
  for (;;) {
    std::vector<double> q(N);
    for (int k = 0; k < N; ++k) q[k] = axis[idx[k]];
    queries.push_back(std::move(q));
    int k = N - 1;  // last axis fastest
    while (k >= 0 && ++idx[k] == qp) {
      idx[k] = 0;
      --k;
    }
    if (k < 0) break;
  }

  DensityEstimate kde = kde_density(samples, queries);

  ResultTable dens{"density", {}, {}};
  for (int k = 0; k < N; ++k) dens.header.push_back("x" + std::to_string(k + 1));
  dens.header.push_back("density");
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    std::vector<std::string> row;
    for (int k = 0; k < N; ++k) row.push_back(format_double(queries[qi][k]));
    row.push_back(format_double(kde.values[qi]));
    dens.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(dens));
  r.tables.push_back(std::move(raw));

  ResultTable meta{"density_meta",
                   {"mode", "bandwidth", "degenerate", "sample_count", "seed", "steps"},
                   {}};
  for (int k = 0; k < N; ++k) {
    meta.rows.push_back({format_int(k + 1), format_double(kde.bandwidth[k]),
                         kde.degenerate ? "1" : "0", format_int(m), format_uint(s.params.seed),
                         format_uint(s.params.steps)});
  }
  r.tables.push_back(std::move(meta));

  std::ostringstream note;
  note << "density: " << m << " samples on " << queries.size() << " query points"
       << (kde.degenerate ? " (degenerate: zero spread in some mode)" : "");
  r.notes.push_back(note.str());
  return r;
}

RunResult run_norris(const Scenario& s) {
  RunResult r;
  r.scenario = s;
  const int d = s.params.d;
  const int m = s.params.m;
  ProcessFamily fam = s.params.family == "constant"
                          ? constant_family(d, m, s.params.seed)
                          : adversarial_tracker_family(d, m, s.params.seed);
  std::vector<double> grid = log_eps_grid(to_double(s.params.eps_min),
                                          to_double(s.params.eps_max), s.params.per_decade);
  ViolationCurve curve = exceptional_probability(fam, d, m, grid, s.params.paths,
                                                 s.params.procs, s.params.steps,
                                                 s.params.seed);

  ResultTable viol{"violations",
                   {"eps", "trials", "violations", "frequency", "stderr", "path_hits",
                    "path_fraction", "paths", "procs", "steps", "seed", "family"},
                   {}};
  long trials = static_cast<long>(curve.path_count) * curve.procs_per_path;
  for (std::size_t k = 0; k < curve.epsilons.size(); ++k) {
    viol.rows.push_back({format_double(curve.epsilons[k]), format_int(trials),
                         format_int(curve.pair_hits[k]), format_double(curve.pair_fraction[k]),
                         format_double(curve.path_stderr[k]), format_int(curve.path_hits[k]),
                         format_double(curve.path_fraction[k]), format_int(curve.path_count),
                         format_int(curve.procs_per_path), format_uint(s.params.steps),
                         format_uint(s.params.seed), s.params.family});
  }
  r.tables.push_back(std::move(viol));

  std::ostringstream note;
  note << "norris: family " << s.params.family << " d=" << d << " m=" << m << ", "
       << trials << " pairs per eps; violations " << curve.pair_hits.front() << " at eps="
       << format_double(curve.epsilons.front()) << " down to " << curve.pair_hits.back()
       << " at eps=" << format_double(curve.epsilons.back());
  r.notes.push_back(note.str());
  return r;
}

RunResult run_identity(const Scenario& s) {
  RunResult r;
  r.scenario = s;
  const ProblemSpec& spec = s.problem;
  CompiledProblem p = compile(spec);
  const int n = p.dim;
  const double horizon = p.horizon;
  const std::uint64_t seed = s.params.seed;

  StepCoeffs c = step_coefficients(p, horizon / static_cast<double>(s.params.steps));
  double step_identity = 0.0;
  for (int i = 0; i < n; ++i) {
    step_identity =
        std::max(step_identity, std::abs(c.decay[i] + p.lambda[i] * c.phi[i] - 1.0));
  }

  // the reduced form propagates J_{0,s}^{-1}, which blows up like
  // e^{lambda_max T}; gate it out of reach of the 1e12 condition abort
  double lambda_max = 0.0;
  for (double l : p.lambda) lambda_max = std::max(lambda_max, l);
  const bool do_reduced = lambda_max * horizon <= 20.0;

  ResultTable idt{"identities",
                  {"triple", "duality", "fd_jacobian", "step_identity", "shift_sup",
                   "quadform_rel", "seed", "steps"},
                  {}};
  double worst_dual = 0.0, worst_shift = 0.0;
  for (int t = 0; t < s.params.triples; ++t) {
    BrownianPath path = sample_path(s.params.steps, p.noise_dim, horizon, seed,
                                    static_cast<std::uint64_t>(t));
    Trajectory traj = integrate(p, path);
    std::vector<double> xi = unit_draw(seed, kProbeStream + 2 * static_cast<std::uint64_t>(t), n);
    std::vector<double> h = unit_draw(seed, kProbeStream + 2 * static_cast<std::uint64_t>(t) + 1, n);

    std::vector<double> Jh = jacobian_forward(p, traj, 0, h);
    std::vector<double> rho = adjoint_backward(p, traj, xi);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < n; ++i) {
      lhs += xi[i] * Jh[i];
      rhs += rho[i] * h[i];
    }
    double duality = std::abs(lhs - rhs);
    worst_dual = std::max(worst_dual, duality);

    const double delta = 1e-6;
    std::vector<double> u0(n, 0.0);
    if (!traj.u0.empty()) u0 = traj.u0;
    std::vector<double> u0p = u0;
    for (int i = 0; i < n; ++i) u0p[i] += delta * h[i];
    Trajectory pert = integrate(p, path, u0p);
    double fd = 0.0, scale = 1.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(Jh[i]));
    for (int i = 0; i < n; ++i) {
      double diff = (pert.state(pert.steps)[i] - traj.state(traj.steps)[i]) / delta;
      fd = std::max(fd, std::abs(diff - Jh[i]));
    }
    fd /= scale;

    Trajectory vtraj = integrate_shifted(p, path);
    std::vector<double> w = noise_shift(p, path);
    double shift_sup = 0.0;
    std::vector<double> recon(n);
    for (std::size_t j = 0; j <= traj.steps; ++j) {
      const double* v = vtraj.state(j);
      const double* wj = w.data() + j * n;
      for (int i = 0; i < n; ++i) recon[i] = v[i] + wj[i];
      shift_sup = std::max(shift_sup, sup_abs_diff(recon.data(), traj.state(j), n));
    }
    worst_shift = std::max(worst_shift, shift_sup);

    double quad_rel = std::numeric_limits<double>::quiet_NaN();
    if (do_reduced) {
      double direct = malliavin_quadratic_form(p, traj, xi);
      double reduced = reduced_quadratic_form(p, traj, xi);
      quad_rel = std::abs(direct - reduced) / (std::abs(direct) + 1e-12);
    }

    idt.rows.push_back({format_int(t), format_double(duality), format_double(fd),
                        format_double(step_identity), format_double(shift_sup),
                        format_double(quad_rel), format_uint(seed),
                        format_uint(s.params.steps)});
  }
  r.tables.push_back(std::move(idt));

  // expansion residual on one refined path: nested grids via coarsening so
  // every step size sees the same Brownian path
  const std::size_t fine_steps = 4 * ((s.params.steps + 3) / 4);
  BrownianPath fine = sample_path(fine_steps, p.noise_dim, horizon, seed,
                                  static_cast<std::uint64_t>(s.params.triples));
  PolySum<Rational> G = spec.drift();
  std::vector<double> xi0(n, 1.0 / std::sqrt(static_cast<double>(n)));
  ResultTable exp_t{"expansion", {"dt", "residual_sup", "alpha_count", "term_count", "seed"},
                    {}};
  std::vector<double> dts, resids;
  for (std::size_t factor : {4, 2, 1}) {
    BrownianPath coarse = fine.coarsened(factor);
    Trajectory vtraj = integrate_shifted(p, coarse);
    ExpansionReport rep = bracket_expansion_check(spec, vtraj, coarse, G, xi0);
    dts.push_back(rep.dt);
    resids.push_back(rep.residual_sup);
    exp_t.rows.push_back({format_double(rep.dt), format_double(rep.residual_sup),
                          format_int(rep.alpha_count), format_uint(rep.term_count),
                          format_uint(seed)});
  }
  r.tables.push_back(std::move(exp_t));
  double order = loglog_slope(dts, resids);
  ResultTable fit{"expansion_fit", {"order", "seed"}, {}};
  fit.rows.push_back({format_double(order), format_uint(seed)});
  r.tables.push_back(std::move(fit));

  std::ostringstream note;
  note << "identities: duality <= " << format_double(worst_dual) << ", shift sup <= "
       << format_double(worst_shift) << ", step identity <= "
       << format_double(step_identity) << ", expansion order " << format_double(order);
  if (!do_reduced) note << " (reduced form skipped: lambda_max T > 20)";
  r.notes.push_back(note.str());
  return r;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, p);
}

std::string csv_text(const ResultTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out += ',';
    out += t.header[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

RunResult run_scenario(const Scenario& s) {
  switch (s.params.kind) {
    case ExperimentKind::HormanderCheck: return run_hormander(s);
    case ExperimentKind::MalliavinTail: return run_tail(s);
    case ExperimentKind::Density: return run_density(s);
    case ExperimentKind::NorrisDichotomy: return run_norris(s);
    case ExperimentKind::IdentityCheck: return run_identity(s);
  }
  throw ConfigError("unknown experiment kind");
}

std::vector<std::string> write_outputs(const RunResult& r, double wall_seconds) {
  namespace fs = std::filesystem;
  const Scenario& s = r.scenario;
  fs::create_directories(s.out_dir);
  std::vector<std::string> written;

  auto emit = [&](const std::string& name, const std::string& body) {
    fs::path path = fs::path(s.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << body;
    written.push_back(path.string());
  };

  emit(s.basename + ".config.txt", resolved_config_text(s));
  for (const ResultTable& t : r.tables) {
    emit(s.basename + "." + t.name + ".csv", csv_text(t));
  }
  if (!r.verdict_json.empty()) emit(s.basename + ".verdict.json", r.verdict_json);

  json m;
  m["config_hash"] = hash_hex(config_hash(s));
  m["kind"] = kind_name(s.params.kind);
  m["problem"] = s.problem.name;
  if (s.params.has_seed) {
    m["seed"] = s.params.seed;
  } else {
    m["seed"] = nullptr;
  }
  m["versions"] = {{"tool", kToolVersion}, {"compiler", __VERSION__}};
  m["kernel_backend"] = kernels::active().name;
  m["wall_seconds"] = wall_seconds;
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  m["generated_at"] = stamp;
  json files = json::array();
  for (const std::string& w : written) files.push_back(fs::path(w).filename().string());
  m["files"] = std::move(files);
  std::string body = m.dump(2);
  body.push_back('\n');
  emit(s.basename + ".manifest.json", body);
  return written;
}

ResultTable trajectory_table(const Trajectory& traj) {
  ResultTable t{"trajectory", {"time"}, {}};
  for (int i = 0; i < traj.dim; ++i) t.header.push_back("u" + std::to_string(i + 1));
  for (std::size_t j = 0; j <= traj.steps; ++j) {
    std::vector<std::string> row{format_double(traj.dt() * static_cast<double>(j))};
    for (int i = 0; i < traj.dim; ++i) row.push_back(format_double(traj.state(j)[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

ResultTable path_table(const BrownianPath& path) {
  ResultTable t{"path", {"time"}, {}};
  for (int i = 0; i < path.channels; ++i) t.header.push_back("w" + std::to_string(i + 1));
  double dt = path.horizon / static_cast<double>(path.steps);
  for (std::size_t j = 0; j <= path.steps; ++j) {
    std::vector<std::string> row{format_double(dt * static_cast<double>(j))};
    for (int i = 0; i < path.channels; ++i) row.push_back(format_double(path.value(j, i)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace hypolab

#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "qwalk/amplitudes.hpp"
#include "qwalk/genfunc.hpp"
#include "qwalk/io.hpp"
#include "qwalk/parallel.hpp"
#include "qwalk/randomtime.hpp"
#include "qwalk/statistics.hpp"
#include "qwalk/twolevel.hpp"

namespace qwalk::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepPlan {
  std::string param;  // eta, tau, p, cos
  double start = 0.0, stop = 0.0;
  std::size_t points = 0;
  bool log = false;

  std::vector<double> grid() const {
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) {
      const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
      g[i] = log ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start)))
                 : start + t * (stop - start);
    }
    if (points > 1) g.back() = stop;
    return g;
  }
};

struct RunConfig {
  std::string command;
  std::string system_path;
  std::string protocol = "weak";
  std::optional<double> eta, p;
  double tau = 1.0;
  std::optional<std::size_t> n_max;
  double tail_eps = kDefaultTailEps;
  std::uint64_t seed = 12345;
  std::size_t trials = 10000;
  std::string out = "qwalk_out";
  std::optional<SweepPlan> sweep;
  std::string sweep_text;
  std::string which;
  std::string method = "roots";
  unsigned threads = 0;
};

int code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return config_error;
    case ErrorKind::boundary_case:
    case ErrorKind::singular: return boundary;
    case ErrorKind::convergence:
    case ErrorKind::ill_conditioned: return no_convergence;
  }
  return config_error;
}

std::string kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::singular: return "singular";
    case ErrorKind::boundary_case: return "boundary_case";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::ill_conditioned: return "ill_conditioned";
  }
  return "error";
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("sweep: bad " + what + " '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError("sweep: bad " + what + " '" + s + "'");
  return v;
}

SweepPlan parse_sweep(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 5) throw ConfigError("sweep must be param:start:stop:points:spacing");
  SweepPlan s;
  s.param = parts[0];
  if (s.param != "eta" && s.param != "tau" && s.param != "p" && s.param != "cos")
    throw ConfigError("sweep parameter must be one of eta, tau, p, cos");
  s.start = parse_number(parts[1], "start");
  s.stop = parse_number(parts[2], "stop");
  const double pts = parse_number(parts[3], "points");
  if (pts < 1 || pts != std::floor(pts) || pts > 1e6) throw ConfigError("sweep points must be a positive integer");
  s.points = static_cast<std::size_t>(pts);
  if (parts[4] == "log") s.log = true;
  else if (parts[4] != "linear") throw ConfigError("sweep spacing must be linear or log");

  auto inside = [&](double lo, double hi, bool open_lo) {
    for (double v : {s.start, s.stop})
      if (!((open_lo ? v > lo : v >= lo) && v <= hi))
        throw ConfigError("sweep bounds outside the domain of " + s.param);
  };
  if (s.param == "eta" || s.param == "p") inside(0.0, 1.0, true);
  if (s.param == "cos") inside(-1.0, 1.0, false);
  if (s.param == "tau" && !(s.start > 0.0 && s.stop > 0.0)) throw ConfigError("sweep bounds outside the domain of tau");
  if (s.log && !(s.start > 0.0 && s.stop > 0.0)) throw ConfigError("log spacing needs positive bounds");
  return s;
}

void validate(RunConfig& c) {
  if (c.command != "simulate" && c.command != "winding" && c.command != "sweep" && c.command != "figure")
    throw ConfigError("command must be simulate, winding, sweep or figure");
  if (c.command == "figure") {
    if (c.which != "fig1" && c.which != "fig2") throw ConfigError("figure needs --which fig1|fig2");
    return;
  }
  if (c.system_path.empty()) throw ConfigError("--system is required");
  if (!(c.tau > 0.0) || !std::isfinite(c.tau)) throw ConfigError("tau must be positive");
  if (c.command == "winding") {
    if (c.method != "roots" && c.method != "contour") throw ConfigError("method must be roots or contour");
    return;
  }
  if (!c.sweep_text.empty()) c.sweep = parse_sweep(c.sweep_text);
  if (c.command == "sweep" && !c.sweep) throw ConfigError("sweep needs --sweep param:start:stop:points:spacing");
  if (c.command == "simulate" && c.sweep) throw ConfigError("--sweep only applies to the sweep command");

  const std::string swept = c.sweep ? c.sweep->param : "";
  if (c.protocol == "weak") {
    if (c.p) throw ConfigError("--p does not apply to the weak protocol");
    if (swept == "p") throw ConfigError("cannot sweep p under the weak protocol");
    if (!c.eta && swept != "eta") throw ConfigError("weak protocol needs --eta");
    if (c.eta && swept == "eta") throw ConfigError("--eta conflicts with an eta sweep");
    if (c.eta && !(*c.eta > 0.0 && *c.eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
  } else if (c.protocol == "projective") {
    if (c.p) throw ConfigError("--p does not apply to the projective protocol");
    if (c.eta && *c.eta != 1.0) throw ConfigError("projective monitoring fixes eta = 1");
    if (swept == "eta" || swept == "p") throw ConfigError("cannot sweep " + swept + " under the projective protocol");
    c.eta = 1.0;
  } else if (c.protocol == "random") {
    if (c.eta) throw ConfigError("--eta does not apply to the random protocol");
    if (swept == "eta") throw ConfigError("cannot sweep eta under the random protocol");
    if (!c.p && swept != "p") throw ConfigError("random protocol needs --p");
    if (c.p && swept == "p") throw ConfigError("--p conflicts with a p sweep");
    if (c.p && !(*c.p > 0.0 && *c.p <= 1.0)) throw ConfigError("p must lie in (0, 1]");
  } else {
    throw ConfigError("protocol must be weak, projective or random");
  }
  if (c.n_max && *c.n_max < 1) throw ConfigError("n-max must be at least 1");
  if (!(c.tail_eps > 0.0 && c.tail_eps < 1.0)) throw ConfigError("tail-eps must lie in (0, 1)");
}

Json resolved(const RunConfig& c) {
  Json j{{"command", c.command}, {"seed", c.seed}};
  if (c.command == "figure") {
    j["which"] = c.which;
    return j;
  }
  j["system"] = c.system_path;
  j["tau"] = c.tau;
  if (c.command == "winding") {
    j["method"] = c.method;
    return j;
  }
  j["protocol"] = c.protocol;
  if (c.eta) j["eta"] = *c.eta;
  if (c.p) j["p"] = *c.p;
  if (c.n_max) j["n_max"] = *c.n_max;
  else j["tail_eps"] = c.tail_eps;
  if (c.protocol == "random") j["trials"] = c.trials;
  if (c.sweep) j["sweep"] = c.sweep_text;
  return j;
}

Json error_json(const Error& e) { return Json{{"kind", kind_name(e.kind())}, {"message", e.what()}}; }

// ---------------------------------------------------------------- simulate

struct MonitoredPoint {
  AmplitudeSeries series;
  ReturnStats stats;
  WindingReport winding;
  std::optional<double> topological;
  std::optional<ReturnStats> spectral;
  Json spectral_error;
};

MonitoredPoint monitored_point(const SpectralSystem& sys, double tau, double eta, const RunConfig& c) {
  const MonitoredEvolution evo = build_evolution(sys, tau, eta);
  MonitoredPoint m;
  m.series = c.n_max ? monitored_series(evo, *c.n_max) : monitored_series_to_tail(evo, c.tail_eps);
  m.stats = mean_return_series(m.series, tau);
  m.winding = winding_number(sys, tau);
  if (m.winding.certified) m.topological = mean_return_topological(m.winding, eta);
  try {
    m.spectral = moments_spectral(spectral_decompose(evo), eta, tau);
  } catch (const Error& e) {
    m.spectral_error = error_json(e);
  }
  return m;
}

struct RandomPoint {
  DetectionDistribution dist;
  double mean_t = 0.0;
  double second_t = 0.0;
  WindingReport winding;
  std::optional<double> topological;
};

RandomPoint random_point(const SpectralSystem& sys, double tau, const RunConfig& c, const RandomProtocol& proto) {
  RandomPoint r;
  r.dist = c.n_max ? detection_time_distribution(proto, *c.n_max)
                   : detection_time_distribution_to_tail(proto, c.tail_eps);
  for (std::size_t i = 0; i < r.dist.probabilities.size(); ++i) {
    const double t = tau * static_cast<double>(i + 1);
    r.mean_t += t * r.dist.probabilities[i];
    r.second_t += t * t * r.dist.probabilities[i];
  }
  r.winding = winding_number(sys, tau);
  if (r.winding.certified) r.topological = mean_time_random(proto, r.winding, RandomRoute::topological);
  return r;
}

Json winding_brief(const WindingReport& w) {
  return Json{{"n_w", w.n_w}, {"certified", w.certified}, {"boundary_case", w.boundary_case}};
}

int simulate(const RunConfig& c, const SpectralSystem& sys, const Json& cfg, std::ostream& out) {
  const fs::path dir(c.out);
  if (c.protocol != "random") {
    const double eta = *c.eta;
    const MonitoredPoint m = monitored_point(sys, c.tau, eta, c);
    Json routes{{"series", io::stats_json(m.stats)}};
    if (m.topological) routes["topological"] = Json{{"mean_n", *m.topological}, {"mean_time", c.tau * *m.topological}};
    if (m.spectral) routes["spectral"] = io::stats_json(*m.spectral);
    else routes["spectral"] = Json{{"error", m.spectral_error}};
    Json payload{{"mean_n", m.stats.mean_n},
                 {"variance_n", m.stats.variance_n},
                 {"mean_time", m.stats.mean_time},
                 {"winding", winding_brief(m.winding)},
                 {"series", io::series_summary_json(m.series)},
                 {"routes", routes}};
    io::series_csv(cfg, m.series).save(dir / "series.csv");
    io::save_json(dir / "stats.json", cfg, payload);
    out << "mean_n = " << io::fmt(m.stats.mean_n) << "  (n_w/eta = "
        << (m.topological ? io::fmt(*m.topological) : std::string("n/a")) << ")\n";
    if (m.series.saturated) {
      out << "series saturated before the tail target\n";
      return no_convergence;
    }
    return ok;
  }

  const double p = *c.p;
  const RandomProtocol proto = build_random_protocol(build_evolution(sys, c.tau, 1.0), p);
  const RandomPoint r = random_point(sys, c.tau, c, proto);
  const AmplitudeSeries rp = phi_p_series(proto, std::max<std::size_t>(1, r.dist.probabilities.size()));
  MonteCarloResult mc;
  if (c.trials > 0) mc = monte_carlo_first_detection(proto, c.trials, c.seed, 0, c.threads);

  io::CsvWriter dist(cfg, {"n", "t", "probability", "cumulative"});
  double cumulative = 0.0;
  for (std::size_t i = 0; i < r.dist.probabilities.size(); ++i) {
    cumulative += r.dist.probabilities[i];
    dist.row({std::to_string(i + 1), io::fmt(c.tau * static_cast<double>(i + 1)),
              io::fmt(r.dist.probabilities[i]), io::fmt(cumulative)});
  }
  dist.save(dir / "distribution.csv");
  io::series_csv(cfg, rp).save(dir / "series.csv");
  if (c.trials > 0) io::histogram_csv(cfg, mc, c.tau).save(dir / "histogram.csv");

  Json payload{{"mean_t", r.mean_t},
               {"variance_t", r.second_t - r.mean_t * r.mean_t},
               {"mean_t_topological", r.topological ? Json(*r.topological) : Json(nullptr)},
               {"mean_interval", proto.mean_interval()},
               {"detected_probability", cumulative},
               {"survival", r.dist.survival},
               {"kraus_completeness_defect", proto.completeness_defect()},
               {"winding", winding_brief(r.winding)}};
  if (c.trials > 0) payload["monte_carlo"] = io::monte_carlo_json(mc);
  io::save_json(dir / "stats.json", cfg, payload);
  out << "mean_t = " << io::fmt(r.mean_t) << "  (tau n_w / p = "
      << (r.topological ? io::fmt(*r.topological) : std::string("n/a")) << ")\n";
  if (r.dist.survival >= c.tail_eps && !c.n_max) return no_convergence;
  return ok;
}

// ---------------------------------------------------------------- winding

int winding(const RunConfig& c, const SpectralSystem& sys, const Json& cfg, std::ostream& out) {
  const WindingReport w =
      winding_number(sys, c.tau, c.method == "contour" ? WindingMethod::contour : WindingMethod::roots);
  io::save_json(fs::path(c.out) / "winding.json", cfg, io::winding_json(w));
  out << "n_w = " << w.n_w << (w.certified ? " (certified)" : " (not certified)")
      << (w.boundary_case ? " boundary case" : "") << "\n";
  for (const auto& msg : w.warnings) out << "warning: " << msg << "\n";
  return (w.certified && !w.boundary_case) ? ok : boundary;
}

// ---------------------------------------------------------------- sweep

int sweep(const RunConfig& c, const SpectralSystem& sys, const Json& cfg, std::ostream& out) {
  const SweepPlan& s = *c.sweep;
  const std::vector<double> grid = s.grid();
  const bool random = c.protocol == "random";
  std::vector<std::string> columns{"param", "value", random ? "p" : "eta", "tau", "n_w", "certified"};
  if (random) {
    for (const char* col : {"mean_t", "mean_t_topological", "detected_probability"}) columns.push_back(col);
  } else {
    for (const char* col : {"mean_n", "second_moment_n", "variance_n", "total_probability", "eta_mean_n",
                            "eta2_second_moment_n", "mean_n_topological", "mean_n_spectral",
                            "second_moment_n_spectral"})
      columns.push_back(col);
  }
  columns.push_back("status");

  std::vector<std::vector<std::string>> rows(grid.size());
  parallel_for(grid.size(), c.threads, [&](std::size_t i) {
    const double v = grid[i];
    double tau = c.tau;
    double strength = random ? c.p.value_or(0.0) : c.eta.value_or(0.0);
    if (s.param == "tau") tau = v;
    else if (s.param == "cos") tau = std::acos(v);
    else strength = v;
    std::vector<std::string> row{s.param, io::fmt(v), io::fmt(strength), io::fmt(tau)};
    const std::size_t width = columns.size();
    try {
      if (!(tau > 0.0)) throw Error(ErrorKind::boundary_case, "tau = 0");
      if (random) {
        const RandomProtocol proto = build_random_protocol(build_evolution(sys, tau, 1.0), strength);
        const RandomPoint r = random_point(sys, tau, c, proto);
        double detected = 0.0;
        for (double f : r.dist.probabilities) detected += f;
        row.insert(row.end(), {std::to_string(r.winding.n_w), r.winding.certified ? "1" : "0", io::fmt(r.mean_t),
                               r.topological ? io::fmt(*r.topological) : "nan", io::fmt(detected),
                               r.dist.survival < c.tail_eps || c.n_max ? "ok" : "convergence"});
      } else {
        const MonitoredPoint m = monitored_point(sys, tau, strength, c);
        const auto& st = m.stats;
        row.insert(row.end(),
                   {std::to_string(m.winding.n_w), m.winding.certified ? "1" : "0", io::fmt(st.mean_n),
                    io::fmt(st.second_moment_n), io::fmt(st.variance_n), io::fmt(st.total_probability),
                    io::fmt(strength * st.mean_n), io::fmt(strength * strength * st.second_moment_n),
                    m.topological ? io::fmt(*m.topological) : "nan",
                    m.spectral ? io::fmt(m.spectral->mean_n) : "nan",
                    m.spectral ? io::fmt(m.spectral->second_moment_n) : "nan",
                    m.series.saturated ? "convergence" : (m.winding.boundary_case ? "boundary" : "ok")});
      }
    } catch (const Error& e) {
      row.resize(4);
      while (row.size() + 1 < width) row.push_back("nan");
      row.push_back(kind_name(e.kind()));
    }
    rows[i] = std::move(row);
  });

  io::CsvWriter w(cfg, columns);
  for (const auto& r : rows) w.row(r);
  w.save(fs::path(c.out) / "sweep.csv");
  out << "wrote " << rows.size() << " rows to " << (fs::path(c.out) / "sweep.csv").string() << "\n";
  return ok;
}

// ---------------------------------------------------------------- figure

int figure(const RunConfig& c, Json cfg, std::ostream& out) {
  const fs::path dir(c.out);
  if (c.which == "fig1") {
    const double x = 1.0 / 7.0;
    std::vector<double> grid;
    for (int k = -999; k <= 999; ++k) grid.push_back(k / 1000.0);
    cfg["x"] = x;
    cfg["cos_j_tau"] = "k/1000, k = -999..999";
    io::figure1_csv(cfg, twolevel::figure1_data(x, grid)).save(dir / "fig1.csv");
    out << "wrote " << (dir / "fig1.csv").string() << "\n";
  } else {
    std::vector<double> etas;
    for (int k = 1; k <= 100; ++k) etas.push_back(k / 100.0);
    cfg["cos_j_tau"] = 0.5;
    cfg["eta"] = "k/100, k = 1..100";
    cfg["n"] = "1..10";
    io::figure2_csv(cfg, twolevel::figure2_data(0.5, etas, 10)).save(dir / "fig2.csv");
    out << "wrote " << (dir / "fig2.csv").string() << "\n";
  }
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Return-time statistics of monitored quantum walks", "qwalk"};
  RunConfig c;
  double eta = 0.0, p = 0.0;
  std::size_t n_max = 0;
  app.add_option("command", c.command, "simulate | winding | sweep | figure")->required();
  app.add_option("--system", c.system_path, "system file (JSON)");
  app.add_option("--protocol", c.protocol, "weak | projective | random")->capture_default_str();
  auto* eta_opt = app.add_option("--eta", eta, "measurement strength in (0, 1]");
  auto* p_opt = app.add_option("--p", p, "measurement probability per step in (0, 1]");
  app.add_option("--tau", c.tau, "time between measurement attempts")->capture_default_str();
  auto* nmax_opt = app.add_option("--n-max", n_max, "fixed series length (overrides --tail-eps)");
  app.add_option("--tail-eps", c.tail_eps, "stop once the undetected probability is below this")
      ->capture_default_str();
  app.add_option("--seed", c.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--trials", c.trials, "Monte Carlo trajectories (0 disables)")->capture_default_str();
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_option("--sweep", c.sweep_text, "param:start:stop:points:spacing, param in eta|tau|p|cos");
  app.add_option("--which", c.which, "fig1 | fig2");
  app.add_option("--method", c.method, "winding method: roots | contour")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (0 = all cores)");
  app.set_config("--config", "", "flat key = value file with any of the options above");
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return config_error;
  }
  if (eta_opt->count()) c.eta = eta;
  if (p_opt->count()) c.p = p;
  if (nmax_opt->count()) c.n_max = n_max;

  try {
    validate(c);
    const Json cfg = resolved(c);
    if (c.command == "figure") return figure(c, cfg, out);
    const SpectralSystem sys = io::load_system(c.system_path);
    if (c.command == "winding") return winding(c, sys, cfg, out);
    if (c.command == "sweep") return sweep(c, sys, cfg, out);
    return simulate(c, sys, cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return config_error;
  } catch (const Error& e) {
    err << "error (" << kind_name(e.kind()) << "): " << e.what() << "\n";
    return code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return config_error;
  }
}

}  // namespace qwalk::cli

#include "qwalk/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qwalk::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::invalid_input, "system file: " + what); }

Complex parse_complex(const Json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  bad("expected a number or [re, im], got " + v.dump());
}

CVector parse_vector(const Json& v, const char* key) {
  if (!v.is_array() || v.empty()) bad(std::string(key) + " must be a non-empty array");
  CVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = parse_complex(v[i]);
  return out;
}

CMatrix parse_matrix(const Json& v, const char* key) {
  if (!v.is_array() || v.empty()) bad(std::string(key) + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  CMatrix out(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows)
      bad(std::string(key) + " must be square");
    for (Eigen::Index c = 0; c < rows; ++c) out(r, c) = parse_complex(row[static_cast<std::size_t>(c)]);
  }
  return out;
}

}  // namespace

SpectralSystem parse_system(const Json& doc) {
  if (!doc.is_object()) bad("top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "energies" && key != "basis" && key != "hamiltonian" && key != "detector" &&
        key != "target" && key != "description")
      bad("unknown key '" + key + "'");
  }
  if (!doc.contains("detector")) bad("missing 'detector'");
  const CVector detector = parse_vector(doc["detector"], "detector");
  std::optional<CVector> target;
  if (doc.contains("target")) target = parse_vector(doc["target"], "target");

  if (doc.contains("hamiltonian")) {
    if (doc.contains("energies") || doc.contains("basis")) bad("give either 'hamiltonian' or 'energies'/'basis'");
    return system_from_hamiltonian(parse_matrix(doc["hamiltonian"], "hamiltonian"), detector, target);
  }
  if (!doc.contains("energies")) bad("missing 'energies' (or 'hamiltonian')");
  const Json& e = doc["energies"];
  if (!e.is_array() || e.empty()) bad("'energies' must be a non-empty array");
  RVector energies(static_cast<Eigen::Index>(e.size()));
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!e[i].is_number()) bad("energies must be real numbers");
    energies[static_cast<Eigen::Index>(i)] = e[i].get<double>();
  }
  const auto d = energies.size();
  const CMatrix basis = doc.contains("basis") ? parse_matrix(doc["basis"], "basis") : CMatrix::Identity(d, d);
  return build_system(energies, basis, detector, target);
}

SpectralSystem load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    bad(path.string() + ": " + e.what());
  }
  return parse_system(doc);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

// NaN/inf are not valid JSON numbers.
static Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json series_summary_json(const AmplitudeSeries& s) {
  return Json{{"protocol", protocol_name(s.protocol)},
              {"parameter", s.parameter},
              {"kind", s.kind == SeriesKind::transition ? "transition" : "return"},
              {"n_max", s.n_max()},
              {"captured_probability", s.captured_probability},
              {"survival", number(s.survival)},
              {"saturated", s.saturated}};
}

Json stats_json(const ReturnStats& s) {
  return Json{{"method", stats_method_name(s.method)},
              {"total_probability", number(s.total_probability)},
              {"mean_n", number(s.mean_n)},
              {"second_moment_n", number(s.second_moment_n)},
              {"variance_n", number(s.variance_n)},
              {"mean_time", number(s.mean_time)},
              {"variance_time", number(s.variance_time)},
              {"reliable", s.reliable},
              {"mean_error_estimate", number(s.mean_error_estimate)},
              {"second_moment_error_estimate", number(s.second_moment_error_estimate)},
              {"imaginary_residual", number(s.imaginary_residual)}};
}

Json winding_json(const WindingReport& w) {
  auto zeros = [](const std::vector<Complex>& v) {
    Json a = Json::array();
    for (const auto& z : v) a.push_back(complex_json(z));
    return a;
  };
  Json j{{"n_w", w.n_w},
         {"certified", w.certified},
         {"boundary_case", w.boundary_case},
         {"method", method_name(w.method)},
         {"bright_levels", w.bright_levels},
         {"zeros_inside", zeros(w.zeros_inside)},
         {"zeros_on_circle", zeros(w.zeros_on_circle)},
         {"zeros_outside", zeros(w.zeros_outside)},
         {"degenerate_groups", w.degenerate_groups},
         {"merged_levels", w.merged_levels}};
  if (w.contour_evaluated) {
    j["contour"] = Json{{"value", complex_json(w.contour_value)},
                        {"residual", w.contour_residual},
                        {"radius", w.contour_radius},
                        {"nodes", w.contour_nodes}};
  }
  j["warnings"] = w.warnings;
  return j;
}

Json monte_carlo_json(const MonteCarloResult& r) {
  return Json{{"trials", r.trials},   {"seed", r.seed},         {"step_cap", r.step_cap},
              {"mean_t", r.mean_t},   {"stderr_t", r.stderr_t}, {"censored", r.censored}};
}

CsvWriter::CsvWriter(const Json& config, std::vector<std::string> columns) : columns_(columns.size()) {
  std::istringstream lines(config.dump(2));
  for (std::string line; std::getline(lines, line);) text_ += "# " + line + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) text_ += (i ? "," : "") + columns[i];
  text_ += "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error(ErrorKind::invalid_input, "csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
  text_ += "\n";
}

void CsvWriter::row(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double v : cells) s.push_back(fmt(v));
  row(s);
}

void CsvWriter::save(const std::filesystem::path& path) const { save_text(path, text_); }

CsvWriter series_csv(const Json& config, const AmplitudeSeries& s) {
  CsvWriter w(config, {"n", "re", "im", "abs2", "cumulative"});
  double cumulative = 0.0;
  for (std::size_t n = 1; n <= s.n_max(); ++n) {
    const Complex v = s.at(n);
    cumulative += std::norm(v);
    w.row({std::to_string(n), fmt(v.real()), fmt(v.imag()), fmt(std::norm(v)), fmt(cumulative)});
  }
  return w;
}

CsvWriter convolution_csv(const Json& config, const ConvolutionTable& t) {
  CsvWriter w(config, {"n", "m", "re_q", "im_q"});
  for (std::size_t n = 1; n <= t.n_max(); ++n)
    for (std::size_t m = 1; m <= n; ++m) {
      const Complex q = t.q(n, m);
      w.row({std::to_string(n), std::to_string(m), fmt(q.real()), fmt(q.imag())});
    }
  return w;
}

CsvWriter histogram_csv(const Json& config, const MonteCarloResult& r, double tau) {
  CsvWriter w(config, {"n", "t", "count"});
  for (const auto& [n, count] : r.histogram)
    w.row({std::to_string(n), fmt(tau * static_cast<double>(n)), std::to_string(count)});
  return w;
}

CsvWriter figure1_csv(const Json& config, const std::vector<twolevel::Figure1Row>& rows) {
  CsvWriter w(config, {"cos_j_tau", "abs_nu_pp", "abs_nu_mm", "abs_nu_pm", "abs_nu_mp"});
  for (const auto& r : rows) w.row(std::vector<double>{r.cos_j_tau, r.nu_pp, r.nu_mm, r.nu_pm, r.nu_mp});
  return w;
}

CsvWriter figure2_csv(const Json& config, const twolevel::Figure2Table& t) {
  std::vector<std::string> cols{"eta"};
  for (std::size_t n = 1; n <= t.n_max; ++n) cols.push_back("p_" + std::to_string(n));
  CsvWriter w(config, cols);
  for (std::size_t i = 0; i < t.etas.size(); ++i) {
    std::vector<double> cells{t.etas[i]};
    cells.insert(cells.end(), t.probability[i].begin(), t.probability[i].end());
    w.row(cells);
  }
  return w;
}

void save_json(const std::filesystem::path& path, const Json& config, Json payload) {
  Json doc{{"config", config}};
  for (auto& [k, v] : payload.items()) doc[k] = v;
  save_text(path, doc.dump(2) + "\n");
}

void save_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::invalid_input, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::invalid_input, "write failed for " + path.string());
}

}  // namespace qwalk::io

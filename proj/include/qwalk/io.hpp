// io.hpp
// System files (JSON) and result writers.  Every file written here carries
// the resolved run configuration: CSV files as leading "# " comment lines,
// JSON files under the "config" key.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwalk/amplitudes.hpp"
#include "qwalk/genfunc.hpp"
#include "qwalk/randomtime.hpp"
#include "qwalk/recursion.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/statistics.hpp"
#include "qwalk/twolevel.hpp"

namespace qwalk::io {

using Json = nlohmann::ordered_json;

// Accepted layout:
//   {"energies": [...], "basis": [[...], ...], "detector": [...], "target": [...]}
// or {"hamiltonian": [[...], ...], "detector": [...]}.  Complex entries are
// numbers or [re, im] pairs; basis columns are the eigenvectors.
// Throws Error(invalid_input) on unreadable or malformed files.
SpectralSystem load_system(const std::filesystem::path& path);
SpectralSystem parse_system(const Json& doc);

// "%.17g"
std::string fmt(double v);

Json complex_json(Complex z);
Json series_summary_json(const AmplitudeSeries& s);
Json stats_json(const ReturnStats& s);
Json winding_json(const WindingReport& w);
Json monte_carlo_json(const MonteCarloResult& r);

class CsvWriter {
 public:
  CsvWriter(const Json& config, std::vector<std::string> columns);
  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& cells);
  std::string str() const { return text_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

// n, re, im, abs2, cumulative
CsvWriter series_csv(const Json& config, const AmplitudeSeries& s);
// n, m, re_q, im_q (nonzero triangle only)
CsvWriter convolution_csv(const Json& config, const ConvolutionTable& t);
// t, count
CsvWriter histogram_csv(const Json& config, const MonteCarloResult& r, double tau);
// cos_j_tau, abs_nu_pp, abs_nu_mm, abs_nu_pm, abs_nu_mp
CsvWriter figure1_csv(const Json& config, const std::vector<twolevel::Figure1Row>& rows);
// eta, p_1 .. p_n
CsvWriter figure2_csv(const Json& config, const twolevel::Figure2Table& t);

// config + payload, pretty printed
void save_json(const std::filesystem::path& path, const Json& config, Json payload);
void save_text(const std::filesystem::path& path, const std::string& text);

}  // namespace qwalk::io

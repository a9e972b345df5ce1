#include "qwalk/recursion.hpp"

#include <cmath>

namespace qwalk {

ConvolutionTable::ConvolutionTable(const AmplitudeSeries& base, std::size_t n_max)
    : n_max_(n_max), base_(base) {
  if (n_max < 1) throw Error(ErrorKind::invalid_input, "n_max must be at least 1");
  if (n_max > base.n_max()) throw Error(ErrorKind::invalid_input, "n_max exceeds the base series length");
  if (base.protocol != Protocol::projective || base.kind != SeriesKind::return_amplitude)
    throw Error(ErrorKind::invalid_input, "convolution table needs the projective return series");

  // q_{.,m} = q_{.,m-1} * phi; every factor carries at least one step, so
  // q_{n,m} vanishes for n < m and the inner sum can start at m - 1.
  rows_.reserve(n_max);
  rows_.emplace_back(base.values.begin(), base.values.begin() + static_cast<std::ptrdiff_t>(n_max));
  for (std::size_t m = 2; m <= n_max; ++m) {
    const auto& prev = rows_.back();
    std::vector<Complex> row(n_max, Complex{});
    for (std::size_t n = m; n <= n_max; ++n) {
      Complex acc{};
      for (std::size_t k = m - 1; k <= n - 1; ++k) acc += prev[k - 1] * base.values[n - k - 1];
      row[n - 1] = acc;
    }
    rows_.push_back(std::move(row));
  }
}

Complex ConvolutionTable::q(std::size_t n, std::size_t m) const {
  if (n < 1 || n > n_max_ || m < 1) throw Error(ErrorKind::invalid_input, "q index out of range");
  if (m > n) return Complex{};
  return rows_[m - 1][n - 1];
}

ConvolutionTable build_convolution_table(const AmplitudeSeries& base, std::size_t n_max) {
  return ConvolutionTable(base, n_max);
}

AmplitudeSeries reconstruct_weak_series(const ConvolutionTable& table, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::invalid_input, "eta must lie in (0, 1]");
  const double shrink = 1.0 - shear_from_strength(eta);
  const double root_eta = std::sqrt(eta);
  AmplitudeSeries out;
  out.values.resize(table.n_max());
  for (std::size_t n = 1; n <= table.n_max(); ++n) {
    // Horner in (1 - x) over m = n..1.
    Complex acc{};
    for (std::size_t m = n; m >= 1; --m) acc = acc * shrink + table.q(n, m);
    out.values[n - 1] = root_eta * acc;
    out.captured_probability += std::norm(out.values[n - 1]);
  }
  out.protocol = eta == 1.0 ? Protocol::projective : Protocol::weak;
  out.parameter = eta;
  return out;
}

namespace {

template <class Term>
std::vector<double> tail_over_m(const ConvolutionTable& table, double eta, std::size_t m_cut, Term term) {
  if (m_cut < 1) throw Error(ErrorKind::invalid_input, "m_cut must be at least 1");
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::invalid_input, "eta must lie in (0, 1]");
  const double shrink = 1.0 - shear_from_strength(eta);
  std::vector<double> out(table.n_max(), 0.0);
  for (std::size_t n = 1; n <= table.n_max(); ++n) {
    Complex acc{};
    double weight = std::pow(shrink, static_cast<double>(m_cut));
    for (std::size_t m = m_cut + 1; m <= n; ++m, weight *= shrink) acc += term(table.q(n, m)) * weight;
    out[n - 1] = std::sqrt(eta) * std::abs(acc);
  }
  return out;
}

}  // namespace

std::vector<double> truncation_error_profile(const ConvolutionTable& table, double eta, std::size_t m_cut) {
  return tail_over_m(table, eta, m_cut, [](Complex q) { return q; });
}

std::vector<double> truncation_error_bound(const ConvolutionTable& table, double eta, std::size_t m_cut) {
  return tail_over_m(table, eta, m_cut, [](Complex q) { return Complex{std::abs(q), 0.0}; });
}

}  // namespace qwalk

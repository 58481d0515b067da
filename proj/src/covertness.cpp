#include "twinrange/covertness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twinrange::covert {

void TMSVState::validate() const {
  if (!(std::isfinite(squeezing) && squeezing >= 0.0))
    throw std::invalid_argument("TMSVState: squeezing must be >= 0");
  if (!std::isfinite(phase))
    throw std::invalid_argument("TMSVState: phase must be finite");
  if (n_max < 0) throw std::invalid_argument("TMSVState: n_max must be >= 0");
}

double TMSVState::mean_photon_number() const {
  const double s = std::sinh(squeezing);
  return s * s;
}

std::complex<double> TMSVState::mu() const { return {std::cosh(squeezing), 0.0}; }

std::complex<double> TMSVState::nu() const {
  return std::polar(std::sinh(squeezing), phase);
}

int TMSVState::truncation_for_tail(double squeezing, double tail) {
  if (!(squeezing >= 0.0)) throw std::invalid_argument("squeezing must be >= 0");
  if (!(tail > 0.0 && tail < 1.0))
    throw std::invalid_argument("tail must be in (0, 1)");
  const double t = std::tanh(squeezing);
  const double q = t * t;  // P(n > N) = q^{N+1}
  if (q <= 0.0) return 0;
  // q^{N+1} < tail  =>  N > log(tail)/log(q) - 1
  const double n = std::log(tail) / std::log(q) - 1.0;
  return n < 0.0 ? 0 : static_cast<int>(std::floor(n)) + 1;
}

std::vector<std::complex<double>> tmsv_coefficients(const TMSVState& state) {
  state.validate();
  const double t = std::tanh(state.squeezing);
  const double inv_cosh = 1.0 / std::cosh(state.squeezing);
  std::vector<std::complex<double>> c(static_cast<std::size_t>(state.n_max) + 1);
  for (int n = 0; n <= state.n_max; ++n) {
    const double mag = inv_cosh * std::pow(t, n);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    c[static_cast<std::size_t>(n)] =
        std::polar(mag, state.phase * n) * sign;
  }
  return c;
}

double PhotonDistribution::total() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

double PhotonDistribution::tail() const { return std::max(0.0, 1.0 - total()); }

double PhotonDistribution::truncated_mean() const {
  double s = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) s += static_cast<double>(n) * p[n];
  return s;
}

PhotonDistribution reduced_photon_distribution(const TMSVState& state) {
  state.validate();
  const double t = std::tanh(state.squeezing);
  const double q = t * t;
  const double p0 = 1.0 / (std::cosh(state.squeezing) * std::cosh(state.squeezing));
  PhotonDistribution d;
  d.p.resize(static_cast<std::size_t>(state.n_max) + 1);
  for (int n = 0; n <= state.n_max; ++n)
    d.p[static_cast<std::size_t>(n)] = p0 * std::pow(q, n);
  return d;
}

double thermal_pn(double mean, int n) {
  if (!(mean >= 0.0)) throw std::invalid_argument("thermal_pn: mean must be >= 0");
  if (n < 0) throw std::invalid_argument("thermal_pn: n must be >= 0");
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::pow(mean / (1.0 + mean), n) / (1.0 + mean);
}

double poisson_pn(double mean, int n) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson_pn: mean must be >= 0");
  if (n < 0) throw std::invalid_argument("poisson_pn: n must be >= 0");
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

double thermal_tail(double mean, int n_max) {
  if (!(mean >= 0.0) || n_max < 0) throw std::invalid_argument("thermal_tail");
  if (mean == 0.0) return 0.0;
  const double q = mean / (1.0 + mean);
  return std::pow(q, n_max + 1);
}

double thermal_mean_tail(double mean, int n_max) {
  if (!(mean >= 0.0) || n_max < 0)
    throw std::invalid_argument("thermal_mean_tail");
  if (mean == 0.0) return 0.0;
  const double q = mean / (1.0 + mean);
  const double N = static_cast<double>(n_max);
  // sum_{n>N} n (1-q) q^n = q^{N+1} ((N+1) - N q) / (1 - q)
  return std::pow(q, N + 1.0) * ((N + 1.0) - N * q) / (1.0 - q);
}

double g2_from_schmidt(std::span<const double> weights) {
  if (weights.empty())
    throw std::invalid_argument("g2_from_schmidt: empty weight list");
  double norm = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0))
      throw std::invalid_argument("g2_from_schmidt: weights must be >= 0");
    norm += w * w;
  }
  if (norm <= 0.0)
    throw std::invalid_argument("g2_from_schmidt: all weights are zero");
  double sum_sq = 0.0;
  for (double w : weights) {
    const double lambda = (w * w) / norm;
    sum_sq += lambda * lambda;
  }
  return 1.0 + sum_sq;
}

void SpectralDensity::validate() const {
  if (wavelength_nm.size() != density.size() || wavelength_nm.size() < 2)
    throw std::invalid_argument(
        "SpectralDensity: need >= 2 samples with matching sizes");
  for (std::size_t i = 1; i < wavelength_nm.size(); ++i)
    if (!(wavelength_nm[i] > wavelength_nm[i - 1]))
      throw std::invalid_argument(
          "SpectralDensity: wavelengths must be strictly increasing");
  for (double d : density)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument("SpectralDensity: densities must be >= 0");
}

double SpectralDensity::integral() const {
  validate();
  double s = 0.0;
  for (std::size_t i = 1; i < wavelength_nm.size(); ++i)
    s += 0.5 * (density[i] + density[i - 1]) *
         (wavelength_nm[i] - wavelength_nm[i - 1]);
  return s;
}

SpectralDensity SpectralDensity::gaussian(double center_nm, double sigma_nm,
                                          double min_nm, double max_nm,
                                          int points) {
  if (!(sigma_nm > 0.0) || !(max_nm > min_nm) || points < 2)
    throw std::invalid_argument("SpectralDensity::gaussian: bad arguments");
  SpectralDensity s;
  s.wavelength_nm.resize(static_cast<std::size_t>(points));
  s.density.resize(static_cast<std::size_t>(points));
  const double h = (max_nm - min_nm) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double wl = min_nm + h * i;
    const double z = (wl - center_nm) / sigma_nm;
    s.wavelength_nm[static_cast<std::size_t>(i)] = wl;
    s.density[static_cast<std::size_t>(i)] = std::exp(-0.5 * z * z);
  }
  return s;
}

namespace {

// Linear interpolation with zero outside the sampled support.
double interp_or_zero(const SpectralDensity& s, double wl) {
  const auto& x = s.wavelength_nm;
  if (wl < x.front() || wl > x.back()) return 0.0;
  const auto it = std::lower_bound(x.begin(), x.end(), wl);
  if (it == x.begin()) return s.density.front();
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double f = (wl - x[lo]) / (x[hi] - x[lo]);
  return s.density[lo] + f * (s.density[hi] - s.density[lo]);
}

}  // namespace

double spectral_overlap(const SpectralDensity& f, const SpectralDensity& g) {
  f.validate();
  g.validate();

  std::vector<double> grid;
  grid.reserve(f.wavelength_nm.size() + g.wavelength_nm.size());
  grid.insert(grid.end(), f.wavelength_nm.begin(), f.wavelength_nm.end());
  grid.insert(grid.end(), g.wavelength_nm.begin(), g.wavelength_nm.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> fv(grid.size()), gv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    fv[i] = interp_or_zero(f, grid[i]);
    gv[i] = interp_or_zero(g, grid[i]);
  }

  auto trapz = [&grid](const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
      s += 0.5 * (y[i] + y[i - 1]) * (grid[i] - grid[i - 1]);
    return s;
  };

  const double nf = trapz(fv);
  const double ng = trapz(gv);
  if (!(nf > 0.0) || !(ng > 0.0))
    throw std::invalid_argument("spectral_overlap: input integrates to zero");

  std::vector<double> root(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    root[i] = std::sqrt((fv[i] / nf) * (gv[i] / ng));
  return trapz(root);
}

ErrorBounds error_prob_bounds(double overlap, double photon_count) {
  if (!(overlap >= 0.0 && overlap <= 1.0))
    throw std::invalid_argument("error_prob_bounds: overlap must be in [0, 1]");
  if (!(photon_count >= 0.0))
    throw std::invalid_argument("error_prob_bounds: photon_count must be >= 0");
  const double on = std::pow(overlap, photon_count);
  ErrorBounds b;
  b.upper = 0.5 * on;
  b.lower = 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - on * on)));
  return b;
}

TotalVariation poisson_vs_thermal_distance(double mean, int n_max) {
  if (!(mean >= 0.0) || n_max < 0)
    throw std::invalid_argument("poisson_vs_thermal_distance");
  TotalVariation tv;
  double sum_p = 0.0;
  double sum_t = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double pp = poisson_pn(mean, n);
    const double pt = thermal_pn(mean, n);
    tv.distance += 0.5 * std::abs(pp - pt);
    sum_p += pp;
    sum_t += pt;
  }
  // |sum over the tail| <= (poisson tail + thermal tail) / 2
  tv.tail_bound =
      0.5 * (std::max(0.0, 1.0 - sum_p) + std::max(0.0, 1.0 - sum_t));
  return tv;
}

}  // namespace twinrange::covert

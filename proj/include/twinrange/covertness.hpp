#pragma once
// Photon statistics and detectability bounds for the probe beam.
//
// Tracing out the signal arm of a two-mode squeezed vacuum leaves an exactly
// thermal photon number distribution per mode, and a source with K equally
// weighted spectral modes has g2(0) = 1 + 1/K. A broadband pair source is
// therefore statistically indistinguishable from thermal background light;
// what remains for an intercepting receiver is the spectral shape, bounded
// below and above through the probe/background overlap.

#include <complex>
#include <span>
#include <vector>

namespace twinrange::covert {

struct TMSVState {
  double squeezing = 0.0;  // r >= 0
  double phase = 0.0;      // theta, radians
  int n_max = 0;           // Fock truncation, inclusive

  void validate() const;
  double mean_photon_number() const;  // sinh^2 r
  std::complex<double> mu() const;    // cosh r
  std::complex<double> nu() const;    // e^{i theta} sinh r

  // Smallest n_max whose geometric tail P(n > n_max) stays below `tail`.
  static int truncation_for_tail(double squeezing, double tail = 1e-12);
};

// Two-mode coefficients C_n of sum_n C_n |n,n>:
// C_n = (-1)^n e^{i n theta} tanh(r)^n / cosh(r).
std::vector<std::complex<double>> tmsv_coefficients(const TMSVState& state);

struct PhotonDistribution {
  std::vector<double> p;  // p[n] for n = 0..n_max

  double total() const;
  double tail() const;  // 1 - total(), clamped at 0
  double truncated_mean() const;
};

// |C_n|^2 = tanh(r)^{2n} / cosh(r)^2 -- thermal with mean sinh^2 r.
PhotonDistribution reduced_photon_distribution(const TMSVState& state);

double thermal_pn(double mean, int n);  // mean^n / (1+mean)^{n+1}
double poisson_pn(double mean, int n);

// Closed-form geometric tails of the thermal distribution.
double thermal_tail(double mean, int n_max);       // P(n > n_max)
double thermal_mean_tail(double mean, int n_max);  // sum_{n>n_max} n p_n

// g2(0) = 1 + sum_k lambda_k^2 with lambda_k = w_k^2 / sum_j w_j^2.
// Weights are Schmidt coefficients (amplitudes), any nonnegative scale.
double g2_from_schmidt(std::span<const double> weights);

struct SpectralDensity {
  std::vector<double> wavelength_nm;  // strictly increasing
  std::vector<double> density;        // >= 0, arbitrary normalization

  void validate() const;
  double integral() const;  // trapezoid
  static SpectralDensity gaussian(double center_nm, double sigma_nm,
                                  double min_nm, double max_nm, int points);
};

// O = integral sqrt(f g) after resampling both onto the union grid (linear
// interpolation, zero outside each input's support) and normalizing each.
double spectral_overlap(const SpectralDensity& f, const SpectralDensity& g);

struct ErrorBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Discrimination-error bounds for an intercepting receiver after it has
// collected `photon_count` probe photons, given spectral overlap O:
//   lower = (1 - sqrt(1 - O^{2N})) / 2,   upper = O^N / 2.
ErrorBounds error_prob_bounds(double overlap, double photon_count);

struct TotalVariation {
  double distance = 0.0;    // truncated sum
  double tail_bound = 0.0;  // certified bound on the neglected tail
};

// (1/2) sum_n |poisson_pn - thermal_pn| over n = 0..n_max, plus a bound on
// the remainder. Strictly positive for mean > 0: a coherent probe of the
// same mean power is always statistically distinguishable from thermal.
TotalVariation poisson_vs_thermal_distance(double mean, int n_max);

}  // namespace twinrange::covert

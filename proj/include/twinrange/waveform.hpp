#pragma once
// Start/multi-stop correlation of a tag stream into ranging waveforms, and
// the statistics extracted from them: peak detection, Gaussian fits to the
// peak-height and noise-floor distributions, empirical SNR.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "twinrange/montecarlo.hpp"
#include "twinrange/snr_model.hpp"

namespace twinrange::wave {

struct Waveform {
  double bin_width_ps = 0.0;
  double window_ps = 0.0;
  double integration_time_s = 0.0;
  std::vector<std::int64_t> counts;  // ceil(window / bin_width) bins

  int bins() const { return static_cast<int>(counts.size()); }
};

// Histogram of (idler time - signal time) for every idler tag within
// [t_signal, t_signal + window). Start: any tag on a detector in
// signal_detectors; stop: any tag on a detector in idler_detectors. The two
// sets must be disjoint and nonempty. An empty stream gives all-zero bins.
Waveform correlate(const sim::EventStream& stream,
                   std::span<const sim::DetectorId> signal_detectors,
                   std::span<const sim::DetectorId> idler_detectors,
                   double bin_width_ps, double window_ps);

// All n x n channel pairings of one stream, correlated in one pass.
struct PairingWaveforms {
  int channels = 0;
  sim::ChannelMap map;                // the energy-conserving pairing
  std::vector<Waveform> by_pairing;   // index (i-1)*channels + (j-1)

  const Waveform& at(int signal_channel, int idler_channel) const;
};

PairingWaveforms correlate_all_pairings(const sim::EventStream& stream,
                                        const sim::ChannelMap& map,
                                        double bin_width_ps, double window_ps);

enum class CombineMode { All, EnergyConserving };

// Sum of the selected pairings: every (i, j) for All, (i, map(i)) for
// EnergyConserving.
Waveform combine_channels(const PairingWaveforms& pairings, CombineMode mode);

struct RangeEstimate {
  int peak_bin = 0;
  double delay_ps = 0.0;    // (peak_bin + 0.5) * bin_width
  double distance_m = 0.0;  // c * delay / 2
  double resolution_m = 0.0;  // c * bin_width / 2, one-bin uncertainty
};

// Argmax bin (smallest index on ties); empty on an all-zero waveform.
std::optional<RangeEstimate> detect_peak(const Waveform& waveform);

// Argmax of the binwise sum across waveforms; the bin every per-waveform
// statistic is then read from.
int global_peak_bin(std::span<const Waveform> waveforms);

struct Histogram {
  std::vector<double> centers;
  std::vector<double> counts;

  // Integer-aligned bins, width chosen from the sample count (~sqrt rule).
  static Histogram of_samples(std::span<const std::int64_t> samples);
};

struct GaussianFit {
  double amplitude = 0.0;
  double mean = 0.0;
  double sigma = 0.0;
  double mean_uncertainty = 0.0;   // residual-derived, from (J^T J)^-1
  double sigma_uncertainty = 0.0;
  bool converged = false;  // relative parameter change < 1e-8 within 200 iters
  bool fallback = false;   // moments used instead (degenerate or no fit)
  int iterations = 0;
};

// Levenberg-Marquardt fit of A exp(-(x-mu)^2 / 2 sigma^2) to a histogram.
// Degenerate input (fewer than 3 occupied bins, or zero variance) falls back
// to sample moments with the fallback flag set.
GaussianFit gaussian_fit(const Histogram& histogram);

struct PeakStats {
  int peak_bin = 0;
  int guard_bins = 0;
  std::vector<std::int64_t> peak_heights;   // one per waveform
  std::vector<std::int64_t> noise_samples;  // all bins outside peak +- guard
  GaussianFit peak_fit;
  GaussianFit floor_fit;
};

// Needs >= 2 waveforms with identical binning.
PeakStats peak_statistics(std::span<const Waveform> waveforms, int peak_bin,
                          int guard_bins = 2);

enum class SigmaConvention {
  Peak,     // (peak mean - floor mean) / peak sigma
  Combined  // ... / sqrt(peak sigma^2 + floor sigma^2)
};

struct SnrEstimate {
  double value = 0.0;
  double uncertainty = 0.0;  // propagated from the fit uncertainties
};

// Throws std::domain_error when the relevant fitted sigma is zero.
SnrEstimate empirical_snr(const PeakStats& stats,
                          SigmaConvention convention = SigmaConvention::Peak);

// Analytic expectations for the combined waveform of each mode: flat floor
// per bin and the SNR that empirical_snr should converge to. For
// EnergyConserving this is exactly the closed-form model SNR; for All the
// dark terms lose their 1/n bookkeeping (n more pairings see each rate).
double expected_floor_per_bin(const snr::SystemParams& params, CombineMode mode);
double expected_snr(const snr::SystemParams& params, CombineMode mode);

}  // namespace twinrange::wave

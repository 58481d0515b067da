#pragma once
// Coincidence SNR model for time-of-flight ranging with photon pairs.
//
// The receiver histograms idler-minus-signal arrival times into bins of width
// dt over an integration time T. True pairs pile up in a single bin (S);
// every uncorrelated combination of {pair photon, unpaired single, background
// photon, dark count} adds a flat accidental floor. With n frequency channels
// per side and energy-matched pairing, the accidental terms fall into three
// families by how they scale with n:
//
//   constant      N_c  (dark against an optical rate, unaffected by n)
//   proportional  N_p  (dark-dark, one term per channel pairing: grows as n)
//   inverse       N_i  (optical-optical, spectrally anticorrelated: falls 1/n)
//
//   SNR(n) = S / sqrt(S + N_c + n*N_p + N_i/n),  optimum at n = sqrt(N_i/N_p)

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace twinrange::snr {

// Rates in 1/s, times in s, bandwidth in nm. "gain" is the round-trip
// transmission of the probe (idler) arm, so 1e-3 means 30 dB of loss.
struct SystemParams {
  double pair_rate = 0.0;           // c_p: pair rate at the source
  double unpaired_rate = 0.0;       // c_s: unpaired singles rate per arm
  double dark_rate = 0.0;           // c_d: dark counts per detector
  double background_density = 0.0;  // B0: background rate per nm
  double bandwidth_nm = 0.0;        // dl: total collected bandwidth
  double gain = 1.0;                // Q in [0, 1]
  double bin_width_s = 0.0;         // dt
  double integration_time_s = 1.0;  // T
  int channels = 1;                 // n

  void validate() const;  // throws std::invalid_argument with the bad field
  double heralding_efficiency() const;  // c_p / (c_p + c_s), 0 if both zero
};

// c_s such that c_p / (c_p + c_s) equals the requested efficiency.
double unpaired_rate_for_efficiency(double pair_rate, double efficiency);

// Accidental-count budget for one integration. per_term keys follow the
// N_xy convention: first index is the signal-arm event, second the idler-arm
// event; d = dark, c = pair photon, s = unpaired single, B = background.
// Terms that vanish by construction (signal-arm background off) are kept in
// the map as zeros.
struct NoiseBreakdown {
  double signal = 0.0;        // S = c_p * Q * T
  double constant_sum = 0.0;  // N_c
  double proportional = 0.0;  // N_p (coefficient; enters as n * N_p)
  double inverse_sum = 0.0;   // N_i (coefficient; enters as N_i / n)
  std::map<std::string, double> per_term;
};

double signal_count(const SystemParams& p);
NoiseBreakdown noise_breakdown(const SystemParams& p);

// SNR at p.channels / at an arbitrary (real-valued) channel count.
// A degenerate denominator (all rates zero) gives 0, not NaN.
double snr(const SystemParams& p);
double snr_at(const SystemParams& p, double channels);

struct UnboundedOptimum : std::domain_error {
  using std::domain_error::domain_error;
};

// sqrt(N_i / N_p). Throws UnboundedOptimum when there are no dark counts
// (N_p = 0), where more channels always help.
double optimal_channels(const SystemParams& p);

enum class SweepAxis { Gain, Background, Channels };
const char* sweep_axis_name(SweepAxis axis);

struct SweepPoint {
  double value = 0.0;  // the swept quantity
  double snr = 0.0;
  double S = 0.0;
  double N_c = 0.0;   // as entering the denominator, i.e. channel-scaled
  double N_p = 0.0;   // n * proportional coefficient
  double N_i = 0.0;   // inverse coefficient / n
};

// Evaluates the model along one axis. The grid must be nonempty and strictly
// monotone; a Channels sweep additionally requires values >= 1.
std::vector<SweepPoint> snr_sweep(SystemParams p, SweepAxis axis,
                                  std::span<const double> grid);

}  // namespace twinrange::snr

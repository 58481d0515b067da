#include "twinrange/snr_model.hpp"

#include <cmath>

namespace twinrange::snr {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("SystemParams: ") + what);
}

}  // namespace

void SystemParams::validate() const {
  require(std::isfinite(pair_rate) && pair_rate >= 0.0, "pair_rate must be >= 0");
  require(std::isfinite(unpaired_rate) && unpaired_rate >= 0.0,
          "unpaired_rate must be >= 0");
  require(std::isfinite(dark_rate) && dark_rate >= 0.0, "dark_rate must be >= 0");
  require(std::isfinite(background_density) && background_density >= 0.0,
          "background_density must be >= 0");
  require(std::isfinite(bandwidth_nm) && bandwidth_nm >= 0.0,
          "bandwidth_nm must be >= 0");
  require(std::isfinite(gain) && gain >= 0.0 && gain <= 1.0,
          "gain must be in [0, 1]");
  require(std::isfinite(bin_width_s) && bin_width_s > 0.0,
          "bin_width_s must be > 0");
  require(std::isfinite(integration_time_s) && integration_time_s > 0.0,
          "integration_time_s must be > 0");
  require(channels >= 1, "channels must be >= 1");
}

double SystemParams::heralding_efficiency() const {
  const double total = pair_rate + unpaired_rate;
  return total > 0.0 ? pair_rate / total : 0.0;
}

double unpaired_rate_for_efficiency(double pair_rate, double efficiency) {
  if (!(efficiency > 0.0) || efficiency > 1.0)
    throw std::invalid_argument("heralding efficiency must be in (0, 1]");
  return pair_rate * (1.0 - efficiency) / efficiency;
}

double signal_count(const SystemParams& p) {
  p.validate();
  return p.pair_rate * p.gain * p.integration_time_s;
}

NoiseBreakdown noise_breakdown(const SystemParams& p) {
  p.validate();
  const double tt = p.bin_width_s * p.integration_time_s;  // dt * T
  const double cp = p.pair_rate;
  const double cs = p.unpaired_rate;
  const double cd = p.dark_rate;
  const double bg = p.background_density * p.bandwidth_nm;  // B0 * dl
  const double Q = p.gain;

  NoiseBreakdown b;
  b.signal = cp * Q * p.integration_time_s;

  // Signal-arm event x idler-arm event. The idler arm sees the probe loss Q
  // on pair photons and unpaired singles; background enters on the idler arm
  // at full strength; the signal arm stays local (no Q, no background).
  auto& t = b.per_term;
  t["S"] = b.signal;

  // constant in n
  t["N_dc"] = cd * Q * cp * tt;  // dark (signal) x pair photon (idler)
  t["N_ds"] = cd * Q * cs * tt;  // dark (signal) x single (idler)
  t["N_dB"] = cd * bg * tt;      // dark (signal) x background (idler)
  t["N_cd"] = cp * cd * tt;      // pair photon (signal) x dark (idler)
  t["N_sd"] = cs * cd * tt;      // single (signal) x dark (idler)
  t["N_Bd"] = 0.0;               // background on the signal arm is off

  // one term per channel pairing: grows as n
  t["N_dd"] = cd * cd * tt;

  // spectrally anticorrelated: suppressed as 1/n
  t["N_cB"] = cp * bg * tt;      // pair photon (signal) x background (idler)
  t["N_sB"] = cs * bg * tt;      // single (signal) x background (idler)
  t["N_cs"] = cp * Q * cs * tt;  // pair photon (signal) x single (idler)
  t["N_sc"] = cs * Q * cp * tt;  // single (signal) x pair photon (idler)
  t["N_ss"] = Q * cs * cs * tt;  // single x single
  t["N_BB"] = 0.0;
  t["N_Bs"] = 0.0;
  t["N_Bc"] = 0.0;

  b.constant_sum =
      t["N_dc"] + t["N_ds"] + t["N_dB"] + t["N_cd"] + t["N_sd"] + t["N_Bd"];
  b.proportional = t["N_dd"];
  b.inverse_sum =
      t["N_cB"] + t["N_sB"] + t["N_cs"] + t["N_sc"] + t["N_ss"] +
      t["N_BB"] + t["N_Bs"] + t["N_Bc"];
  return b;
}

double snr_at(const SystemParams& p, double channels) {
  if (!(channels >= 1.0))
    throw std::invalid_argument("snr_at: channels must be >= 1");
  const NoiseBreakdown b = noise_breakdown(p);
  const double denom = b.signal + b.constant_sum + channels * b.proportional +
                       b.inverse_sum / channels;
  if (denom <= 0.0) return 0.0;
  return b.signal / std::sqrt(denom);
}

double snr(const SystemParams& p) { return snr_at(p, p.channels); }

double optimal_channels(const SystemParams& p) {
  const NoiseBreakdown b = noise_breakdown(p);
  if (b.proportional <= 0.0)
    throw UnboundedOptimum(
        "optimal_channels: no dark counts (N_p = 0), the optimum is unbounded");
  return std::sqrt(b.inverse_sum / b.proportional);
}

const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Gain: return "gain";
    case SweepAxis::Background: return "background";
    case SweepAxis::Channels: return "channels";
  }
  return "?";
}

std::vector<SweepPoint> snr_sweep(SystemParams p, SweepAxis axis,
                                  std::span<const double> grid) {
  p.validate();
  if (grid.empty()) throw std::invalid_argument("snr_sweep: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("snr_sweep: grid must be strictly increasing");

  std::vector<SweepPoint> out;
  out.reserve(grid.size());
  for (double v : grid) {
    double n = static_cast<double>(p.channels);
    switch (axis) {
      case SweepAxis::Gain:
        p.gain = v;
        break;
      case SweepAxis::Background:
        p.background_density = v;
        break;
      case SweepAxis::Channels:
        if (!(v >= 1.0))
          throw std::invalid_argument("snr_sweep: channels values must be >= 1");
        n = v;
        break;
    }
    const NoiseBreakdown b = noise_breakdown(p);
    SweepPoint pt;
    pt.value = v;
    pt.S = b.signal;
    pt.N_c = b.constant_sum;
    pt.N_p = n * b.proportional;
    pt.N_i = b.inverse_sum / n;
    const double denom = pt.S + pt.N_c + pt.N_p + pt.N_i;
    pt.snr = denom > 0.0 ? pt.S / std::sqrt(denom) : 0.0;
    out.push_back(pt);
  }
  return out;
}

}  // namespace twinrange::snr

#include "twinrange/waveform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace twinrange::wave {

namespace {

int bin_count(double bin_width_ps, double window_ps) {
  if (!(bin_width_ps > 0.0))
    throw std::invalid_argument("correlate: bin_width_ps must be > 0");
  if (!(window_ps > 0.0))
    throw std::invalid_argument("correlate: window_ps must be > 0");
  return static_cast<int>(std::ceil(window_ps / bin_width_ps));
}

// Tag times of one detector set, sorted (the stream itself is time-sorted).
std::vector<std::int64_t> select_ticks(const sim::EventStream& stream,
                                       std::span<const sim::DetectorId> dets) {
  std::array<bool, 256> wanted{};
  for (const sim::DetectorId& d : dets) wanted[d.encode()] = true;
  std::vector<std::int64_t> ticks;
  for (const sim::TimeTag& t : stream.tags)
    if (wanted[t.detector]) ticks.push_back(t.ticks);
  return ticks;
}

void histogram_into(Waveform& wf, const std::vector<std::int64_t>& starts,
                    const std::vector<std::int64_t>& stops,
                    double resolution_ps) {
  const double window_ticks = wf.window_ps / resolution_ps;
  std::size_t lo = 0;
  for (const std::int64_t s : starts) {
    while (lo < stops.size() && stops[lo] < s) ++lo;
    for (std::size_t j = lo; j < stops.size(); ++j) {
      const double dt_ticks = static_cast<double>(stops[j] - s);
      if (dt_ticks >= window_ticks) break;
      const double dt_ps = dt_ticks * resolution_ps;
      const int bin = static_cast<int>(dt_ps / wf.bin_width_ps);
      if (bin < wf.bins()) ++wf.counts[static_cast<std::size_t>(bin)];
    }
  }
}

}  // namespace

Waveform correlate(const sim::EventStream& stream,
                   std::span<const sim::DetectorId> signal_detectors,
                   std::span<const sim::DetectorId> idler_detectors,
                   double bin_width_ps, double window_ps) {
  if (signal_detectors.empty() || idler_detectors.empty())
    throw std::invalid_argument("correlate: detector sets must be nonempty");
  for (const auto& s : signal_detectors)
    for (const auto& i : idler_detectors)
      if (s == i)
        throw std::invalid_argument("correlate: detector sets must be disjoint");

  Waveform wf;
  wf.bin_width_ps = bin_width_ps;
  wf.window_ps = window_ps;
  wf.integration_time_s = stream.duration_s;
  wf.counts.assign(static_cast<std::size_t>(bin_count(bin_width_ps, window_ps)),
                   0);

  const auto starts = select_ticks(stream, signal_detectors);
  const auto stops = select_ticks(stream, idler_detectors);
  histogram_into(wf, starts, stops, stream.time_resolution_ps);
  return wf;
}

const Waveform& PairingWaveforms::at(int signal_channel,
                                     int idler_channel) const {
  if (signal_channel < 1 || signal_channel > channels || idler_channel < 1 ||
      idler_channel > channels)
    throw std::out_of_range("PairingWaveforms::at");
  return by_pairing[static_cast<std::size_t>(
      (signal_channel - 1) * channels + (idler_channel - 1))];
}

PairingWaveforms correlate_all_pairings(const sim::EventStream& stream,
                                        const sim::ChannelMap& map,
                                        double bin_width_ps, double window_ps) {
  map.validate();
  const int n = map.channels();
  if (n < 1 || n != stream.channels)
    throw std::invalid_argument(
        "correlate_all_pairings: map size must match stream channels");

  PairingWaveforms pw;
  pw.channels = n;
  pw.map = map;
  pw.by_pairing.resize(static_cast<std::size_t>(n) * n);

  std::vector<std::vector<std::int64_t>> signal_ticks(
      static_cast<std::size_t>(n)),
      idler_ticks(static_cast<std::size_t>(n));
  for (const sim::TimeTag& t : stream.tags) {
    const sim::DetectorId id = sim::DetectorId::decode(t.detector);
    if (id.channel > n) continue;
    auto& bucket = (id.side == sim::Side::Signal)
                       ? signal_ticks[static_cast<std::size_t>(id.channel - 1)]
                       : idler_ticks[static_cast<std::size_t>(id.channel - 1)];
    bucket.push_back(t.ticks);
  }

  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      Waveform& wf = pw.by_pairing[static_cast<std::size_t>((i - 1) * n + (j - 1))];
      wf.bin_width_ps = bin_width_ps;
      wf.window_ps = window_ps;
      wf.integration_time_s = stream.duration_s;
      wf.counts.assign(
          static_cast<std::size_t>(bin_count(bin_width_ps, window_ps)), 0);
      histogram_into(wf, signal_ticks[static_cast<std::size_t>(i - 1)],
                     idler_ticks[static_cast<std::size_t>(j - 1)],
                     stream.time_resolution_ps);
    }
  }
  return pw;
}

Waveform combine_channels(const PairingWaveforms& pairings, CombineMode mode) {
  const int n = pairings.channels;
  if (n < 1 || pairings.by_pairing.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("combine_channels: malformed pairing set");

  Waveform out = pairings.by_pairing.front();
  std::fill(out.counts.begin(), out.counts.end(), 0);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (mode == CombineMode::EnergyConserving && j != pairings.map(i))
        continue;
      const Waveform& wf = pairings.at(i, j);
      if (wf.counts.size() != out.counts.size())
        throw std::invalid_argument("combine_channels: binning mismatch");
      for (std::size_t b = 0; b < out.counts.size(); ++b)
        out.counts[b] += wf.counts[b];
    }
  }
  return out;
}

std::optional<RangeEstimate> detect_peak(const Waveform& waveform) {
  if (waveform.counts.empty())
    throw std::invalid_argument("detect_peak: empty waveform");
  const auto it = std::max_element(waveform.counts.begin(), waveform.counts.end());
  if (*it <= 0) return std::nullopt;
  RangeEstimate est;
  est.peak_bin = static_cast<int>(it - waveform.counts.begin());
  est.delay_ps = (est.peak_bin + 0.5) * waveform.bin_width_ps;
  est.distance_m = sim::kSpeedOfLight * est.delay_ps * 1e-12 / 2.0;
  est.resolution_m = sim::kSpeedOfLight * waveform.bin_width_ps * 1e-12 / 2.0;
  return est;
}

int global_peak_bin(std::span<const Waveform> waveforms) {
  if (waveforms.empty())
    throw std::invalid_argument("global_peak_bin: no waveforms");
  std::vector<std::int64_t> sum(waveforms.front().counts.size(), 0);
  for (const Waveform& wf : waveforms) {
    if (wf.counts.size() != sum.size())
      throw std::invalid_argument("global_peak_bin: binning mismatch");
    for (std::size_t b = 0; b < sum.size(); ++b) sum[b] += wf.counts[b];
  }
  return static_cast<int>(std::max_element(sum.begin(), sum.end()) -
                          sum.begin());
}

Histogram Histogram::of_samples(std::span<const std::int64_t> samples) {
  if (samples.empty())
    throw std::invalid_argument("Histogram: no samples");
  const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
  const std::int64_t mn = *mn_it;
  const std::int64_t mx = *mx_it;
  const double target =
      std::clamp(std::sqrt(static_cast<double>(samples.size())), 5.0, 64.0);
  const std::int64_t span = mx - mn + 1;
  const std::int64_t width = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(span / target)));
  const std::size_t nbins = static_cast<std::size_t>((span + width - 1) / width);

  Histogram h;
  h.centers.resize(nbins);
  h.counts.assign(nbins, 0.0);
  for (std::size_t b = 0; b < nbins; ++b)
    h.centers[b] = static_cast<double>(mn) + width * (b + 0.5) - 0.5;
  for (const std::int64_t v : samples)
    h.counts[static_cast<std::size_t>((v - mn) / width)] += 1.0;
  return h;
}

namespace {

struct Moments {
  double mean = 0.0;
  double sigma = 0.0;
  double amplitude = 0.0;
};

Moments histogram_moments(const Histogram& h) {
  double w = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    w += h.counts[i];
    m1 += h.counts[i] * h.centers[i];
  }
  Moments mom;
  if (w <= 0.0) return mom;
  mom.mean = m1 / w;
  double m2 = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double d = h.centers[i] - mom.mean;
    m2 += h.counts[i] * d * d;
  }
  mom.sigma = std::sqrt(m2 / w);
  mom.amplitude = *std::max_element(h.counts.begin(), h.counts.end());
  return mom;
}

// Solves the symmetric 3x3 system a x = b in place; returns false if singular.
bool solve3(double a[3][3], const double b[3], double x[3]) {
  double m[3][4];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[r][c] = a[r][c];
    m[r][3] = b[r];
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-300) return false;
    std::swap(m[col], m[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  for (int r = 0; r < 3; ++r) x[r] = m[r][3] / m[r][r];
  return true;
}

double ssr_of(const Histogram& h, double A, double mu, double sigma) {
  double ssr = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double z = (h.centers[i] - mu) / sigma;
    const double r = h.counts[i] - A * std::exp(-0.5 * z * z);
    ssr += r * r;
  }
  return ssr;
}

}  // namespace

GaussianFit gaussian_fit(const Histogram& histogram) {
  if (histogram.centers.size() != histogram.counts.size() ||
      histogram.centers.empty())
    throw std::invalid_argument("gaussian_fit: malformed histogram");

  const Moments mom = histogram_moments(histogram);
  std::size_t occupied = 0;
  for (double c : histogram.counts)
    if (c > 0.0) ++occupied;

  GaussianFit fit;
  fit.mean = mom.mean;
  fit.sigma = mom.sigma;
  fit.amplitude = mom.amplitude;

  // Not enough structure for a 3-parameter fit: report moments, flagged.
  if (occupied < 3 || !(mom.sigma > 0.0)) {
    fit.fallback = true;
    return fit;
  }

  double A = mom.amplitude;
  double mu = mom.mean;
  double sigma = mom.sigma;
  double lambda = 1e-3;
  double ssr = ssr_of(histogram, A, mu, sigma);
  const int max_iter = 200;
  const double rel_tol = 1e-8;

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    // Build J^T J and J^T r at the current point.
    double jtj[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double jtr[3] = {0, 0, 0};
    for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
      const double z = (histogram.centers[i] - mu) / sigma;
      const double e = std::exp(-0.5 * z * z);
      const double r = histogram.counts[i] - A * e;
      const double j0 = e;
      const double j1 = A * e * z / sigma;
      const double j2 = A * e * z * z / sigma;
      const double j[3] = {j0, j1, j2};
      for (int a = 0; a < 3; ++a) {
        jtr[a] += j[a] * r;
        for (int b = 0; b < 3; ++b) jtj[a][b] += j[a] * j[b];
      }
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      double damped[3][3];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          damped[a][b] = jtj[a][b] + (a == b ? lambda * jtj[a][a] : 0.0);
      double step[3];
      if (!solve3(damped, jtr, step)) {
        lambda *= 10.0;
        continue;
      }
      const double A2 = A + step[0];
      const double mu2 = mu + step[1];
      const double sigma2 = sigma + step[2];
      if (!(sigma2 > 0.0) || !std::isfinite(A2) || !std::isfinite(mu2)) {
        lambda *= 10.0;
        continue;
      }
      const double ssr2 = ssr_of(histogram, A2, mu2, sigma2);
      if (ssr2 <= ssr) {
        const double rel = std::max(
            {std::abs(step[0]) / std::max(std::abs(A2), 1e-30),
             std::abs(step[1]) / std::max(std::abs(mu2), 1e-30),
             std::abs(step[2]) / std::max(std::abs(sigma2), 1e-30)});
        A = A2;
        mu = mu2;
        sigma = sigma2;
        ssr = ssr2;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (rel < rel_tol) fit.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (fit.converged || !stepped) break;
  }

  fit.iterations = iter + 1;
  if (!fit.converged) {
    // Keep the best point found but mark it; callers treat non-converged
    // fits as moment-quality.
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      fit.fallback = true;
      return fit;
    }
  }
  fit.amplitude = A;
  fit.mean = mu;
  fit.sigma = std::abs(sigma);

  // Residual-derived parameter uncertainties: cov = s^2 (J^T J)^-1.
  const std::size_t npts = histogram.counts.size();
  if (npts > 3) {
    double jtj[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (std::size_t i = 0; i < npts; ++i) {
      const double z = (histogram.centers[i] - mu) / sigma;
      const double e = std::exp(-0.5 * z * z);
      const double j[3] = {e, A * e * z / sigma, A * e * z * z / sigma};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) jtj[a][b] += j[a] * j[b];
    }
    const double s2 = ssr / static_cast<double>(npts - 3);
    // Invert via solves against unit vectors; only the diagonal is needed.
    for (int k = 1; k <= 2; ++k) {
      double rhs[3] = {0, 0, 0};
      rhs[k] = 1.0;
      double col[3];
      double a_copy[3][3];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) a_copy[a][b] = jtj[a][b];
      if (solve3(a_copy, rhs, col) && col[k] > 0.0) {
        const double unc = std::sqrt(s2 * col[k]);
        if (k == 1) fit.mean_uncertainty = unc;
        if (k == 2) fit.sigma_uncertainty = unc;
      }
    }
  }
  return fit;
}

PeakStats peak_statistics(std::span<const Waveform> waveforms, int peak_bin,
                          int guard_bins) {
  if (waveforms.size() < 2)
    throw std::invalid_argument("peak_statistics: need >= 2 waveforms");
  if (guard_bins < 0)
    throw std::invalid_argument("peak_statistics: guard_bins must be >= 0");
  const std::size_t bins = waveforms.front().counts.size();
  if (peak_bin < 0 || static_cast<std::size_t>(peak_bin) >= bins)
    throw std::invalid_argument("peak_statistics: peak_bin out of range");

  PeakStats st;
  st.peak_bin = peak_bin;
  st.guard_bins = guard_bins;
  st.peak_heights.reserve(waveforms.size());
  st.noise_samples.reserve(waveforms.size() * bins);
  for (const Waveform& wf : waveforms) {
    if (wf.counts.size() != bins)
      throw std::invalid_argument("peak_statistics: binning mismatch");
    st.peak_heights.push_back(wf.counts[static_cast<std::size_t>(peak_bin)]);
    for (std::size_t b = 0; b < bins; ++b) {
      if (std::abs(static_cast<int>(b) - peak_bin) <= guard_bins) continue;
      st.noise_samples.push_back(wf.counts[b]);
    }
  }
  if (st.noise_samples.empty())
    throw std::invalid_argument(
        "peak_statistics: guard band swallowed every noise bin");

  st.peak_fit = gaussian_fit(Histogram::of_samples(st.peak_heights));
  st.floor_fit = gaussian_fit(Histogram::of_samples(st.noise_samples));
  return st;
}

SnrEstimate empirical_snr(const PeakStats& stats, SigmaConvention convention) {
  const GaussianFit& pk = stats.peak_fit;
  const GaussianFit& fl = stats.floor_fit;
  const double sigma =
      convention == SigmaConvention::Peak
          ? pk.sigma
          : std::sqrt(pk.sigma * pk.sigma + fl.sigma * fl.sigma);
  if (!(sigma > 0.0))
    throw std::domain_error("empirical_snr: fitted sigma is zero");

  SnrEstimate est;
  const double delta = pk.mean - fl.mean;
  est.value = delta / sigma;
  // First-order propagation; the convention only changes the denominator.
  const double dmu2 = pk.mean_uncertainty * pk.mean_uncertainty +
                      fl.mean_uncertainty * fl.mean_uncertainty;
  double dsig2 = 0.0;
  if (convention == SigmaConvention::Peak) {
    dsig2 = pk.sigma_uncertainty * pk.sigma_uncertainty;
  } else {
    const double s2 = sigma * sigma;
    const double dp = pk.sigma * pk.sigma_uncertainty;
    const double df = fl.sigma * fl.sigma_uncertainty;
    dsig2 = (dp * dp + df * df) / s2;
  }
  est.uncertainty = std::sqrt(dmu2 / (sigma * sigma) +
                              delta * delta * dsig2 /
                                  (sigma * sigma * sigma * sigma));
  return est;
}

double expected_floor_per_bin(const snr::SystemParams& params,
                              CombineMode mode) {
  const snr::NoiseBreakdown b = snr::noise_breakdown(params);
  const double n = params.channels;
  if (mode == CombineMode::EnergyConserving)
    return b.constant_sum + n * b.proportional + b.inverse_sum / n;
  return n * b.constant_sum + n * n * b.proportional + b.inverse_sum;
}

double expected_snr(const snr::SystemParams& params, CombineMode mode) {
  const double S = snr::signal_count(params);
  const double N = expected_floor_per_bin(params, mode);
  const double denom = S + N;
  return denom > 0.0 ? S / std::sqrt(denom) : 0.0;
}

}  // namespace twinrange::wave

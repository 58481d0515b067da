#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "twinrange/waveform.hpp"

using namespace twinrange;
using sim::DetectorId;
using sim::Side;
using wave::CombineMode;

namespace {

const DetectorId kSig1{Side::Signal, 1};
const DetectorId kSig2{Side::Signal, 2};
const DetectorId kIdl1{Side::Idler, 1};
const DetectorId kIdl2{Side::Idler, 2};

sim::TimeTag tag(std::int64_t ticks, DetectorId id) {
  return {ticks, id.encode(), static_cast<std::uint8_t>(sim::Origin::Pair)};
}

sim::EventStream stream_of(std::vector<sim::TimeTag> tags, int channels = 1) {
  sim::EventStream s;
  s.tags = std::move(tags);
  s.time_resolution_ps = 50.0;
  s.duration_s = 1.0;
  s.channels = channels;
  return s;
}

wave::Waveform waveform_of(std::vector<std::int64_t> counts,
                           double bin_width_ps = 750.0) {
  wave::Waveform wf;
  wf.bin_width_ps = bin_width_ps;
  wf.window_ps = bin_width_ps * static_cast<double>(counts.size());
  wf.integration_time_s = 1.0;
  wf.counts = std::move(counts);
  return wf;
}

}  // namespace

TEST_CASE("correlate maps stop-minus-start delays into bins") {
  // Resolution 50 ps, bins of 100 ps, window 500 ps = 10 ticks, 5 bins.
  const auto s = stream_of({tag(0, kSig1), tag(0, kIdl1), tag(1, kIdl1),
                            tag(2, kIdl1), tag(9, kIdl1), tag(10, kIdl1),
                            tag(19, kIdl1), tag(20, kSig1), tag(21, kIdl1)});
  const DetectorId starts[] = {kSig1};
  const DetectorId stops[] = {kIdl1};
  const auto wf = wave::correlate(s, starts, stops, 100.0, 500.0);
  REQUIRE(wf.bins() == 5);
  // Start 0 sees dt = 0, 1, 2, 9 ticks (10 = window edge is out); start 20
  // sees only dt = 1 (the stop at 19 precedes it).
  CHECK(wf.counts == std::vector<std::int64_t>{3, 1, 0, 0, 1});
  CHECK(wf.integration_time_s == 1.0);
}

TEST_CASE("correlate is start-multi-stop: one stop can serve many starts") {
  const auto s =
      stream_of({tag(0, kSig1), tag(2, kSig1), tag(9, kIdl1)});
  const DetectorId starts[] = {kSig1};
  const DetectorId stops[] = {kIdl1};
  const auto wf = wave::correlate(s, starts, stops, 100.0, 500.0);
  // dt = 9 ticks (bin 4) against the first start, 7 ticks (bin 3) against
  // the second.
  CHECK(wf.counts == std::vector<std::int64_t>{0, 0, 0, 1, 1});
}

TEST_CASE("correlate ignores detectors outside the requested sets") {
  const auto with = stream_of({tag(0, kSig1), tag(3, kIdl2), tag(4, kIdl1)});
  const auto without = stream_of({tag(0, kSig1), tag(4, kIdl1)});
  const DetectorId starts[] = {kSig1};
  const DetectorId stops[] = {kIdl1};
  CHECK(wave::correlate(with, starts, stops, 100.0, 500.0).counts ==
        wave::correlate(without, starts, stops, 100.0, 500.0).counts);
}

TEST_CASE("correlate of an empty stream is an all-zero waveform") {
  const auto s = stream_of({});
  const DetectorId starts[] = {kSig1};
  const DetectorId stops[] = {kIdl1};
  const auto wf = wave::correlate(s, starts, stops, 750.0, 60000.0);
  CHECK(wf.bins() == 80);
  for (const auto c : wf.counts) CHECK(c == 0);
  CHECK(!wave::detect_peak(wf).has_value());
}

TEST_CASE("correlate validates its inputs") {
  const auto s = stream_of({tag(0, kSig1)});
  const DetectorId starts[] = {kSig1};
  const DetectorId stops[] = {kIdl1};
  const DetectorId overlapping[] = {kSig1, kIdl1};
  CHECK_THROWS_AS(
      (void)wave::correlate(s, {}, stops, 100.0, 500.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)wave::correlate(s, starts, overlapping, 100.0, 500.0),
      std::invalid_argument);
  CHECK_THROWS_AS((void)wave::correlate(s, starts, stops, 0.0, 500.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)wave::correlate(s, starts, stops, 100.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("all-pairings correlation separates the channel combinations") {
  const auto s = stream_of({tag(0, kSig1), tag(1, kIdl2), tag(3, kIdl1),
                            tag(10, kSig2), tag(12, kIdl1)},
                           2);
  const auto map = sim::ChannelMap::mirror(2);
  const auto pw = wave::correlate_all_pairings(s, map, 50.0, 250.0);
  REQUIRE(pw.channels == 2);
  CHECK(pw.at(1, 2).counts == std::vector<std::int64_t>{0, 1, 0, 0, 0});
  CHECK(pw.at(1, 1).counts == std::vector<std::int64_t>{0, 0, 0, 1, 0});
  CHECK(pw.at(2, 1).counts == std::vector<std::int64_t>{0, 0, 1, 0, 0});
  CHECK(pw.at(2, 2).counts == std::vector<std::int64_t>{0, 0, 0, 0, 0});
  CHECK_THROWS_AS((void)pw.at(0, 1), std::out_of_range);
  CHECK_THROWS_AS((void)pw.at(1, 3), std::out_of_range);

  const auto ec = wave::combine_channels(pw, CombineMode::EnergyConserving);
  CHECK(ec.counts == std::vector<std::int64_t>{0, 1, 1, 0, 0});
  const auto all = wave::combine_channels(pw, CombineMode::All);
  CHECK(all.counts == std::vector<std::int64_t>{0, 1, 1, 1, 0});

  CHECK_THROWS_AS((void)wave::correlate_all_pairings(
                      s, sim::ChannelMap::mirror(3), 50.0, 250.0),
                  std::invalid_argument);
}

TEST_CASE("combine sums the selected pairings") {
  wave::PairingWaveforms pw;
  pw.channels = 2;
  pw.map = sim::ChannelMap::mirror(2);
  pw.by_pairing = {waveform_of({1}), waveform_of({2}), waveform_of({4}),
                   waveform_of({8})};
  CHECK(wave::combine_channels(pw, CombineMode::EnergyConserving).counts ==
        std::vector<std::int64_t>{2 + 4});
  CHECK(wave::combine_channels(pw, CombineMode::All).counts ==
        std::vector<std::int64_t>{15});
}

TEST_CASE("peak detection reports the bin-center delay and range") {
  auto wf = waveform_of(std::vector<std::int64_t>(80, 0));
  wf.counts[26] = 41;
  wf.counts[40] = 7;
  const auto est = wave::detect_peak(wf);
  REQUIRE(est.has_value());
  CHECK(est->peak_bin == 26);
  CHECK(est->delay_ps == 19875.0);  // (26 + 0.5) * 750
  CHECK(est->distance_m == doctest::Approx(2.979187551375).epsilon(1e-12));
  CHECK(est->resolution_m ==
        doctest::Approx(0.11242217175).epsilon(1e-12));  // c * 750 ps / 2

  // Ties resolve to the smallest bin index.
  const auto tie = wave::detect_peak(waveform_of({0, 5, 5}));
  REQUIRE(tie.has_value());
  CHECK(tie->peak_bin == 1);

  CHECK_THROWS_AS((void)wave::detect_peak(waveform_of({})),
                  std::invalid_argument);
}

TEST_CASE("global peak bin uses the binwise sum") {
  const wave::Waveform wfs[] = {waveform_of({0, 2, 0}), waveform_of({0, 1, 3})};
  CHECK(wave::global_peak_bin(wfs) == 1);
  const wave::Waveform mismatched[] = {waveform_of({0, 2, 0}),
                                       waveform_of({1})};
  CHECK_THROWS_AS((void)wave::global_peak_bin(mismatched),
                  std::invalid_argument);
}

TEST_CASE("sample histogram uses integer-aligned bins") {
  const std::int64_t small[] = {0, 0, 1, 2, 2, 2};
  const auto h = wave::Histogram::of_samples(small);
  CHECK(h.centers == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(h.counts == std::vector<double>{2.0, 1.0, 3.0});

  // 100 samples spanning 0..99: sqrt rule gives ~10 bins of width 10.
  std::vector<std::int64_t> wide(100);
  for (int i = 0; i < 100; ++i) wide[static_cast<std::size_t>(i)] = i;
  const auto hw = wave::Histogram::of_samples(wide);
  REQUIRE(hw.centers.size() == 10);
  for (double c : hw.counts) CHECK(c == 10.0);
  CHECK(hw.centers.front() == 4.5);

  CHECK_THROWS_AS((void)wave::Histogram::of_samples({}),
                  std::invalid_argument);
}

TEST_CASE("gaussian fit recovers an exact gaussian") {
  wave::Histogram h;
  for (int x = -10; x <= 10; ++x) {
    h.centers.push_back(static_cast<double>(x));
    const double z = (x - 1.3) / 2.1;
    h.counts.push_back(100.0 * std::exp(-0.5 * z * z));
  }
  const auto fit = wave::gaussian_fit(h);
  CHECK(fit.converged);
  CHECK(!fit.fallback);
  CHECK(fit.amplitude == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(fit.mean == doctest::Approx(1.3).epsilon(1e-6));
  CHECK(fit.sigma == doctest::Approx(2.1).epsilon(1e-6));
  // Exact data: residuals vanish, so the reported uncertainties collapse.
  CHECK(fit.mean_uncertainty < 1e-6);
  CHECK(fit.sigma_uncertainty < 1e-6);
}

TEST_CASE("gaussian fit falls back to moments on degenerate input") {
  // Two occupied bins cannot constrain three parameters.
  wave::Histogram two;
  two.centers = {0.0, 1.0, 2.0};
  two.counts = {5.0, 0.0, 3.0};
  const auto fit = wave::gaussian_fit(two);
  CHECK(fit.fallback);
  CHECK(!fit.converged);
  CHECK(fit.mean == doctest::Approx(0.75));  // (5*0 + 3*2) / 8

  // A single-bin histogram has zero variance.
  const std::int64_t flat[] = {7, 7, 7, 7};
  const auto fit2 = wave::gaussian_fit(wave::Histogram::of_samples(flat));
  CHECK(fit2.fallback);
  CHECK(fit2.mean == 7.0);
  CHECK(fit2.sigma == 0.0);

  wave::Histogram bad;
  bad.centers = {0.0};
  CHECK_THROWS_AS((void)wave::gaussian_fit(bad), std::invalid_argument);
}

TEST_CASE("peak statistics separate peak heights from the guarded floor") {
  std::vector<wave::Waveform> wfs;
  for (int k = 0; k < 3; ++k) {
    auto wf = waveform_of({5, 6, 50, 100 + k, 50, 5, 6, 7});
    wfs.push_back(wf);
  }
  const auto st = wave::peak_statistics(wfs, 3, 1);
  CHECK(st.peak_bin == 3);
  CHECK(st.guard_bins == 1);
  CHECK(st.peak_heights == std::vector<std::int64_t>{100, 101, 102});
  REQUIRE(st.noise_samples.size() == 15);  // bins {0,1,5,6,7} x 3 waveforms
  for (const auto v : st.noise_samples) CHECK(v < 10);  // guard 50s excluded

  CHECK_THROWS_AS(
      (void)wave::peak_statistics(std::span(wfs.data(), 1), 3, 1),
      std::invalid_argument);
  CHECK_THROWS_AS((void)wave::peak_statistics(wfs, 99, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)wave::peak_statistics(wfs, 3, -1),
                  std::invalid_argument);
  // Guard band covering every bin leaves no floor sample.
  std::vector<wave::Waveform> tiny = {waveform_of({1, 2, 3}),
                                      waveform_of({1, 2, 3})};
  CHECK_THROWS_AS((void)wave::peak_statistics(tiny, 1, 2),
                  std::invalid_argument);
}

TEST_CASE("empirical snr conventions") {
  wave::PeakStats st;
  st.peak_fit.mean = 10.0;
  st.peak_fit.sigma = 2.0;
  st.floor_fit.mean = 4.0;
  st.floor_fit.sigma = 1.5;
  CHECK(wave::empirical_snr(st, wave::SigmaConvention::Peak).value ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK(wave::empirical_snr(st, wave::SigmaConvention::Combined).value ==
        doctest::Approx(2.4).epsilon(1e-12));
  CHECK(wave::empirical_snr(st).uncertainty == 0.0);

  st.peak_fit.sigma = 0.0;
  CHECK_THROWS_AS((void)wave::empirical_snr(st, wave::SigmaConvention::Peak),
                  std::domain_error);
}

TEST_CASE("analytic floor and snr for both combine modes") {
  snr::SystemParams p;
  p.pair_rate = 5e5;
  p.dark_rate = 500.0;
  p.background_density = 1e5;
  p.bandwidth_nm = 200.0;
  p.gain = 1e-3;
  p.bin_width_s = 0.5e-9;
  p.integration_time_s = 1.0;
  p.channels = 625;

  // Energy-conserving pairing reproduces the closed-form model bin budget:
  // N_c + n N_p + N_i / n with N_c = 5.125125, N_p = 1.25e-4, N_i = 5000.
  CHECK(wave::expected_floor_per_bin(p, CombineMode::EnergyConserving) ==
        doctest::Approx(13.20325).epsilon(1e-12));
  // Summing all n^2 pairings scales the families to n N_c + n^2 N_p + N_i.
  CHECK(wave::expected_floor_per_bin(p, CombineMode::All) ==
        doctest::Approx(8252.03125).epsilon(1e-12));

  CHECK(wave::expected_snr(p, CombineMode::EnergyConserving) ==
        doctest::Approx(snr::snr(p)).epsilon(1e-15));
  CHECK(wave::expected_snr(p, CombineMode::All) ==
        doctest::Approx(500.0 / std::sqrt(500.0 + 8252.03125))
            .epsilon(1e-12));
}

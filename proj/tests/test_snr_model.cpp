#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "twinrange/snr_model.hpp"

using namespace twinrange;

namespace {

// Bench reference point: bright source, strong broadband background, heavy
// probe-arm loss, no unpaired singles.
snr::SystemParams bench_params() {
  snr::SystemParams p;
  p.pair_rate = 5e5;
  p.dark_rate = 500.0;
  p.background_density = 1e5;
  p.bandwidth_nm = 200.0;
  p.gain = 1e-3;
  p.bin_width_s = 0.5e-9;
  p.integration_time_s = 1.0;
  p.channels = 1;
  return p;
}

}  // namespace

TEST_CASE("noise terms at the bench reference point") {
  const auto nb = snr::noise_breakdown(bench_params());
  // Frozen by hand: products rate_signal * rate_idler * dt * T.
  CHECK(nb.signal == doctest::Approx(500.0).epsilon(1e-12));
  CHECK(nb.per_term.at("N_dc") == doctest::Approx(1.25e-4).epsilon(1e-12));
  CHECK(nb.per_term.at("N_dB") == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(nb.per_term.at("N_cd") == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(nb.per_term.at("N_dd") == doctest::Approx(1.25e-4).epsilon(1e-12));
  CHECK(nb.per_term.at("N_cB") == doctest::Approx(5000.0).epsilon(1e-12));
  // No unpaired singles and no signal-arm background: these vanish.
  for (const char* zero : {"N_ds", "N_sd", "N_cs", "N_sc", "N_ss", "N_sB",
                           "N_Bd", "N_BB", "N_Bs", "N_Bc"})
    CHECK(nb.per_term.at(zero) == 0.0);
  CHECK(nb.constant_sum == doctest::Approx(5.125125).epsilon(1e-12));
  CHECK(nb.proportional == doctest::Approx(1.25e-4).epsilon(1e-12));
  CHECK(nb.inverse_sum == doctest::Approx(5000.0).epsilon(1e-12));
}

TEST_CASE("optimal channel count and the SNR there") {
  const auto p = bench_params();
  const double n_opt = snr::optimal_channels(p);
  CHECK(n_opt == doctest::Approx(6324.555320336759).epsilon(1e-12));
  CHECK(snr::snr_at(p, n_opt) ==
        doctest::Approx(22.212214965121905).epsilon(1e-12));

  // The optimum beats its neighborhood.
  for (double n : {n_opt - 1.0, n_opt + 1.0, 0.9 * n_opt, 1.1 * n_opt})
    CHECK(snr::snr_at(p, n_opt) > snr::snr_at(p, n));

  // Brute-force integer scan lands within 1 of round(n_opt).
  int best_n = 1;
  double best = 0.0;
  for (int n = 1; n <= 20000; ++n) {
    const double v = snr::snr_at(p, n);
    if (v > best) {
      best = v;
      best_n = n;
    }
  }
  CHECK(std::abs(best_n - std::lround(n_opt)) <= 1);
}

TEST_CASE("SNR matches the closed form at a second operating point") {
  auto p = bench_params();
  p.gain = 1e-1;
  // Frozen: 5e4 / sqrt(5e4 + 5.1375 + 2 sqrt(0.625)).
  CHECK(snr::snr_at(p, snr::optimal_channels(p)) ==
        doctest::Approx(223.59177593071433).epsilon(1e-12));
}

TEST_CASE("symmetry of the channel tradeoff around the optimum") {
  const auto p = bench_params();
  const double n_opt = snr::optimal_channels(p);
  // n N_p + N_i / n is invariant under n -> n_opt^2 / n, so SNR is too.
  for (double n : {10.0, 100.0, 2000.0})
    CHECK(snr::snr_at(p, n) ==
          doctest::Approx(snr::snr_at(p, n_opt * n_opt / n)).epsilon(1e-12));
}

TEST_CASE("unpaired singles bookkeeping") {
  CHECK(snr::unpaired_rate_for_efficiency(5e4, 0.9) ==
        doctest::Approx(50000.0 / 9.0).epsilon(1e-12));
  CHECK(snr::unpaired_rate_for_efficiency(5e4, 1.0) == 0.0);

  auto p = bench_params();
  p.unpaired_rate = snr::unpaired_rate_for_efficiency(p.pair_rate, 0.75);
  CHECK(p.heralding_efficiency() == doctest::Approx(0.75).epsilon(1e-12));

  // Singles enter both arms: check one representative cross term.
  // N_sc = c_s * (Q c_p) * dt * T with c_s = 5e5 / 3.
  const auto nb = snr::noise_breakdown(p);
  CHECK(nb.per_term.at("N_sc") ==
        doctest::Approx((5e5 / 3.0) * 500.0 * 0.5e-9).epsilon(1e-12));
  CHECK(nb.per_term.at("N_ss") > 0.0);
}

TEST_CASE("degenerate inputs") {
  snr::SystemParams p;  // all rates zero
  p.bin_width_s = 1e-9;
  CHECK(snr::snr(p) == 0.0);

  auto q = bench_params();
  q.dark_rate = 0.0;
  CHECK_THROWS_AS((void)snr::optimal_channels(q), snr::UnboundedOptimum);
}

TEST_CASE("validation names the offending field") {
  auto p = bench_params();
  p.pair_rate = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(),
                       doctest::Contains("pair_rate"), std::invalid_argument);
  p = bench_params();
  p.gain = 1.5;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("gain"),
                       std::invalid_argument);
  p = bench_params();
  p.channels = 0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("channels"),
                       std::invalid_argument);
  p = bench_params();
  p.bin_width_s = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("sweep evaluates the model along one axis") {
  const auto p = bench_params();
  const std::vector<double> grid{1e-4, 1e-3, 1e-2};
  const auto pts = snr::snr_sweep(p, snr::SweepAxis::Gain, grid);
  REQUIRE(pts.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(pts[k].value == grid[k]);
    auto q = p;
    q.gain = grid[k];
    CHECK(pts[k].snr == doctest::Approx(snr::snr(q)).epsilon(1e-12));
    const auto nb = snr::noise_breakdown(q);
    CHECK(pts[k].S == doctest::Approx(nb.signal).epsilon(1e-12));
    CHECK(pts[k].N_p ==
          doctest::Approx(q.channels * nb.proportional).epsilon(1e-12));
    CHECK(pts[k].N_i ==
          doctest::Approx(nb.inverse_sum / q.channels).epsilon(1e-12));
  }
  // SNR grows with gain.
  CHECK(pts[0].snr < pts[1].snr);
  CHECK(pts[1].snr < pts[2].snr);
}

TEST_CASE("sweep rejects bad grids") {
  const auto p = bench_params();
  CHECK_THROWS_AS((void)snr::snr_sweep(p, snr::SweepAxis::Gain, {}),
                  std::invalid_argument);
  const std::vector<double> unsorted{1e-2, 1e-3};
  CHECK_THROWS_AS((void)snr::snr_sweep(p, snr::SweepAxis::Gain, unsorted),
                  std::invalid_argument);
  const std::vector<double> below_one{0.5, 2.0};
  CHECK_THROWS_AS((void)snr::snr_sweep(p, snr::SweepAxis::Channels, below_one),
                  std::invalid_argument);
}

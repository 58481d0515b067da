// twinrange CLI: batch front door over the library. Four subcommands
// (model, simulate, jsa, covertness), each driven by one TOML-style config;
// every output file carries the config hash and seed, and a fixed seed
// reproduces every artifact byte for byte.

#include <Eigen/Core>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "twinrange/config.hpp"
#include "twinrange/covertness.hpp"
#include "twinrange/csvio.hpp"
#include "twinrange/jsa.hpp"
#include "twinrange/montecarlo.hpp"
#include "twinrange/pgm.hpp"
#include "twinrange/rng.hpp"
#include "twinrange/snr_model.hpp"
#include "twinrange/waveform.hpp"

namespace fs = std::filesystem;
using namespace twinrange;

namespace {

struct RunContext {
  io::Config config;
  fs::path config_path;
  fs::path out_dir;
  std::uint64_t seed = 1;
  bool quiet = false;

  io::CsvStamp stamp() const {
    return io::CsvStamp{config.content_hash(), seed, true};
  }
  std::ostream& log() const {
    static std::ofstream null_sink;
    return quiet ? static_cast<std::ostream&>(null_sink) : std::cout;
  }
};

void write_table(const RunContext& ctx, const std::string& name,
                 const io::CsvTable& table) {
  const fs::path path = ctx.out_dir / name;
  io::write_csv_file(path.string(), table, ctx.stamp());
  ctx.log() << "wrote " << path.string() << '\n';
}

std::string stamp_text(const RunContext& ctx) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "config_hash=0x%016llx seed=%llu",
                static_cast<unsigned long long>(ctx.config.content_hash()),
                static_cast<unsigned long long>(ctx.seed));
  return buf;
}

// ---- shared config readers ----

snr::SystemParams system_params_from(const io::Config& cfg,
                                     const std::string& sec,
                                     double bin_width_ps) {
  snr::SystemParams p;
  p.pair_rate = cfg.get_double(sec, "pair_rate_hz");
  const bool has_rate = cfg.has(sec, "unpaired_rate_hz");
  const bool has_eff = cfg.has(sec, "heralding_efficiency");
  if (has_rate && has_eff)
    throw io::ConfigError(sec + ": give unpaired_rate_hz or "
                          "heralding_efficiency, not both");
  if (has_rate) {
    p.unpaired_rate = cfg.get_double(sec, "unpaired_rate_hz");
  } else if (has_eff) {
    p.unpaired_rate = snr::unpaired_rate_for_efficiency(
        p.pair_rate, cfg.get_double(sec, "heralding_efficiency"));
  }
  p.dark_rate = cfg.get_double_or(sec, "dark_rate_hz", 0.0);
  p.background_density =
      cfg.get_double_or(sec, "background_density_hz_per_nm", 0.0);
  p.bandwidth_nm = cfg.get_double_or(sec, "bandwidth_nm", 0.0);
  p.gain = cfg.get_double(sec, "gain");
  p.bin_width_s = bin_width_ps * 1e-12;
  p.integration_time_s = cfg.get_double_or(sec, "integration_time_s", 1.0);
  p.channels = static_cast<int>(cfg.get_int_or(sec, "channels", 1));
  p.validate();
  return p;
}

std::vector<double> sweep_grid_from(const io::Config& cfg) {
  const bool has_grid = cfg.has("sweep", "grid");
  const bool has_span = cfg.has("sweep", "min") || cfg.has("sweep", "max") ||
                        cfg.has("sweep", "points");
  if (has_grid && has_span)
    throw io::ConfigError("sweep: give either grid or min/max/points");
  if (has_grid) return cfg.get_double_array("sweep", "grid");
  const double lo = cfg.get_double("sweep", "min");
  const double hi = cfg.get_double("sweep", "max");
  const auto points = cfg.get_int("sweep", "points");
  if (points < 2) throw io::ConfigError("sweep.points: need at least 2");
  const std::string spacing = cfg.get_string_or("sweep", "spacing", "log");
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (spacing == "log") {
    if (!(lo > 0.0 && hi > lo))
      throw io::ConfigError("sweep: log spacing needs 0 < min < max");
    const double ratio = std::log(hi / lo);
    for (std::size_t k = 0; k < grid.size(); ++k)
      grid[k] = lo * std::exp(ratio * static_cast<double>(k) /
                              static_cast<double>(points - 1));
  } else if (spacing == "linear") {
    if (!(hi > lo)) throw io::ConfigError("sweep: need min < max");
    for (std::size_t k = 0; k < grid.size(); ++k)
      grid[k] = lo + (hi - lo) * static_cast<double>(k) /
                         static_cast<double>(points - 1);
  } else {
    throw io::ConfigError("sweep.spacing: expected \"log\" or \"linear\"");
  }
  grid.back() = hi;  // close the interval exactly despite rounding
  return grid;
}

io::CsvTable sweep_table(snr::SweepAxis axis,
                         const std::vector<snr::SweepPoint>& points) {
  io::CsvTable t;
  std::vector<double> value, snr_col, S, N_c, N_p, N_i;
  for (const auto& pt : points) {
    value.push_back(pt.value);
    snr_col.push_back(pt.snr);
    S.push_back(pt.S);
    N_c.push_back(pt.N_c);
    N_p.push_back(pt.N_p);
    N_i.push_back(pt.N_i);
  }
  t.set_labels("axis", std::vector<std::string>(
                           points.size(), snr::sweep_axis_name(axis)));
  t.add_column("value", std::move(value));
  t.add_column("snr", std::move(snr_col));
  t.add_column("S", std::move(S));
  t.add_column("N_c", std::move(N_c));
  t.add_column("N_p", std::move(N_p));
  t.add_column("N_i", std::move(N_i));
  return t;
}

// ---- model ----

void set_axis_value(snr::SystemParams& p, snr::SweepAxis axis, double v) {
  switch (axis) {
    case snr::SweepAxis::Gain: p.gain = v; break;
    case snr::SweepAxis::Background: p.background_density = v; break;
    case snr::SweepAxis::Channels: p.channels = static_cast<int>(v); break;
  }
}

// SNR along the grid with the channel count re-optimized at every point.
std::vector<snr::SweepPoint> optimal_sweep(snr::SystemParams p,
                                           snr::SweepAxis axis,
                                           const std::vector<double>& grid) {
  std::vector<snr::SweepPoint> out;
  out.reserve(grid.size());
  for (double v : grid) {
    set_axis_value(p, axis, v);
    p.validate();
    const double n = snr::optimal_channels(p);
    const auto nb = snr::noise_breakdown(p);
    snr::SweepPoint pt;
    pt.value = v;
    pt.snr = snr::snr_at(p, n);
    pt.S = nb.signal;
    pt.N_c = nb.constant_sum;
    pt.N_p = n * nb.proportional;
    pt.N_i = nb.inverse_sum / n;
    out.push_back(pt);
  }
  return out;
}

int run_model(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const double bin_ps = cfg.get_double("system", "bin_width_ps");
  snr::SystemParams base = system_params_from(cfg, "system", bin_ps);

  const std::string axis_name = cfg.get_string("sweep", "axis");
  snr::SweepAxis axis;
  if (axis_name == "gain") axis = snr::SweepAxis::Gain;
  else if (axis_name == "background") axis = snr::SweepAxis::Background;
  else if (axis_name == "channels") axis = snr::SweepAxis::Channels;
  else throw io::ConfigError("sweep.axis: expected gain|background|channels");

  const std::vector<double> grid = sweep_grid_from(cfg);

  if (axis == snr::SweepAxis::Channels) {
    if (cfg.has("sweep", "channels"))
      throw io::ConfigError("sweep.channels: not used when axis = channels");
    write_table(ctx, "model_sweep_channels.csv",
                sweep_table(axis, snr::snr_sweep(base, axis, grid)));
  } else {
    std::vector<double> curves = cfg.get_double_array_or(
        "sweep", "channels", {static_cast<double>(base.channels)});
    for (double n : curves) {
      if (!(n >= 1.0) || n != std::floor(n))
        throw io::ConfigError("sweep.channels: entries must be integers >= 1");
      snr::SystemParams p = base;
      p.channels = static_cast<int>(n);
      char name[64];
      std::snprintf(name, sizeof(name), "model_sweep_%s_n%d.csv", axis_name.c_str(),
                    p.channels);
      write_table(ctx, name, sweep_table(axis, snr::snr_sweep(p, axis, grid)));
    }
    if (cfg.get_bool_or("sweep", "include_optimal", false)) {
      char name[64];
      std::snprintf(name, sizeof(name), "model_sweep_%s_nopt.csv",
                    axis_name.c_str());
      write_table(ctx, name, sweep_table(axis, optimal_sweep(base, axis, grid)));
    }
  }

  // Summary at the configured base parameters.
  const auto nb = snr::noise_breakdown(base);
  double n_opt = std::numeric_limits<double>::infinity();
  double snr_opt = base.pair_rate > 0.0
                       ? nb.signal / std::sqrt(nb.signal + nb.constant_sum)
                       : 0.0;  // n -> inf limit when darks vanish
  try {
    n_opt = snr::optimal_channels(base);
    snr_opt = snr::snr_at(base, n_opt);
  } catch (const snr::UnboundedOptimum&) {
  }
  io::CsvTable summary;
  summary.add_column("n_opt", {n_opt});
  summary.add_column("snr_opt", {snr_opt});
  summary.add_column("snr_at_configured", {snr::snr(base)});
  summary.add_column("S", {nb.signal});
  summary.add_column("N_constant", {nb.constant_sum});
  summary.add_column("N_proportional_coeff", {nb.proportional});
  summary.add_column("N_inverse_coeff", {nb.inverse_sum});
  write_table(ctx, "model_summary.csv", summary);

  io::CsvTable terms;
  std::vector<std::string> term_names;
  std::vector<double> term_counts;
  for (const auto& [name, count] : nb.per_term) {
    term_names.push_back(name);
    term_counts.push_back(count);
  }
  terms.set_labels("term", std::move(term_names));
  terms.add_column("count", std::move(term_counts));
  write_table(ctx, "model_noise_terms.csv", terms);

  ctx.log() << "n_opt " << io::format_double(n_opt) << ", snr(n_opt) "
            << io::format_double(snr_opt) << '\n';
  return 0;
}

// ---- covertness ----

std::vector<double> photon_grid(const io::Config& cfg, const std::string& sec) {
  const double lo = cfg.get_double_or(sec, "photon_min", 1.0);
  const double hi = cfg.get_double(sec, "photon_max");
  const auto points = cfg.get_int_or(sec, "points", 200);
  if (!(lo > 0.0 && hi > lo))
    throw io::ConfigError(sec + ": need 0 < photon_min < photon_max");
  if (points < 2) throw io::ConfigError(sec + ".points: need at least 2");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double ratio = std::log(hi / lo);
  for (std::size_t k = 0; k < grid.size(); ++k)
    grid[k] = lo * std::exp(ratio * static_cast<double>(k) /
                            static_cast<double>(points - 1));
  grid.back() = hi;
  return grid;
}

io::CsvTable bounds_table(double overlap, const std::vector<double>& photons) {
  std::vector<double> lower, upper;
  for (double n : photons) {
    const auto b = covert::error_prob_bounds(overlap, n);
    lower.push_back(b.lower);
    upper.push_back(b.upper);
  }
  io::CsvTable t;
  t.add_column("N", photons);
  t.add_column("lower", std::move(lower));
  t.add_column("upper", std::move(upper));
  return t;
}

int run_covertness(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const bool has_bounds = cfg.has("bounds", "overlaps") ||
                          cfg.has("bounds", "photon_max");
  const bool has_dist = cfg.has("distribution", "mean_photon_number");
  if (!has_bounds && !has_dist)
    throw io::ConfigError("config needs a [bounds] or [distribution] section");

  if (has_bounds) {
    const auto overlaps = cfg.get_double_array("bounds", "overlaps");
    if (overlaps.empty()) throw io::ConfigError("bounds.overlaps: empty");
    const auto photons = photon_grid(cfg, "bounds");
    for (double overlap : overlaps) {
      char name[64];
      std::snprintf(name, sizeof(name), "bounds_overlap_%s.csv",
                    io::format_double(overlap).c_str());
      write_table(ctx, name, bounds_table(overlap, photons));
    }
  }

  if (has_dist) {
    const double mean = cfg.get_double("distribution", "mean_photon_number");
    if (!(mean >= 0.0))
      throw io::ConfigError("distribution.mean_photon_number: must be >= 0");
    int n_max = static_cast<int>(cfg.get_int_or("distribution", "n_max", -1));
    if (n_max < 0) {
      n_max = covert::TMSVState::truncation_for_tail(
          std::asinh(std::sqrt(mean)));
      n_max = std::max(n_max, 10);
    }
    std::vector<double> n_col, p_th, p_po;
    for (int n = 0; n <= n_max; ++n) {
      n_col.push_back(n);
      p_th.push_back(covert::thermal_pn(mean, n));
      p_po.push_back(covert::poisson_pn(mean, n));
    }
    io::CsvTable dist;
    dist.add_column("n", std::move(n_col));
    dist.add_column("p_thermal", std::move(p_th));
    dist.add_column("p_poisson", std::move(p_po));
    write_table(ctx, "distribution.csv", dist);

    const auto tv = covert::poisson_vs_thermal_distance(mean, n_max);
    io::CsvTable summary;
    summary.add_column("mean", {mean});
    summary.add_column("n_max", {static_cast<double>(n_max)});
    summary.add_column("tv_distance", {tv.distance});
    summary.add_column("tv_tail_bound", {tv.tail_bound});
    write_table(ctx, "covertness_summary.csv", summary);
    ctx.log() << "thermal-vs-poisson distance " << io::format_double(tv.distance)
              << " (+tail <= " << io::format_double(tv.tail_bound) << ")\n";
  }
  return 0;
}

// ---- jsa ----

crystal::PolingStructure poling_from(const io::Config& cfg) {
  const std::string kind = cfg.get_string("crystal", "poling");
  const double length_mm = cfg.get_double("crystal", "length_mm");
  if (kind == "chirped") {
    return crystal::chirped_poling(cfg.get_double("crystal", "period_start_um"),
                                   cfg.get_double("crystal", "period_end_um"),
                                   length_mm);
  }
  if (kind == "uniform") {
    return crystal::uniform_poling(cfg.get_double("crystal", "period_um"),
                                   length_mm);
  }
  throw io::ConfigError("crystal.poling: expected \"chirped\" or \"uniform\"");
}

crystal::GridSpec grid_from(const io::Config& cfg) {
  crystal::GridSpec g;
  const int points = static_cast<int>(cfg.get_int_or("grid", "points", 129));
  g.signal_min_nm = cfg.get_double("grid", "signal_min_nm");
  g.signal_max_nm = cfg.get_double("grid", "signal_max_nm");
  g.signal_points = static_cast<int>(
      cfg.get_int_or("grid", "signal_points", points));
  g.idler_min_nm = cfg.get_double_or("grid", "idler_min_nm", g.signal_min_nm);
  g.idler_max_nm = cfg.get_double_or("grid", "idler_max_nm", g.signal_max_nm);
  g.idler_points = static_cast<int>(
      cfg.get_int_or("grid", "idler_points", points));
  g.validate();
  return g;
}

io::CsvTable density_table(const covert::SpectralDensity& d) {
  io::CsvTable t;
  t.add_column("wavelength_nm", d.wavelength_nm);
  t.add_column("density", d.density);
  return t;
}

int run_jsa(const RunContext& ctx) {
  const auto& cfg = ctx.config;

  crystal::PumpSpectrum pump;
  pump.center_nm = cfg.get_double("pump", "center_nm");
  pump.bandwidth_nm = cfg.get_double_or("pump", "bandwidth_nm", 0.0);
  pump.cw_epsilon_nm = cfg.get_double_or("pump", "cw_epsilon_nm", 0.0);
  pump.validate();

  fs::path disp_path = cfg.get_string("crystal", "dispersion_file");
  if (disp_path.is_relative())
    disp_path = ctx.config_path.parent_path() / disp_path;
  const auto dispersion = crystal::DispersionModel::load_file(disp_path.string());

  const auto poling = poling_from(cfg);
  const auto grid = grid_from(cfg);

  const auto jsa = crystal::compute_jsa(pump, poling, dispersion, grid);
  const auto schmidt =
      crystal::schmidt(jsa, cfg.get_double_or("schmidt", "weight_floor", 0.0));
  const auto [marginal_s, marginal_i] = crystal::marginal_spectra(jsa);

  // |f|^2 on the grid, long form.
  const Eigen::Index rows = jsa.amplitude.rows(), cols = jsa.amplitude.cols();
  std::vector<double> ls, li, intensity;
  ls.reserve(static_cast<std::size_t>(rows * cols));
  li.reserve(ls.capacity());
  intensity.reserve(ls.capacity());
  Eigen::MatrixXd jsi = jsa.amplitude.cwiseAbs2();
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      ls.push_back(jsa.signal_nm(r));
      li.push_back(jsa.idler_nm(c));
      intensity.push_back(jsi(r, c));
    }
  io::CsvTable grid_table;
  grid_table.add_column("lambda_signal_nm", std::move(ls));
  grid_table.add_column("lambda_idler_nm", std::move(li));
  grid_table.add_column("intensity", std::move(intensity));
  write_table(ctx, "jsi.csv", grid_table);

  const fs::path pgm_path = ctx.out_dir / "jsi.pgm";
  io::write_pgm16_file(pgm_path.string(), jsi, stamp_text(ctx));
  ctx.log() << "wrote " << pgm_path.string() << '\n';

  io::CsvTable schmidt_table;
  std::vector<double> k_col, r_col;
  for (Eigen::Index k = 0; k < schmidt.weights.size(); ++k) {
    k_col.push_back(static_cast<double>(k));
    r_col.push_back(schmidt.weights(k));
  }
  schmidt_table.add_column("k", std::move(k_col));
  schmidt_table.add_column("r_k", std::move(r_col));
  write_table(ctx, "schmidt.csv", schmidt_table);

  write_table(ctx, "marginal_signal.csv", density_table(marginal_s));
  write_table(ctx, "marginal_idler.csv", density_table(marginal_i));

  const auto lambda = schmidt.mode_weights();
  const double g2 = covert::g2_from_schmidt(
      std::span<const double>(schmidt.weights.data(),
                              static_cast<std::size_t>(schmidt.weights.size())));

  double overlap = std::numeric_limits<double>::quiet_NaN();
  if (cfg.has("covertness", "background_center_nm")) {
    const double bg_center = cfg.get_double("covertness", "background_center_nm");
    const double bg_sigma = cfg.get_double("covertness", "background_sigma_nm");
    const std::string arm = cfg.get_string_or("covertness", "arm", "idler");
    if (arm != "idler" && arm != "signal")
      throw io::ConfigError("covertness.arm: expected \"idler\" or \"signal\"");
    const auto& probe = arm == "idler" ? marginal_i : marginal_s;
    const auto background = covert::SpectralDensity::gaussian(
        bg_center, bg_sigma, probe.wavelength_nm.front(),
        probe.wavelength_nm.back(),
        static_cast<int>(probe.wavelength_nm.size()));
    overlap = covert::spectral_overlap(probe, background);
    write_table(ctx, "overlap_bounds.csv",
                bounds_table(overlap, photon_grid(cfg, "covertness")));
  }

  io::CsvTable summary;
  summary.add_column("schmidt_number", {schmidt.schmidt_number()});
  summary.add_column("g2", {g2});
  summary.add_column("mode_count", {static_cast<double>(lambda.size())});
  summary.add_column("total_intensity", {jsa.total_intensity()});
  summary.add_column("pump_sigma_nm", {crystal::pump_sigma_nm(pump, grid)});
  summary.add_column("background_overlap", {overlap});
  write_table(ctx, "jsa_summary.csv", summary);

  ctx.log() << "schmidt number " << io::format_double(schmidt.schmidt_number())
            << ", g2(0) " << io::format_double(g2) << '\n';
  return 0;
}

// ---- simulate ----

io::CsvTable waveform_table(const wave::Waveform& w) {
  std::vector<double> bin, delay, counts;
  for (int b = 0; b < w.bins(); ++b) {
    bin.push_back(b);
    delay.push_back((b + 0.5) * w.bin_width_ps);
    counts.push_back(static_cast<double>(w.counts[static_cast<std::size_t>(b)]));
  }
  io::CsvTable t;
  t.add_column("bin_index", std::move(bin));
  t.add_column("delay_ps", std::move(delay));
  t.add_column("counts", std::move(counts));
  return t;
}

struct ModeReport {
  std::string name;
  int peak_bin = 0;
  wave::PeakStats stats;
  wave::SnrEstimate snr;
  double floor_predicted = 0.0;
  double snr_predicted = 0.0;
};

int run_simulate(const RunContext& ctx) {
  const auto& cfg = ctx.config;

  const double bin_width_ps = cfg.get_double("analysis", "bin_width_ps");
  const double window_ps = cfg.get_double("analysis", "window_ps");
  const auto reps = cfg.get_int_or("analysis", "repetitions", 1);
  if (reps < 1) throw io::ConfigError("analysis.repetitions: must be >= 1");
  const int guard = static_cast<int>(cfg.get_int_or("analysis", "guard_bins", 2));
  const std::string conv_name =
      cfg.get_string_or("analysis", "convention", "peak");
  wave::SigmaConvention convention;
  if (conv_name == "peak") convention = wave::SigmaConvention::Peak;
  else if (conv_name == "combined") convention = wave::SigmaConvention::Combined;
  else throw io::ConfigError("analysis.convention: expected peak|combined");

  sim::ScenarioConfig scenario;
  scenario.params = system_params_from(cfg, "scenario", bin_width_ps);
  const double duration_s = cfg.get_double("scenario", "duration_s");
  scenario.params.integration_time_s = duration_s;
  scenario.target_distance_m = cfg.get_double("scenario", "target_distance_m");
  scenario.time_resolution_ps =
      cfg.get_double_or("scenario", "time_resolution_ps", 50.0);
  scenario.signal_background_rate =
      cfg.get_double_or("scenario", "signal_background_rate_hz", 0.0);
  const std::string map_name =
      cfg.get_string_or("scenario", "channel_map", "mirror");
  if (map_name == "mirror")
    scenario.channel_map = sim::ChannelMap::mirror(scenario.params.channels);
  else if (map_name == "identity")
    scenario.channel_map = sim::ChannelMap::identity(scenario.params.channels);
  else throw io::ConfigError("scenario.channel_map: expected mirror|identity");
  scenario.config_hash = cfg.content_hash();
  scenario.validate();

  sim::DetectorConfig detectors;
  detectors.jitter_sigma_ps = sim::jitter_sigma_from_fwhm(
      cfg.get_double_or("detector", "jitter_fwhm_ps", 0.0));
  detectors.dead_time_ps = cfg.get_double_or("detector", "dead_time_ps", 0.0);
  detectors.dark_rate = scenario.params.dark_rate;
  detectors.validate();

  std::vector<wave::Waveform> ec_waveforms, all_waveforms;
  std::optional<sim::EventStream> first_stream;
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    scenario.seed = rng::derive_seed(ctx.seed, static_cast<std::uint64_t>(rep));
    auto stream = sim::simulate(scenario, detectors, duration_s);
    const auto pairings = wave::correlate_all_pairings(
        stream, scenario.channel_map, bin_width_ps, window_ps);
    ec_waveforms.push_back(
        wave::combine_channels(pairings, wave::CombineMode::EnergyConserving));
    all_waveforms.push_back(
        wave::combine_channels(pairings, wave::CombineMode::All));
    if (rep == 0 && cfg.get_bool_or("output", "write_tags", false))
      first_stream = std::move(stream);
  }

  write_table(ctx, "waveform_ec.csv", waveform_table(ec_waveforms.front()));
  write_table(ctx, "waveform_all.csv", waveform_table(all_waveforms.front()));

  if (first_stream) {
    const fs::path bin_path = ctx.out_dir / "tags.bin";
    std::ofstream bin_out(bin_path, std::ios::binary);
    if (!bin_out)
      throw std::runtime_error("cannot open '" + bin_path.string() + "'");
    sim::write_binary(*first_stream, bin_out);
    ctx.log() << "wrote " << bin_path.string() << '\n';
    const fs::path csv_path = ctx.out_dir / "tags.csv";
    std::ofstream csv_out(csv_path, std::ios::binary);
    if (!csv_out)
      throw std::runtime_error("cannot open '" + csv_path.string() + "'");
    sim::write_csv(*first_stream, csv_out);
    ctx.log() << "wrote " << csv_path.string() << '\n';
  }

  // Range estimate from the summed energy-conserving waveform.
  wave::Waveform summed = ec_waveforms.front();
  for (std::size_t i = 1; i < ec_waveforms.size(); ++i)
    for (std::size_t b = 0; b < summed.counts.size(); ++b)
      summed.counts[b] += ec_waveforms[i].counts[b];
  io::CsvTable range_table;
  std::vector<double> pk, dl, dist, res;
  if (const auto est = wave::detect_peak(summed)) {
    pk.push_back(est->peak_bin);
    dl.push_back(est->delay_ps);
    dist.push_back(est->distance_m);
    res.push_back(est->resolution_m);
  }
  range_table.add_column("peak_bin", std::move(pk));
  range_table.add_column("delay_ps", std::move(dl));
  range_table.add_column("distance_m", std::move(dist));
  range_table.add_column("resolution_m", std::move(res));
  write_table(ctx, "range.csv", range_table);

  if (reps < 2) {
    ctx.log() << "repetitions < 2: waveform statistics suppressed\n";
    return 0;
  }

  std::vector<ModeReport> reports(2);
  reports[0].name = "ec";
  reports[1].name = "all";
  for (int m = 0; m < 2; ++m) {
    const auto mode = m == 0 ? wave::CombineMode::EnergyConserving
                             : wave::CombineMode::All;
    const auto& wfs = m == 0 ? ec_waveforms : all_waveforms;
    auto& r = reports[static_cast<std::size_t>(m)];
    r.peak_bin = wave::global_peak_bin(wfs);
    r.stats = wave::peak_statistics(wfs, r.peak_bin, guard);
    r.snr = wave::empirical_snr(r.stats, convention);
    r.floor_predicted = wave::expected_floor_per_bin(scenario.params, mode);
    r.snr_predicted = wave::expected_snr(scenario.params, mode);
  }

  io::CsvTable stats;
  std::vector<std::string> mode_names;
  std::vector<double> rep_col, bin_col, delay_col, dist_col, amp, pc, ps, pcu,
      psu, pconv, pfall, fc, fs_, fcu, fsu, fconv, ffall, fpred, snr_col,
      snru_col, snrp_col;
  for (const auto& r : reports) {
    mode_names.push_back(r.name);
    rep_col.push_back(static_cast<double>(reps));
    bin_col.push_back(r.peak_bin);
    const double delay = (r.peak_bin + 0.5) * bin_width_ps;
    delay_col.push_back(delay);
    dist_col.push_back(sim::kSpeedOfLight * delay * 1e-12 / 2.0);
    amp.push_back(r.stats.peak_fit.amplitude);
    pc.push_back(r.stats.peak_fit.mean);
    ps.push_back(r.stats.peak_fit.sigma);
    pcu.push_back(r.stats.peak_fit.mean_uncertainty);
    psu.push_back(r.stats.peak_fit.sigma_uncertainty);
    pconv.push_back(r.stats.peak_fit.converged ? 1.0 : 0.0);
    pfall.push_back(r.stats.peak_fit.fallback ? 1.0 : 0.0);
    fc.push_back(r.stats.floor_fit.mean);
    fs_.push_back(r.stats.floor_fit.sigma);
    fcu.push_back(r.stats.floor_fit.mean_uncertainty);
    fsu.push_back(r.stats.floor_fit.sigma_uncertainty);
    fconv.push_back(r.stats.floor_fit.converged ? 1.0 : 0.0);
    ffall.push_back(r.stats.floor_fit.fallback ? 1.0 : 0.0);
    fpred.push_back(r.floor_predicted);
    snr_col.push_back(r.snr.value);
    snru_col.push_back(r.snr.uncertainty);
    snrp_col.push_back(r.snr_predicted);
  }
  stats.set_labels("mode", std::move(mode_names));
  stats.add_column("repetitions", std::move(rep_col));
  stats.add_column("peak_bin", std::move(bin_col));
  stats.add_column("delay_ps", std::move(delay_col));
  stats.add_column("distance_m", std::move(dist_col));
  stats.add_column("peak_amplitude", std::move(amp));
  stats.add_column("peak_center", std::move(pc));
  stats.add_column("peak_sigma", std::move(ps));
  stats.add_column("peak_center_unc", std::move(pcu));
  stats.add_column("peak_sigma_unc", std::move(psu));
  stats.add_column("peak_fit_converged", std::move(pconv));
  stats.add_column("peak_fit_fallback", std::move(pfall));
  stats.add_column("floor_center", std::move(fc));
  stats.add_column("floor_sigma", std::move(fs_));
  stats.add_column("floor_center_unc", std::move(fcu));
  stats.add_column("floor_sigma_unc", std::move(fsu));
  stats.add_column("floor_fit_converged", std::move(fconv));
  stats.add_column("floor_fit_fallback", std::move(ffall));
  stats.add_column("floor_predicted_per_bin", std::move(fpred));
  stats.add_column("snr", std::move(snr_col));
  stats.add_column("snr_unc", std::move(snru_col));
  stats.add_column("snr_predicted", std::move(snrp_col));
  write_table(ctx, "stats.csv", stats);

  for (const auto& r : reports)
    ctx.log() << r.name << ": snr " << io::format_double(r.snr.value) << " +- "
              << io::format_double(r.snr.uncertainty) << " (predicted "
              << io::format_double(r.snr_predicted) << ")\n";
  return 0;
}

// ---- dispatch ----

int fail(const char* category, const std::string& message, int code) {
  std::cerr << "twinrange: error category=" << category << ": " << message
            << '\n';
  return code;
}

int dispatch(const std::string& name, const std::string& config_path,
             const std::string& out_dir, std::uint64_t seed, bool quiet) {
  try {
    RunContext ctx{io::Config::parse_file(config_path), fs::path(config_path),
                   fs::path(out_dir), seed, quiet};
    fs::create_directories(ctx.out_dir);
    if (name == "model") return run_model(ctx);
    if (name == "simulate") return run_simulate(ctx);
    if (name == "jsa") return run_jsa(ctx);
    return run_covertness(ctx);
  } catch (const io::ConfigError& e) {
    return fail("config", e.what(), 65);
  } catch (const snr::UnboundedOptimum& e) {
    return fail("domain", e.what(), 65);
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what(), 65);
  } catch (const std::domain_error& e) {
    return fail("domain", e.what(), 65);
  } catch (const std::out_of_range& e) {
    return fail("domain", e.what(), 65);
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what(), 74);
  } catch (const std::runtime_error& e) {
    return fail("io", e.what(), 74);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 70);
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("TWINRANGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(threads, &end, 10);
    if (end == threads || *end != '\0' || v < 1)
      return fail("usage", "TWINRANGE_THREADS must be a positive integer", 64);
    Eigen::setNbThreads(static_cast<int>(v));
  }

  CLI::App app{"photon-pair rangefinding workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 1;
  bool quiet = false;
  app.add_option("--config", config_path, "run configuration (TOML)")
      ->required();
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--seed", seed, "master seed stamped into all outputs");
  app.add_flag("--quiet", quiet, "suppress progress output");

  const std::pair<const char*, const char*> commands[] = {
      {"model", "evaluate the coincidence SNR model over a parameter sweep"},
      {"simulate", "run the time-tag Monte Carlo and waveform analysis"},
      {"jsa", "compute the joint spectral amplitude, Schmidt modes and marginals"},
      {"covertness", "tabulate photon statistics and detectability bounds"}};
  for (const auto& [name, text] : commands)
    app.add_subcommand(name, text)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fail("usage", "invalid command line", 64);
  }

  return dispatch(app.get_subcommands().front()->get_name(), config_path,
                  out_dir, seed, quiet);
}

// pybind11 surface: the model, photon statistics, crystal response and the
// Monte Carlo / waveform pipeline, with Eigen matrices and tag arrays mapped
// to numpy. Mirrors the C++ API; all defaults match the C++ side.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twinrange/covertness.hpp"
#include "twinrange/jsa.hpp"
#include "twinrange/montecarlo.hpp"
#include "twinrange/snr_model.hpp"
#include "twinrange/waveform.hpp"

namespace py = pybind11;
using namespace twinrange;

namespace {

covert::SpectralDensity density_from(std::vector<double> wl,
                                     std::vector<double> d) {
  covert::SpectralDensity s;
  s.wavelength_nm = std::move(wl);
  s.density = std::move(d);
  s.validate();
  return s;
}

py::array_t<std::int64_t> waveform_counts(const wave::Waveform& w) {
  py::array_t<std::int64_t> out(static_cast<py::ssize_t>(w.counts.size()));
  auto view = out.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < out.size(); ++i)
    view(i) = w.counts[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "photon-pair rangefinding workbench (C++ core)";
#ifdef TWINRANGE_VERSION
  m.attr("__version__") = TWINRANGE_VERSION;
#endif

  // ---- snr model ----
  py::class_<snr::SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("pair_rate", &snr::SystemParams::pair_rate)
      .def_readwrite("unpaired_rate", &snr::SystemParams::unpaired_rate)
      .def_readwrite("dark_rate", &snr::SystemParams::dark_rate)
      .def_readwrite("background_density", &snr::SystemParams::background_density)
      .def_readwrite("bandwidth_nm", &snr::SystemParams::bandwidth_nm)
      .def_readwrite("gain", &snr::SystemParams::gain)
      .def_readwrite("bin_width_s", &snr::SystemParams::bin_width_s)
      .def_readwrite("integration_time_s", &snr::SystemParams::integration_time_s)
      .def_readwrite("channels", &snr::SystemParams::channels)
      .def("validate", &snr::SystemParams::validate)
      .def("heralding_efficiency", &snr::SystemParams::heralding_efficiency);
  m.def("unpaired_rate_for_efficiency", &snr::unpaired_rate_for_efficiency,
        py::arg("pair_rate"), py::arg("efficiency"));
  m.def("signal_count", &snr::signal_count);
  m.def("snr", &snr::snr);
  m.def("snr_at", &snr::snr_at, py::arg("params"), py::arg("channels"));
  m.def("optimal_channels", &snr::optimal_channels);
  m.def("noise_terms", [](const snr::SystemParams& p) {
    const auto nb = snr::noise_breakdown(p);
    py::dict d;
    d["signal"] = nb.signal;
    d["constant"] = nb.constant_sum;
    d["proportional"] = nb.proportional;
    d["inverse"] = nb.inverse_sum;
    py::dict terms;
    for (const auto& [k, v] : nb.per_term) terms[k.c_str()] = v;
    d["per_term"] = terms;
    return d;
  });

  // ---- covertness ----
  m.def("thermal_pn", &covert::thermal_pn, py::arg("mean"), py::arg("n"));
  m.def("poisson_pn", &covert::poisson_pn, py::arg("mean"), py::arg("n"));
  m.def("thermal_tail", &covert::thermal_tail);
  m.def("g2_from_schmidt", [](std::vector<double> w) {
    return covert::g2_from_schmidt(w);
  });
  m.def(
      "error_prob_bounds",
      [](double overlap, double photons) {
        const auto b = covert::error_prob_bounds(overlap, photons);
        return py::make_tuple(b.lower, b.upper);
      },
      py::arg("overlap"), py::arg("photon_count"));
  m.def(
      "spectral_overlap",
      [](std::vector<double> wl_f, std::vector<double> d_f,
         std::vector<double> wl_g, std::vector<double> d_g) {
        return covert::spectral_overlap(
            density_from(std::move(wl_f), std::move(d_f)),
            density_from(std::move(wl_g), std::move(d_g)));
      },
      py::arg("wavelength_f"), py::arg("density_f"), py::arg("wavelength_g"),
      py::arg("density_g"));
  m.def("poisson_vs_thermal_distance", [](double mean, int n_max) {
    const auto tv = covert::poisson_vs_thermal_distance(mean, n_max);
    return py::make_tuple(tv.distance, tv.tail_bound);
  });

  // ---- crystal ----
  py::class_<crystal::PumpSpectrum>(m, "PumpSpectrum")
      .def(py::init<>())
      .def_readwrite("center_nm", &crystal::PumpSpectrum::center_nm)
      .def_readwrite("bandwidth_nm", &crystal::PumpSpectrum::bandwidth_nm)
      .def_readwrite("cw_epsilon_nm", &crystal::PumpSpectrum::cw_epsilon_nm)
      .def("cw", &crystal::PumpSpectrum::cw);
  py::class_<crystal::GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_static("square", &crystal::GridSpec::square, py::arg("min_nm"),
                  py::arg("max_nm"), py::arg("points"))
      .def_readwrite("signal_min_nm", &crystal::GridSpec::signal_min_nm)
      .def_readwrite("signal_max_nm", &crystal::GridSpec::signal_max_nm)
      .def_readwrite("signal_points", &crystal::GridSpec::signal_points)
      .def_readwrite("idler_min_nm", &crystal::GridSpec::idler_min_nm)
      .def_readwrite("idler_max_nm", &crystal::GridSpec::idler_max_nm)
      .def_readwrite("idler_points", &crystal::GridSpec::idler_points);
  py::class_<crystal::PolingStructure>(m, "PolingStructure")
      .def_readonly("boundaries_um", &crystal::PolingStructure::boundaries_um)
      .def_readonly("signs", &crystal::PolingStructure::signs)
      .def("length_um", &crystal::PolingStructure::length_um)
      .def("domain_count", &crystal::PolingStructure::domain_count);
  m.def("chirped_poling", &crystal::chirped_poling, py::arg("period_start_um"),
        py::arg("period_end_um"), py::arg("length_mm"));
  m.def("uniform_poling", &crystal::uniform_poling, py::arg("period_um"),
        py::arg("length_mm"));
  m.def("phase_matching_amplitude", &crystal::phase_matching_amplitude,
        py::arg("poling"), py::arg("dk_inv_um"));
  py::class_<crystal::DispersionModel>(m, "DispersionModel")
      .def_static("vacuum", &crystal::DispersionModel::vacuum)
      .def_static("constant", &crystal::DispersionModel::constant,
                  py::arg("n_pump"), py::arg("n_signal"), py::arg("n_idler"))
      .def_static("load_file", &crystal::DispersionModel::load_file)
      .def_readonly("name", &crystal::DispersionModel::name)
      .def("index", [](const crystal::DispersionModel& mdl, int wave,
                       double l_um) {
        return mdl.index(static_cast<crystal::Wave>(wave), l_um);
      });
  m.def("phase_mismatch", &crystal::phase_mismatch, py::arg("model"),
        py::arg("pump_nm"), py::arg("signal_nm"), py::arg("idler_nm"));
  m.def("energy_matched_idler_nm", &crystal::energy_matched_idler_nm);
  py::class_<crystal::JSAGrid>(m, "JSAGrid")
      .def_readonly("signal_nm", &crystal::JSAGrid::signal_nm)
      .def_readonly("idler_nm", &crystal::JSAGrid::idler_nm)
      .def_readonly("amplitude", &crystal::JSAGrid::amplitude)
      .def("total_intensity", &crystal::JSAGrid::total_intensity);
  m.def("compute_jsa", &crystal::compute_jsa, py::arg("pump"),
        py::arg("poling"), py::arg("dispersion"), py::arg("grid"));
  py::class_<crystal::SchmidtDecomposition>(m, "SchmidtDecomposition")
      .def_readonly("weights", &crystal::SchmidtDecomposition::weights)
      .def("schmidt_number", &crystal::SchmidtDecomposition::schmidt_number)
      .def("mode_weights", &crystal::SchmidtDecomposition::mode_weights);
  m.def("schmidt", &crystal::schmidt, py::arg("jsa"),
        py::arg("weight_floor") = 0.0);
  m.def("marginal_spectra", [](const crystal::JSAGrid& jsa) {
    const auto [s, i] = crystal::marginal_spectra(jsa);
    return py::make_tuple(
        py::make_tuple(s.wavelength_nm, s.density),
        py::make_tuple(i.wavelength_nm, i.density));
  });

  // ---- monte carlo + waveforms ----
  py::class_<sim::ChannelMap>(m, "ChannelMap")
      .def_static("mirror", &sim::ChannelMap::mirror)
      .def_static("identity", &sim::ChannelMap::identity)
      .def("channels", &sim::ChannelMap::channels)
      .def("__call__", &sim::ChannelMap::operator());
  py::class_<sim::ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("params", &sim::ScenarioConfig::params)
      .def_readwrite("target_distance_m", &sim::ScenarioConfig::target_distance_m)
      .def_readwrite("time_resolution_ps", &sim::ScenarioConfig::time_resolution_ps)
      .def_readwrite("signal_background_rate",
                     &sim::ScenarioConfig::signal_background_rate)
      .def_readwrite("channel_map", &sim::ScenarioConfig::channel_map)
      .def_readwrite("seed", &sim::ScenarioConfig::seed)
      .def_readwrite("config_hash", &sim::ScenarioConfig::config_hash);
  py::class_<sim::DetectorConfig>(m, "DetectorConfig")
      .def(py::init<>())
      .def_readwrite("jitter_sigma_ps", &sim::DetectorConfig::jitter_sigma_ps)
      .def_readwrite("dead_time_ps", &sim::DetectorConfig::dead_time_ps)
      .def_readwrite("dark_rate", &sim::DetectorConfig::dark_rate);
  m.def("jitter_sigma_from_fwhm", &sim::jitter_sigma_from_fwhm);
  py::class_<sim::EventStream>(m, "EventStream")
      .def_readonly("time_resolution_ps", &sim::EventStream::time_resolution_ps)
      .def_readonly("duration_s", &sim::EventStream::duration_s)
      .def_readonly("channels", &sim::EventStream::channels)
      .def_readonly("seed", &sim::EventStream::seed)
      .def("__len__",
           [](const sim::EventStream& s) { return s.tags.size(); })
      .def("ticks",
           [](const sim::EventStream& s) {
             py::array_t<std::int64_t> out(
                 static_cast<py::ssize_t>(s.tags.size()));
             auto v = out.mutable_unchecked<1>();
             for (py::ssize_t i = 0; i < out.size(); ++i)
               v(i) = s.tags[static_cast<std::size_t>(i)].ticks;
             return out;
           })
      .def("detectors",
           [](const sim::EventStream& s) {
             py::array_t<std::uint8_t> out(
                 static_cast<py::ssize_t>(s.tags.size()));
             auto v = out.mutable_unchecked<1>();
             for (py::ssize_t i = 0; i < out.size(); ++i)
               v(i) = s.tags[static_cast<std::size_t>(i)].detector;
             return out;
           })
      .def("origins", [](const sim::EventStream& s) {
        py::array_t<std::uint8_t> out(static_cast<py::ssize_t>(s.tags.size()));
        auto v = out.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < out.size(); ++i)
          v(i) = s.tags[static_cast<std::size_t>(i)].origin;
        return out;
      });
  m.def("simulate", &sim::simulate, py::arg("scenario"), py::arg("detectors"),
        py::arg("duration_s"));

  py::enum_<wave::CombineMode>(m, "CombineMode")
      .value("All", wave::CombineMode::All)
      .value("EnergyConserving", wave::CombineMode::EnergyConserving);
  m.def(
      "ranging_waveform",
      [](const sim::EventStream& stream, const sim::ChannelMap& map,
         double bin_width_ps, double window_ps, wave::CombineMode mode) {
        const auto pairings =
            wave::correlate_all_pairings(stream, map, bin_width_ps, window_ps);
        return waveform_counts(wave::combine_channels(pairings, mode));
      },
      py::arg("stream"), py::arg("map"), py::arg("bin_width_ps"),
      py::arg("window_ps"), py::arg("mode") = wave::CombineMode::EnergyConserving);
  m.def(
      "detect_peak",
      [](const sim::EventStream& stream, const sim::ChannelMap& map,
         double bin_width_ps, double window_ps) -> py::object {
        const auto pairings =
            wave::correlate_all_pairings(stream, map, bin_width_ps, window_ps);
        const auto w = wave::combine_channels(
            pairings, wave::CombineMode::EnergyConserving);
        const auto est = wave::detect_peak(w);
        if (!est) return py::none();
        py::dict d;
        d["peak_bin"] = est->peak_bin;
        d["delay_ps"] = est->delay_ps;
        d["distance_m"] = est->distance_m;
        d["resolution_m"] = est->resolution_m;
        return d;
      },
      py::arg("stream"), py::arg("map"), py::arg("bin_width_ps"),
      py::arg("window_ps"));
  m.def("expected_snr", &wave::expected_snr, py::arg("params"), py::arg("mode"));
}

#include "twinrange/dispersion.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "twinrange/config.hpp"

namespace twinrange::crystal {

namespace {

std::size_t expected_coeff_count(DispersionModel::Form f) {
  switch (f) {
    case DispersionModel::Form::Constant: return 1;
    case DispersionModel::Form::Linear: return 2;
    case DispersionModel::Form::Sellmeier2: return 5;
  }
  return 0;
}

double eval_axis(const DispersionModel::Axis& a, double l_um) {
  switch (a.form) {
    case DispersionModel::Form::Constant:
      return a.coeff[0];
    case DispersionModel::Form::Linear:
      return a.coeff[0] + a.coeff[1] * l_um;
    case DispersionModel::Form::Sellmeier2: {
      const double l2 = l_um * l_um;
      const double n2 = a.coeff[0] + a.coeff[1] / (l2 - a.coeff[2]) +
                        a.coeff[3] / (l2 - a.coeff[4]);
      if (!(n2 > 0.0))
        throw std::out_of_range("dispersion: n^2 <= 0 at this wavelength");
      return std::sqrt(n2);
    }
  }
  throw std::logic_error("dispersion: unknown form");
}

DispersionModel::Form form_from_string(const std::string& s) {
  if (s == "constant") return DispersionModel::Form::Constant;
  if (s == "linear") return DispersionModel::Form::Linear;
  if (s == "sellmeier2") return DispersionModel::Form::Sellmeier2;
  throw std::invalid_argument("dispersion: unknown form '" + s + "'");
}

}  // namespace

void DispersionModel::validate() const {
  for (const Axis* a : {&pump, &signal, &idler})
    if (a->coeff.size() != expected_coeff_count(a->form))
      throw std::invalid_argument(
          "DispersionModel: wrong coefficient count for form");
  if (!(valid_max_um > valid_min_um))
    throw std::invalid_argument("DispersionModel: empty validity window");
}

double DispersionModel::index(Wave wave, double wavelength_um) const {
  if (!(wavelength_um >= valid_min_um && wavelength_um <= valid_max_um)) {
    std::ostringstream os;
    os << "dispersion '" << name << "': " << wavelength_um
       << " um outside validity window [" << valid_min_um << ", "
       << valid_max_um << "] um";
    throw std::out_of_range(os.str());
  }
  switch (wave) {
    case Wave::Pump: return eval_axis(pump, wavelength_um);
    case Wave::Signal: return eval_axis(signal, wavelength_um);
    case Wave::Idler: return eval_axis(idler, wavelength_um);
  }
  throw std::logic_error("dispersion: unknown wave");
}

DispersionModel DispersionModel::vacuum() {
  DispersionModel m;
  m.name = "vacuum";
  return m;
}

DispersionModel DispersionModel::constant(double n_pump, double n_signal,
                                          double n_idler) {
  DispersionModel m;
  m.name = "constant";
  m.pump.coeff = {n_pump};
  m.signal.coeff = {n_signal};
  m.idler.coeff = {n_idler};
  return m;
}

DispersionModel DispersionModel::load_file(const std::string& path) {
  const io::Config cfg = io::Config::parse_file(path);
  DispersionModel m;
  m.name = cfg.get_string_or("dispersion", "name", path);
  m.temperature_c = cfg.get_double_or("dispersion", "temperature_c", 20.0);
  m.valid_min_um = cfg.get_double_or("dispersion", "valid_min_um", 0.0);
  m.valid_max_um = cfg.get_double_or("dispersion", "valid_max_um", 1e9);
  for (auto [axis, section] : {std::pair{&m.pump, "pump"},
                               std::pair{&m.signal, "signal"},
                               std::pair{&m.idler, "idler"}}) {
    axis->form = form_from_string(cfg.get_string(section, "form"));
    axis->coeff = cfg.get_double_array(section, "coefficients");
  }
  m.validate();
  return m;
}

double phase_mismatch(const DispersionModel& model, double pump_nm,
                      double signal_nm, double idler_nm) {
  if (!(pump_nm > 0.0 && signal_nm > 0.0 && idler_nm > 0.0))
    throw std::invalid_argument("phase_mismatch: wavelengths must be > 0");
  const double lp = pump_nm * 1e-3;  // um
  const double ls = signal_nm * 1e-3;
  const double li = idler_nm * 1e-3;
  const double np = model.index(Wave::Pump, lp);
  const double ns = model.index(Wave::Signal, ls);
  const double ni = model.index(Wave::Idler, li);
  return 2.0 * std::numbers::pi * (np / lp - ns / ls - ni / li);
}

double energy_matched_idler_nm(double pump_nm, double signal_nm) {
  if (!(signal_nm > pump_nm))
    throw std::invalid_argument(
        "energy_matched_idler_nm: signal must be redder than the pump");
  return 1.0 / (1.0 / pump_nm - 1.0 / signal_nm);
}

}  // namespace twinrange::crystal

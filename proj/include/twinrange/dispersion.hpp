#pragma once
// Refractive index models for the three interacting waves.
//
// Real crystal data is loaded from a config file shipped with the repo (see
// data/), never hard-coded; synthetic forms (constant, linear) exist so that
// exact tests don't depend on any particular material.

#include <string>
#include <vector>

namespace twinrange::crystal {

enum class Wave { Pump, Signal, Idler };

struct DispersionModel {
  enum class Form { Constant, Linear, Sellmeier2 };

  struct Axis {
    Form form = Form::Constant;
    // Constant:   {n}
    // Linear:     {a, b}            n = a + b * lambda_um
    // Sellmeier2: {A, B, C, D, E}   n^2 = A + B/(l^2 - C) + D/(l^2 - E)
    std::vector<double> coeff{1.0};
  };

  std::string name = "vacuum";
  double temperature_c = 20.0;  // recorded operating point, no thermo-optic model
  double valid_min_um = 0.0;
  double valid_max_um = 1e9;
  Axis pump, signal, idler;

  void validate() const;
  // Refractive index; throws std::out_of_range outside the validity window.
  double index(Wave wave, double wavelength_um) const;

  static DispersionModel vacuum();
  static DispersionModel constant(double n_pump, double n_signal, double n_idler);
  // Reads the [dispersion]/[pump]/[signal]/[idler] sections of a config file.
  static DispersionModel load_file(const std::string& path);
};

// dk = 2 pi (n_p/l_p - n_s/l_s - n_i/l_i), wavelengths given in nm,
// result in rad/um.
double phase_mismatch(const DispersionModel& model, double pump_nm,
                      double signal_nm, double idler_nm);

// Idler wavelength on the energy-conservation curve: 1/l_i = 1/l_p - 1/l_s.
double energy_matched_idler_nm(double pump_nm, double signal_nm);

}  // namespace twinrange::crystal

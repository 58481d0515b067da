#pragma once
// Joint spectral amplitude of the pair source and its Schmidt structure.
//
//   f(l_s, l_i) = alpha(l_s, l_i) * Phi(dk(l_s, l_i))
//
// alpha is the pump envelope evaluated at the effective pump wavelength
// 1/(1/l_s + 1/l_i); a CW pump collapses it to a narrow Gaussian ridge along
// the energy-conservation curve. The Schmidt decomposition is the SVD of the
// quadrature-weighted amplitude matrix; K = (sum r^2)^2 / sum r^4 counts the
// effective modes and sets g2(0) = 1 + 1/K of either arm alone.

#include <Eigen/Core>
#include <utility>

#include "twinrange/covertness.hpp"
#include "twinrange/dispersion.hpp"
#include "twinrange/poling.hpp"

namespace twinrange::crystal {

struct PumpSpectrum {
  double center_nm = 0.0;
  double bandwidth_nm = 0.0;   // Gaussian sigma of the amplitude; <= 0 means CW
  double cw_epsilon_nm = 0.0;  // CW ridge sigma; <= 0 picks grid span / 1000

  bool cw() const { return !(bandwidth_nm > 0.0); }
  void validate() const;
};

struct GridSpec {
  double signal_min_nm = 0.0, signal_max_nm = 0.0;
  int signal_points = 0;
  double idler_min_nm = 0.0, idler_max_nm = 0.0;
  int idler_points = 0;

  void validate() const;
  static GridSpec square(double min_nm, double max_nm, int points);
};

struct JSAGrid {
  Eigen::VectorXd signal_nm;   // rows of amplitude
  Eigen::VectorXd idler_nm;    // cols of amplitude
  Eigen::MatrixXcd amplitude;

  Eigen::VectorXd signal_weights() const;  // trapezoid weights
  Eigen::VectorXd idler_weights() const;
  double total_intensity() const;  // quadrature of |f|^2
};

JSAGrid compute_jsa(const PumpSpectrum& pump, const PolingStructure& poling,
                    const DispersionModel& dispersion, const GridSpec& grid);

// The pump-envelope sigma actually used (cw epsilon resolution included).
double pump_sigma_nm(const PumpSpectrum& pump, const GridSpec& grid);

struct SchmidtDecomposition {
  Eigen::VectorXd weights;        // r_k, descending
  Eigen::MatrixXcd signal_modes;  // column k: psi_k sampled on signal_nm
  Eigen::MatrixXcd idler_modes;   // column k: phi_k sampled on idler_nm
  Eigen::VectorXd signal_quadrature, idler_quadrature;

  double schmidt_number() const;       // K
  Eigen::VectorXd mode_weights() const;  // lambda_k = r_k^2 / sum r^2
  Eigen::MatrixXcd reconstruct() const;  // sum_k r_k psi_k phi_k
};

// weight_floor drops modes with lambda_k below the floor (0 keeps all).
SchmidtDecomposition schmidt(const JSAGrid& jsa, double weight_floor = 0.0);

// Normalized |f|^2 marginals (signal, idler).
std::pair<covert::SpectralDensity, covert::SpectralDensity> marginal_spectra(
    const JSAGrid& jsa);

}  // namespace twinrange::crystal

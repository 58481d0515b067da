#include "twinrange/jsa.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twinrange::crystal {

void PumpSpectrum::validate() const {
  if (!(center_nm > 0.0))
    throw std::invalid_argument("PumpSpectrum: center_nm must be > 0");
}

void GridSpec::validate() const {
  if (!(signal_max_nm > signal_min_nm && signal_min_nm > 0.0))
    throw std::invalid_argument("GridSpec: bad signal window");
  if (!(idler_max_nm > idler_min_nm && idler_min_nm > 0.0))
    throw std::invalid_argument("GridSpec: bad idler window");
  if (signal_points < 2 || idler_points < 2)
    throw std::invalid_argument("GridSpec: need >= 2 points per axis");
}

GridSpec GridSpec::square(double min_nm, double max_nm, int points) {
  return GridSpec{min_nm, max_nm, points, min_nm, max_nm, points};
}

namespace {

Eigen::VectorXd linspace(double lo, double hi, int n) {
  Eigen::VectorXd v(n);
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) v[i] = lo + h * i;
  return v;
}

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

}  // namespace

Eigen::VectorXd JSAGrid::signal_weights() const {
  return trapezoid_weights(signal_nm);
}

Eigen::VectorXd JSAGrid::idler_weights() const {
  return trapezoid_weights(idler_nm);
}

double JSAGrid::total_intensity() const {
  const Eigen::VectorXd ws = signal_weights();
  const Eigen::VectorXd wi = idler_weights();
  const Eigen::MatrixXd cell = ws * wi.transpose();
  return amplitude.cwiseAbs2().cwiseProduct(cell).sum();
}

double pump_sigma_nm(const PumpSpectrum& pump, const GridSpec& grid) {
  if (!pump.cw()) return pump.bandwidth_nm;
  if (pump.cw_epsilon_nm > 0.0) return pump.cw_epsilon_nm;
  return (grid.signal_max_nm - grid.signal_min_nm) / 1000.0;
}

JSAGrid compute_jsa(const PumpSpectrum& pump, const PolingStructure& poling,
                    const DispersionModel& dispersion, const GridSpec& grid) {
  pump.validate();
  poling.validate();
  dispersion.validate();
  grid.validate();

  JSAGrid out;
  out.signal_nm = linspace(grid.signal_min_nm, grid.signal_max_nm,
                           grid.signal_points);
  out.idler_nm = linspace(grid.idler_min_nm, grid.idler_max_nm,
                          grid.idler_points);
  out.amplitude.resize(grid.signal_points, grid.idler_points);

  const double sigma = pump_sigma_nm(pump, grid);

  // Index and 2 pi n / lambda depend on one axis each; precompute per axis.
  Eigen::VectorXd ks(grid.signal_points), ki(grid.idler_points);
  for (int i = 0; i < grid.signal_points; ++i) {
    const double l_um = out.signal_nm[i] * 1e-3;
    ks[i] = dispersion.index(Wave::Signal, l_um) / l_um;
  }
  for (int j = 0; j < grid.idler_points; ++j) {
    const double l_um = out.idler_nm[j] * 1e-3;
    ki[j] = dispersion.index(Wave::Idler, l_um) / l_um;
  }
  const double lp_um = pump.center_nm * 1e-3;
  const double kp = dispersion.index(Wave::Pump, lp_um) / lp_um;
  const double two_pi = 2.0 * std::numbers::pi;

  for (int i = 0; i < grid.signal_points; ++i) {
    for (int j = 0; j < grid.idler_points; ++j) {
      // Pump envelope at the effective pump wavelength of this (l_s, l_i).
      const double lp_eff =
          1.0 / (1.0 / out.signal_nm[i] + 1.0 / out.idler_nm[j]);
      const double z = (lp_eff - pump.center_nm) / sigma;
      const double alpha = std::exp(-0.5 * z * z);
      if (alpha < 1e-300) {
        out.amplitude(i, j) = 0.0;
        continue;
      }
      const double dk = two_pi * (kp - ks[i] - ki[j]);
      out.amplitude(i, j) = alpha * phase_matching_amplitude(poling, dk);
    }
  }
  return out;
}

double SchmidtDecomposition::schmidt_number() const {
  const double s2 = weights.squaredNorm();
  const double s4 = weights.array().pow(4).sum();
  if (!(s4 > 0.0))
    throw std::domain_error("schmidt_number: all weights are zero");
  return s2 * s2 / s4;
}

Eigen::VectorXd SchmidtDecomposition::mode_weights() const {
  const double s2 = weights.squaredNorm();
  return weights.array().square() / s2;
}

Eigen::MatrixXcd SchmidtDecomposition::reconstruct() const {
  return signal_modes * weights.asDiagonal() * idler_modes.transpose();
}

SchmidtDecomposition schmidt(const JSAGrid& jsa, double weight_floor) {
  if (jsa.amplitude.size() == 0)
    throw std::invalid_argument("schmidt: empty amplitude grid");
  if (!(jsa.amplitude.cwiseAbs().maxCoeff() > 0.0))
    throw std::invalid_argument("schmidt: amplitude is identically zero");

  const Eigen::VectorXd ws = jsa.signal_weights();
  const Eigen::VectorXd wi = jsa.idler_weights();
  const Eigen::VectorXcd rs = ws.cwiseSqrt().cast<std::complex<double>>();
  const Eigen::VectorXcd ri = wi.cwiseSqrt().cast<std::complex<double>>();

  const Eigen::MatrixXcd m =
      rs.asDiagonal() * jsa.amplitude * ri.asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m,
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);

  const Eigen::VectorXd& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  Eigen::Index keep = sv.size();
  if (weight_floor > 0.0 && total > 0.0) {
    keep = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv[k] * sv[k] / total >= weight_floor) ++keep;
    if (keep == 0) keep = 1;
  }

  SchmidtDecomposition d;
  d.weights = sv.head(keep);
  d.signal_quadrature = ws;
  d.idler_quadrature = wi;
  // Undo the quadrature scaling so modes are function samples, orthonormal
  // under sum_i w_i psi_a(i) conj(psi_b(i)) = delta_ab.
  d.signal_modes =
      rs.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(keep);
  d.idler_modes = ri.cwiseInverse().asDiagonal() *
                  svd.matrixV().leftCols(keep).conjugate();
  return d;
}

std::pair<covert::SpectralDensity, covert::SpectralDensity> marginal_spectra(
    const JSAGrid& jsa) {
  if (jsa.amplitude.size() == 0)
    throw std::invalid_argument("marginal_spectra: empty grid");
  const Eigen::VectorXd ws = jsa.signal_weights();
  const Eigen::VectorXd wi = jsa.idler_weights();
  const Eigen::MatrixXd inten = jsa.amplitude.cwiseAbs2();
  Eigen::VectorXd rho_s = inten * wi;        // integrate over idler
  Eigen::VectorXd rho_i = inten.transpose() * ws;  // integrate over signal

  const double ns = rho_s.dot(ws);
  const double ni = rho_i.dot(wi);
  if (!(ns > 0.0) || !(ni > 0.0))
    throw std::domain_error("marginal_spectra: amplitude has zero intensity");
  rho_s /= ns;
  rho_i /= ni;

  covert::SpectralDensity s, i;
  s.wavelength_nm.assign(jsa.signal_nm.data(),
                         jsa.signal_nm.data() + jsa.signal_nm.size());
  s.density.assign(rho_s.data(), rho_s.data() + rho_s.size());
  i.wavelength_nm.assign(jsa.idler_nm.data(),
                         jsa.idler_nm.data() + jsa.idler_nm.size());
  i.density.assign(rho_i.data(), rho_i.data() + rho_i.size());
  return {std::move(s), std::move(i)};
}

}  // namespace twinrange::crystal

#include "twinrange/poling.hpp"

#include <cmath>
#include <stdexcept>

namespace twinrange::crystal {

void PolingStructure::validate() const {
  if (boundaries_um.size() != signs.size() + 1)
    throw std::invalid_argument(
        "PolingStructure: need one more boundary than domains");
  if (boundaries_um.empty() || boundaries_um.front() != 0.0)
    throw std::invalid_argument("PolingStructure: boundaries must start at 0");
  for (std::size_t i = 1; i < boundaries_um.size(); ++i)
    if (!(boundaries_um[i] > boundaries_um[i - 1]))
      throw std::invalid_argument(
          "PolingStructure: boundaries must be strictly increasing");
  for (int s : signs)
    if (s != 1 && s != -1)
      throw std::invalid_argument("PolingStructure: signs must be +1 or -1");
}

PolingStructure chirped_poling(double period_start_um, double period_end_um,
                               double length_mm) {
  if (!(period_start_um > 0.0) || !(period_end_um > 0.0))
    throw std::invalid_argument("chirped_poling: periods must be > 0");
  if (!(length_mm > 0.0))
    throw std::invalid_argument("chirped_poling: length must be > 0");

  const double L = length_mm * 1e3;  // um
  PolingStructure p;
  p.boundaries_um.push_back(0.0);
  int sign = 1;
  double z = 0.0;
  while (z < L) {
    const double period =
        period_start_um + (period_end_um - period_start_um) * (z / L);
    const double w = 0.5 * period;
    z += w;
    p.boundaries_um.push_back(z);
    p.signs.push_back(sign);
    sign = -sign;
  }
  return p;
}

PolingStructure uniform_poling(double period_um, double length_mm) {
  return chirped_poling(period_um, period_um, length_mm);
}

namespace {

// sin(x)/x with the small-argument series so dk -> 0 needs no special case.
double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

}  // namespace

std::complex<double> phase_matching_amplitude(const PolingStructure& poling,
                                              double dk_inv_um) {
  poling.validate();
  std::complex<double> phi{0.0, 0.0};
  for (std::size_t j = 0; j < poling.signs.size(); ++j) {
    const double z0 = poling.boundaries_um[j];
    const double z1 = poling.boundaries_um[j + 1];
    const double w = z1 - z0;
    const double mid = 0.5 * (z0 + z1);
    // integral_{z0}^{z1} e^{i dk z} dz = w e^{i dk mid} sinc(dk w / 2)
    phi += static_cast<double>(poling.signs[j]) * w *
           sinc(0.5 * dk_inv_um * w) * std::polar(1.0, dk_inv_um * mid);
  }
  return phi;
}

}  // namespace twinrange::crystal

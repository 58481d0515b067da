#pragma once
// Periodically / aperiodically poled crystal geometry and its phase-matching
// response. A poled crystal is a sequence of domains with alternating sign of
// the nonlinear coefficient; the transfer amplitude at phase mismatch dk is
//
//   Phi(dk) = sum_j s_j (e^{i dk z_{j+1}} - e^{i dk z_j}) / (i dk)
//
// evaluated per domain in the numerically stable midpoint-sinc form. A linear
// chirp of the poling period spreads the phase matching over a wide band.

#include <complex>
#include <cstddef>
#include <vector>

namespace twinrange::crystal {

struct PolingStructure {
  std::vector<double> boundaries_um;  // z_0 = 0 < z_1 < ... < z_J
  std::vector<int> signs;             // +1/-1 per domain, size J

  std::size_t domain_count() const { return signs.size(); }
  double length_um() const {
    return boundaries_um.empty() ? 0.0 : boundaries_um.back();
  }
  void validate() const;
};

// Half-period domains with the local period varying linearly from
// period_start at z = 0 to period_end at z = L; signs alternate starting +1.
// The realized length ends within half a local period of the request.
PolingStructure chirped_poling(double period_start_um, double period_end_um,
                               double length_mm);
PolingStructure uniform_poling(double period_um, double length_mm);

// Phi(dk) in um; dk in rad/um. Exact per-domain integral, stable at dk -> 0
// (single domain of length L gives |Phi| = L |sinc(dk L / 2)|).
std::complex<double> phase_matching_amplitude(const PolingStructure& poling,
                                              double dk_inv_um);

}  // namespace twinrange::crystal

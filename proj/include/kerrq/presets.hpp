#pragma once

#include <string>
#include <vector>

#include "kerrq/fock.hpp"
#include "kerrq/scheme.hpp"

namespace kerrq {

/// A named target with the main-mode amplitudes it is meant for.
struct Preset {
  std::string name;
  TargetCoefficients target;
  cplx alpha;
  cplx beta;
  double chi = 0.0;
};

/// Qubit target c = (1, -exp(-i (|alpha|^2 + |beta|^2) sin chi)) with alpha = beta,
/// distinguishability x = |alpha|^2 chi^2.
Preset bell_k1(double alpha2 = 10.0, double x = 1.0);

/// Qutrit closed forms for low (x << 1) and high (x >> 1) distinguishability.
/// Both carry corrections of order chi, so chi must be small for maximal E.
Preset qutrit_low(double alpha2 = 10.0, double x = 1e-4);
Preset qutrit_high(double alpha2 = 1e4, double x = 100.0);

/// Photon-number-correlated target (s photons shared by a and b) with K detectors.
Preset photon_correlated(int s, int K, cplx alpha, double chi = 1.5707963267948966);

/// sum_k sqrt(C(s, k)) |k>_a |s-k>_b / 2^{s/2}, the small-alpha limit of the
/// photon-correlated target, on Fock modes a, b.
FockVector photon_number_state(int s, int dim_a, int dim_b);

/// "bell-k1", "maxent-k2-low", "maxent-k2-high", "photon-correlated" at their
/// default parameters. Throws InvalidArgument for other names.
Preset preset_by_name(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace kerrq

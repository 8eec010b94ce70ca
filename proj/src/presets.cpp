#include "kerrq/presets.hpp"

#include <cmath>

namespace kerrq {

namespace {
constexpr cplx I{0.0, 1.0};
}

Preset bell_k1(double alpha2, double x) {
  if (!(alpha2 > 0.0 && x > 0.0)) throw InvalidArgument("amplitude and distinguishability must be positive");
  const double chi = std::sqrt(x / alpha2);
  const cplx a = std::sqrt(alpha2);
  return {"bell-k1", {{1.0, -std::exp(-I * (2 * alpha2 * std::sin(chi)))}}, a, a, chi};
}

Preset qutrit_low(double alpha2, double x) {
  if (!(alpha2 > 0.0 && x > 0.0)) throw InvalidArgument("amplitude and distinguishability must be positive");
  const double chi = std::sqrt(x / alpha2);
  const cplx a = std::sqrt(alpha2);
  const double ph = alpha2 * chi;
  return {"maxent-k2-low",
          {{1.0, -2.0 * (1 - x) * std::exp(-2.0 * I * ph), std::exp(-4.0 * I * ph)}},
          a,
          a,
          chi};
}

Preset qutrit_high(double alpha2, double x) {
  if (!(alpha2 > 0.0 && x > 0.0)) throw InvalidArgument("amplitude and distinguishability must be positive");
  const double chi = std::sqrt(x / alpha2);
  const cplx a = std::sqrt(alpha2);
  const double ph = alpha2 * chi;
  return {"maxent-k2-high", {{1.0, -std::exp(-2.0 * I * ph), std::exp(-4.0 * I * ph)}}, a, a, chi};
}

Preset photon_correlated(int s, int K, cplx alpha, double chi) {
  return {"photon-correlated", coeffs_from_photon_target(s, K, chi), alpha, alpha, chi};
}

FockVector photon_number_state(int s, int dim_a, int dim_b) {
  if (s < 0 || dim_a <= s || dim_b <= s) throw InvalidArgument("photon number must fit both cutoffs");
  CVec v = CVec::Zero(static_cast<Eigen::Index>(dim_a) * dim_b);
  for (int k = 0; k <= s; ++k) {
    const double binom = std::tgamma(s + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(s - k + 1.0));
    v[static_cast<Eigen::Index>(k) * dim_b + (s - k)] = std::sqrt(binom / std::pow(2.0, s));
  }
  return FockVector({"a", "b"}, {dim_a, dim_b}, std::move(v));
}

Preset preset_by_name(const std::string& name) {
  if (name == "bell-k1") return bell_k1();
  if (name == "maxent-k2-low") return qutrit_low();
  if (name == "maxent-k2-high") return qutrit_high();
  if (name == "photon-correlated") return photon_correlated(2, 2, 0.1);
  throw InvalidArgument("unknown preset '" + name + "' (bell-k1, maxent-k2-low, maxent-k2-high, photon-correlated)");
}

std::vector<std::string> preset_names() {
  return {"bell-k1", "maxent-k2-low", "maxent-k2-high", "photon-correlated"};
}

}  // namespace kerrq

#pragma once

#include <string>
#include <vector>

#include "kerrq/fock.hpp"

namespace kerrq {

/// Target coefficients c_0..c_K of the coherent-pair superposition, stored
/// unnormalized. K is the number of detectors.
struct TargetCoefficients {
  std::vector<cplx> c;
  int K() const { return static_cast<int>(c.size()) - 1; }
};

struct Root {
  cplx value;
  int mult = 1;
};

struct EliminationRoots {
  std::vector<Root> roots;
  cplx gamma;
  int K() const;
  /// Roots repeated according to multiplicity, in stored order.
  std::vector<cplx> expanded() const;
};

struct Transmittances {
  std::vector<double> T;
  std::vector<double> theta;  // T_j = cos^2 theta_j
  double q = 0.0;
};

/// Splitting of one master reference |gtilde> into the K reference modes.
/// Tp uses T'_j = cos^2 theta'_j, the same convention as the main cascade.
struct ReferenceNetwork {
  std::vector<double> Tp;
  std::vector<double> theta_p;
  std::vector<double> phi;
  cplx gtilde_master;
  double residual = 0.0;  // max |equation error| / max |gtilde_j|
};

struct DetectionScheme {
  int K = 0;
  double delta = 1e-3;
  cplx gamma;
  std::vector<cplx> c;
  EliminationRoots roots;
  std::vector<double> T;
  std::vector<double> theta;
  double q = 0.0;
  std::vector<cplx> gtilde;
  ReferenceNetwork ref_net;
};

inline constexpr double kMergeTol = 1e-7;

/// Roots of f(x) = sum_n c_n (x/gamma)^n via the companion matrix, Newton
/// polished, clustered within kMergeTol * max|root|, sorted by (arg, modulus).
EliminationRoots solve_roots(const TargetCoefficients& target, cplx gamma);

/// Value of f at x.
cplx root_polynomial(const TargetCoefficients& target, cplx gamma, cplx x);

/// delta = 0 sends the whole probe into the detector arms (T_K = 0).
Transmittances transmittances(int K, double delta);

std::vector<cplx> reference_amplitudes(const EliminationRoots& roots, const Transmittances& tr);

ReferenceNetwork reference_network(const std::vector<cplx>& gtilde);
/// Reference amplitudes produced by a given splitting network.
std::vector<cplx> reference_network_outputs(const ReferenceNetwork& net);

/// Coherent amplitudes leaving the cascade for probe input gamma_x:
/// element 0 is the probe mode c, elements 1..K the reference modes d_j.
std::vector<cplx> cascade_outputs(const DetectionScheme& scheme, cplx gamma_x);

/// Fock components c_n^* / Q_n^*(gamma), n = 0..K.
CVec phi_vector(const TargetCoefficients& target, cplx gamma);

/// Ascending coefficients of prod_m (y - r_m).
std::vector<cplx> poly_from_roots(const std::vector<cplx>& r);

TargetCoefficients coeffs_from_photon_target(int s, int K, double chi);

/// Monic coefficients of prod over the detectors not in `missing` of
/// (y - gamma_m/gamma). Indices are 1-based over roots.expanded().
std::vector<cplx> semi_success_coeffs(const EliminationRoots& roots, const std::vector<int>& missing);

DetectionScheme design_scheme(const TargetCoefficients& target, cplx gamma, double delta = 1e-3);

std::string scheme_to_json(const DetectionScheme& s);
DetectionScheme scheme_from_json(const std::string& text);

}  // namespace kerrq

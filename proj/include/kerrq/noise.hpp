#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kerrq/coherent_span.hpp"
#include "kerrq/scheme.hpp"

namespace kerrq {

struct NoiseParams {
  double Lambda = 0.0;      // channel relative loss
  double Lambda1 = 0.0;     // Kerr-stage loss (also used for mode b)
  double Lambda2 = 0.0;     // storage loss of mode a
  double dphi2 = 0.0;       // mean-square channel phase error, rad^2
  double lambda_det = 1.0;  // detector efficiency
  double zeta = 0.0;        // dark-count probability
  double eps_ac = 0.0;      // relative Kerr strength errors
  double eps_bc = 0.0;

  /// Throws InvalidArgument outside the admissible ranges.
  void validate() const;
};

/// sum_{n1 n2} rho(n1, n2) |pair_n1><pair_n2| over a coherent-pair basis.
struct CoeffPairState {
  PairBasis basis;
  CMat rho;

  static CoeffPairState pure(const PairBasis& basis, const CVec& c);
};

/// Weighted sum of coefficient-pair states that may live on different bases.
struct PairMixture {
  std::vector<CoeffPairState> terms;

  PairMixture() = default;
  PairMixture(CoeffPairState s) { terms.push_back(std::move(s)); }
};

double trace(const PairMixture& m);
/// <psi|rho|psi> / (Tr rho <psi|psi>) for psi = sum_n c_n |pair_n> on `basis`.
double fidelity(const PairMixture& m, const PairBasis& basis, const CVec& c);
/// Fock representation on modes a, b.
DensOp to_densop(const PairMixture& m, int dim_a, int dim_b, double tail_tol = 1e-12);

/// Phase drift per photon (first) and off-diagonal decay rate (second).
std::pair<double, double> eta_params(const NoiseParams& noise, cplx alpha, cplx beta, double chi_ac,
                                     double chi_bc);

/// rho(n1, n2) *= exp(i eta1 (n1 - n2) - eta2 (n1 - n2)^2).
CoeffPairState apply_M0(const CoeffPairState& s, double eta1, double eta2);
PairMixture apply_M0(const PairMixture& m, double eta1, double eta2);

/// Kerr strengths chi (1 + eps) instead of chi: pair phases scale by (1 + eps).
PairMixture apply_chi_error(const PairMixture& m, double eps_ac, double eps_bc);

/// sum_n (Lambda |gamma|^2)^n / n! U^n rho U^-n with U = exp(i chi_ac a^+ a),
/// summed until the term weight drops below 1e-14 of the total, then
/// renormalized by exp(-Lambda |gamma|^2).
PairMixture apply_discrete_phase_channel(const PairMixture& m, double Lambda, cplx gamma, double chi_ac);
DensOp apply_discrete_phase_channel(const DensOp& rho, const std::string& mode, double Lambda, cplx gamma,
                                    double chi_ac);

/// <P_perp (D Psi1), D Psi1> for D = dchi_ac a^+a + dchi_bc b^+b and
/// Psi1 = sum n c_n |pair_n>, with c scaled to a unit-norm target.
double chi_error_term(const TargetCoefficients& target, cplx alpha, cplx beta, double chi, double eps_ac,
                      double eps_bc);

/// Target projector plus one- and two-dark-count admixtures of the
/// semi-successful states, weights (zeta / (lambda |gamma|^2))^j |c_K|^2.
CoeffPairState dark_count_mixture(const TargetCoefficients& target, const EliminationRoots& roots, cplx alpha,
                                  cplx beta, double chi, cplx gamma, double lambda_det, double zeta);

struct FidelityBreakdown {
  double t_dephase = 0.0;
  double t_kerr_loss = 0.0;
  double t_storage = 0.0;
  double t_chi_err = 0.0;
  double t_darkcount = 0.0;
  double t_discrete_phase = 0.0;
  double F = 1.0;
  double total_loss() const;
};

/// Leading-order six-term fidelity. The discrete-phase term switches at
/// x = |alpha|^2 chi^2 = 1 from chi^2 (mu + mu^2) Var(n_a) (mu = Lambda |gamma|^2,
/// Var taken in the target) to mu.
FidelityBreakdown fidelity_leading_order(const TargetCoefficients& target, const NoiseParams& noise, cplx alpha,
                                         cplx beta, cplx gamma, double chi);

/// Fidelity from composing the stage maps on the exact target: dark-count
/// mixture, Kerr-strength error, discrete phase channel, then M0 with eta1
/// compensated by the scheme design.
double fidelity_pipeline(const TargetCoefficients& target, const NoiseParams& noise, cplx alpha, cplx beta,
                         cplx gamma, double chi);

/// (lambda q^2 |gamma|^2)^K / |c_K|^2, c scaled to a unit-norm target.
double success_probability(const TargetCoefficients& target, cplx alpha, cplx beta, double chi, cplx gamma,
                           double lambda_det, double q);

struct Inequality {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - value
  bool pass = true;
};

struct FeasibilityReport {
  std::vector<Inequality> items;
  double Lambda_max = 0.0;
  double attenuation_db_max = 0.0;
  double distance_km_max = 0.0;  // at 0.20 dB/km
  bool all_pass = true;
};

inline constexpr double kFiberDbPerKm = 0.20;

double loss_to_db(double Lambda);
double db_to_loss(double db);

/// Six sufficient conditions for fidelity 1 - 6 eps; the K = 2 form halves
/// the bounds on Lambda2, dphi2, Lambda1 and the Kerr-strength errors.
FeasibilityReport feasibility_check(const NoiseParams& noise, cplx alpha, double chi, cplx gamma, double eps,
                                    int K);

/// Largest channel loss (dB) at which the success probability with |gamma|^2
/// at its fidelity ceiling eps / (|alpha|^2 chi^2 Lambda) stays >= p_min, with
/// q = 1/sqrt(K).
double practical_loss_limit_db(const TargetCoefficients& target, cplx alpha, cplx beta, double chi,
                               double lambda_det, double eps, double p_min = 1e-6);

}  // namespace kerrq

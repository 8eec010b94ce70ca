#pragma once

#include <vector>

#include "kerrq/coherent_span.hpp"
#include "kerrq/scheme.hpp"

namespace kerrq {

/// Inputs of one protocol run. `trunc.n_max` is ignored; cutoffs are chosen
/// from `trunc.tail_tol` and the amplitudes in play.
struct ProtocolParams {
  cplx alpha;
  cplx beta;
  cplx gamma;
  double chi = 0.0;
  TargetCoefficients target;
  DetectionScheme scheme;
  TruncationSpec trunc{0, 1e-16};

  /// Designs the scheme for `target` at probe amplitude gamma.
  static ProtocolParams make(const TargetCoefficients& target, cplx alpha, cplx beta, cplx gamma,
                             double chi, double delta = 1e-3, double tail_tol = 1e-16);
  /// Throws InvalidArgument on inconsistent fields; warns when |gamma|^2 > 0.5.
  void validate() const;
};

/// How the two main modes are represented.
///  Fock: explicit truncated Fock modes a and b, Kerr gates applied in Fock space.
///  CoherentSpan: the exact basis |alpha e^{i chi n}>|beta e^{i chi n}>, n = 0..n_c,
///    which is all the Kerr stage can reach. Output DensOps then live on a single
///    mode "ab" in the orthonormalized coordinates of that span.
///  Auto: Fock when dim_a * dim_b <= 4096.
enum class AbBasis { Auto, Fock, CoherentSpan };

/// Displaced: reference modes are tracked as a classical frame plus a vacuum
/// fluctuation, which is exact for linear optics and keeps the cutoff at the
/// probe's. Lab: references are explicit coherent states in Fock space.
enum class ReferenceFrame { Displaced, Lab };

struct SimOptions {
  ReferenceFrame frame = ReferenceFrame::Displaced;
  AbBasis ab = AbBasis::Auto;
  /// Probe split fully (delta = 0, no references) and each arm displaced by
  /// -i q gamma_j before its detector.
  bool displacement_variant = false;
  /// Fock cutoff for probe and references in the lab frame; 0 picks one.
  int lab_n_max = 0;
};

struct OutcomeRecord {
  std::vector<bool> pattern;  // true = click, detector j at index j-1
  double probability = 0.0;
  DensOp state;               // normalized
  double fidelity = 0.0;      // against the analytic state for this pattern
  double entanglement = 0.0;  // Schmidt entropy (bits) of the principal eigenvector
};

/// Normalized sum_n c_n |alpha e^{i chi n}>_a |beta e^{i chi n}>_b on Fock modes a, b.
/// dim 0 picks the cutoff from tail_tol.
FockVector analytic_target_state(const TargetCoefficients& target, cplx alpha, cplx beta, double chi,
                                 int dim_a = 0, int dim_b = 0, double tail_tol = 1e-14);

/// All 2^K click patterns, pattern index bit j-1 set when detector j clicks.
std::vector<OutcomeRecord> run_full_protocol(const ProtocolParams& params, const SimOptions& opt = {});

/// The all-click record only.
OutcomeRecord run_all_click(const ProtocolParams& params, const SimOptions& opt = {});

/// (q^n / sqrt(n!)) (c - gamma_j)^n on a dim-dimensional Fock space.
CMat elimination_operator(int dim, cplx gamma_j, int n, double q);

/// Trace of the measurement-invariant map over the probe, as a positive
/// operator: Tr_c M{X} = Tr_c[H X].
CMat probe_trace_operator(int dim, const std::vector<cplx>& roots, double q);

/// Unnormalized final state for fixed photon counts n_j (n_j = 0 for a silent
/// detector). The representation follows `ab` as in run_full_protocol.
DensOp operator_path_final_state(const ProtocolParams& params, const std::vector<int>& counts,
                                 AbBasis ab = AbBasis::Auto);

/// Sum over n_j = 1..n_cut for clicked detectors (0 for silent ones).
DensOp operator_path_sum(const ProtocolParams& params, const std::vector<bool>& pattern, int n_cut = 3,
                         AbBasis ab = AbBasis::Auto);

struct OracleReport {
  double trace_distance = 0.0;          // full vs operator path, all-click, normalized
  double leading_residual = 0.0;        // full all-click vs analytic target at gamma
  double leading_residual_half = 0.0;   // same at gamma / 2
  double scaling_exponent = 0.0;        // log2(residual / residual_half)
};

OracleReport oracle_equivalence(const ProtocolParams& params, int n_cut = 3, AbBasis ab = AbBasis::Auto);

/// (q^2 |gamma|^2)^K / |c_K|^2 with c scaled so the target state has unit norm.
double success_probability_ideal(const TargetCoefficients& target, cplx alpha, cplx beta, double chi,
                                 cplx gamma, double q);

/// Marginal click probability of every detector when the probe mode enters
/// the network in `probe` (single mode "c") with no Kerr stage.
std::vector<double> detector_click_probabilities(const DetectionScheme& scheme, const FockVector& probe);

/// Normalized (c^+)^s |z> on a dim-dimensional Fock space.
FockVector photon_added_coherent(cplx z, int s, int dim, double tail_tol = 1e-14);

/// Probe (c^+)^s |gamma1> split 50/50; probability that both arms register a
/// click after each arm eliminates its share of |gamma1>.
double pacs_split_joint_click(cplx gamma1, int s = 1);

}  // namespace kerrq

#pragma once

#include <cstdint>
#include <vector>

#include "kerrq/coherent_span.hpp"
#include "kerrq/scheme.hpp"

namespace kerrq {

struct EntanglementReport {
  double E = 0.0;                // bits
  std::vector<double> schmidt;   // descending, sums to 1
  std::vector<cplx> c_opt;       // filled by the optimizer
  bool converged = true;
};

/// Von Neumann entropy (bits) of a probability vector.
double shannon_bits(const Eigen::VectorXd& p);

EntanglementReport entropy_of_coeffs(const PairBasis& basis, const CVec& c);
EntanglementReport entropy_of_target(const TargetCoefficients& target, cplx alpha, cplx beta, double chi);

struct OptimizerOptions {
  int restarts = 20;
  std::uint64_t seed = 20240917;
  int max_iter = 4000;
};

/// Maximizes E over c by multi-start Nelder-Mead followed by a local polish;
/// the result is reported in the gauge c_0 = 1. `converged` is false when the
/// final polish still moved E by 1e-10 or more; the best point found is still
/// returned.
EntanglementReport optimize_coefficients(int K, cplx alpha, cplx beta, double chi,
                                         const OptimizerOptions& opt = {});

EntanglementReport semi_success_entropy(const EliminationRoots& roots, const std::vector<int>& missing,
                                        cplx alpha, cplx beta, double chi);

/// h(x) = -x log2 x - (1-x) log2(1-x).
double binary_entropy(double x);

/// h(chi^2 |alpha|^2 |gamma|^2); DomainError outside (0, 1).
double weak_entanglement_estimate(cplx alpha, cplx gamma, double chi);

}  // namespace kerrq

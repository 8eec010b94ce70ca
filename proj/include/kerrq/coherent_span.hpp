#pragma once

#include <vector>

#include "kerrq/fock.hpp"

namespace kerrq {

/// <z1|z2> for coherent states.
cplx coherent_overlap(cplx z1, cplx z2);

/// Gram matrix G_mn = <z_m|z_n>.
CMat gram(const std::vector<cplx>& z);

/// Coherent-pair basis |alpha e^{i phase_a[n]}>_a |beta e^{i phase_b[n]}>_b,
/// n = 0..K. The ideal protocol has phase_a[n] = phase_b[n] = chi n.
struct PairBasis {
  cplx alpha;
  cplx beta;
  std::vector<double> phase_a;
  std::vector<double> phase_b;

  static PairBasis standard(cplx alpha, cplx beta, double chi, int K);
  int size() const { return static_cast<int>(phase_a.size()); }
  std::vector<cplx> a_amps() const;
  std::vector<cplx> b_amps() const;
};

/// G_ab(m, n) = <a_m|a_n><b_m|b_n> between two bases.
CMat cross_gram(const PairBasis& left, const PairBasis& right);

/// <left, cl | right, cr> for states sum_n c_n |pair_n>.
cplx span_inner(const PairBasis& left, const CVec& cl, const PairBasis& right, const CVec& cr);
double span_norm2(const PairBasis& basis, const CVec& c);

/// Reduced-state spectrum of mode a (normalized, descending), computed in the
/// coherent span: eigenvalues of G_a^{1/2} R G_a^{1/2}.
Eigen::VectorXd span_schmidt(const PairBasis& basis, const CVec& c);

/// Principal square root of a Hermitian PSD matrix; eigenvalues below
/// floor * max are set to zero.
CMat psd_sqrt(const CMat& g, double floor = 1e-14);

/// Fock representation on modes (a, b) with the given per-mode dims.
FockVector span_to_fock(const PairBasis& basis, const CVec& c, int dim_a, int dim_b,
                        double tail_tol = 1e-12);

CVec to_cvec(const std::vector<cplx>& v);

}  // namespace kerrq

#include "kerrq/coherent_span.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace kerrq {

namespace {
constexpr cplx I{0.0, 1.0};
}

cplx coherent_overlap(cplx z1, cplx z2) {
  return std::exp(-0.5 * std::norm(z1) - 0.5 * std::norm(z2) + std::conj(z1) * z2);
}

CMat gram(const std::vector<cplx>& z) {
  const Eigen::Index n = static_cast<Eigen::Index>(z.size());
  CMat g(n, n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) g(m, k) = m == k ? cplx(1.0) : coherent_overlap(z[m], z[k]);
  return g;
}

PairBasis PairBasis::standard(cplx alpha, cplx beta, double chi, int K) {
  PairBasis b{alpha, beta, {}, {}};
  for (int n = 0; n <= K; ++n) {
    b.phase_a.push_back(chi * n);
    b.phase_b.push_back(chi * n);
  }
  return b;
}

std::vector<cplx> PairBasis::a_amps() const {
  std::vector<cplx> z;
  for (double p : phase_a) z.push_back(alpha * std::exp(I * p));
  return z;
}

std::vector<cplx> PairBasis::b_amps() const {
  std::vector<cplx> z;
  for (double p : phase_b) z.push_back(beta * std::exp(I * p));
  return z;
}

CMat cross_gram(const PairBasis& left, const PairBasis& right) {
  const auto la = left.a_amps(), lb = left.b_amps();
  const auto ra = right.a_amps(), rb = right.b_amps();
  CMat g(left.size(), right.size());
  for (int m = 0; m < left.size(); ++m)
    for (int n = 0; n < right.size(); ++n)
      g(m, n) = coherent_overlap(la[m], ra[n]) * coherent_overlap(lb[m], rb[n]);
  return g;
}

cplx span_inner(const PairBasis& left, const CVec& cl, const PairBasis& right, const CVec& cr) {
  return cl.dot(cross_gram(left, right) * cr);
}

double span_norm2(const PairBasis& basis, const CVec& c) {
  return std::max(span_inner(basis, c, basis, c).real(), 0.0);
}

CMat psd_sqrt(const CMat& g, double floor) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (g + g.adjoint()));
  Eigen::VectorXd ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  for (Eigen::Index k = 0; k < ev.size(); ++k) ev[k] = ev[k] > floor * top ? std::sqrt(ev[k]) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::VectorXd span_schmidt(const PairBasis& basis, const CVec& c) {
  const CMat ga = gram(basis.a_amps());
  const CMat gb = gram(basis.b_amps());
  const Eigen::Index n = c.size();
  // rho_a = sum_nm c_n c_m^* <b_m|b_n> |a_n><a_m|
  CMat r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = c[i] * std::conj(c[j]) * gb(j, i);
  const CMat s = psd_sqrt(ga);
  const CMat w = s * r * s;
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (w + w.adjoint()), Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  const double t = ev.sum();
  if (t <= 0.0) throw DomainError("state in the coherent span has zero norm");
  ev /= t;
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
  return ev;
}

FockVector span_to_fock(const PairBasis& basis, const CVec& c, int dim_a, int dim_b, double tail_tol) {
  const auto za = basis.a_amps(), zb = basis.b_amps();
  CVec out = CVec::Zero(static_cast<Eigen::Index>(dim_a) * dim_b);
  for (int n = 0; n < basis.size(); ++n) {
    const CVec qa = coherent_amplitudes(za[n], dim_a - 1, tail_tol);
    const CVec qb = coherent_amplitudes(zb[n], dim_b - 1, tail_tol);
    for (int i = 0; i < dim_a; ++i) out.segment(static_cast<Eigen::Index>(i) * dim_b, dim_b) += c[n] * qa[i] * qb;
  }
  return FockVector({"a", "b"}, {dim_a, dim_b}, std::move(out), tail_tol);
}

CVec to_cvec(const std::vector<cplx>& v) {
  return Eigen::Map<const CVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace kerrq

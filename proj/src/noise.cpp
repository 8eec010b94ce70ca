#include "kerrq/noise.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "kerrq/errors.hpp"
#include "kerrq/protocol.hpp"

namespace kerrq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Target coefficients scaled to a unit-norm state on the standard basis.
CVec unit_coeffs(const PairBasis& basis, const TargetCoefficients& target) {
  CVec c = to_cvec(target.c);
  const double n2 = span_norm2(basis, c);
  if (!(n2 > 0.0)) throw InvalidArgument("target state has zero norm");
  return c / std::sqrt(n2);
}

CVec padded(const std::vector<cplx>& v, int size) {
  CVec out = CVec::Zero(size);
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

// ||P_perp psi||^2 for psi = sum d_n |pair_n>, P_perp against unit-norm c.
double perp_norm2(const CMat& g, const CVec& c, const CVec& d) {
  return (d.dot(g * d)).real() - std::norm(c.dot(g * d));
}

// Var(a^+ a) of the unit-norm pair state c.
double number_variance_a(const PairBasis& basis, const CVec& c) {
  const auto za = basis.a_amps();
  const CMat g = cross_gram(basis, basis);
  const int n = basis.size();
  CMat m1(n, n), m2(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx w = std::conj(za[i]) * za[j];
      m1(i, j) = w * g(i, j);
      m2(i, j) = (w * w + w) * g(i, j);
    }
  const double mean = c.dot(m1 * c).real();
  return c.dot(m2 * c).real() - mean * mean;
}

}  // namespace

void NoiseParams::validate() const {
  if (!(Lambda >= 0.0) || !(Lambda1 >= 0.0) || !(Lambda2 >= 0.0) || !(dphi2 >= 0.0))
    throw InvalidArgument("loss rates and phase variance must be non-negative");
  if (!(lambda_det > 0.0 && lambda_det <= 1.0)) throw InvalidArgument("detector efficiency must be in (0, 1]");
  if (!(zeta >= 0.0 && zeta < 1.0)) throw InvalidArgument("dark-count probability must be in [0, 1)");
  if (!(std::abs(eps_ac) < 1.0) || !(std::abs(eps_bc) < 1.0))
    throw InvalidArgument("relative Kerr errors must satisfy |eps| < 1");
}

CoeffPairState CoeffPairState::pure(const PairBasis& basis, const CVec& c) {
  if (c.size() != basis.size()) throw ShapeMismatch("coefficient vector does not match the pair basis");
  return {basis, c * c.adjoint()};
}

double trace(const PairMixture& m) {
  double t = 0.0;
  for (const auto& s : m.terms) t += (s.rho * gram(s.basis.a_amps()).cwiseProduct(gram(s.basis.b_amps())))
                                         .trace()
                                         .real();
  return t;
}

double fidelity(const PairMixture& m, const PairBasis& basis, const CVec& c) {
  double num = 0.0;
  for (const auto& s : m.terms) {
    const CVec v = cross_gram(s.basis, basis) * c;
    num += v.dot(s.rho * v).real();
  }
  const double tr = trace(m);
  if (!(tr > 0.0)) throw DomainError("mixture has zero trace");
  return num / (tr * span_norm2(basis, c));
}

DensOp to_densop(const PairMixture& m, int dim_a, int dim_b, double tail_tol) {
  std::vector<CVec> cols;
  for (const auto& s : m.terms) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (s.rho + s.rho.adjoint()));
    const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double lam = es.eigenvalues()[k];
      if (lam <= 1e-15 * top) continue;
      const CVec c = es.eigenvectors().col(k) * std::sqrt(lam);
      cols.push_back(span_to_fock(s.basis, c, dim_a, dim_b, tail_tol).amplitudes());
    }
  }
  CMat factor(static_cast<Eigen::Index>(dim_a) * dim_b, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) factor.col(static_cast<Eigen::Index>(k)) = cols[k];
  return DensOp({"a", "b"}, {dim_a, dim_b}, std::move(factor));
}

std::pair<double, double> eta_params(const NoiseParams& noise, cplx alpha, cplx beta, double chi_ac,
                                     double chi_bc) {
  const double a2 = std::norm(alpha), b2 = std::norm(beta);
  const double eta1 = 0.5 * noise.Lambda1 * (a2 * chi_ac + b2 * chi_bc) + a2 * chi_ac * noise.Lambda2;
  const double eta2 = noise.dphi2 + noise.Lambda1 * (a2 * chi_ac * chi_ac + b2 * chi_bc * chi_bc) / 3.0 +
                      0.5 * a2 * chi_ac * chi_ac * noise.Lambda2;
  return {eta1, eta2};
}

CoeffPairState apply_M0(const CoeffPairState& s, double eta1, double eta2) {
  CoeffPairState out = s;
  for (Eigen::Index i = 0; i < s.rho.rows(); ++i)
    for (Eigen::Index j = 0; j < s.rho.cols(); ++j) {
      const double d = static_cast<double>(i - j);
      out.rho(i, j) *= std::exp(cplx(-eta2 * d * d, eta1 * d));
    }
  return out;
}

PairMixture apply_M0(const PairMixture& m, double eta1, double eta2) {
  PairMixture out;
  for (const auto& s : m.terms) out.terms.push_back(apply_M0(s, eta1, eta2));
  return out;
}

PairMixture apply_chi_error(const PairMixture& m, double eps_ac, double eps_bc) {
  PairMixture out = m;
  for (auto& s : out.terms) {
    for (double& p : s.basis.phase_a) p *= 1.0 + eps_ac;
    for (double& p : s.basis.phase_b) p *= 1.0 + eps_bc;
  }
  return out;
}

namespace {

// Poisson weights (mu^n / n!) e^{-mu}, n = 0.. until the remainder is negligible.
std::vector<double> poisson_weights(double mu) {
  std::vector<double> w;
  double term = std::exp(-mu), acc = 0.0;
  for (int n = 0;; ++n) {
    w.push_back(term);
    acc += term;
    if (1.0 - acc < 1e-14 || n > 10000) break;
    term *= mu / (n + 1);
  }
  return w;
}

}  // namespace

PairMixture apply_discrete_phase_channel(const PairMixture& m, double Lambda, cplx gamma, double chi_ac) {
  if (!(Lambda >= 0.0)) throw InvalidArgument("Lambda must be non-negative");
  const auto w = poisson_weights(Lambda * std::norm(gamma));
  PairMixture out;
  for (std::size_t n = 0; n < w.size(); ++n)
    for (const auto& s : m.terms) {
      CoeffPairState r{s.basis, s.rho * w[n]};
      for (double& p : r.basis.phase_a) p += chi_ac * static_cast<double>(n);
      out.terms.push_back(std::move(r));
    }
  return out;
}

DensOp apply_discrete_phase_channel(const DensOp& rho, const std::string& mode, double Lambda, cplx gamma,
                                    double chi_ac) {
  if (!(Lambda >= 0.0)) throw InvalidArgument("Lambda must be non-negative");
  const auto w = poisson_weights(Lambda * std::norm(gamma));
  const FockVector probe(rho.modes(), rho.dims(), CVec::Zero(rho.dim()));
  const int idx = probe.index_of(mode);
  const std::size_t stride = probe.stride(idx);
  const int d = rho.dims()[static_cast<std::size_t>(idx)];
  const CMat& L = rho.factor();
  CMat out(L.rows(), L.cols() * static_cast<Eigen::Index>(w.size()));
  for (std::size_t n = 0; n < w.size(); ++n) {
    CMat block = L * std::sqrt(w[n]);
    for (Eigen::Index r = 0; r < L.rows(); ++r) {
      const int k = static_cast<int>((static_cast<std::size_t>(r) / stride) % static_cast<std::size_t>(d));
      block.row(r) *= std::exp(cplx(0.0, chi_ac * static_cast<double>(n) * k));
    }
    out.middleCols(static_cast<Eigen::Index>(n) * L.cols(), L.cols()) = block;
  }
  return DensOp(rho.modes(), rho.dims(), std::move(out));
}

double chi_error_term(const TargetCoefficients& target, cplx alpha, cplx beta, double chi, double eps_ac,
                      double eps_bc) {
  const int K = target.K();
  const PairBasis basis = PairBasis::standard(alpha, beta, chi, K);
  const CVec c = unit_coeffs(basis, target);
  CVec d = c;
  for (int n = 0; n <= K; ++n) d[n] *= static_cast<double>(n);
  const double da = chi * eps_ac, db = chi * eps_bc;
  const auto za = basis.a_amps(), zb = basis.b_amps();
  const CMat g = cross_gram(basis, basis);
  CMat d1(K + 1, K + 1), d2(K + 1, K + 1);
  for (int m = 0; m <= K; ++m)
    for (int n = 0; n <= K; ++n) {
      const cplx wa = std::conj(za[m]) * za[n], wb = std::conj(zb[m]) * zb[n];
      d1(m, n) = (da * wa + db * wb) * g(m, n);
      d2(m, n) = (da * da * (wa * wa + wa) + 2.0 * da * db * wa * wb + db * db * (wb * wb + wb)) * g(m, n);
    }
  return d.dot(d2 * d).real() - std::norm(c.dot(d1 * d));
}

CoeffPairState dark_count_mixture(const TargetCoefficients& target, const EliminationRoots& roots, cplx alpha,
                                  cplx beta, double chi, cplx gamma, double lambda_det, double zeta) {
  const int K = target.K();
  if (roots.K() != K) throw ShapeMismatch("roots do not match the target order");
  if (!(std::norm(gamma) > 0.0)) throw InvalidArgument("gamma must be nonzero");
  const PairBasis basis = PairBasis::standard(alpha, beta, chi, K);
  const CVec c = unit_coeffs(basis, target);
  CMat rho = c * c.adjoint();
  if (zeta == 0.0) return {basis, rho};
  const double w1 = zeta / (lambda_det * std::norm(gamma));
  if (w1 > 0.1) spdlog::warn("dark-count weight zeta/(lambda |gamma|^2) = {:.3g} is not small", w1);
  const double cK2 = std::norm(c[K]);
  for (int n1 = 1; n1 <= K; ++n1) {
    const CVec s = padded(semi_success_coeffs(roots, {n1}), K + 1);
    rho += w1 * cK2 * s * s.adjoint();
    for (int n2 = n1 + 1; n2 <= K; ++n2) {
      const CVec s2 = padded(semi_success_coeffs(roots, {n1, n2}), K + 1);
      rho += w1 * w1 * cK2 * s2 * s2.adjoint();
    }
  }
  return {basis, rho};
}

double FidelityBreakdown::total_loss() const {
  return t_dephase + t_kerr_loss + t_storage + t_chi_err + t_darkcount + t_discrete_phase;
}

FidelityBreakdown fidelity_leading_order(const TargetCoefficients& target, const NoiseParams& noise, cplx alpha,
                                         cplx beta, cplx gamma, double chi) {
  noise.validate();
  const int K = target.K();
  const PairBasis basis = PairBasis::standard(alpha, beta, chi, K);
  const CMat g = cross_gram(basis, basis);
  const CVec c = unit_coeffs(basis, target);
  CVec c1 = c;
  for (int n = 0; n <= K; ++n) c1[n] *= static_cast<double>(n);
  const double spread = perp_norm2(g, c, c1);

  const double a2 = std::norm(alpha), b2 = std::norm(beta);
  const double chi_ac = chi * (1.0 + noise.eps_ac), chi_bc = chi * (1.0 + noise.eps_bc);
  FidelityBreakdown fb;
  fb.t_dephase = 2.0 * noise.dphi2 * spread;
  fb.t_kerr_loss = 2.0 * noise.Lambda1 * (a2 * chi_ac * chi_ac + b2 * chi_bc * chi_bc) / 3.0 * spread;
  fb.t_storage = a2 * chi_ac * chi_ac * noise.Lambda2 * spread;
  fb.t_chi_err = chi_error_term(target, alpha, beta, chi, noise.eps_ac, noise.eps_bc);

  if (noise.zeta > 0.0) {
    const CoeffPairState mix =
        dark_count_mixture(target, solve_roots(target, gamma), alpha, beta, chi, gamma, noise.lambda_det, noise.zeta);
    // Everything beyond the target projector, projected off the target.
    const CMat extra = mix.rho - c * c.adjoint();
    fb.t_darkcount = (extra * g).trace().real() - (c.dot(g * extra * g * c)).real();
  }

  const double x = a2 * chi * chi;
  const double mu = noise.Lambda * std::norm(gamma);
  if (x > 0.3 && x < 3.0)
    spdlog::warn("|alpha|^2 chi^2 = {:.3g} is near the crossover of the discrete-phase approximations", x);
  // Small x: sum_n w_n n^2 chi_ac^2 Var(n_a), which is x (mu + mu^2) when Var(n_a) = |alpha|^2.
  fb.t_discrete_phase = x <= 1.0 ? chi_ac * chi_ac * (mu + mu * mu) * number_variance_a(basis, c) : mu;

  fb.F = 1.0 - fb.total_loss();
  for (double t : {fb.t_dephase, fb.t_kerr_loss, fb.t_storage, fb.t_chi_err, fb.t_darkcount, fb.t_discrete_phase})
    if (t > 0.2) {
      spdlog::warn("leading-order fidelity term {:.3g} exceeds 0.2; the expansion is unreliable", t);
      break;
    }
  return fb;
}

double fidelity_pipeline(const TargetCoefficients& target, const NoiseParams& noise, cplx alpha, cplx beta,
                         cplx gamma, double chi) {
  noise.validate();
  const int K = target.K();
  const PairBasis basis = PairBasis::standard(alpha, beta, chi, K);
  const CVec c = unit_coeffs(basis, target);
  const double chi_ac = chi * (1.0 + noise.eps_ac), chi_bc = chi * (1.0 + noise.eps_bc);
  PairMixture m = dark_count_mixture(target, solve_roots(target, gamma), alpha, beta, chi, gamma,
                                     noise.lambda_det, noise.zeta);
  m = apply_chi_error(m, noise.eps_ac, noise.eps_bc);
  m = apply_discrete_phase_channel(m, noise.Lambda, gamma, chi_ac);
  m = apply_M0(m, 0.0, eta_params(noise, alpha, beta, chi_ac, chi_bc).second);
  return fidelity(m, basis, c);
}

double success_probability(const TargetCoefficients& target, cplx alpha, cplx beta, double chi, cplx gamma,
                           double lambda_det, double q) {
  if (!(lambda_det > 0.0 && lambda_det <= 1.0)) throw InvalidArgument("detector efficiency must be in (0, 1]");
  return success_probability_ideal(target, alpha, beta, chi, gamma, q * std::sqrt(lambda_det));
}

double loss_to_db(double Lambda) { return 10.0 * std::log10(Lambda + 1.0); }

double db_to_loss(double db) { return std::pow(10.0, db / 10.0) - 1.0; }

FeasibilityReport feasibility_check(const NoiseParams& noise, cplx alpha, double chi, cplx gamma, double eps,
                                    int K) {
  noise.validate();
  if (!(eps > 0.0 && eps < 1.0 / 6.0)) throw InvalidArgument("eps must be in (0, 1/6)");
  if (K != 1 && K != 2) throw InvalidArgument("feasibility bounds are available for K = 1 and K = 2");
  const double f = K == 1 ? 1.0 : 0.5;
  const double a2 = std::norm(alpha);
  const double x = a2 * chi * chi;

  FeasibilityReport r;
  auto add = [&](std::string name, double value, double bound) {
    Inequality in{std::move(name), value, bound, bound - value, value <= bound};
    r.all_pass = r.all_pass && in.pass;
    r.items.push_back(std::move(in));
  };
  const double lam_bound = noise.zeta > 0.0 ? 2.0 * eps * eps * noise.lambda_det / noise.zeta : kInf;
  add("Lambda", noise.Lambda, lam_bound);
  add("Lambda2", noise.Lambda2, f * 2.0 * eps);
  add("dphi2", noise.dphi2, f * x * eps);
  add("Lambda1", noise.Lambda1, f * 1.5 * eps);
  add("gamma2", std::norm(gamma), noise.Lambda > 0.0 && x > 0.0 ? eps / (x * noise.Lambda) : kInf);
  add("eps_ac2", noise.eps_ac * noise.eps_ac, f * eps / (2.0 * a2));
  add("eps_bc2", noise.eps_bc * noise.eps_bc, f * eps / (2.0 * a2));

  r.Lambda_max = lam_bound;
  r.attenuation_db_max = loss_to_db(lam_bound);
  r.distance_km_max = r.attenuation_db_max / kFiberDbPerKm;
  return r;
}

double practical_loss_limit_db(const TargetCoefficients& target, cplx alpha, cplx beta, double chi,
                               double lambda_det, double eps, double p_min) {
  if (!(p_min > 0.0)) throw InvalidArgument("p_min must be positive");
  const int K = target.K();
  const double x = std::norm(alpha) * chi * chi;
  // p(Lambda) = (lambda |gamma_max|^2 / K)^K / |c_K|^2 with |gamma_max|^2 = eps / (x Lambda).
  const double inv_cK2 = success_probability_ideal(target, alpha, beta, chi, cplx(1.0), 1.0);
  const double Lambda = lambda_det * eps / (K * x) * std::pow(inv_cK2 / p_min, 1.0 / K);
  return loss_to_db(Lambda);
}

}  // namespace kerrq

#include "kerrq/entanglement.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace kerrq {

double shannon_bits(const Eigen::VectorXd& p) {
  double e = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k)
    if (p[k] > 1e-300) e -= p[k] * std::log2(p[k]);
  return std::max(e, 0.0);
}

EntanglementReport entropy_of_coeffs(const PairBasis& basis, const CVec& c) {
  if (c.size() != basis.size()) throw ShapeMismatch("coefficient count differs from basis size");
  EntanglementReport r;
  const Eigen::VectorXd s = span_schmidt(basis, c);
  r.E = shannon_bits(s);
  r.schmidt.assign(s.data(), s.data() + s.size());
  return r;
}

EntanglementReport entropy_of_target(const TargetCoefficients& target, cplx alpha, cplx beta, double chi) {
  if (target.c.empty()) throw InvalidArgument("empty target");
  return entropy_of_coeffs(PairBasis::standard(alpha, beta, chi, target.K()), to_cvec(target.c));
}

namespace {

// The search runs in whitened coordinates d with c = W d, W = G^{-1/2} of the
// pair-state Gram matrix, so that |psi|^2 = |d|^2. In raw c the landscape is
// badly conditioned when the coherent components nearly coincide.
struct OptCtx {
  PairBasis basis;
  CMat whiten;
};

CVec unpack(const OptCtx& ctx, const std::vector<double>& x) {
  const int n = ctx.basis.size();
  CVec d(n);
  for (int k = 0; k < n; ++k) d[k] = cplx(x[2 * k], x[2 * k + 1]);
  return ctx.whiten * d;
}

double neg_entropy(const gsl_vector* x, void* params) {
  const auto* ctx = static_cast<const OptCtx*>(params);
  const CVec c = unpack(*ctx, std::vector<double>(x->data, x->data + x->size));
  try {
    return -shannon_bits(span_schmidt(ctx->basis, c));
  } catch (const Error&) {
    return 0.0;
  }
}

struct RunResult {
  std::vector<double> x;
  double f;
  double size;
};

RunResult nelder_mead(OptCtx& ctx, const std::vector<double>& x0, double step, int max_iter, double size_tol) {
  const std::size_t n = x0.size();
  gsl_multimin_function fn{&neg_entropy, n, &ctx};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* ss = gsl_vector_alloc(n);
  for (std::size_t k = 0; k < n; ++k) gsl_vector_set(x, k, x0[k]);
  gsl_vector_set_all(ss, step);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);
  double size = step;
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s)) break;
    size = gsl_multimin_fminimizer_size(s);
    if (gsl_multimin_test_size(size, size_tol) == GSL_SUCCESS) break;
  }
  RunResult r;
  for (std::size_t k = 0; k < n; ++k) r.x.push_back(gsl_vector_get(s->x, k));
  r.f = s->fval;
  r.size = size;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(ss);
  return r;
}

}  // namespace

EntanglementReport optimize_coefficients(int K, cplx alpha, cplx beta, double chi, const OptimizerOptions& opt) {
  if (K < 1) throw InvalidArgument("K must be at least 1");
  if (opt.restarts < 1) throw InvalidArgument("need at least one restart");
  OptCtx ctx{PairBasis::standard(alpha, beta, chi, K), {}};
  {
    const CMat g = cross_gram(ctx.basis, ctx.basis);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (g + g.adjoint()));
    Eigen::VectorXd ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    for (Eigen::Index k = 0; k < ev.size(); ++k) ev[k] = ev[k] > 1e-14 * top ? 1.0 / std::sqrt(ev[k]) : 0.0;
    ctx.whiten = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  }
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  RunResult best{{}, 1.0, 0.0};
  for (int r = 0; r < opt.restarts; ++r) {
    std::vector<double> x0(2 * (K + 1));
    for (auto& v : x0) v = nd(rng);
    const RunResult run = nelder_mead(ctx, x0, 0.5, opt.max_iter, 1e-8);
    if (run.f < best.f) best = run;
  }
  // Polish the winner with progressively smaller simplices. Gauge directions
  // (scale, global phase) are flat, so the simplex size is no convergence
  // signal; the last polish must leave E unchanged instead.
  double last_change = 0.0;
  for (double step : {1e-2, 1e-4}) {
    const RunResult run = nelder_mead(ctx, best.x, step, opt.max_iter, 1e-12);
    last_change = std::abs(run.f - best.f);
    if (run.f <= best.f) best = run;
  }
  gsl_set_error_handler(old);

  CVec c = unpack(ctx, best.x);
  // Gauge c_0 = 1 for reporting (fall back to the largest entry).
  Eigen::Index k0 = 0;
  if (std::abs(c[0]) < 1e-12 * c.cwiseAbs().maxCoeff()) c.cwiseAbs().maxCoeff(&k0);
  c /= c[k0];
  EntanglementReport rep = entropy_of_coeffs(ctx.basis, c);
  rep.c_opt.assign(c.data(), c.data() + c.size());
  rep.converged = last_change < 1e-10;
  return rep;
}

EntanglementReport semi_success_entropy(const EliminationRoots& roots, const std::vector<int>& missing,
                                        cplx alpha, cplx beta, double chi) {
  const auto ct = semi_success_coeffs(roots, missing);
  return entropy_of_coeffs(PairBasis::standard(alpha, beta, chi, static_cast<int>(ct.size()) - 1), to_cvec(ct));
}

double binary_entropy(double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("binary entropy argument must lie in (0,1)");
  return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

double weak_entanglement_estimate(cplx alpha, cplx gamma, double chi) {
  return binary_entropy(chi * chi * std::norm(alpha) * std::norm(gamma));
}

}  // namespace kerrq

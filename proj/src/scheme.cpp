#include "kerrq/scheme.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multiroots.h>
#include <gsl/gsl_vector.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

namespace kerrq {

namespace {

constexpr cplx I{0.0, 1.0};

// p(y) and p'(y) for ascending coefficients.
std::pair<cplx, cplx> horner(const std::vector<cplx>& a, cplx y) {
  cplx p = 0.0, dp = 0.0;
  for (int n = static_cast<int>(a.size()) - 1; n >= 0; --n) {
    dp = dp * y + p;
    p = p * y + a[n];
  }
  return {p, dp};
}

double wrap_angle(double x) {
  x = std::remainder(x, 2 * M_PI);
  if (x <= -M_PI) x += 2 * M_PI;
  return x;
}

}  // namespace

int EliminationRoots::K() const {
  int k = 0;
  for (const auto& r : roots) k += r.mult;
  return k;
}

std::vector<cplx> EliminationRoots::expanded() const {
  std::vector<cplx> out;
  for (const auto& r : roots)
    for (int l = 0; l < r.mult; ++l) out.push_back(r.value);
  return out;
}

cplx root_polynomial(const TargetCoefficients& target, cplx gamma, cplx x) {
  return horner(target.c, x / gamma).first;
}

EliminationRoots solve_roots(const TargetCoefficients& target, cplx gamma) {
  const int K = target.K();
  if (K < 1) throw InvalidArgument("target needs K >= 1 (at least two coefficients)");
  if (gamma == 0.0) throw DomainError("probe amplitude gamma must be nonzero");
  double cmax = 0.0;
  for (const auto& c : target.c) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) throw InvalidArgument("target coefficients are all zero");
  if (std::abs(target.c[K]) < 1e-14 * cmax)
    throw DegenerateLeadingCoefficient("leading coefficient c_K vanishes");

  // Companion matrix of the monic polynomial in y = x / gamma.
  CMat comp = CMat::Zero(K, K);
  for (int k = 1; k < K; ++k) comp(k, k - 1) = 1.0;
  for (int k = 0; k < K; ++k) comp(k, K - 1) = -target.c[k] / target.c[K];
  Eigen::ComplexEigenSolver<CMat> es(comp, false);
  std::vector<cplx> y(es.eigenvalues().data(), es.eigenvalues().data() + K);

  double ymax = 0.0;
  for (const auto& v : y) ymax = std::max(ymax, std::abs(v));
  const double tol = kMergeTol * std::max(ymax, 1e-300);

  std::vector<std::vector<cplx>> clusters;
  for (const auto& v : y) {
    bool placed = false;
    for (auto& cl : clusters) {
      cplx mean = 0.0;
      for (const auto& u : cl) mean += u;
      mean /= static_cast<double>(cl.size());
      if (std::abs(v - mean) <= tol) {
        cl.push_back(v);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({v});
  }

  EliminationRoots out;
  out.gamma = gamma;
  for (const auto& cl : clusters) {
    cplx v = 0.0;
    for (const auto& u : cl) v += u;
    v /= static_cast<double>(cl.size());
    if (cl.size() == 1) {
      for (int it = 0; it < 8; ++it) {
        const auto [p, dp] = horner(target.c, v);
        if (dp == 0.0) break;
        const cplx step = p / dp;
        v -= step;
        if (std::abs(step) <= 1e-16 * std::max(std::abs(v), 1.0)) break;
      }
    }
    out.roots.push_back({v * gamma, static_cast<int>(cl.size())});
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) {
    const double aa = std::arg(a.value), ab = std::arg(b.value);
    if (std::abs(aa - ab) > 1e-12) return aa < ab;
    return std::abs(a.value) < std::abs(b.value);
  });
  return out;
}

Transmittances transmittances(int K, double delta) {
  if (K < 1) throw InvalidArgument("K must be at least 1");
  if (!(delta >= 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in [0,1)");
  Transmittances t;
  for (int j = 1; j <= K; ++j) {
    const double Tj = ((K - j - 1) * (1 - delta) + 1) / ((K - j) * (1 - delta) + 1);
    t.T.push_back(Tj);
    t.theta.push_back(std::acos(std::sqrt(Tj)));
  }
  t.q = 1.0 / std::sqrt(K + delta / (1 - delta));
  return t;
}

std::vector<cplx> reference_amplitudes(const EliminationRoots& roots, const Transmittances& tr) {
  const auto g = roots.expanded();
  if (g.size() != tr.T.size()) throw ShapeMismatch("root count differs from cascade length");
  std::vector<cplx> out;
  cplx partial = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double s2 = std::sin(tr.theta[j]) * std::sin(tr.theta[j]);
    out.push_back(-I * tr.q / std::cos(tr.theta[j]) * (g[j] + s2 * partial));
    partial += g[j];
  }
  return out;
}

std::vector<cplx> reference_network_outputs(const ReferenceNetwork& net) {
  const int K = static_cast<int>(net.theta_p.size()) + 1;
  std::vector<cplx> out;
  double prod = 1.0;
  for (int j = 0; j < K - 1; ++j) {
    out.push_back(I * prod * std::sin(net.theta_p[j]) * std::exp(I * net.phi[j]) * net.gtilde_master);
    prod *= std::cos(net.theta_p[j]);
  }
  out.push_back(I * prod * net.gtilde_master);
  return out;
}

namespace {

struct NetProblem {
  std::vector<cplx> target;  // scaled to unit max modulus
  std::vector<int> active;   // indices j < K-1 with nonzero target
};

ReferenceNetwork unpack(const NetProblem& p, const gsl_vector* x, int K) {
  ReferenceNetwork n;
  n.theta_p.assign(K - 1, 0.0);
  n.phi.assign(K - 1, 0.0);
  const std::size_t a = p.active.size();
  for (std::size_t k = 0; k < a; ++k) {
    n.theta_p[p.active[k]] = gsl_vector_get(x, k);
    n.phi[p.active[k]] = gsl_vector_get(x, a + k);
  }
  n.gtilde_master = cplx(gsl_vector_get(x, 2 * a), gsl_vector_get(x, 2 * a + 1));
  return n;
}

int net_f(const gsl_vector* x, void* params, gsl_vector* f) {
  const auto* p = static_cast<const NetProblem*>(params);
  const int K = static_cast<int>(p->target.size());
  const auto out = reference_network_outputs(unpack(*p, x, K));
  std::size_t r = 0;
  for (int j : p->active) {
    gsl_vector_set(f, r++, (out[j] - p->target[j]).real());
    gsl_vector_set(f, r++, (out[j] - p->target[j]).imag());
  }
  gsl_vector_set(f, r++, (out[K - 1] - p->target[K - 1]).real());
  gsl_vector_set(f, r++, (out[K - 1] - p->target[K - 1]).imag());
  return GSL_SUCCESS;
}

int net_df(const gsl_vector* x, void* params, gsl_matrix* J) {
  gsl_multiroot_function fn{&net_f, x->size, params};
  gsl_vector* f = gsl_vector_alloc(x->size);
  net_f(x, params, f);
  const int st = gsl_multiroot_fdjacobian(&fn, x, f, 1e-9, J);
  gsl_vector_free(f);
  return st;
}

int net_fdf(const gsl_vector* x, void* params, gsl_vector* f, gsl_matrix* J) {
  net_f(x, params, f);
  return net_df(x, params, J);
}

}  // namespace

ReferenceNetwork reference_network(const std::vector<cplx>& gtilde) {
  const int K = static_cast<int>(gtilde.size());
  if (K < 1) throw InvalidArgument("empty reference list");
  double scale = 0.0, energy = 0.0;
  for (const auto& g : gtilde) {
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
      throw NoSolution("reference amplitude is not finite");
    scale = std::max(scale, std::abs(g));
    energy += std::norm(g);
  }
  if (scale == 0.0) throw NoSolution("all reference amplitudes vanish");

  NetProblem p;
  for (const auto& g : gtilde) p.target.push_back(g / scale);
  // A zero amplitude with j < K fixes theta'_j = 0 and leaves phi_j free;
  // it is pinned to 0 and removed from the unknowns.
  for (int j = 0; j < K - 1; ++j)
    if (gtilde[j] != 0.0) p.active.push_back(j);

  const std::size_t a = p.active.size();
  const std::size_t n = 2 * a + 2;
  gsl_vector* x = gsl_vector_alloc(n);
  cplx ref_dir = gtilde[K - 1] != 0.0 ? gtilde[K - 1] : gtilde[p.active.back()];
  const double ref_arg = std::arg(ref_dir);
  // Exact cascade split as the starting point: sin theta'_j = |g_j| / sqrt(sum_{k>=j} |g_k|^2).
  std::vector<double> tail(K + 1, 0.0);
  for (int j = K - 1; j >= 0; --j) tail[j] = tail[j + 1] + std::norm(gtilde[j]);
  for (std::size_t k = 0; k < a; ++k) {
    const int j = p.active[k];
    gsl_vector_set(x, k, std::asin(std::min(1.0, std::abs(gtilde[j]) / std::sqrt(tail[j]))));
    gsl_vector_set(x, a + k, wrap_angle(std::arg(gtilde[j]) - ref_arg));
  }
  const cplx g0 = std::sqrt(energy) / scale * std::exp(I * (ref_arg - M_PI / 2));
  gsl_vector_set(x, 2 * a, g0.real());
  gsl_vector_set(x, 2 * a + 1, g0.imag());

  gsl_multiroot_function_fdf fdf{&net_f, &net_df, &net_fdf, n, &p};
  gsl_multiroot_fdfsolver* s = gsl_multiroot_fdfsolver_alloc(gsl_multiroot_fdfsolver_gnewton, n);
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  gsl_multiroot_fdfsolver_set(s, &fdf, x);
  int status = GSL_CONTINUE;
  for (int it = 0; it < 200 && status == GSL_CONTINUE; ++it) {
    if (gsl_multiroot_fdfsolver_iterate(s)) break;
    status = gsl_multiroot_test_residual(s->f, 1e-13);
  }
  ReferenceNetwork net = unpack(p, s->x, K);
  gsl_multiroot_fdfsolver_free(s);
  gsl_vector_free(x);
  gsl_set_error_handler(old);

  // Canonical form: theta' in [0, pi/2], phi in (-pi, pi]. Sign flips of
  // sin/cos are absorbed into phi_j and the master amplitude.
  std::vector<int> sign(K, 1);
  int prod_cos = 1;
  for (int j = 0; j < K - 1; ++j) {
    const double sn = std::sin(net.theta_p[j]), cs = std::cos(net.theta_p[j]);
    sign[j] = prod_cos * (sn < 0 ? -1 : 1);
    prod_cos *= cs < 0 ? -1 : 1;
    net.theta_p[j] = std::atan2(std::abs(sn), std::abs(cs));
  }
  for (int j = 0; j < K - 1; ++j) {
    if (sign[j] != prod_cos) net.phi[j] += M_PI;
    net.phi[j] = gtilde[j] == 0.0 ? 0.0 : wrap_angle(net.phi[j]);
  }
  net.gtilde_master *= static_cast<double>(prod_cos) * scale;
  for (double th : net.theta_p) net.Tp.push_back(std::cos(th) * std::cos(th));

  const auto out = reference_network_outputs(net);
  double res = 0.0;
  for (int j = 0; j < K; ++j) res = std::max(res, std::abs(out[j] - gtilde[j]) / scale);
  net.residual = res;
  if (res > 1e-8) throw NoSolution("reference network residual " + std::to_string(res));
  return net;
}

std::vector<cplx> cascade_outputs(const DetectionScheme& scheme, cplx gamma_x) {
  std::vector<cplx> out(scheme.K + 1);
  cplx c = gamma_x;
  for (int j = 0; j < scheme.K; ++j) {
    const double cs = std::cos(scheme.theta[j]), sn = std::sin(scheme.theta[j]);
    const cplx d = scheme.gtilde[j];
    out[j + 1] = d * cs + I * c * sn;
    c = c * cs + I * d * sn;
  }
  out[0] = c;
  return out;
}

CVec phi_vector(const TargetCoefficients& target, cplx gamma) {
  if (gamma == 0.0) throw DomainError("probe amplitude gamma must be nonzero");
  const int K = target.K();
  CVec out(K + 1);
  // Q_n(gamma) computed directly; no tail condition applies here.
  cplx q = std::exp(-0.5 * std::norm(gamma));
  for (int n = 0; n <= K; ++n) {
    if (n > 0) q *= gamma / std::sqrt(static_cast<double>(n));
    out[n] = std::conj(target.c[n]) / std::conj(q);
  }
  return out;
}

std::vector<cplx> poly_from_roots(const std::vector<cplx>& r) {
  std::vector<cplx> a{1.0};
  for (const auto& root : r) {
    std::vector<cplx> b(a.size() + 1, 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      b[k + 1] += a[k];
      b[k] -= root * a[k];
    }
    a = std::move(b);
  }
  return a;
}

TargetCoefficients coeffs_from_photon_target(int s, int K, double chi) {
  if (K < 1 || s < 0 || s > K) throw InvalidArgument("need 0 <= s <= K and K >= 1");
  std::vector<cplx> r;
  for (int sp = 0; sp <= K; ++sp)
    if (sp != s) r.push_back(std::exp(I * (chi * sp)));
  return {poly_from_roots(r)};
}

std::vector<cplx> semi_success_coeffs(const EliminationRoots& roots, const std::vector<int>& missing) {
  const auto g = roots.expanded();
  const int K = static_cast<int>(g.size());
  std::vector<cplx> kept;
  for (int m = 1; m <= K; ++m) {
    if (std::find(missing.begin(), missing.end(), m) != missing.end()) continue;
    kept.push_back(g[m - 1] / roots.gamma);
  }
  for (int m : missing)
    if (m < 1 || m > K) throw InvalidArgument("missing detector index out of range");
  return poly_from_roots(kept);
}

DetectionScheme design_scheme(const TargetCoefficients& target, cplx gamma, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  DetectionScheme s;
  s.roots = solve_roots(target, gamma);
  s.K = target.K();
  s.delta = delta;
  s.gamma = gamma;
  s.c = target.c;
  const auto tr = transmittances(s.K, delta);
  s.T = tr.T;
  s.theta = tr.theta;
  s.q = tr.q;
  s.gtilde = reference_amplitudes(s.roots, tr);
  s.ref_net = reference_network(s.gtilde);
  return s;
}

namespace {
nlohmann::json cj(cplx z) { return nlohmann::json{{"re", z.real()}, {"im", z.imag()}}; }
cplx jc(const nlohmann::json& j) { return {j.at("re").get<double>(), j.at("im").get<double>()}; }
}  // namespace

std::string scheme_to_json(const DetectionScheme& s) {
  nlohmann::json j;
  j["K"] = s.K;
  j["delta"] = s.delta;
  j["gamma"] = cj(s.gamma);
  for (const auto& c : s.c) j["c"].push_back(cj(c));
  for (const auto& r : s.roots.roots)
    j["roots"].push_back({{"re", r.value.real()}, {"im", r.value.imag()}, {"mult", r.mult}});
  j["T"] = s.T;
  j["q"] = s.q;
  for (const auto& g : s.gtilde) j["gtilde"].push_back(cj(g));
  j["ref_net"]["Tp"] = s.ref_net.Tp;
  j["ref_net"]["phi"] = s.ref_net.phi;
  j["ref_net"]["gtilde_master"] = cj(s.ref_net.gtilde_master);
  // nlohmann writes doubles with 17 significant digits (round-trip exact).
  return j.dump(2);
}

DetectionScheme scheme_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("scheme file: ") + e.what());
  }
  try {
    DetectionScheme s;
    s.K = j.at("K").get<int>();
    s.delta = j.at("delta").get<double>();
    s.gamma = jc(j.at("gamma"));
    if (j.contains("c"))
      for (const auto& c : j["c"]) s.c.push_back(jc(c));
    s.roots.gamma = s.gamma;
    for (const auto& r : j.at("roots"))
      s.roots.roots.push_back({jc(r), r.at("mult").get<int>()});
    s.T = j.at("T").get<std::vector<double>>();
    for (double t : s.T) s.theta.push_back(std::acos(std::sqrt(t)));
    s.q = j.at("q").get<double>();
    for (const auto& g : j.at("gtilde")) s.gtilde.push_back(jc(g));
    s.ref_net.Tp = j.at("ref_net").at("Tp").get<std::vector<double>>();
    for (double t : s.ref_net.Tp) s.ref_net.theta_p.push_back(std::acos(std::sqrt(t)));
    s.ref_net.phi = j.at("ref_net").at("phi").get<std::vector<double>>();
    s.ref_net.gtilde_master = jc(j.at("ref_net").at("gtilde_master"));
    if (s.roots.K() != s.K || static_cast<int>(s.T.size()) != s.K ||
        static_cast<int>(s.gtilde.size()) != s.K)
      throw InvalidArgument("scheme file: inconsistent K");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("scheme file: ") + e.what());
  }
}

}  // namespace kerrq

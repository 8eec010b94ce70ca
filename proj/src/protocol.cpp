#include "kerrq/protocol.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

#include "kerrq/entanglement.hpp"

namespace kerrq {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr int kFockRowLimit = 4096;
// Largest joint (ab, probe, detector arms) tensor simulate() will allocate.
constexpr double kMaxAmplitudes = 2e7;

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Representation of the (a, b) subsystem shared by both simulation paths.
struct AbRep {
  bool span = false;
  int da = 0, db = 0;
  PairBasis basis;      // rows of the span representation
  CMat metric;          // G^{1/2}
  CMat metric_pinv;     // pseudo-inverse of G^{1/2}
  cplx alpha, beta;
  double chi = 0.0;
  double tol = 1e-16;

  int rows() const { return span ? basis.size() : da * db; }
  std::vector<std::string> modes() const {
    return span ? std::vector<std::string>{"ab"} : std::vector<std::string>{"a", "b"};
  }
  std::vector<int> dims() const { return span ? std::vector<int>{rows()} : std::vector<int>{da, db}; }

  DensOp densop(const CMat& rows_factor) const {
    return DensOp(modes(), dims(), span ? CMat(metric * rows_factor) : rows_factor);
  }

  // State sum_n coeffs[n] |pair_n> in this representation.
  FockVector pair_state(const std::vector<cplx>& coeffs) const {
    if (span) {
      CVec c = CVec::Zero(rows());
      for (std::size_t n = 0; n < coeffs.size(); ++n) c[static_cast<Eigen::Index>(n)] = coeffs[n];
      return FockVector(modes(), dims(), metric * c);
    }
    const auto b = PairBasis::standard(alpha, beta, chi, static_cast<int>(coeffs.size()) - 1);
    return span_to_fock(b, to_cvec(coeffs), da, db, std::max(tol, 1e-14));
  }

  double entanglement(const DensOp& rho) const {
    const FockVector u = rho.principal_vector();
    if (!span) return entanglement_entropy(u, {"a"});
    return entropy_of_coeffs(basis, metric_pinv * u.amplitudes()).E;
  }
};

int probe_cutoff(const ProtocolParams& p) { return cutoff_for(std::abs(p.gamma), p.trunc.tail_tol); }

AbRep make_rep(const ProtocolParams& p, AbBasis choice) {
  AbRep r;
  r.alpha = p.alpha;
  r.beta = p.beta;
  r.chi = p.chi;
  r.tol = p.trunc.tail_tol;
  r.da = cutoff_for(std::abs(p.alpha), r.tol) + 1;
  r.db = cutoff_for(std::abs(p.beta), r.tol) + 1;
  r.span = choice == AbBasis::CoherentSpan ||
           (choice == AbBasis::Auto && static_cast<long>(r.da) * r.db > kFockRowLimit);
  if (r.span) {
    r.basis = PairBasis::standard(p.alpha, p.beta, p.chi, probe_cutoff(p));
    const CMat g = cross_gram(r.basis, r.basis);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (g + g.adjoint()));
    Eigen::VectorXd s = es.eigenvalues(), si = s;
    const double top = s.maxCoeff();
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      const bool keep = s[k] > 1e-14 * top;
      s[k] = keep ? std::sqrt(s[k]) : 0.0;
      si[k] = keep ? 1.0 / s[k] : 0.0;
    }
    r.metric = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
    r.metric_pinv = es.eigenvectors() * si.asDiagonal() * es.eigenvectors().adjoint();
  }
  return r;
}

// State after the Kerr stage as a (rows x probe-dim) coefficient matrix.
CMat kerr_stage(const ProtocolParams& p, const AbRep& rep) {
  const int nc = probe_cutoff(p);
  const double tol = p.trunc.tail_tol;
  if (rep.span) {
    const CVec q = coherent_amplitudes(p.gamma, nc, tol);
    return q.asDiagonal();
  }
  FockVector psi = tensor(tensor(FockVector::coherent("a", p.alpha, rep.da - 1, tol),
                                 FockVector::coherent("b", p.beta, rep.db - 1, tol)),
                          FockVector::coherent("c", p.gamma, nc, tol));
  psi = apply_cross_kerr(psi, "a", "c", p.chi);
  psi = apply_cross_kerr(psi, "b", "c", p.chi);
  return Eigen::Map<const RowMat>(psi.amplitudes().data(), rep.rows(), nc + 1);
}

// Row-major tensor t with the given dims; replaces axis k by C * axis.
CVec contract_axis(const CVec& t, std::vector<int>& dims, int k, const CMat& C) {
  long outer = 1, inner = 1;
  for (int i = 0; i < k; ++i) outer *= dims[i];
  for (std::size_t i = k + 1; i < dims.size(); ++i) inner *= dims[i];
  const long dk = dims[k], rk = C.rows();
  CVec out(outer * rk * inner);
  for (long o = 0; o < outer; ++o) {
    Eigen::Map<const RowMat> in(t.data() + o * dk * inner, dk, inner);
    Eigen::Map<RowMat> res(out.data() + o * rk * inner, rk, inner);
    res.noalias() = C * in;
  }
  dims[k] = static_cast<int>(rk);
  return out;
}

// Truncated amplitudes of |z> without a tail condition.
CVec truncated_coherent(cplx z, int dim) { return coherent_amplitudes(z, dim - 1, 1.0); }

// Contraction of one detector mode. No click: <v| with v the truncated
// vacuum of the detector expressed in the fluctuation frame. Click: the
// square root of 1 - |v><v|, which keeps the mode as a purification index.
CMat detector_map(const CVec& v, bool click) {
  if (!click) return v.adjoint();
  const double s = std::min(v.squaredNorm(), 1.0);
  const double kappa = -1.0 / (1.0 + std::sqrt(1.0 - s));
  return CMat::Identity(v.size(), v.size()) + kappa * v * v.adjoint();
}

struct Network {
  std::vector<double> theta;
  std::vector<cplx> ref;       // reference amplitudes
  std::vector<cplx> post;      // displacement applied to each arm after the cascade
};

Network network_for(const DetectionScheme& s, bool displacement_variant) {
  if (!displacement_variant) return {s.theta, s.gtilde, std::vector<cplx>(s.K, 0.0)};
  const auto tr = transmittances(s.K, 0.0);
  const auto g = s.roots.expanded();
  Network n{tr.theta, std::vector<cplx>(s.K, 0.0), {}};
  for (const auto& gj : g) n.post.push_back(-I * tr.q * gj);
  return n;
}

struct Propagated {
  CVec t;                   // tensor over (rows, c, d_1..d_K)
  std::vector<int> dims;
  std::vector<cplx> frame;  // classical frame of each detector mode
};

Propagated propagate(const CMat& X, const Network& net, ReferenceFrame frame, int dim, double tol) {
  const int R = static_cast<int>(X.rows());
  const int K = static_cast<int>(net.theta.size());
  RowMat x0 = RowMat::Zero(R, dim);
  x0.leftCols(X.cols()) = X;
  FockVector s({"ab", "c"}, {R, dim}, Eigen::Map<const CVec>(x0.data(), x0.size()), tol);
  std::vector<cplx> z(K, 0.0);
  for (int j = 0; j < K; ++j) {
    const std::string m = "d" + std::to_string(j + 1);
    if (frame == ReferenceFrame::Displaced) {
      z[j] = net.ref[j];
      s = tensor(s, FockVector::vacuum({m}, {dim}, tol));
    } else {
      s = tensor(s, FockVector::single(m, coherent_amplitudes(net.ref[j], dim - 1, tol), tol));
    }
  }
  cplx zc = 0.0;
  for (int j = 0; j < K; ++j) {
    const std::string m = "d" + std::to_string(j + 1);
    s = apply_beamsplitter(s, "c", m, net.theta[j]);
    const double cs = std::cos(net.theta[j]), sn = std::sin(net.theta[j]);
    const cplx zd = z[j];
    z[j] = zd * cs + I * zc * sn;
    zc = zc * cs + I * zd * sn;
  }
  for (int j = 0; j < K; ++j) z[j] += net.post[j];
  return {s.amplitudes(), s.dims(), z};
}

// Factor (rows x purification) of the post-selected (a, b) state.
CMat pattern_factor(const Propagated& pr, const std::vector<bool>& pattern) {
  CVec t = pr.t;
  std::vector<int> dims = pr.dims;
  for (std::size_t j = 0; j < pattern.size(); ++j) {
    const int k = static_cast<int>(j) + 2;
    const CVec v = truncated_coherent(-pr.frame[j], dims[k]);
    t = contract_axis(t, dims, k, detector_map(v, pattern[j]));
  }
  const long cols = static_cast<long>(t.size()) / dims[0];
  return Eigen::Map<const RowMat>(t.data(), dims[0], cols);
}

std::vector<bool> pattern_of(int bits, int K) {
  std::vector<bool> p(K);
  for (int j = 0; j < K; ++j) p[j] = (bits >> j) & 1;
  return p;
}

std::vector<int> missing_of(const std::vector<bool>& pattern) {
  std::vector<int> m;
  for (std::size_t j = 0; j < pattern.size(); ++j)
    if (!pattern[j]) m.push_back(static_cast<int>(j) + 1);
  return m;
}

OutcomeRecord make_record(const AbRep& rep, const ProtocolParams& p, const std::vector<bool>& pattern,
                          const CMat& factor) {
  OutcomeRecord rec;
  rec.pattern = pattern;
  DensOp rho = rep.densop(factor).compressed();
  rec.probability = rho.trace();
  if (rec.probability <= 0.0) {
    rec.state = rho;
    return rec;
  }
  rec.state = rho.normalized();
  rec.fidelity = fidelity(rec.state, rep.pair_state(semi_success_coeffs(p.scheme.roots, missing_of(pattern))));
  rec.entanglement = rep.entanglement(rec.state);
  return rec;
}

int lab_dim(const ProtocolParams& p, const Network& net, const SimOptions& opt) {
  if (opt.lab_n_max > 0) return opt.lab_n_max + 1;
  double amp = std::abs(p.gamma);
  for (const auto& g : net.ref) amp += std::abs(g);
  return cutoff_for(amp, p.trunc.tail_tol) + 1;
}

std::vector<OutcomeRecord> simulate(const ProtocolParams& p, const SimOptions& opt, bool all_click_only) {
  p.validate();
  const AbRep rep = make_rep(p, opt.ab);
  const CMat X = kerr_stage(p, rep);
  const Network net = network_for(p.scheme, opt.displacement_variant);
  const int dim = opt.frame == ReferenceFrame::Displaced ? static_cast<int>(X.cols()) : lab_dim(p, net, opt);
  if (dim < X.cols()) throw InvalidArgument("lab cutoff below the probe cutoff");
  const double amps = static_cast<double>(X.rows()) * std::pow(static_cast<double>(dim), p.scheme.K + 1);
  if (amps > kMaxAmplitudes)
    throw TruncationOverflow("network state needs " + std::to_string(static_cast<long long>(amps)) + " amplitudes (limit " +
                             std::to_string(static_cast<long long>(kMaxAmplitudes)) + "); reduce |gamma| or K");
  const Propagated pr = propagate(X, net, opt.frame, dim, p.trunc.tail_tol);
  const int K = p.scheme.K;
  std::vector<OutcomeRecord> out;
  for (int bits = all_click_only ? (1 << K) - 1 : 0; bits < (1 << K); ++bits) {
    const auto pattern = pattern_of(bits, K);
    out.push_back(make_record(rep, p, pattern, pattern_factor(pr, pattern)));
  }
  return out;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

// z^n with 0^0 = 1.
template <class T>
T ipow(T z, int n) {
  T r = 1.0;
  for (int k = 0; k < n; ++k) r *= z;
  return r;
}

}  // namespace

ProtocolParams ProtocolParams::make(const TargetCoefficients& target, cplx alpha, cplx beta, cplx gamma,
                                    double chi, double delta, double tail_tol) {
  ProtocolParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = gamma;
  p.chi = chi;
  p.target = target;
  p.scheme = design_scheme(target, gamma, delta);
  p.trunc.tail_tol = tail_tol;
  p.validate();
  return p;
}

void ProtocolParams::validate() const {
  if (!(chi > 0.0 && chi <= M_PI)) throw InvalidArgument("chi must lie in (0, pi]");
  if (target.K() < 1) throw InvalidArgument("target needs at least two coefficients");
  if (scheme.K != target.K() || scheme.gamma != gamma) throw InvalidArgument("scheme was designed for another target");
  if (!(trunc.tail_tol > 0.0 && trunc.tail_tol < 1.0)) throw InvalidArgument("tail_tol must lie in (0,1)");
  if (std::norm(gamma) > 0.5) spdlog::warn("|gamma|^2 = {} is not small; leading-order results degrade", std::norm(gamma));
}

FockVector analytic_target_state(const TargetCoefficients& target, cplx alpha, cplx beta, double chi, int dim_a,
                                 int dim_b, double tail_tol) {
  if (target.c.empty()) throw InvalidArgument("empty target");
  if (dim_a <= 0) dim_a = cutoff_for(std::abs(alpha), tail_tol) + 1;
  if (dim_b <= 0) dim_b = cutoff_for(std::abs(beta), tail_tol) + 1;
  const auto basis = PairBasis::standard(alpha, beta, chi, target.K());
  return span_to_fock(basis, to_cvec(target.c), dim_a, dim_b, tail_tol).normalized();
}

std::vector<OutcomeRecord> run_full_protocol(const ProtocolParams& params, const SimOptions& opt) {
  return simulate(params, opt, false);
}

OutcomeRecord run_all_click(const ProtocolParams& params, const SimOptions& opt) {
  return simulate(params, opt, true).front();
}

CMat elimination_operator(int dim, cplx gamma_j, int n, double q) {
  if (n < 0) throw InvalidArgument("photon count must be non-negative");
  const CMat a = annihilation_matrix(dim) - gamma_j * CMat::Identity(dim, dim);
  CMat out = CMat::Identity(dim, dim) * (std::pow(q, n) / std::sqrt(factorial(n)));
  for (int k = 0; k < n; ++k) out = a * out;
  return out;
}

CMat probe_trace_operator(int dim, const std::vector<cplx>& roots, double q) {
  const double q2 = q * q;
  const double s2 = std::max(1.0 - static_cast<double>(roots.size()) * q2, 0.0);
  cplx G = 0.0;
  double sum_abs = 0.0;
  for (const auto& g : roots) {
    G += g;
    sum_abs += std::norm(g);
  }
  // H = exp(-q^2 sum|g_j|^2) exp(q^2 G c^+) s2^{c^+ c} exp(q^2 G^* c)
  CMat h(dim, dim);
  for (int m = 0; m < dim; ++m)
    for (int n = 0; n < dim; ++n) {
      cplx acc = 0.0;
      for (int k = 0; k <= std::min(m, n); ++k)
        acc += ipow(s2, k) * ipow(q2 * G, m - k) * ipow(q2 * std::conj(G), n - k) /
               (factorial(m - k) * factorial(n - k) * factorial(k));
      h(m, n) = std::exp(-q2 * sum_abs) * std::sqrt(factorial(m) * factorial(n)) * acc;
    }
  return h;
}

namespace {

// Stage shared by every photon-count term: Kerr-stage state and the probe trace root.
struct OperatorPath {
  AbRep rep;
  CMat X;
  CMat hs_t;
  std::vector<cplx> g;
  double q;

  OperatorPath(const ProtocolParams& params, AbBasis ab)
      : rep(make_rep(params, ab)), g(params.scheme.roots.expanded()), q(params.scheme.q) {
    X = kerr_stage(params, rep);
    const int dim = static_cast<int>(X.cols());
    hs_t = psd_sqrt(probe_trace_operator(dim, g, q), 0.0).transpose();
  }

  // rho_ab = Tr_c[H^{1/2} B Psi Psi^+ B^+ H^{1/2}], X holds Psi as (rows x c).
  DensOp term(const std::vector<int>& counts) const {
    if (counts.size() != g.size()) throw ShapeMismatch("one photon count per detector is required");
    const int dim = static_cast<int>(X.cols());
    CMat B = CMat::Identity(dim, dim);
    for (std::size_t j = 0; j < g.size(); ++j) B = elimination_operator(dim, g[j], counts[j], q) * B;
    return rep.densop(X * B.transpose() * hs_t);
  }
};

}  // namespace

DensOp operator_path_final_state(const ProtocolParams& params, const std::vector<int>& counts, AbBasis ab) {
  params.validate();
  return OperatorPath(params, ab).term(counts);
}

DensOp operator_path_sum(const ProtocolParams& params, const std::vector<bool>& pattern, int n_cut, AbBasis ab) {
  if (n_cut < 1) throw InvalidArgument("n_cut must be at least 1");
  params.validate();
  const int K = static_cast<int>(pattern.size());
  if (K != params.scheme.K) throw ShapeMismatch("one pattern entry per detector is required");
  const OperatorPath path(params, ab);
  std::vector<int> counts(K);
  for (int j = 0; j < K; ++j) counts[j] = pattern[j] ? 1 : 0;
  DensOp acc;
  bool first = true;
  while (true) {
    const DensOp term = path.term(counts);
    acc = first ? term : mix(acc, term);
    first = false;
    int j = 0;
    for (; j < K; ++j) {
      if (!pattern[j]) continue;
      if (++counts[j] <= n_cut) break;
      counts[j] = 1;
    }
    if (j == K) break;
  }
  return acc.compressed();
}

OracleReport oracle_equivalence(const ProtocolParams& params, int n_cut, AbBasis ab) {
  const std::vector<bool> all(params.scheme.K, true);
  SimOptions opt;
  opt.ab = ab;
  OracleReport r;
  const OutcomeRecord full = run_all_click(params, opt);
  r.trace_distance = trace_distance(full.state, operator_path_sum(params, all, n_cut, ab).normalized());
  auto residual = [&](const ProtocolParams& p, const OutcomeRecord& rec) {
    const AbRep rep = make_rep(p, ab);
    return trace_distance(rec.state, DensOp::pure(rep.pair_state(p.target.c).normalized()));
  };
  r.leading_residual = residual(params, full);
  const ProtocolParams half =
      ProtocolParams::make(params.target, params.alpha, params.beta, params.gamma / 2.0, params.chi,
                           params.scheme.delta, params.trunc.tail_tol);
  r.leading_residual_half = residual(half, run_all_click(half, opt));
  r.scaling_exponent = std::log2(r.leading_residual / r.leading_residual_half);
  return r;
}

double success_probability_ideal(const TargetCoefficients& target, cplx alpha, cplx beta, double chi, cplx gamma,
                                 double q) {
  if (gamma == 0.0) return 0.0;
  const int K = target.K();
  const double norm2 = span_norm2(PairBasis::standard(alpha, beta, chi, K), to_cvec(target.c));
  if (norm2 <= 0.0) throw DomainError("target state has zero norm");
  const double cK2 = std::norm(target.c[K]) / norm2;
  if (cK2 <= 0.0) throw DegenerateLeadingCoefficient("c_K vanishes");
  return std::pow(q * q * std::norm(gamma), K) / cK2;
}

std::vector<double> detector_click_probabilities(const DetectionScheme& scheme, const FockVector& probe) {
  if (probe.modes().size() != 1) throw InvalidArgument("probe must be a single mode");
  const int dim = probe.dims()[0];
  const CMat X = probe.amplitudes().transpose();
  const Propagated pr = propagate(X, network_for(scheme, false), ReferenceFrame::Displaced, dim, probe.tail_tol());
  std::vector<double> out;
  for (int j = 0; j < scheme.K; ++j) {
    CVec t = pr.t;
    std::vector<int> dims = pr.dims;
    const CVec v = truncated_coherent(-pr.frame[j], dim);
    t = contract_axis(t, dims, j + 2, detector_map(v, true));
    out.push_back(t.squaredNorm());
  }
  return out;
}

FockVector photon_added_coherent(cplx z, int s, int dim, double tail_tol) {
  if (s < 0) throw InvalidArgument("photon number must be non-negative");
  CVec v = coherent_amplitudes(z, dim - 1, tail_tol);
  const CMat ad = annihilation_matrix(dim).adjoint();
  for (int k = 0; k < s; ++k) v = ad * v;
  if (v.tail(s + 1).squaredNorm() > tail_tol * v.squaredNorm())
    throw TailTooHeavy("photon-added state reaches the cutoff");
  return FockVector::single("c", v.normalized(), tail_tol);
}

double pacs_split_joint_click(cplx gamma1, int s) {
  const double tol = 1e-15;
  const int dim = cutoff_for(std::abs(gamma1), tol) + 2 * s + 8;
  FockVector st = tensor(photon_added_coherent(gamma1, s, dim, tol), FockVector::vacuum({"e"}, {dim}, tol));
  const double th = M_PI / 4;
  st = apply_beamsplitter(st, "c", "e", th);
  // Arm amplitudes of |gamma1> after the splitter.
  const cplx uc = gamma1 * std::cos(th), ue = I * gamma1 * std::sin(th);
  CVec t = st.amplitudes();
  std::vector<int> dims = st.dims();
  t = contract_axis(t, dims, 0, detector_map(truncated_coherent(uc, dim), true));
  t = contract_axis(t, dims, 1, detector_map(truncated_coherent(ue, dim), true));
  return t.squaredNorm();
}

}  // namespace kerrq

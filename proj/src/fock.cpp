#include "kerrq/fock.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <unsupported/Eigen/MatrixFunctions>

namespace kerrq {

namespace {

constexpr cplx I{0.0, 1.0};

std::size_t total_dim(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::vector<std::size_t> strides_of(const std::vector<int>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k)
    s[k] = s[k + 1] * static_cast<std::size_t>(dims[k + 1]);
  return s;
}

int find_mode(const std::vector<std::string>& modes, const std::string& m) {
  auto it = std::find(modes.begin(), modes.end(), m);
  if (it == modes.end()) throw UnknownMode("unknown mode '" + m + "'");
  return static_cast<int>(it - modes.begin());
}

// Matrix view of a row-major tensor: rows run over the listed modes (in the
// order given), columns over the remaining modes in their stored order.
CMat regroup(const CVec& amps, const std::vector<int>& dims, const std::vector<int>& row_modes) {
  const auto st = strides_of(dims);
  std::vector<int> col_modes;
  for (int k = 0; k < static_cast<int>(dims.size()); ++k)
    if (std::find(row_modes.begin(), row_modes.end(), k) == row_modes.end()) col_modes.push_back(k);
  std::vector<int> rd, cd;
  for (int k : row_modes) rd.push_back(dims[k]);
  for (int k : col_modes) cd.push_back(dims[k]);
  const std::size_t nr = total_dim(rd), nc = total_dim(cd);
  CMat out(nr, nc);
  std::vector<int> idx(dims.size(), 0);
  for (std::size_t f = 0; f < static_cast<std::size_t>(amps.size()); ++f) {
    std::size_t rem = f;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      idx[k] = static_cast<int>(rem / st[k]);
      rem %= st[k];
    }
    std::size_t r = 0, c = 0;
    for (int k : row_modes) r = r * dims[k] + idx[k];
    for (int k : col_modes) c = c * dims[k] + idx[k];
    out(r, c) = amps[f];
  }
  return out;
}

double log_poisson(double x2, int n) {
  return -x2 + n * std::log(x2) - std::lgamma(n + 1.0);
}

}  // namespace

double coherent_tail(double abs_z, int n_max) {
  if (n_max < 0) return 1.0;
  if (abs_z == 0.0) return 0.0;
  const double x2 = abs_z * abs_z;
  // Upward summation avoids the cancellation in 1 - sum_{n<=n_max}.
  if (n_max + 1 < x2) {
    double head = 0.0;
    for (int n = 0; n <= n_max; ++n) head += std::exp(log_poisson(x2, n));
    return std::max(0.0, 1.0 - head);
  }
  double tail = 0.0;
  for (int n = n_max + 1;; ++n) {
    const double t = std::exp(log_poisson(x2, n));
    tail += t;
    if (t < 1e-30 * tail || t == 0.0) break;
    if (n > n_max + 100000) break;
  }
  return tail;
}

int cutoff_for(double abs_z, double tail_tol) {
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw InvalidArgument("tail_tol must lie in (0,1)");
  int n = 1;
  while (coherent_tail(abs_z, n) > tail_tol) ++n;
  return n;
}

CVec coherent_amplitudes(cplx z, int n_max, double tail_tol) {
  if (n_max < 0) throw InvalidArgument("n_max must be non-negative");
  const double tail = coherent_tail(std::abs(z), n_max);
  if (tail > tail_tol)
    throw TailTooHeavy("coherent amplitude " + std::to_string(std::abs(z)) +
                       " needs more than n_max=" + std::to_string(n_max));
  CVec q(n_max + 1);
  q[0] = std::exp(-0.5 * std::norm(z));
  for (int n = 1; n <= n_max; ++n) q[n] = q[n - 1] * z / std::sqrt(static_cast<double>(n));
  return q;
}

FockVector::FockVector(std::vector<std::string> modes, std::vector<int> dims, CVec amps,
                       double tail_tol)
    : modes_(std::move(modes)), dims_(std::move(dims)), amps_(std::move(amps)), tail_tol_(tail_tol) {
  if (modes_.size() != dims_.size()) throw ShapeMismatch("modes and dims differ in length");
  for (int d : dims_)
    if (d < 1) throw InvalidArgument("mode dimension must be at least 1");
  for (std::size_t i = 0; i < modes_.size(); ++i)
    for (std::size_t j = i + 1; j < modes_.size(); ++j)
      if (modes_[i] == modes_[j]) throw InvalidArgument("duplicate mode '" + modes_[i] + "'");
  if (static_cast<std::size_t>(amps_.size()) != total_dim(dims_))
    throw ShapeMismatch("amplitude count does not match dims");
}

FockVector FockVector::vacuum(std::vector<std::string> modes, std::vector<int> dims,
                              double tail_tol) {
  CVec a = CVec::Zero(static_cast<Eigen::Index>(total_dim(dims)));
  a[0] = 1.0;
  return FockVector(std::move(modes), std::move(dims), std::move(a), tail_tol);
}

FockVector FockVector::single(const std::string& mode, const CVec& amps, double tail_tol) {
  return FockVector({mode}, {static_cast<int>(amps.size())}, amps, tail_tol);
}

FockVector FockVector::coherent(const std::string& mode, cplx z, int n_max, double tail_tol) {
  return single(mode, coherent_amplitudes(z, n_max, tail_tol), tail_tol);
}

int FockVector::index_of(const std::string& mode) const { return find_mode(modes_, mode); }

bool FockVector::has_mode(const std::string& mode) const {
  return std::find(modes_.begin(), modes_.end(), mode) != modes_.end();
}

std::size_t FockVector::stride(int mode_index) const { return strides_of(dims_)[mode_index]; }

FockVector FockVector::scaled(cplx s) const {
  return FockVector(modes_, dims_, amps_ * s, tail_tol_);
}

FockVector FockVector::normalized() const {
  const double n = amps_.norm();
  if (n == 0.0) throw DomainError("cannot normalize the zero vector");
  return scaled(1.0 / n);
}

FockVector tensor(const FockVector& left, const FockVector& right) {
  std::vector<std::string> modes = left.modes();
  modes.insert(modes.end(), right.modes().begin(), right.modes().end());
  std::vector<int> dims = left.dims();
  dims.insert(dims.end(), right.dims().begin(), right.dims().end());
  const auto& l = left.amplitudes();
  const auto& r = right.amplitudes();
  CVec a(l.size() * r.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) a.segment(i * r.size(), r.size()) = l[i] * r;
  return FockVector(std::move(modes), std::move(dims), std::move(a),
                    std::min(left.tail_tol(), right.tail_tol()));
}

FockVector apply_cross_kerr(const FockVector& state, const std::string& mode_i,
                            const std::string& mode_j, double chi) {
  const int i = state.index_of(mode_i), j = state.index_of(mode_j);
  if (i == j) throw InvalidArgument("cross-Kerr needs two distinct modes");
  const auto& dims = state.dims();
  const std::size_t si = state.stride(i), sj = state.stride(j);
  CVec a = state.amplitudes();
  for (std::size_t f = 0; f < static_cast<std::size_t>(a.size()); ++f) {
    const int ni = static_cast<int>((f / si) % dims[i]);
    const int nj = static_cast<int>((f / sj) % dims[j]);
    if (ni && nj) a[f] *= std::exp(I * (chi * ni * nj));
  }
  return FockVector(state.modes(), dims, std::move(a), state.tail_tol());
}

FockVector apply_phase(const FockVector& state, const std::string& mode, double phi) {
  const int i = state.index_of(mode);
  const int d = state.dims()[i];
  CMat op = CMat::Zero(d, d);
  for (int n = 0; n < d; ++n) op(n, n) = std::exp(I * (phi * n));
  return apply_single_mode(state, mode, op);
}

FockVector apply_single_mode(const FockVector& state, const std::string& mode, const CMat& op) {
  const int i = state.index_of(mode);
  const int d = state.dims()[i];
  if (op.rows() != d || op.cols() != d) throw ShapeMismatch("operator size does not match mode");
  const std::size_t s = state.stride(i);
  const std::size_t outer = state.size() / (s * d);
  const auto& in = state.amplitudes();
  CVec out(in.size());
  CVec v(d);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t r = 0; r < s; ++r) {
      const std::size_t base = o * s * d + r;
      for (int k = 0; k < d; ++k) v[k] = in[base + k * s];
      const CVec w = op * v;
      for (int k = 0; k < d; ++k) out[base + k * s] = w[k];
    }
  return FockVector(state.modes(), state.dims(), std::move(out), state.tail_tol());
}

FockVector apply_two_mode(const FockVector& state, const std::string& mode_i,
                          const std::string& mode_j, const CMat& op) {
  const int i = state.index_of(mode_i), j = state.index_of(mode_j);
  if (i == j) throw InvalidArgument("two-mode operator needs distinct modes");
  const int di = state.dims()[i], dj = state.dims()[j];
  if (op.rows() != di * dj || op.cols() != di * dj)
    throw ShapeMismatch("operator size does not match mode pair");
  const std::size_t si = state.stride(i), sj = state.stride(j);
  const auto& in = state.amplitudes();
  CVec out(in.size());
  CVec v(di * dj);
  for (std::size_t f = 0; f < state.size(); ++f) {
    if ((f / si) % di != 0 || (f / sj) % dj != 0) continue;
    for (int a = 0; a < di; ++a)
      for (int b = 0; b < dj; ++b) v[a * dj + b] = in[f + a * si + b * sj];
    const CVec w = op * v;
    for (int a = 0; a < di; ++a)
      for (int b = 0; b < dj; ++b) out[f + a * si + b * sj] = w[a * dj + b];
  }
  return FockVector(state.modes(), state.dims(), std::move(out), state.tail_tol());
}

CMat annihilation_matrix(int dim) {
  CMat a = CMat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

CMat beamsplitter_matrix(int dim_i, int dim_j, double theta) {
  const int n = dim_i * dim_j;
  CMat u = CMat::Zero(n, n);
  // The generator conserves n_i + n_j, so exponentiate block by block.
  for (int t = 0; t <= dim_i + dim_j - 2; ++t) {
    const int lo = std::max(0, t - dim_j + 1), hi = std::min(dim_i - 1, t);
    const int m = hi - lo + 1;
    CMat g = CMat::Zero(m, m);
    for (int k = 0; k + 1 < m; ++k) {
      const int ni = lo + k, nj = t - ni;
      // a_i^+ a_j |ni, nj> = sqrt(ni+1) sqrt(nj) |ni+1, nj-1>
      const double amp = std::sqrt((ni + 1.0) * nj);
      g(k + 1, k) = amp;
      g(k, k + 1) = amp;
    }
    const CMat blk = (I * theta * g).exp();
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        const int rr = (lo + r) * dim_j + (t - lo - r);
        const int cc = (lo + c) * dim_j + (t - lo - c);
        u(rr, cc) = blk(r, c);
      }
  }
  return u;
}

FockVector apply_beamsplitter(const FockVector& state, const std::string& mode_i,
                              const std::string& mode_j, double theta) {
  const int i = state.index_of(mode_i), j = state.index_of(mode_j);
  const int di = state.dims()[i], dj = state.dims()[j];
  const int complete = std::min(di, dj) - 1;
  const std::size_t si = state.stride(i), sj = state.stride(j);
  double clipped = 0.0;
  const auto& a = state.amplitudes();
  for (std::size_t f = 0; f < state.size(); ++f) {
    const int t = static_cast<int>((f / si) % di + (f / sj) % dj);
    if (t > complete) clipped += std::norm(a[f]);
  }
  if (clipped > state.tail_tol())
    throw TruncationOverflow("beamsplitter input weight " + std::to_string(clipped) +
                             " lies beyond the two-mode cutoff");
  return apply_two_mode(state, mode_i, mode_j, beamsplitter_matrix(di, dj, theta));
}

CMat displacement_matrix(int dim, cplx d) {
  const CMat a = annihilation_matrix(dim);
  const CMat gen = d * a.adjoint() - std::conj(d) * a;
  return gen.exp();
}

FockVector apply_displacement(const FockVector& state, const std::string& mode, cplx d) {
  const int i = state.index_of(mode);
  const int dim = state.dims()[i];
  auto boundary_weight = [&](const FockVector& s) {
    const std::size_t st = s.stride(i);
    double w = 0.0;
    for (std::size_t f = 0; f < s.size(); ++f)
      if (static_cast<int>((f / st) % dim) == dim - 1) w += std::norm(s.amplitudes()[f]);
    return w;
  };
  if (boundary_weight(state) > state.tail_tol())
    throw TruncationOverflow("displacement input reaches the cutoff of mode '" + mode + "'");
  FockVector out = apply_single_mode(state, mode, displacement_matrix(dim, d));
  if (boundary_weight(out) > state.tail_tol())
    throw TruncationOverflow("displaced state reaches the cutoff of mode '" + mode + "'");
  return out;
}

FockVector project_click(const FockVector& state, const std::string& mode, bool clicked) {
  const int i = state.index_of(mode);
  const std::size_t s = state.stride(i);
  const int d = state.dims()[i];
  CVec a = state.amplitudes();
  for (std::size_t f = 0; f < state.size(); ++f) {
    const bool vac = (f / s) % d == 0;
    if (vac == clicked) a[f] = 0.0;
  }
  return FockVector(state.modes(), state.dims(), std::move(a), state.tail_tol());
}

DensOp::DensOp(std::vector<std::string> modes, std::vector<int> dims, CMat factor)
    : modes_(std::move(modes)), dims_(std::move(dims)), factor_(std::move(factor)) {
  if (modes_.size() != dims_.size()) throw ShapeMismatch("modes and dims differ in length");
  if (static_cast<std::size_t>(factor_.rows()) != total_dim(dims_))
    throw ShapeMismatch("factor rows do not match dims");
}

DensOp DensOp::pure(const FockVector& psi) {
  return DensOp(psi.modes(), psi.dims(), psi.amplitudes());
}

DensOp DensOp::from_matrix(std::vector<std::string> modes, std::vector<int> dims, const CMat& rho) {
  if (rho.rows() != rho.cols()) throw ShapeMismatch("density matrix must be square");
  const CMat h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const double tr = std::max(h.trace().real(), 0.0);
  const auto& ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() < -1e-10 * std::max(tr, 1.0))
    throw DomainError("matrix is not positive semidefinite");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev[k] > 0.0) keep.push_back(k);
  CMat f(h.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    f.col(c) = es.eigenvectors().col(keep[c]) * std::sqrt(ev[keep[c]]);
  return DensOp(std::move(modes), std::move(dims), std::move(f));
}

DensOp DensOp::normalized() const {
  const double t = trace();
  if (t <= 0.0) throw DomainError("cannot normalize a zero operator");
  return scaled(1.0 / t);
}

DensOp DensOp::scaled(double s) const {
  if (s < 0.0) throw DomainError("negative scale of a PSD operator");
  return DensOp(modes_, dims_, factor_ * std::sqrt(s));
}

DensOp DensOp::compressed(double rel_tol) const {
  if (factor_.cols() == 0) return *this;
  if (factor_.cols() <= factor_.rows()) {
    Eigen::SelfAdjointEigenSolver<CMat> es(factor_.adjoint() * factor_);
    const auto& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = ev.size() - 1; k >= 0; --k)
      if (ev[k] > rel_tol * top && ev[k] > 0.0) keep.push_back(k);
    CMat f(factor_.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) f.col(c) = factor_ * es.eigenvectors().col(keep[c]);
    return DensOp(modes_, dims_, std::move(f));
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(factor_ * factor_.adjoint());
  const auto& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = ev.size() - 1; k >= 0; --k)
    if (ev[k] > rel_tol * top && ev[k] > 0.0) keep.push_back(k);
  CMat f(factor_.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    f.col(c) = es.eigenvectors().col(keep[c]) * std::sqrt(ev[keep[c]]);
  return DensOp(modes_, dims_, std::move(f));
}

Eigen::VectorXd DensOp::eigenvalues() const {
  if (factor_.cols() == 0) return Eigen::VectorXd();
  Eigen::BDCSVD<CMat> svd(factor_);
  Eigen::VectorXd s = svd.singularValues().array().square();
  return s;
}

FockVector DensOp::principal_vector() const {
  if (factor_.cols() == 0) throw DomainError("zero operator has no principal vector");
  Eigen::BDCSVD<CMat> svd(factor_, Eigen::ComputeThinU);
  CVec v = svd.matrixU().col(0);
  // Fix the global phase on the largest component for reproducible output.
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  v *= std::conj(v[k]) / std::abs(v[k]);
  return FockVector(modes_, dims_, std::move(v));
}

DensOp mix(const DensOp& a, const DensOp& b) {
  if (a.modes() != b.modes() || a.dims() != b.dims()) throw ShapeMismatch("mixing unlike operators");
  CMat f(a.dim(), a.factor().cols() + b.factor().cols());
  f << a.factor(), b.factor();
  return DensOp(a.modes(), a.dims(), std::move(f));
}

DensOp reduced_state(const FockVector& state, const std::vector<std::string>& kept) {
  std::vector<int> rows;
  std::vector<int> dims;
  for (const auto& m : kept) {
    rows.push_back(state.index_of(m));
    dims.push_back(state.dims()[rows.back()]);
  }
  return DensOp(kept, std::move(dims), regroup(state.amplitudes(), state.dims(), rows));
}

DensOp discard_mode(const FockVector& state, const std::string& mode) {
  state.index_of(mode);
  std::vector<std::string> kept;
  for (const auto& m : state.modes())
    if (m != mode) kept.push_back(m);
  return reduced_state(state, kept);
}

DensOp partial_trace(const DensOp& rho, const std::vector<std::string>& traced) {
  for (const auto& m : traced) find_mode(rho.modes(), m);
  std::vector<int> rows;
  std::vector<std::string> kept;
  std::vector<int> kdims;
  for (int k = 0; k < static_cast<int>(rho.modes().size()); ++k)
    if (std::find(traced.begin(), traced.end(), rho.modes()[k]) == traced.end()) {
      rows.push_back(k);
      kept.push_back(rho.modes()[k]);
      kdims.push_back(rho.dims()[k]);
    }
  const Eigen::Index kd = static_cast<Eigen::Index>(total_dim(kdims));
  const Eigen::Index td = rho.dim() / std::max<Eigen::Index>(kd, 1);
  CMat f(kd, rho.factor().cols() * td);
  for (Eigen::Index c = 0; c < rho.factor().cols(); ++c)
    f.middleCols(c * td, td) = regroup(rho.factor().col(c), rho.dims(), rows);
  return DensOp(std::move(kept), std::move(kdims), std::move(f));
}

cplx inner(const FockVector& bra, const FockVector& ket) {
  if (bra.modes() != ket.modes() || bra.dims() != ket.dims())
    throw ShapeMismatch("inner product of states on different spaces");
  return bra.amplitudes().dot(ket.amplitudes());
}

double fidelity(const DensOp& rho, const FockVector& psi) {
  if (rho.modes() != psi.modes() || rho.dims() != psi.dims())
    throw ShapeMismatch("fidelity of objects on different spaces");
  const double den = rho.trace() * psi.norm2();
  if (den <= 0.0) throw DomainError("fidelity with a zero object");
  return (rho.factor().adjoint() * psi.amplitudes()).squaredNorm() / den;
}

double fidelity(const DensOp& rho, const DensOp& sigma) {
  if (rho.modes() != sigma.modes() || rho.dims() != sigma.dims())
    throw ShapeMismatch("fidelity of operators on different spaces");
  const double den = rho.trace() * sigma.trace();
  if (den <= 0.0) throw DomainError("fidelity with a zero operator");
  const CMat m = rho.factor().adjoint() * sigma.factor();
  Eigen::BDCSVD<CMat> svd(m);
  const double nuc = svd.singularValues().sum();
  return nuc * nuc / den;
}

double trace_distance(const DensOp& rho, const DensOp& sigma) {
  if (rho.modes() != sigma.modes() || rho.dims() != sigma.dims())
    throw ShapeMismatch("trace distance of operators on different spaces");
  CMat both(rho.dim(), rho.factor().cols() + sigma.factor().cols());
  both << rho.factor(), sigma.factor();
  if (both.cols() == 0) return 0.0;
  // Work in an orthonormal basis of the joint range.
  Eigen::BDCSVD<CMat> svd(both, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv[r] > 1e-14 * sv[0]) ++r;
  const CMat q = svd.matrixU().leftCols(r);
  const CMat a = q.adjoint() * rho.factor();
  const CMat b = q.adjoint() * sigma.factor();
  const CMat diff = a * a.adjoint() - b * b.adjoint();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double von_neumann_entropy(const DensOp& rho) {
  const Eigen::VectorXd ev = rho.eigenvalues();
  const double t = ev.sum();
  if (t <= 0.0) throw DomainError("entropy of a zero operator");
  double e = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const double p = ev[k] / t;
    if (p > 1e-300) e -= p * std::log2(p);
  }
  return std::max(e, 0.0);
}

double entanglement_entropy(const FockVector& psi, const std::vector<std::string>& left) {
  return von_neumann_entropy(reduced_state(psi, left));
}

void dump_binary(const FockVector& state, std::ostream& out) {
  for (Eigen::Index k = 0; k < state.amplitudes().size(); ++k) {
    const double parts[2] = {state.amplitudes()[k].real(), state.amplitudes()[k].imag()};
    for (double p : parts) {
      std::uint64_t bits;
      std::memcpy(&bits, &p, sizeof bits);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
}

FockVector load_binary(std::istream& in, std::vector<std::string> modes, std::vector<int> dims,
                       double tail_tol) {
  CVec a(static_cast<Eigen::Index>(total_dim(dims)));
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    double parts[2];
    for (double& p : parts) {
      std::uint64_t bits;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits))
        throw ShapeMismatch("binary dump shorter than the declared shape");
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      std::memcpy(&p, &bits, sizeof p);
    }
    a[k] = cplx(parts[0], parts[1]);
  }
  return FockVector(std::move(modes), std::move(dims), std::move(a), tail_tol);
}

}  // namespace kerrq

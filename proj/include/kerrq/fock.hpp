#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "kerrq/errors.hpp"

namespace kerrq {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

struct TruncationSpec {
  int n_max = 20;
  double tail_tol = 1e-12;
};

/// Probability mass of the coherent state |z> above photon number n_max.
double coherent_tail(double abs_z, int n_max);

/// Smallest n_max whose coherent tail for amplitude |z| is at most tail_tol.
int cutoff_for(double abs_z, double tail_tol);

/// Fock amplitudes Q_n(z) = z^n / sqrt(n!) exp(-|z|^2/2) for n = 0..n_max.
/// Throws TailTooHeavy when the discarded mass exceeds tail_tol.
CVec coherent_amplitudes(cplx z, int n_max, double tail_tol = 1e-12);

/// Pure multimode state on a truncated Fock basis. Amplitudes are stored
/// row-major over the multi-index, first mode slowest. Each mode carries its
/// own local dimension (n_max + 1).
class FockVector {
 public:
  FockVector(std::vector<std::string> modes, std::vector<int> dims, CVec amps,
             double tail_tol = 1e-12);

  static FockVector vacuum(std::vector<std::string> modes, std::vector<int> dims,
                           double tail_tol = 1e-12);
  static FockVector single(const std::string& mode, const CVec& amps,
                           double tail_tol = 1e-12);
  static FockVector coherent(const std::string& mode, cplx z, int n_max,
                             double tail_tol = 1e-12);

  const std::vector<std::string>& modes() const { return modes_; }
  const std::vector<int>& dims() const { return dims_; }
  const CVec& amplitudes() const { return amps_; }
  double tail_tol() const { return tail_tol_; }
  std::size_t size() const { return static_cast<std::size_t>(amps_.size()); }

  int index_of(const std::string& mode) const;
  bool has_mode(const std::string& mode) const;
  std::size_t stride(int mode_index) const;
  double norm2() const { return amps_.squaredNorm(); }
  FockVector scaled(cplx s) const;
  FockVector normalized() const;

 private:
  std::vector<std::string> modes_;
  std::vector<int> dims_;
  CVec amps_;
  double tail_tol_;
};

FockVector tensor(const FockVector& left, const FockVector& right);

/// Multiplies amplitude (.., n_i, .., n_j, ..) by exp(i chi n_i n_j).
FockVector apply_cross_kerr(const FockVector& state, const std::string& mode_i,
                            const std::string& mode_j, double chi);

/// exp{i theta (a_i^+ a_j + a_i a_j^+)}, exact on each total-photon block.
/// Throws TruncationOverflow when input weight in blocks clipped by the
/// cutoff exceeds the state's tail tolerance.
FockVector apply_beamsplitter(const FockVector& state, const std::string& mode_i,
                              const std::string& mode_j, double theta);

/// exp(d a^+ - d^* a) from the matrix exponential of the truncated generator.
FockVector apply_displacement(const FockVector& state, const std::string& mode, cplx d);

/// exp(i phi n) on one mode.
FockVector apply_phase(const FockVector& state, const std::string& mode, double phi);

FockVector apply_single_mode(const FockVector& state, const std::string& mode,
                             const CMat& op);
FockVector apply_two_mode(const FockVector& state, const std::string& mode_i,
                          const std::string& mode_j, const CMat& op);

/// clicked=false keeps the vacuum component of the mode, clicked=true the rest.
FockVector project_click(const FockVector& state, const std::string& mode, bool clicked);

CMat beamsplitter_matrix(int dim_i, int dim_j, double theta);
CMat displacement_matrix(int dim, cplx d);
CMat annihilation_matrix(int dim);

/// Positive semidefinite operator stored as rho = L L^+.
class DensOp {
 public:
  DensOp() = default;
  DensOp(std::vector<std::string> modes, std::vector<int> dims, CMat factor);

  static DensOp pure(const FockVector& psi);
  /// Hermitian PSD matrix; eigenvalues below -1e-10 * trace are rejected.
  static DensOp from_matrix(std::vector<std::string> modes, std::vector<int> dims,
                            const CMat& rho);

  const std::vector<std::string>& modes() const { return modes_; }
  const std::vector<int>& dims() const { return dims_; }
  const CMat& factor() const { return factor_; }
  Eigen::Index dim() const { return factor_.rows(); }

  CMat matrix() const { return factor_ * factor_.adjoint(); }
  double trace() const { return factor_.squaredNorm(); }
  DensOp normalized() const;
  DensOp scaled(double s) const;
  DensOp compressed(double rel_tol = 1e-15) const;
  /// Nonzero eigenvalues, descending.
  Eigen::VectorXd eigenvalues() const;
  /// Unit eigenvector of the largest eigenvalue.
  FockVector principal_vector() const;

 private:
  std::vector<std::string> modes_;
  std::vector<int> dims_;
  CMat factor_;
};

DensOp mix(const DensOp& a, const DensOp& b);
DensOp discard_mode(const FockVector& state, const std::string& mode);
DensOp partial_trace(const DensOp& rho, const std::vector<std::string>& traced);
/// Reduced state on the listed modes (pure-state Schmidt route).
DensOp reduced_state(const FockVector& state, const std::vector<std::string>& kept);

cplx inner(const FockVector& bra, const FockVector& ket);
/// <psi|rho|psi> / (Tr rho <psi|psi>).
double fidelity(const DensOp& rho, const FockVector& psi);
/// Uhlmann fidelity of the normalized operators.
double fidelity(const DensOp& rho, const DensOp& sigma);
/// Half the trace norm of rho - sigma (operators taken as given).
double trace_distance(const DensOp& rho, const DensOp& sigma);
double von_neumann_entropy(const DensOp& rho);
/// Entropy (bits) of the reduced state of the first `left` modes.
double entanglement_entropy(const FockVector& psi, const std::vector<std::string>& left);

void dump_binary(const FockVector& state, std::ostream& out);
FockVector load_binary(std::istream& in, std::vector<std::string> modes,
                       std::vector<int> dims, double tail_tol = 1e-12);

}  // namespace kerrq

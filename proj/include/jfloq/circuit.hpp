#pragma once

#include <vector>

#include "jfloq/hilbert.hpp"

namespace jfloq {

/// Transmon coupled to an oscillator. Energies in rad/s.
struct UnshuntedParams {
  double E_C = 0.0;
  double E_J = 0.0;
  double g = 0.0;
  double omega_a = 0.0;
  double omega_p = 0.0;
  double A_p = 0.0;
  double N_g = 0.0;

  void validate() const;
};

/// Inductively shunted transmon coupled to an oscillator. Energies in rad/s.
struct ShuntedParams {
  double E_C = 0.0;
  double E_J = 0.0;
  double E_L = 0.0;
  double g = 0.0;
  double omega_a = 0.0;
  double omega_p = 0.0;
  double A_p = 0.0;

  void validate() const;
};

/// Displacement that absorbs the pump: a -> a - abar(t), theta -> theta - theta_bar(t).
struct UnshuntedFrame {
  double xi = 0.0;
  double omega_p = 0.0;
  cplx abar_plus;   // coefficient of exp(+i w_p t)
  cplx abar_minus;  // coefficient of exp(-i w_p t)

  cplx abar(double t) const;
  /// xi sin(w_p t), wrapped to (-pi, pi].
  double theta_bar(double t) const;
};

UnshuntedFrame derive_unshunted_frame(const UnshuntedParams& p);

/// Constants of the squeeze / beam-splitter / displacement / squeeze chain that
/// diagonalizes the quadratic part of the shunted circuit.
struct ShuntedFrameParams {
  ShuntedParams source;

  double theta = 0.0;
  double zeta = 0.0;
  double zeta_a = 0.0;
  double zeta_b = 0.0;
  double omega_1 = 0.0;
  double omega_2 = 0.0;
  double omega_a_t = 0.0;  // renormalized a-like frequency
  double omega_b_t = 0.0;  // renormalized junction-like frequency
  double phi_a = 0.0;
  double phi_b = 0.0;
  double xi = 0.0;

  // alpha(t) = alpha_amp (w_p sin(w_p t) + i w_a cos(w_p t)), same for beta.
  double alpha_amp = 0.0;
  double beta_amp = 0.0;

  // Bath operator i(a - a^dag) expressed in the frame.
  double bath_weight_a = 0.0;
  double bath_weight_b = 0.0;

  /// max |off-diagonal| of the transformed quadratic form, relative to omega_a.
  double quadratic_residual = 0.0;

  cplx alpha(double t) const;
  cplx beta(double t) const;
};

ShuntedFrameParams derive_shunted_frame(const ShuntedParams& p);

/// Periodic classical orbit of the driven linear part of the shunted circuit,
/// r(t) = Re(r_hat exp(-i w_p t)) over the quadratures (x, phi, p, N) with
/// a = (x + i p)/sqrt2 and b = (phi + i N)/sqrt2.
Eigen::Vector4cd shunted_linear_response(const ShuntedParams& p);

/// Residual of the quadratic-form diagonalization implied by the frame
/// constants; used both at construction and by tests with perturbed inputs.
double shunted_quadratic_residual(const ShuntedParams& p, const ShuntedFrameParams& f);

enum class DriveShape {
  constant,
  cos_of_sin,  // cos(xi sin(w t))
  sin_of_sin,  // sin(xi sin(w t))
  cos_wt,      // cos(w t)
  sin_wt,      // sin(w t)
};

/// H(t) = sum_i f_i(t + t0) H_i with a fixed menu of scalar drive shapes.
/// The operator parts are built once; per-step cost is scalar evaluations and
/// a linear combination.
class DrivenHamiltonian {
 public:
  struct Term {
    DriveShape shape;
    Mat op;
    SpMat sparse;
  };

  DrivenHamiltonian() = default;
  DrivenHamiltonian(BasisSpec basis, double omega_p, double xi);

  void add_term(DriveShape shape, const Mat& op);
  /// Shift of the time origin: H'(t) = H(t + shift).
  void set_time_shift(double shift) { time_shift_ = shift; }

  const BasisSpec& basis() const { return basis_; }
  int dim() const { return basis_.total_dim(); }
  double omega_p() const { return omega_p_; }
  double xi() const { return xi_; }
  double period() const { return kTwoPi / omega_p_; }
  double time_shift() const { return time_shift_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool prefers_sparse() const { return sparse_; }
  /// Few-diagonal layout: all terms live on the same small set of diagonals.
  bool banded() const { return !offsets_.empty(); }
  const std::vector<int>& band_offsets() const { return offsets_; }

  double coefficient(std::size_t term, double t) const;
  std::vector<double> coefficients(double t) const;
  Mat combine(const std::vector<double>& c) const;
  SpMat combine_sparse(const std::vector<double>& c) const;
  /// Diagonals of sum_i c_i H_i: out[d](r) = H(r, r + band_offsets()[d]).
  void combine_banded(const std::vector<double>& c, std::vector<Vec>& out) const;
  /// Upper bound on the 1-norm of sum_i c_i H_i.
  double norm_bound(const std::vector<double>& c) const;

  Operator at(double t) const;

 private:
  void refresh_storage_choice();

  BasisSpec basis_;
  double omega_p_ = 0.0;
  double xi_ = 0.0;
  double time_shift_ = 0.0;
  std::vector<Term> terms_;
  std::vector<double> one_norms_;
  bool sparse_ = false;
  std::vector<int> offsets_;
  std::vector<std::vector<Vec>> bands_;  // [term][offset index]
};

/// Charge (transmon) x Fock (oscillator) basis for the unshunted circuit.
BasisSpec unshunted_basis(int n_max, int n_fock);
/// Fock (junction-like b) x Fock (oscillator-like a) basis for the shunted circuit.
BasisSpec shunted_basis(int n_b, int n_a);

/// Displaced-frame Hamiltonian
///   w_a a^dag a + 4E_C (N-N_g)^2 - E_J cos(theta + xi sin w_p t) + i g (N-N_g)(a^dag - a).
DrivenHamiltonian build_unshunted_hamiltonian(const UnshuntedParams& p, const UnshuntedFrame& frame,
                                              const BasisSpec& basis);
Operator build_unshunted_hamiltonian(const UnshuntedParams& p, const UnshuntedFrame& frame,
                                     const BasisSpec& basis, double t);
/// Lab-frame Hamiltonian with the explicit pump i A_p cos(w_p t)(a^dag - a).
DrivenHamiltonian build_unshunted_lab_hamiltonian(const UnshuntedParams& p, const BasisSpec& basis);

DrivenHamiltonian build_shunted_hamiltonian(const ShuntedFrameParams& frame, const BasisSpec& basis);
Operator build_shunted_hamiltonian(const ShuntedFrameParams& frame, const BasisSpec& basis, double t);

/// Junction phase argument phi_a (a + a^dag) + phi_b (b + b^dag) on the shunted basis.
Operator shunted_phase_operator(const ShuntedFrameParams& frame, const BasisSpec& basis);

enum class Model { unshunted, shunted };

/// i(a - a^dag) on the oscillator (unshunted) or its image nu in the shunted frame.
Operator bath_coupling(Model model, const ShuntedFrameParams* frame, const BasisSpec& basis);
Operator bath_coupling_unshunted(const BasisSpec& basis);
Operator bath_coupling_shunted(const ShuntedFrameParams& frame, const BasisSpec& basis);

/// Static time-averaged model with the Josephson term scaled by J0(xi).
Operator time_averaged_hamiltonian(const ShuntedFrameParams& frame, const BasisSpec& basis);

struct Eigenbasis {
  RVec energies;      // ascending
  Mat vectors;        // columns, in the diagnostic basis
  int resolution = 0; // N_max (charge) or Fock dimension
  double convergence = 0.0;  // max relative change of the compared levels under doubling
};

/// Transmon eigenstates {eta_k} of 4E_C(N-N_g)^2 - E_J cos(theta) in the charge window.
Eigenbasis transmon_eigenbasis(const UnshuntedParams& p, int n_max, bool check_convergence = true);

/// Shunted-transmon eigenstates {nu_k} of 4E_C N^2 + E_L phi^2/2 - E_J cos(phi),
/// built on the Fock basis of the bare squeezed junction mode b' (phi = e^{-zeta}(b'+b'^dag)/sqrt2).
Eigenbasis shunted_transmon_eigenbasis(const ShuntedParams& p, int n_fock, bool check_convergence = true);

Eigenbasis diagnostic_eigenbasis(Model model, const UnshuntedParams* up, const ShuntedParams* sp,
                                 int resolution);

/// Well-depth over level-spacing estimate of the number of confined transmon
/// levels, and the direct count of levels below the top of the cosine well.
struct ConfinementEstimate {
  double depth_over_spacing = 0.0;
  int confined_levels = 0;   // floor(2 E_J / (E_1 - E_0))
  int levels_below_top = 0;  // E_k < max of the potential
};
ConfinementEstimate confined_levels(const UnshuntedParams& p, const Eigenbasis& eta);

double nbar_est(double A_p, double omega_p, double omega_a);
double pump_amplitude_for_nbar(double nbar, double omega_p, double omega_a);

}  // namespace jfloq

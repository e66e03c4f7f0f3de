#pragma once

#include <string>
#include <vector>

#include "jfloq/dissipator.hpp"

namespace jfloq {

struct Populations {
  RVec values;                 // <v_k| rho |v_k>
  double leakage = 0.0;        // 1 - sum
  double mean_excitation = 0.0;  // sum_k k pop_k
};

/// Populations of a single-mode state over the columns of `vectors`.
Populations populations_in_eigenbasis(const Mat& rho, const Mat& vectors);

double purity(const Mat& rho);
double impurity(const Mat& rho);

struct StarkLine {
  double frequency_hz = 0.0;  // Delta_{source,target,k} / 2 pi
  double weight = 0.0;        // p_source |P_{target,source,k}|^2
  int source = 0;
  int target = 0;
  int k = 0;
};

struct StarkWindow {
  double center_hz = 0.0;
  double half_width_hz = 300e6;
  double relative_floor = 1e-4;
};

/// Probe resonances from populated modes, inside the window and above the
/// relative weight floor, sorted by decreasing weight.
std::vector<StarkLine> stark_lines(const FourierElements& F, const FloquetBasis& basis, const RVec& p,
                                   const StarkWindow& window);

struct KerrEstimate {
  double kerr_hz = 0.0;  // f(1->2) - f(0->1)
  StarkLine first;
  StarkLine second;
};

/// Kerr of the oscillator-like ladder: the 0->1 line is the strongest line out
/// of the most populated mode, the 1->2 line the strongest in-window line out of
/// its target (excluding the way back).
KerrEstimate kerr_strength(const FourierElements& F, const FloquetBasis& basis, const RVec& p,
                           const StarkWindow& window);

/// Labels eigenstates of a static Hamiltonian by maximal overlap with given
/// bare product states; returns the index of the dressed state for each bare state.
std::vector<int> label_by_overlap(const Mat& dressed, const Mat& bare);

struct AveragedPrediction {
  double frequency_hz = 0.0;  // dressed oscillator-like 0->1
  double kerr_hz = 0.0;       // (E_2 - E_1) - (E_1 - E_0)
};

/// Predictions of the J0(xi)-scaled static model, labelled by overlap with
/// the frame Fock states |0,0>, |0,1>, |0,2> (b~, a~ order).
AveragedPrediction averaged_model_predictions(const ShuntedFrameParams& frame, const BasisSpec& basis);

struct StaticSpectrum {
  double cavity_hz = 0.0;
  double qubit_hz = 0.0;
  double anharmonicity_hz = 0.0;  // f(1->2) - f(0->1) of the qubit, negative for a transmon
  double self_kerr_hz = 0.0;      // E_02 - 2 E_01 + E_00 of the cavity
  double cross_kerr_hz = 0.0;     // E_11 - E_10 - E_01 + E_00
};

/// Dressed spectrum at A_p = 0; bare states are transmon eigenstates x Fock states.
StaticSpectrum static_spectrum_unshunted(const UnshuntedParams& p, int n_max, int n_fock);
/// Dressed spectrum at A_p = 0; bare states are the frame Fock states.
StaticSpectrum static_spectrum_shunted(const ShuntedFrameParams& frame, const BasisSpec& basis);

struct PhysicalState {
  BasisSpec basis;       // (b', a): squeezed junction mode x oscillator, before displacement
  Mat rho;               // full two-mode state after the Gaussian part of the inverse frame map
  Mat rho_junction;      // junction mode state including its displacement
  int junction_dim = 0;  // Fock dimension of rho_junction
  cplx a_displacement;   // <a> of the classical orbit at the requested time
  cplx b_displacement;   // <b'> of the classical orbit at the requested time
  double edge_population = 0.0;  // weight in the two outermost Fock levels of any mode
  double purity_before = 0.0;
  double purity_after = 0.0;
};

struct PhysicalDims {
  int n_b = 0;  // b' Fock dimension for the Gaussian step (0: frame dim + 12)
  int n_a = 0;  // a Fock dimension for the Gaussian step (0: frame dim + 6)
  int n_junction = 0;  // Fock dimension after the junction displacement (0: automatic)
};

/// Undoes the frame chain for a state given on the (b~, a~) Fock basis, and
/// expresses the result in the Fock basis of b' = U_s1-squeezed junction mode,
/// where phi = exp(-zeta) (b' + b'^dag)/sqrt2. The oscillator displacement is
/// returned as a number only, since it does not enter any junction observable.
PhysicalState to_physical_basis(const Mat& rho_frame, const BasisSpec& frame_basis, const ShuntedFrameParams& frame,
                                const PhysicalDims& dims = {}, double t = 0.0, double leak_tol = 1e-4);

}  // namespace jfloq

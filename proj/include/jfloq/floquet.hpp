#pragma once

#include <string>
#include <vector>

#include "jfloq/circuit.hpp"

namespace jfloq {

enum class Integrator {
  midpoint,  // exponential midpoint, order 2
  cf4,       // two-exponential commutator-free scheme, order 4
};

enum class ExpMethod {
  automatic,      // sparse Taylor when the Hamiltonian is sparse, else dense spectral
  taylor_sparse,  // truncated Taylor series with norm-based substepping
  spectral,       // Hermitian eigendecomposition of each step generator
};

struct PropagatorOptions {
  int steps_per_period = 1024;
  Integrator method = Integrator::midpoint;
  ExpMethod exp_method = ExpMethod::automatic;
  double unitarity_tol = 1e-9;

  void validate() const;
};

const char* to_string(Integrator m);
const char* to_string(ExpMethod m);
Integrator integrator_from_string(const std::string& s);
ExpMethod exp_method_from_string(const std::string& s);

struct Propagation {
  Mat monodromy;                 // U(T, 0)
  std::vector<Mat> samples;      // U(t_j, 0), t_j = j T / N_t, j = 0..N_t-1
  double unitarity_error = 0.0;  // max |U^dag U - I| of the monodromy
  int steps = 0;
};

/// One-period propagator of a T-periodic Hamiltonian. With n_samples > 0 the
/// intermediate propagators on the stroboscopic grid are kept as well.
Propagation propagate_period(const DrivenHamiltonian& h, const PropagatorOptions& opts, int n_samples = 0);

/// Max-norm change of the monodromy when steps_per_period is doubled.
double step_doubling_error(const DrivenHamiltonian& h, const PropagatorOptions& opts);

/// Folds an energy into (-w/2, w/2].
double fold_quasi_energy(double e, double omega_p);

struct FloquetBasis {
  double period = 0.0;
  double omega_p = 0.0;
  RVec quasi_energies;        // ascending, first Brillouin zone
  Mat modes_t0;               // columns Phi_alpha(0)
  std::vector<Mat> strobe;    // Phi(t_j) for t_j = j T / N_t (empty until propagate_modes)
  double eigen_residual = 0.0;  // off-diagonality of the Schur factor
  double min_gap = 0.0;         // smallest quasi-energy gap on the circle
  std::vector<std::pair<int, int>> near_degenerate;  // pairs with gap < 1e-6 w_p
  bool degenerate() const { return !near_degenerate.empty(); }

  int dim() const { return static_cast<int>(modes_t0.cols()); }
  int n_t() const { return static_cast<int>(strobe.size()); }
  double sample_time(int j) const { return period * j / static_cast<double>(strobe.size()); }
};

FloquetBasis floquet_modes(const Mat& monodromy, double period);

/// Fills basis.strobe from the stored propagator samples (consumed).
void propagate_modes(FloquetBasis& basis, std::vector<Mat>&& samples);

/// max |<Phi_a(t_j)|Phi_b(t_j)> - delta_ab| over the grid.
double strobe_orthonormality_error(const FloquetBasis& basis);

/// Max deviation of Phi(T) (one more period) from Phi(0) after removing exp(-i eps T).
double periodicity_residual(const Mat& monodromy, const FloquetBasis& basis);

struct FourierElements {
  int K = 0;
  std::vector<Mat> P;  // P[k + K](alpha, beta)
  double tail_fraction = 0.0;  // sum_{|k|>K} |P|^2 / sum |P|^2 on the grid
  double symmetry_error = 0.0;  // max |P_{b a -k} - conj(P_{a b k})|

  const Mat& at(int k) const { return P.at(static_cast<std::size_t>(k + K)); }
  int dim() const { return P.empty() ? 0 : static_cast<int>(P.front().rows()); }
};

/// P_{abk} = (1/T) int e^{-i k w_p t} <Phi_a(t)| C |Phi_b(t)> dt on the strobe
/// grid, with C the Hermitian coupling i(a - a^dag) (or its frame image), so that
/// the factor i of the printed definition is absorbed into C.
FourierElements fourier_elements(const FloquetBasis& basis, const Mat& coupling, int K);

/// Greedy maximal-overlap assignment: result[i] is the column of `current`
/// continuing column i of `previous`.
std::vector<int> match_modes(const Mat& previous, const Mat& current);

}  // namespace jfloq

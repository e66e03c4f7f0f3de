#pragma once

#include <functional>
#include <vector>

#include "jfloq/floquet.hpp"

namespace jfloq {

/// Bath spectral density and temperature. J(w) = 0 for w <= 0.
struct NoiseModel {
  double J0 = 0.0;           // white level, used when `spectrum` is empty
  double temperature = 0.0;  // kelvin
  std::function<double(double)> spectrum;  // optional J(w) for w > 0

  /// White spectrum giving an energy decay rate kappa to a bare oscillator
  /// coupled through i(a - a^dag): kappa = 2 pi J0.
  static NoiseModel white_from_kappa(double kappa, double temperature = 0.0);

  void validate() const;
  double J(double omega) const;
  double n_th(double omega) const;
  bool white() const { return !spectrum; }
};

struct RateMatrix {
  RMat L;  // L(a, b): rate b -> a, summed over sidebands
  std::vector<RMat> gamma;  // gamma[k + K](a, b), only when requested
  int K = 0;
};

/// gamma_abk = 2 pi Theta(D) J(D) |P_bak|^2 with D = eps_b - eps_a + k w_p, and
/// L_ab = sum_k [gamma_abk + n_th(|D|)(gamma_abk + gamma_ba,-k)]. The element
/// P_bak carries the sideband at which b -> a releases exactly D.
RateMatrix rates(const FourierElements& F, const FloquetBasis& basis, const NoiseModel& noise,
                 bool keep_gamma = false);

/// Population generator of p' = R p: R(a,b) = L(a,b) off the diagonal and
/// R(a,a) = -sum_{n != a} L(n,a), so that every column sums to zero.
RMat generator(const RMat& L);
double max_column_sum(const RMat& R);

struct SteadyState {
  RVec p;            // populations of the Floquet modes
  Mat rho_t0;        // sum_a p_a |Phi_a(0)><Phi_a(0)|
  int kernel_dim = 0;            // number of closed classes of the transition graph
  std::vector<RVec> kernel;      // one stationary vector per closed class
  bool non_unique = false;
  bool degeneracy_flag = false;  // copied from the Floquet basis
  double residual = 0.0;         // max |R p| / max |R|
};

/// Stationary populations of the rate equation. Stationary vectors are computed
/// per closed class of the transition graph with the subtraction-free GTH
/// elimination, which keeps full relative accuracy on stiff chains.
SteadyState steady_state(const RMat& L, const FloquetBasis& basis);
RVec stationary_populations(const RMat& L, SteadyState* info = nullptr);

/// rho_ss(t_j) = sum_a p_a |Phi_a(t_j)><Phi_a(t_j)| on the strobe grid.
Mat assemble_rho(const RVec& p, const FloquetBasis& basis, int j);
Mat assemble_rho(const RVec& p, const Mat& modes);

/// Components rho_ab = <Phi_a(t_j)| rho |Phi_b(t_j)>, and back.
Mat to_floquet_components(const Mat& rho, const FloquetBasis& basis, int j);
Mat from_floquet_components(const Mat& rho_f, const FloquetBasis& basis, int j);

/// Evolves Floquet-basis components of rho over a time t under the secular
/// master equation: populations by exp(R t), coherences decay at
/// (1/2) sum_n (L_na + L_nb).
Mat evolve_floquet_master(const RMat& L, const Mat& rho_f, double t);

}  // namespace jfloq

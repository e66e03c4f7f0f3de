#pragma once

#include <vector>

#include "jfloq/floquet.hpp"

namespace jfloq {

// Dense d^2 x d^2 superoperators; 80 keeps the map near 0.7 GB.
inline constexpr int kOracleMaxDim = 80;

struct OracleConfig {
  int samples_per_period = 0;  // quadrature nodes of the dissipator average (0: from the norm bound)
  int substeps = 4;            // propagator steps per quadrature interval
  double tol = 1e-9;           // trace-norm residual of the one-period fixed point
  int check_periods = 50;      // stroboscopic steps used for trace/positivity checks
  void validate() const;
};

struct OracleResult {
  Mat rho;                      // periodic steady state at t = 0 (stroboscopic)
  double residual = 0.0;        // || Phi(rho) - rho ||_tr for the one-period map Phi
  double trace_error = 0.0;     // max |Tr rho_n - 1| over the checked steps
  double min_eigenvalue = 0.0;  // min eigenvalue over the checked steps
  double quadrature_change = 0.0;  // relative change of the averaged dissipator under node doubling
  int samples = 0;
  Mat map;                      // one-period superoperator on column-stacked vec(rho)
};

/// Periodic steady state of drho/dt = -i[H(t), rho] + sum_c D[c] rho.
/// The one-period map is U_T o exp(T Dbar), with Dbar the period average of
/// the dissipator in the interaction picture of H(t) (first Magnus term in
/// kappa T); its fixed point is solved for directly.
OracleResult lindblad_steady_state(const DrivenHamiltonian& h, const std::vector<Mat>& collapse,
                                   const OracleConfig& cfg = {});

/// Collapse operators sqrt(kappa (1 + n_th)) c and sqrt(kappa n_th) c^dag.
std::vector<Mat> thermal_collapse(const Mat& c, double kappa, double n_th);

struct StateDistance {
  double trace_distance = 0.0;  // (1/2) || rho - sigma ||_1
  double fidelity = 0.0;        // (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2
};

StateDistance compare_states(const Mat& rho, const Mat& sigma);
double trace_distance(const Mat& rho, const Mat& sigma);

}  // namespace jfloq

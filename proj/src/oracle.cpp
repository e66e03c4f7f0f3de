#include "jfloq/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace jfloq {

void OracleConfig::validate() const {
  if (samples_per_period < 0 || (samples_per_period > 0 && samples_per_period % 2 != 0))
    fail(ErrorCode::configuration, "oracle quadrature nodes must be a positive even number");
  if (substeps < 1) fail(ErrorCode::configuration, "oracle substeps must be positive");
  if (!(tol > 0.0)) fail(ErrorCode::configuration, "oracle tolerance must be positive");
  if (check_periods < 0) fail(ErrorCode::configuration, "oracle check periods must be non-negative");
}

std::vector<Mat> thermal_collapse(const Mat& c, double kappa, double n_th) {
  if (!(kappa >= 0.0) || !(n_th >= 0.0)) fail(ErrorCode::configuration, "kappa and n_th must be non-negative");
  std::vector<Mat> out{std::sqrt(kappa * (1.0 + n_th)) * c};
  if (n_th > 0.0) out.push_back(std::sqrt(kappa * n_th) * c.adjoint());
  return out;
}

namespace {

// vec(A X B) = (B^T kron A) vec(X), column stacking.
void add_kron(Mat& out, const Mat& bt, const Mat& a, cplx w) {
  const Eigen::Index d = a.rows();
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      const cplx s = w * bt(i, j);
      if (s == cplx(0.0)) continue;
      out.block(i * d, j * d, d, d) += s * a;
    }
}

// Period-averaged interaction-picture dissipator, composite Simpson on the samples.
Mat averaged_dissipator(const std::vector<Mat>& u, const Mat& u_end, const std::vector<Mat>& collapse, int stride) {
  const Eigen::Index d = u_end.rows();
  const int m = static_cast<int>(u.size()) / stride;
  const double h = 1.0 / m;
  Mat out = Mat::Zero(d * d, d * d);
  Mat cdc = Mat::Zero(d, d);
  for (int j = 0; j <= m; ++j) {
    const Mat& uj = j == m ? u_end : u[static_cast<std::size_t>(j) * stride];
    const double w = h / 3.0 * (j == 0 || j == m ? 1.0 : (j % 2 ? 4.0 : 2.0));
    for (const Mat& c : collapse) {
      const Mat ct = uj.adjoint() * c * uj;
      add_kron(out, ct.conjugate(), ct, w);
      cdc.noalias() += w * (ct.adjoint() * ct);
    }
  }
  const Mat id = Mat::Identity(d, d);
  add_kron(out, id, cdc, -0.5);
  add_kron(out, cdc.transpose(), id, -0.5);
  return out;
}

Mat unvec(const Vec& v, Eigen::Index d) { return Eigen::Map<const Mat>(v.data(), d, d); }

double min_eig(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

OracleResult lindblad_steady_state(const DrivenHamiltonian& h, const std::vector<Mat>& collapse,
                                   const OracleConfig& cfg) {
  cfg.validate();
  const Eigen::Index d = h.dim();
  if (d > kOracleMaxDim) fail(ErrorCode::invalid_dimension, "oracle superoperator exceeds the dense size limit");
  for (const Mat& c : collapse)
    if (c.rows() != d || c.cols() != d) fail(ErrorCode::shape, "collapse operator does not match the Hamiltonian");

  int m = cfg.samples_per_period;
  if (m == 0) {
    double bound = 0.0;
    for (int j = 0; j < 8; ++j) bound = std::max(bound, h.norm_bound(h.coefficients(h.period() * j / 8.0)));
    // Keep the largest Bohr phase per node below ~0.5 rad.
    const double need = 4.0 * bound * h.period();
    m = static_cast<int>(std::bit_ceil(static_cast<unsigned>(std::max(16.0, std::ceil(need)))));
  }
  // Nodes at 2m resolve the doubling check from the same propagation.
  PropagatorOptions po;
  po.method = Integrator::cf4;
  po.steps_per_period = 2 * m * cfg.substeps;
  Propagation pr = propagate_period(h, po, 2 * m);

  const double T = h.period();
  const Mat fine = averaged_dissipator(pr.samples, pr.monodromy, collapse, 1);
  const Mat coarse = averaged_dissipator(pr.samples, pr.monodromy, collapse, 2);
  const double scale = fine.cwiseAbs().maxCoeff();

  OracleResult out;
  out.samples = 2 * m;
  out.quadrature_change = scale > 0.0 ? (fine - coarse).cwiseAbs().maxCoeff() / scale : 0.0;

  // Phi = (conj(U) kron U) exp(T Dbar); Dbar is of Lindblad form, so Phi is CPTP.
  const Mat x = (T * fine).exp();
  Eigen::JacobiSVD<Mat> svd(pr.monodromy, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat u = svd.matrixU() * svd.matrixV().adjoint();
  out.map.resize(d * d, d * d);
  for (Eigen::Index col = 0; col < d * d; ++col) {
    const Mat r = unvec(x.col(col), d);
    const Mat ur = u * r * u.adjoint();
    out.map.col(col) = Eigen::Map<const Vec>(ur.data(), d * d);
  }

  // (Phi - I) v = 0 with Tr v = 1 replacing the first equation.
  Mat a = out.map;
  a.diagonal().array() -= 1.0;
  a.row(0).setZero();
  for (Eigen::Index i = 0; i < d; ++i) a(0, i * d + i) = 1.0;
  Vec rhs = Vec::Zero(d * d);
  rhs(0) = 1.0;
  const Eigen::PartialPivLU<Mat> lu(a);
  Vec v = lu.solve(rhs);
  for (int it = 0; it < 3; ++it) v += lu.solve(rhs - a * v);
  out.rho = hermitian_part(unvec(v, d));
  out.rho /= out.rho.trace().real();

  const Vec vr = Eigen::Map<const Vec>(out.rho.data(), d * d);
  out.residual = trace_distance(unvec(out.map * vr, d), out.rho) * 2.0;
  if (!(out.residual < cfg.tol)) {
    std::ostringstream os;
    os << "one-period fixed point residual " << out.residual << " exceeds " << cfg.tol;
    fail(ErrorCode::timeout, os.str());
  }

  // Stroboscopic checks from the steady state and from the maximally mixed state.
  out.min_eigenvalue = min_eig(out.rho);
  for (int start = 0; start < 2; ++start) {
    Vec s = start == 0 ? vr : Vec(Eigen::Map<const Vec>(Mat(Mat::Identity(d, d) / double(d)).data(), d * d));
    for (int n = 0; n < cfg.check_periods; ++n) {
      s = out.map * s;
      const Mat r = unvec(s, d);
      out.trace_error = std::max(out.trace_error, std::abs(r.trace() - 1.0));
      if (n % 10 == 9 || n + 1 == cfg.check_periods) out.min_eigenvalue = std::min(out.min_eigenvalue, min_eig(r));
    }
  }
  return out;
}

double trace_distance(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols() || rho.rows() != rho.cols())
    fail(ErrorCode::shape, "states differ in shape");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(rho - sigma), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

StateDistance compare_states(const Mat& rho, const Mat& sigma) {
  StateDistance out;
  out.trace_distance = trace_distance(rho, sigma);
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(rho));
  const RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Mat sq = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> inner(hermitian_part(sq * sigma * sq), Eigen::EigenvaluesOnly);
  const double f = inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  out.fidelity = std::clamp(f * f, 0.0, 1.0);
  return out;
}

}  // namespace jfloq

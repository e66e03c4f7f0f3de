#include "jfloq/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jfloq {

namespace {

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::configuration, what);
}

bool near_zero_rel(double x, double scale) { return std::abs(x) < 1e-9 * std::abs(scale); }

constexpr std::size_t kMaxBands = 24;

}  // namespace

void UnshuntedParams::validate() const {
  require(E_C > 0.0, "E_C must be positive");
  require(E_J >= 0.0, "E_J must be non-negative");
  require(omega_a > 0.0, "omega_a must be positive");
  require(omega_p > 0.0, "omega_p must be positive");
  require(A_p >= 0.0, "A_p must be non-negative");
  require(std::isfinite(N_g), "N_g must be finite");
  if (near_zero_rel(omega_a - omega_p, omega_a))
    fail(ErrorCode::singular_frame, "pump resonant with the oscillator");
}

void ShuntedParams::validate() const {
  require(E_C > 0.0, "E_C must be positive");
  require(E_J >= 0.0, "E_J must be non-negative");
  require(E_L > 0.0, "E_L must be positive");
  require(omega_a > 0.0, "omega_a must be positive");
  require(omega_p > 0.0, "omega_p must be positive");
  require(A_p >= 0.0, "A_p must be non-negative");
}

// ---------------------------------------------------------------------------
// Frames

cplx UnshuntedFrame::abar(double t) const {
  return abar_plus * std::exp(kI * omega_p * t) + abar_minus * std::exp(-kI * omega_p * t);
}

double UnshuntedFrame::theta_bar(double t) const {
  return std::remainder(xi * std::sin(omega_p * t), kTwoPi);
}

UnshuntedFrame derive_unshunted_frame(const UnshuntedParams& p) {
  if (!(p.omega_p > 0.0)) fail(ErrorCode::singular_frame, "pump frequency must be positive");
  const double wa = p.omega_a, wp = p.omega_p;
  if (near_zero_rel(wa - wp, wa)) fail(ErrorCode::singular_frame, "pump resonant with the oscillator");
  UnshuntedFrame f;
  f.omega_p = wp;
  f.xi = 2.0 * p.A_p * p.g * wa / (wp * (wa * wa - wp * wp));
  f.abar_plus = p.A_p / (2.0 * kI * (wa + wp));
  f.abar_minus = p.A_p / (2.0 * kI * (wa - wp));
  return f;
}

cplx ShuntedFrameParams::alpha(double t) const {
  const double wp = source.omega_p, wa = source.omega_a;
  return alpha_amp * cplx(wp * std::sin(wp * t), wa * std::cos(wp * t));
}

cplx ShuntedFrameParams::beta(double t) const {
  const double wp = source.omega_p, wa = source.omega_a;
  return beta_amp * cplx(wp * std::sin(wp * t), wa * std::cos(wp * t));
}

double shunted_quadratic_residual(const ShuntedParams& p, const ShuntedFrameParams& f) {
  // Quadratic form H = r^T M r / 2 over r = (x, phi, p, N), with
  // a = (x + i p)/sqrt2 and the coupling i g N (a^dag - a) = sqrt2 g N p.
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = p.omega_a;
  m(1, 1) = p.E_L;
  m(2, 2) = p.omega_a;
  m(3, 3) = 8.0 * p.E_C;
  m(2, 3) = m(3, 2) = std::sqrt(2.0) * p.g;

  // r = T r~ with r~ = (x~_a, x~_b, p~_a, p~_b).
  const double c = std::cos(f.theta), s = std::sin(f.theta);
  const double l1 = std::pow(f.omega_1 / p.omega_a, 0.25);
  const double l2 = std::pow(f.omega_2 / p.omega_a, 0.25);
  const double e = std::exp(-f.zeta);
  Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
  t(0, 0) = c * l1;       t(0, 1) = s * l2;
  t(1, 0) = -e * s * l1;  t(1, 1) = e * c * l2;
  t(2, 2) = c / l1;       t(2, 3) = s / l2;
  t(3, 2) = -s / (e * l1); t(3, 3) = c / (e * l2);

  const Eigen::Matrix4d mt = t.transpose() * m * t;
  Eigen::Vector4d target(f.omega_a_t, f.omega_b_t, f.omega_a_t, f.omega_b_t);
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      worst = std::max(worst, std::abs(mt(i, j) - (i == j ? target(i) : 0.0)));

  // T must be symplectic for the map to be a unitary change of frame.
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 2) = omega(1, 3) = 1.0;
  omega(2, 0) = omega(3, 1) = -1.0;
  const double symp = (t.transpose() * omega * t - omega).cwiseAbs().maxCoeff();
  return std::max(worst / p.omega_a, symp);
}

ShuntedFrameParams derive_shunted_frame(const ShuntedParams& p) {
  p.validate();
  const double wa = p.omega_a, wp = p.omega_p;
  ShuntedFrameParams f;
  f.source = p;

  const double big_omega = 8.0 * p.E_C * p.E_L / wa;
  const double cpl = p.g * std::sqrt(2.0 * p.E_L / wa);
  f.theta = -0.5 * std::atan(2.0 * p.g * std::sqrt(2.0 * p.E_L * wa) / (wa * wa - 8.0 * p.E_C * p.E_L));
  const double c = std::cos(f.theta), s = std::sin(f.theta), s2 = std::sin(2.0 * f.theta);

  f.omega_1 = wa * c * c + big_omega * s * s - cpl * s2;
  f.omega_2 = wa * s * s + big_omega * c * c + cpl * s2;
  if (!(f.omega_1 > 0.0) || !(f.omega_2 > 0.0)) {
    std::ostringstream os;
    os << "normal-mode frequencies not positive (omega_1=" << f.omega_1 << ", omega_2=" << f.omega_2 << ")";
    fail(ErrorCode::unstable_frame, os.str());
  }
  const double d1 = wp * wp - wa * f.omega_1;
  const double d2 = wp * wp - wa * f.omega_2;
  if (near_zero_rel(d1, wp * wp) || near_zero_rel(d2, wp * wp))
    fail(ErrorCode::singular_frame, "pump resonant with a renormalized mode");

  f.zeta = std::log(std::sqrt(p.E_L / wa));
  f.zeta_a = std::log(std::pow(wa / f.omega_1, 0.25));
  f.zeta_b = std::log(std::pow(wa / f.omega_2, 0.25));
  f.omega_a_t = std::sqrt(wa * f.omega_1);
  f.omega_b_t = std::sqrt(wa * f.omega_2);

  const double zpf = std::sqrt(wa / (2.0 * p.E_L));
  f.phi_a = -s * zpf * std::pow(f.omega_1 / wa, 0.25);
  f.phi_b = c * zpf * std::pow(f.omega_2 / wa, 0.25);
  f.xi = p.A_p * wp * s2 * zpf * (1.0 / d2 - 1.0 / d1);
  f.alpha_amp = p.A_p * c / d1;
  f.beta_amp = p.A_p * s / d2;

  // Momentum quadratures pick up the inverse of the position zero-point scale.
  f.bath_weight_a = c * std::pow(wa / f.omega_1, 0.25);
  f.bath_weight_b = s * std::pow(wa / f.omega_2, 0.25);

  f.quadratic_residual = shunted_quadratic_residual(p, f);
  if (!(f.quadratic_residual < 1e-9)) {
    std::ostringstream os;
    os << "frame does not diagonalize the quadratic form (residual " << f.quadratic_residual << ")";
    fail(ErrorCode::unstable_frame, os.str());
  }
  return f;
}

Eigen::Vector4cd shunted_linear_response(const ShuntedParams& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = p.omega_a;
  m(1, 1) = p.E_L;
  m(2, 2) = p.omega_a;
  m(3, 3) = 8.0 * p.E_C;
  m(2, 3) = m(3, 2) = std::sqrt(2.0) * p.g;
  // Hamilton's equations r' = J grad H with the pump sqrt2 A_p cos(w_p t) p.
  Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
  j(0, 2) = j(1, 3) = 1.0;
  j(2, 0) = j(3, 1) = -1.0;
  Eigen::Vector4d drive = Eigen::Vector4d::Zero();
  drive(2) = std::sqrt(2.0) * p.A_p;
  const Eigen::Matrix4cd lhs = cplx(0.0, -p.omega_p) * Eigen::Matrix4cd::Identity() - (j * m).cast<cplx>();
  const Eigen::Vector4cd rhs = (j * drive).cast<cplx>();
  return lhs.fullPivLu().solve(rhs);
}

// ---------------------------------------------------------------------------
// DrivenHamiltonian

DrivenHamiltonian::DrivenHamiltonian(BasisSpec basis, double omega_p, double xi)
    : basis_(std::move(basis)), omega_p_(omega_p), xi_(xi) {
  if (!(omega_p_ > 0.0)) fail(ErrorCode::configuration, "drive frequency must be positive");
}

void DrivenHamiltonian::add_term(DriveShape shape, const Mat& op) {
  if (op.rows() != dim() || op.cols() != dim()) fail(ErrorCode::shape, "term does not match basis");
  Term term{shape, hermitian_part(op), {}};
  term.sparse = to_sparse(term.op);
  one_norms_.push_back(term.op.cwiseAbs().colwise().sum().maxCoeff());
  terms_.push_back(std::move(term));
  refresh_storage_choice();
}

void DrivenHamiltonian::refresh_storage_choice() {
  // Terms share most of their pattern only by accident; the sum bounds the fill.
  double nnz = 0.0;
  for (const auto& t : terms_) nnz += static_cast<double>(t.sparse.nonZeros());
  const int n = dim();
  sparse_ = nnz / (static_cast<double>(n) * n) < 0.12;

  offsets_.clear();
  bands_.clear();
  if (!sparse_) return;
  std::vector<int> offs;
  for (const auto& t : terms_)
    for (int c = 0; c < t.sparse.outerSize(); ++c)
      for (SpMat::InnerIterator it(t.sparse, c); it; ++it) offs.push_back(static_cast<int>(it.col() - it.row()));
  std::sort(offs.begin(), offs.end());
  offs.erase(std::unique(offs.begin(), offs.end()), offs.end());
  if (offs.size() > kMaxBands) return;
  offsets_ = offs;
  for (const auto& t : terms_) {
    std::vector<Vec> b(offsets_.size(), Vec::Zero(n));
    for (int c = 0; c < t.sparse.outerSize(); ++c)
      for (SpMat::InnerIterator it(t.sparse, c); it; ++it) {
        const int o = static_cast<int>(it.col() - it.row());
        const auto d = std::lower_bound(offsets_.begin(), offsets_.end(), o) - offsets_.begin();
        b[d](it.row()) = it.value();
      }
    bands_.push_back(std::move(b));
  }
}

void DrivenHamiltonian::combine_banded(const std::vector<double>& c, std::vector<Vec>& out) const {
  if (!banded()) fail(ErrorCode::precondition, "Hamiltonian has no banded layout");
  out.resize(offsets_.size());
  for (std::size_t d = 0; d < offsets_.size(); ++d) {
    out[d].setZero(dim());
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (c[i] != 0.0) out[d] += c[i] * bands_[i][d];
  }
}

double DrivenHamiltonian::coefficient(std::size_t term, double t) const {
  const double s = t + time_shift_;
  switch (terms_.at(term).shape) {
    case DriveShape::constant: return 1.0;
    case DriveShape::cos_of_sin: return std::cos(xi_ * std::sin(omega_p_ * s));
    case DriveShape::sin_of_sin: return std::sin(xi_ * std::sin(omega_p_ * s));
    case DriveShape::cos_wt: return std::cos(omega_p_ * s);
    case DriveShape::sin_wt: return std::sin(omega_p_ * s);
  }
  return 0.0;
}

std::vector<double> DrivenHamiltonian::coefficients(double t) const {
  std::vector<double> c(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) c[i] = coefficient(i, t);
  return c;
}

Mat DrivenHamiltonian::combine(const std::vector<double>& c) const {
  Mat h = Mat::Zero(dim(), dim());
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (c[i] != 0.0) h += c[i] * terms_[i].op;
  return h;
}

SpMat DrivenHamiltonian::combine_sparse(const std::vector<double>& c) const {
  SpMat h(dim(), dim());
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (c[i] != 0.0) h += cplx(c[i]) * terms_[i].sparse;
  return h;
}

double DrivenHamiltonian::norm_bound(const std::vector<double>& c) const {
  double b = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) b += std::abs(c[i]) * one_norms_[i];
  return b;
}

Operator DrivenHamiltonian::at(double t) const { return {basis_, combine(coefficients(t))}; }

// ---------------------------------------------------------------------------
// Model Hamiltonians

BasisSpec unshunted_basis(int n_max, int n_fock) {
  return BasisSpec({{ModeKind::charge, 2 * n_max + 1}, {ModeKind::fock, n_fock}});
}

BasisSpec shunted_basis(int n_b, int n_a) {
  return BasisSpec({{ModeKind::fock, n_b}, {ModeKind::fock, n_a}});
}

namespace {

void require_unshunted_basis(const BasisSpec& basis) {
  if (basis.num_modes() != 2 || basis.mode_kind(0) != ModeKind::charge || basis.mode_kind(1) != ModeKind::fock)
    fail(ErrorCode::configuration, "unshunted model needs a charge x fock basis");
}

void require_shunted_basis(const BasisSpec& basis) {
  if (basis.num_modes() != 2 || basis.mode_kind(0) != ModeKind::fock || basis.mode_kind(1) != ModeKind::fock)
    fail(ErrorCode::configuration, "shunted model needs a fock x fock basis");
}

Mat offset_charge(int n_max, double n_g) {
  Mat n = charge_number(n_max).m;
  n.diagonal().array() -= n_g;
  return n;
}

// Static part shared by the displaced and lab frames, without the Josephson term.
Mat unshunted_linear_part(const UnshuntedParams& p, const BasisSpec& basis) {
  const int n_max = basis.charge_nmax(0);
  const int nf = basis.mode_dim(1);
  const Mat a = annihilation(nf).m;
  const Mat nq = offset_charge(n_max, p.N_g);
  const Mat num = embed_sparse(a.adjoint() * a, 1, basis);
  const Mat charging = embed_sparse(nq * nq, 0, basis);
  const Mat coupling = Mat(embed_sparse(nq, 0, basis)) * Mat(embed_sparse(a.adjoint() - a, 1, basis));
  return p.omega_a * num + 4.0 * p.E_C * charging + kI * p.g * coupling;
}

}  // namespace

DrivenHamiltonian build_unshunted_hamiltonian(const UnshuntedParams& p, const UnshuntedFrame& frame,
                                              const BasisSpec& basis) {
  require_unshunted_basis(basis);
  const int n_max = basis.charge_nmax(0);
  DrivenHamiltonian h(basis, p.omega_p, frame.xi);
  h.add_term(DriveShape::constant, unshunted_linear_part(p, basis));
  // -E_J cos(theta + u) = -E_J cos(theta) cos(u) + E_J sin(theta) sin(u)
  h.add_term(DriveShape::cos_of_sin, -p.E_J * Mat(embed_sparse(cos_theta(n_max).m, 0, basis)));
  h.add_term(DriveShape::sin_of_sin, p.E_J * Mat(embed_sparse(sin_theta(n_max).m, 0, basis)));
  return h;
}

Operator build_unshunted_hamiltonian(const UnshuntedParams& p, const UnshuntedFrame& frame,
                                     const BasisSpec& basis, double t) {
  return build_unshunted_hamiltonian(p, frame, basis).at(t);
}

DrivenHamiltonian build_unshunted_lab_hamiltonian(const UnshuntedParams& p, const BasisSpec& basis) {
  require_unshunted_basis(basis);
  const int n_max = basis.charge_nmax(0);
  const Mat a = annihilation(basis.mode_dim(1)).m;
  DrivenHamiltonian h(basis, p.omega_p, 0.0);
  h.add_term(DriveShape::constant,
             unshunted_linear_part(p, basis) - p.E_J * Mat(embed_sparse(cos_theta(n_max).m, 0, basis)));
  h.add_term(DriveShape::cos_wt, kI * p.A_p * Mat(embed_sparse(a.adjoint() - a, 1, basis)));
  return h;
}

Operator shunted_phase_operator(const ShuntedFrameParams& frame, const BasisSpec& basis) {
  require_shunted_basis(basis);
  const Mat b = annihilation(basis.mode_dim(0)).m;
  const Mat a = annihilation(basis.mode_dim(1)).m;
  const Mat phi = frame.phi_b * Mat(embed_sparse(b + b.adjoint(), 0, basis)) +
                  frame.phi_a * Mat(embed_sparse(a + a.adjoint(), 1, basis));
  return {basis, phi};
}

namespace {
Mat shunted_linear_part(const ShuntedFrameParams& frame, const BasisSpec& basis) {
  const Mat b = annihilation(basis.mode_dim(0)).m;
  const Mat a = annihilation(basis.mode_dim(1)).m;
  return frame.omega_b_t * Mat(embed_sparse(b.adjoint() * b, 0, basis)) +
         frame.omega_a_t * Mat(embed_sparse(a.adjoint() * a, 1, basis));
}
}  // namespace

DrivenHamiltonian build_shunted_hamiltonian(const ShuntedFrameParams& frame, const BasisSpec& basis) {
  require_shunted_basis(basis);
  const auto [cos_phi, sin_phi] = matrix_cos_sin(shunted_phase_operator(frame, basis));
  const double ej = frame.source.E_J;
  DrivenHamiltonian h(basis, frame.source.omega_p, frame.xi);
  h.add_term(DriveShape::constant, shunted_linear_part(frame, basis));
  h.add_term(DriveShape::cos_of_sin, -ej * cos_phi.m);
  h.add_term(DriveShape::sin_of_sin, ej * sin_phi.m);
  return h;
}

Operator build_shunted_hamiltonian(const ShuntedFrameParams& frame, const BasisSpec& basis, double t) {
  return build_shunted_hamiltonian(frame, basis).at(t);
}

Operator bath_coupling_unshunted(const BasisSpec& basis) {
  require_unshunted_basis(basis);
  const Mat a = annihilation(basis.mode_dim(1)).m;
  return {basis, hermitian_part(Mat(embed_sparse(kI * (a - a.adjoint()), 1, basis)))};
}

Operator bath_coupling_shunted(const ShuntedFrameParams& frame, const BasisSpec& basis) {
  require_shunted_basis(basis);
  const Mat b = annihilation(basis.mode_dim(0)).m;
  const Mat a = annihilation(basis.mode_dim(1)).m;
  const Mat nu = frame.bath_weight_a * Mat(embed_sparse(kI * (a - a.adjoint()), 1, basis)) +
                 frame.bath_weight_b * Mat(embed_sparse(kI * (b - b.adjoint()), 0, basis));
  return {basis, hermitian_part(nu)};
}

Operator bath_coupling(Model model, const ShuntedFrameParams* frame, const BasisSpec& basis) {
  if (model == Model::unshunted) return bath_coupling_unshunted(basis);
  if (frame == nullptr) fail(ErrorCode::configuration, "shunted bath coupling needs the frame");
  return bath_coupling_shunted(*frame, basis);
}

Operator time_averaged_hamiltonian(const ShuntedFrameParams& frame, const BasisSpec& basis) {
  require_shunted_basis(basis);
  const auto cs = matrix_cos_sin(shunted_phase_operator(frame, basis));
  const double j0 = std::cyl_bessel_j(0.0, std::abs(frame.xi));
  return {basis, hermitian_part(shunted_linear_part(frame, basis) - j0 * frame.source.E_J * cs.first.m)};
}

// ---------------------------------------------------------------------------
// Diagnostic eigenbases

namespace {

constexpr int kComparedLevels = 20;

Eigenbasis diagonalize(const Mat& h, int resolution) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(h));
  if (es.info() != Eigen::Success) fail(ErrorCode::numerical, "eigensolver failed");
  Eigenbasis e;
  e.energies = es.eigenvalues();
  e.vectors = es.eigenvectors();
  e.resolution = resolution;
  return e;
}

double level_change(const RVec& coarse, const RVec& fine) {
  const int m = static_cast<int>(std::min<Eigen::Index>({coarse.size(), fine.size(), kComparedLevels}));
  double scale = 0.0;
  for (int k = 0; k < m; ++k) scale = std::max(scale, std::abs(fine(k)));
  double worst = 0.0;
  for (int k = 0; k < m; ++k) worst = std::max(worst, std::abs(fine(k) - coarse(k)));
  return scale > 0.0 ? worst / scale : worst;
}

Mat transmon_matrix(const UnshuntedParams& p, int n_max) {
  const Mat nq = offset_charge(n_max, p.N_g);
  return 4.0 * p.E_C * nq * nq - p.E_J * cos_theta(n_max).m;
}

Mat shunted_transmon_matrix(const ShuntedParams& p, int n_fock) {
  const double e2z = p.E_L / p.omega_a;  // exp(2 zeta)
  const Mat b = annihilation(n_fock).m;
  const Mat phi_s = (b + b.adjoint()) / std::sqrt(2.0);
  const Mat n_s = (b - b.adjoint()) / (kI * std::sqrt(2.0));
  const Mat phi = phi_s / std::sqrt(e2z);
  const auto cs = matrix_cos_sin(Operator{BasisSpec::fock(n_fock), phi});
  return 4.0 * p.E_C * e2z * n_s * n_s + 0.5 * p.E_L * phi * phi - p.E_J * cs.first.m;
}

void check_converged(Eigenbasis& e, const RVec& fine, const char* what) {
  e.convergence = level_change(e.energies, fine);
  if (!(e.convergence < 1e-6)) {
    std::ostringstream os;
    os << what << " not converged at resolution " << e.resolution << ": lowest levels moved by "
       << e.convergence << " (relative) under doubling";
    fail(ErrorCode::convergence, os.str());
  }
}

}  // namespace

Eigenbasis transmon_eigenbasis(const UnshuntedParams& p, int n_max, bool check_convergence) {
  if (n_max < 1) fail(ErrorCode::invalid_dimension, "transmon window needs N_max >= 1");
  Eigenbasis e = diagonalize(transmon_matrix(p, n_max), n_max);
  if (check_convergence) {
    Eigen::SelfAdjointEigenSolver<Mat> fine(transmon_matrix(p, 2 * n_max), Eigen::EigenvaluesOnly);
    check_converged(e, fine.eigenvalues(), "transmon eigenbasis");
  }
  return e;
}

Eigenbasis shunted_transmon_eigenbasis(const ShuntedParams& p, int n_fock, bool check_convergence) {
  if (n_fock < 2) fail(ErrorCode::invalid_dimension, "shunted transmon basis needs >= 2 states");
  Eigenbasis e = diagonalize(shunted_transmon_matrix(p, n_fock), n_fock);
  if (check_convergence) {
    Eigen::SelfAdjointEigenSolver<Mat> fine(hermitian_part(shunted_transmon_matrix(p, 2 * n_fock)),
                                            Eigen::EigenvaluesOnly);
    check_converged(e, fine.eigenvalues(), "shunted transmon eigenbasis");
  }
  return e;
}

Eigenbasis diagnostic_eigenbasis(Model model, const UnshuntedParams* up, const ShuntedParams* sp,
                                 int resolution) {
  if (model == Model::unshunted) {
    if (up == nullptr) fail(ErrorCode::configuration, "missing unshunted parameters");
    return transmon_eigenbasis(*up, resolution);
  }
  if (sp == nullptr) fail(ErrorCode::configuration, "missing shunted parameters");
  return shunted_transmon_eigenbasis(*sp, resolution);
}

ConfinementEstimate confined_levels(const UnshuntedParams& p, const Eigenbasis& eta) {
  if (eta.energies.size() < 2) fail(ErrorCode::precondition, "need at least two levels");
  ConfinementEstimate c;
  const double spacing = eta.energies(1) - eta.energies(0);
  c.depth_over_spacing = 2.0 * p.E_J / spacing;
  c.confined_levels = static_cast<int>(std::floor(c.depth_over_spacing));
  for (Eigen::Index k = 0; k < eta.energies.size(); ++k)
    if (eta.energies(k) < p.E_J) ++c.levels_below_top;
  return c;
}

double nbar_est(double A_p, double omega_p, double omega_a) {
  const double det = omega_p - omega_a;
  if (near_zero_rel(det, omega_a)) fail(ErrorCode::singular_frame, "pump resonant with the oscillator");
  return A_p * A_p / (4.0 * det * det);
}

double pump_amplitude_for_nbar(double nbar, double omega_p, double omega_a) {
  if (nbar < 0.0) fail(ErrorCode::configuration, "photon number must be non-negative");
  const double det = omega_p - omega_a;
  if (near_zero_rel(det, omega_a)) fail(ErrorCode::singular_frame, "pump resonant with the oscillator");
  return 2.0 * std::abs(det) * std::sqrt(nbar);
}

}  // namespace jfloq

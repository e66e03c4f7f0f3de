#include "jfloq/hilbert.hpp"

#include <cmath>

namespace jfloq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid dimension";
    case ErrorCode::shape: return "shape error";
    case ErrorCode::contract_violation: return "contract violation";
    case ErrorCode::configuration: return "configuration error";
    case ErrorCode::singular_frame: return "singular frame";
    case ErrorCode::unstable_frame: return "unstable frame";
    case ErrorCode::convergence: return "convergence error";
    case ErrorCode::integration_failure: return "integration failure";
    case ErrorCode::numerical: return "numerical error";
    case ErrorCode::numerical_rank: return "numerical rank error";
    case ErrorCode::aliasing: return "aliasing error";
    case ErrorCode::precondition: return "precondition error";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::truncation: return "truncation error";
    case ErrorCode::ladder_identification: return "ladder identification error";
    case ErrorCode::io: return "i/o error";
  }
  return "unknown error";
}

BasisSpec::BasisSpec(std::vector<Mode> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) fail(ErrorCode::invalid_dimension, "basis needs at least one mode");
  for (const auto& m : modes_) {
    if (m.dim < 2) fail(ErrorCode::invalid_dimension, "mode dimension must be >= 2");
    if (m.kind == ModeKind::charge && m.dim % 2 == 0)
      fail(ErrorCode::invalid_dimension, "charge mode dimension must be odd");
  }
}

int BasisSpec::total_dim() const {
  int d = 1;
  for (const auto& m : modes_) d *= m.dim;
  return d;
}

int BasisSpec::charge_nmax(int i) const {
  if (mode_kind(i) != ModeKind::charge) fail(ErrorCode::configuration, "mode is not a charge mode");
  return (mode_dim(i) - 1) / 2;
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_error(const Mat& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::shape, "operator is not square");
  return max_abs(m - m.adjoint());
}

double unitarity_error(const Mat& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::shape, "operator is not square");
  return max_abs(m.adjoint() * m - Mat::Identity(m.rows(), m.cols()));
}

bool is_hermitian(const Mat& m, double tol) { return hermiticity_error(m) < tol; }
bool is_unitary(const Mat& m, double tol) { return unitarity_error(m) < tol; }

Mat hermitian_part(const Mat& m) {
  const Eigen::Index n = m.rows();
  Mat h(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    h(j, j) = cplx(m(j, j).real(), 0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  }
  return h;
}

Operator annihilation(int dim) {
  if (dim < 2) fail(ErrorCode::invalid_dimension, "annihilation needs dim >= 2");
  Mat a = Mat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {BasisSpec::fock(dim), a};
}

Operator number_operator(int dim) {
  Operator a = annihilation(dim);
  Mat n = Mat::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return {a.basis, n};
}

Operator identity(const BasisSpec& basis) {
  const int d = basis.total_dim();
  return {basis, Mat::Identity(d, d)};
}

Operator charge_number(int n_max) {
  if (n_max < 1) fail(ErrorCode::invalid_dimension, "charge window needs N_max >= 1");
  const int d = 2 * n_max + 1;
  Mat n = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) n(i, i) = static_cast<double>(i - n_max);
  return {BasisSpec::charge(n_max), n};
}

namespace {
// |N><N+1| on the charge window, index i <-> N = i - N_max.
Mat charge_lowering(int n_max) {
  if (n_max < 1) fail(ErrorCode::invalid_dimension, "charge window needs N_max >= 1");
  const int d = 2 * n_max + 1;
  Mat s = Mat::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) s(i, i + 1) = 1.0;
  return s;
}
}  // namespace

Operator cos_theta(int n_max) {
  const Mat s = charge_lowering(n_max);
  return {BasisSpec::charge(n_max), 0.5 * (s + s.adjoint())};
}

Operator sin_theta(int n_max) {
  const Mat s = charge_lowering(n_max);
  return {BasisSpec::charge(n_max), (s - s.adjoint()) / (2.0 * kI)};
}

namespace {
void check_embed(const BasisSpec& op_basis, int rows, int mode_index, const BasisSpec& basis) {
  if (mode_index < 0 || mode_index >= basis.num_modes())
    fail(ErrorCode::shape, "mode index out of range");
  if (rows != basis.mode_dim(mode_index))
    fail(ErrorCode::shape, "operator dimension does not match the target mode");
  if (op_basis.num_modes() == 1 && op_basis.mode_kind(0) != basis.mode_kind(mode_index))
    fail(ErrorCode::shape, "operator mode kind does not match the target mode");
}

std::pair<int, int> outer_inner(int mode_index, const BasisSpec& basis) {
  int outer = 1, inner = 1;
  for (int i = 0; i < mode_index; ++i) outer *= basis.mode_dim(i);
  for (int i = mode_index + 1; i < basis.num_modes(); ++i) inner *= basis.mode_dim(i);
  return {outer, inner};
}
}  // namespace

Operator embed(const Operator& op, int mode_index, const BasisSpec& basis) {
  check_embed(op.basis, op.dim(), mode_index, basis);
  return {basis, Mat(embed_sparse(op.m, mode_index, basis))};
}

SpMat embed_sparse(const Mat& op, int mode_index, const BasisSpec& basis) {
  if (mode_index < 0 || mode_index >= basis.num_modes() || op.rows() != basis.mode_dim(mode_index))
    fail(ErrorCode::shape, "operator dimension does not match the target mode");
  const auto [outer, inner] = outer_inner(mode_index, basis);
  const int d = static_cast<int>(op.rows());
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const cplx v = op(r, c);
      if (v == cplx(0.0)) continue;
      for (int o = 0; o < outer; ++o)
        for (int i = 0; i < inner; ++i)
          trip.emplace_back((o * d + r) * inner + i, (o * d + c) * inner + i, v);
    }
  const int n = basis.total_dim();
  SpMat out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

std::pair<Operator, Operator> matrix_cos_sin(const Operator& phi) {
  const double herm = hermiticity_error(phi.m);
  const double scale = std::max(1.0, max_abs(phi.m));
  if (herm > 1e-12 * scale)
    fail(ErrorCode::contract_violation, "matrix_cos_sin requires a Hermitian argument");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(phi.m));
  if (es.info() != Eigen::Success) fail(ErrorCode::numerical, "eigensolver failed in matrix_cos_sin");
  const Mat& v = es.eigenvectors();
  const RVec& lam = es.eigenvalues();
  const Mat c = v * lam.array().cos().matrix().cast<cplx>().asDiagonal() * v.adjoint();
  const Mat s = v * lam.array().sin().matrix().cast<cplx>().asDiagonal() * v.adjoint();
  return {Operator{phi.basis, hermitian_part(c)}, Operator{phi.basis, hermitian_part(s)}};
}

Mat reduce_to_mode(const Mat& rho, const BasisSpec& basis, int keep) {
  if (rho.rows() != basis.total_dim() || rho.cols() != basis.total_dim())
    fail(ErrorCode::shape, "density matrix does not match basis");
  const auto [outer, inner] = outer_inner(keep, basis);
  const int d = basis.mode_dim(keep);
  Mat red = Mat::Zero(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      cplx acc = 0.0;
      for (int o = 0; o < outer; ++o)
        for (int i = 0; i < inner; ++i)
          acc += rho((o * d + r) * inner + i, (o * d + c) * inner + i);
      red(r, c) = acc;
    }
  return red;
}

SpMat to_sparse(const Mat& m, double drop_below) {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (std::abs(m(r, c)) > drop_below) trip.emplace_back(r, c, m(r, c));
  SpMat s(m.rows(), m.cols());
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

}  // namespace jfloq

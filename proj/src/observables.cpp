#include "jfloq/observables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jfloq {

Populations populations_in_eigenbasis(const Mat& rho, const Mat& vectors) {
  if (rho.rows() != rho.cols() || rho.rows() != vectors.rows())
    fail(ErrorCode::shape, "eigenvectors do not live on the state's basis");
  Populations out;
  const Mat rv = rho * vectors;
  out.values.resize(vectors.cols());
  for (Eigen::Index k = 0; k < vectors.cols(); ++k)
    out.values(k) = std::max(0.0, vectors.col(k).dot(rv.col(k)).real());
  out.leakage = rho.trace().real() - out.values.sum();
  for (Eigen::Index k = 0; k < out.values.size(); ++k) out.mean_excitation += static_cast<double>(k) * out.values(k);
  return out;
}

double purity(const Mat& rho) {
  if (rho.rows() != rho.cols()) fail(ErrorCode::shape, "density matrix must be square");
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  return rho.squaredNorm();
}

double impurity(const Mat& rho) { return std::max(0.0, 1.0 - purity(rho)); }

std::vector<StarkLine> stark_lines(const FourierElements& F, const FloquetBasis& basis, const RVec& p,
                                   const StarkWindow& window) {
  const int n = basis.dim();
  if (p.size() != n || F.dim() != n) fail(ErrorCode::shape, "steady state does not match the Floquet basis");
  if (p.size() == 0 || !(p.maxCoeff() > 0.0)) fail(ErrorCode::precondition, "empty steady state");
  const double w = basis.omega_p;
  const double center = kTwoPi * window.center_hz;
  const double half = kTwoPi * window.half_width_hz;
  const double pmax = p.maxCoeff();

  std::vector<StarkLine> lines;
  for (int a = 0; a < n; ++a) {
    if (p(a) < 1e-14 * pmax) continue;
    for (int b = 0; b < n; ++b) {
      const double de = basis.quasi_energies(b) - basis.quasi_energies(a);
      // The window is narrower than w_p, so at most one sideband lands in it.
      const int k = static_cast<int>(std::lround((center - de) / w));
      if (k < -F.K || k > F.K) continue;
      const double delta = de + k * w;
      if (std::abs(delta - center) > half) continue;
      const double weight = p(a) * std::norm(F.at(k)(b, a));
      if (weight <= 0.0) continue;
      lines.push_back({to_hz(delta), weight, a, b, k});
    }
  }
  double wmax = 0.0;
  for (const auto& l : lines) wmax = std::max(wmax, l.weight);
  std::erase_if(lines, [&](const StarkLine& l) { return l.weight < window.relative_floor * wmax; });
  std::stable_sort(lines.begin(), lines.end(), [](const StarkLine& x, const StarkLine& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    return x.frequency_hz < y.frequency_hz;
  });
  return lines;
}

namespace {

// Strongest in-window line out of `source` (by |P|^2 above `floor`), skipping `exclude`.
bool strongest_line_from(const FourierElements& F, const FloquetBasis& basis, int source, int exclude,
                         const StarkWindow& window, double floor, StarkLine& best) {
  const double w = basis.omega_p;
  const double center = kTwoPi * window.center_hz;
  const double half = kTwoPi * window.half_width_hz;
  bool found = false;
  for (int b = 0; b < basis.dim(); ++b) {
    if (b == source || b == exclude) continue;
    const double de = basis.quasi_energies(b) - basis.quasi_energies(source);
    const int k = static_cast<int>(std::lround((center - de) / w));
    if (k < -F.K || k > F.K) continue;
    const double delta = de + k * w;
    if (std::abs(delta - center) > half) continue;
    const double m2 = std::norm(F.at(k)(b, source));
    if (m2 <= floor) continue;
    if (!found || m2 > best.weight) {
      best = {to_hz(delta), m2, source, b, k};
      found = true;
    }
  }
  return found;
}

}  // namespace

KerrEstimate kerr_strength(const FourierElements& F, const FloquetBasis& basis, const RVec& p,
                           const StarkWindow& window) {
  if (p.size() != basis.dim()) fail(ErrorCode::shape, "steady state does not match the Floquet basis");
  if (p.size() == 0 || !(p.maxCoeff() > 0.0)) fail(ErrorCode::precondition, "empty steady state");
  Eigen::Index dominant = 0;
  p.maxCoeff(&dominant);
  double scale = 0.0;
  for (const Mat& pk : F.P) scale = std::max(scale, pk.cwiseAbs2().maxCoeff());
  const double floor = 1e-12 * scale;
  KerrEstimate out;
  if (!strongest_line_from(F, basis, static_cast<int>(dominant), -1, window, floor, out.first)) {
    std::ostringstream os;
    os << "no line in the window out of dominant mode " << dominant;
    fail(ErrorCode::ladder_identification, os.str());
  }
  if (!strongest_line_from(F, basis, out.first.target, static_cast<int>(dominant), window, floor, out.second)) {
    std::ostringstream os;
    os << "no second-excitation line out of mode " << out.first.target << " (first line at "
       << out.first.frequency_hz << " Hz, k=" << out.first.k << ")";
    fail(ErrorCode::ladder_identification, os.str());
  }
  out.first.weight *= p(dominant);
  out.second.weight *= p(dominant);
  out.kerr_hz = out.second.frequency_hz - out.first.frequency_hz;
  return out;
}

std::vector<int> label_by_overlap(const Mat& dressed, const Mat& bare) {
  if (dressed.rows() != bare.rows()) fail(ErrorCode::shape, "bare and dressed states differ in dimension");
  const RMat ov = (bare.adjoint() * dressed).cwiseAbs2();
  std::vector<int> out(bare.cols());
  for (Eigen::Index j = 0; j < bare.cols(); ++j) {
    Eigen::Index best = 0;
    ov.row(j).maxCoeff(&best);
    out[j] = static_cast<int>(best);
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (out[i] == out[j]) fail(ErrorCode::ladder_identification, "two bare states map to the same dressed state");
  return out;
}

namespace {

struct Diag {
  RVec e;
  Mat v;
};

Diag diagonalize(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(h));
  if (es.info() != Eigen::Success) fail(ErrorCode::numerical, "eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Vec kron(const Vec& outer, const Vec& inner) {
  Vec out(outer.size() * inner.size());
  for (Eigen::Index i = 0; i < outer.size(); ++i) out.segment(i * inner.size(), inner.size()) = outer(i) * inner;
  return out;
}

Vec fock(int dim, int n) {
  Vec v = Vec::Zero(dim);
  v(n) = 1.0;
  return v;
}

// Energies of the bare labels (q, c): q indexes the first mode, c the oscillator.
struct Ladder {
  double e00, e01, e02, e10, e20, e11;
  StaticSpectrum spectrum() const {
    StaticSpectrum s;
    s.cavity_hz = to_hz(e01 - e00);
    s.qubit_hz = to_hz(e10 - e00);
    s.anharmonicity_hz = to_hz(e20 - 2.0 * e10 + e00);
    s.self_kerr_hz = to_hz(e02 - 2.0 * e01 + e00);
    s.cross_kerr_hz = to_hz(e11 - e10 - e01 + e00);
    return s;
  }
};

Ladder ladder_from(const Diag& d, const std::vector<Vec>& first_mode, int n_fock) {
  const int dim = static_cast<int>(d.v.rows());
  const std::pair<int, int> labels[] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {2, 0}, {1, 1}};
  Mat bare(dim, 6);
  for (int i = 0; i < 6; ++i) bare.col(i) = kron(first_mode[labels[i].first], fock(n_fock, labels[i].second));
  const auto idx = label_by_overlap(d.v, bare);
  return {d.e(idx[0]), d.e(idx[1]), d.e(idx[2]), d.e(idx[3]), d.e(idx[4]), d.e(idx[5])};
}

}  // namespace

StaticSpectrum static_spectrum_unshunted(const UnshuntedParams& p, int n_max, int n_fock) {
  UnshuntedParams q = p;
  q.A_p = 0.0;
  const BasisSpec basis = unshunted_basis(n_max, n_fock);
  const Operator h = build_unshunted_hamiltonian(q, derive_unshunted_frame(q), basis, 0.0);
  const Eigenbasis eta = transmon_eigenbasis(q, n_max, false);
  std::vector<Vec> t;
  for (int k = 0; k < 3; ++k) t.push_back(eta.vectors.col(k));
  return ladder_from(diagonalize(h.m), t, n_fock).spectrum();
}

StaticSpectrum static_spectrum_shunted(const ShuntedFrameParams& frame, const BasisSpec& basis) {
  const Operator h = build_shunted_hamiltonian(frame, basis, 0.0);
  std::vector<Vec> b;
  for (int k = 0; k < 3; ++k) b.push_back(fock(basis.mode_dim(0), k));
  return ladder_from(diagonalize(h.m), b, basis.mode_dim(1)).spectrum();
}

AveragedPrediction averaged_model_predictions(const ShuntedFrameParams& frame, const BasisSpec& basis) {
  const Diag d = diagonalize(time_averaged_hamiltonian(frame, basis).m);
  const int nb = basis.mode_dim(0), na = basis.mode_dim(1);
  Mat bare(d.v.rows(), 3);
  for (int i = 0; i < 3; ++i) bare.col(i) = kron(fock(nb, 0), fock(na, i));
  const auto idx = label_by_overlap(d.v, bare);
  AveragedPrediction out;
  out.frequency_hz = to_hz(d.e(idx[1]) - d.e(idx[0]));
  out.kerr_hz = to_hz(d.e(idx[2]) - 2.0 * d.e(idx[1]) + d.e(idx[0]));
  return out;
}

// ---------------------------------------------------------------------------
// Frame back-transformation

namespace {

// exp(A) for anti-Hermitian A via the spectrum of the Hermitian -iA.
Mat exp_anti_hermitian(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(cplx(0.0, -1.0) * a));
  if (es.info() != Eigen::Success) fail(ErrorCode::numerical, "eigensolver failed in exp_anti_hermitian");
  const Vec ph = (es.eigenvalues().cast<cplx>() * kI).array().exp().matrix();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// exp((r/2)(m^2 - m^dag^2)): x -> exp(-r) x, p -> exp(r) p.
Mat squeezer(int dim, double r) {
  const Mat m = annihilation(dim).m;
  return exp_anti_hermitian(0.5 * r * (m * m - m.adjoint() * m.adjoint()));
}

Mat displacement(int dim, cplx delta) {
  const Mat m = annihilation(dim).m;
  return exp_anti_hermitian(delta * m.adjoint() - std::conj(delta) * m);
}

Mat pad(const Mat& rho, int n_b_old, int n_a_old, int n_b, int n_a) {
  const int d = n_b * n_a;
  Mat out = Mat::Zero(d, d);
  for (int b1 = 0; b1 < n_b_old; ++b1)
    for (int a1 = 0; a1 < n_a_old; ++a1)
      for (int b2 = 0; b2 < n_b_old; ++b2)
        for (int a2 = 0; a2 < n_a_old; ++a2)
          out(b1 * n_a + a1, b2 * n_a + a2) = rho(b1 * n_a_old + a1, b2 * n_a_old + a2);
  return out;
}

double edge_weight(const Mat& rho_mode) {
  const Eigen::Index d = rho_mode.rows();
  return rho_mode(d - 1, d - 1).real() + rho_mode(d - 2, d - 2).real();
}

}  // namespace

PhysicalState to_physical_basis(const Mat& rho_frame, const BasisSpec& frame_basis, const ShuntedFrameParams& frame,
                                const PhysicalDims& dims, double t, double leak_tol) {
  if (frame_basis.num_modes() != 2 || frame_basis.mode_kind(0) != ModeKind::fock ||
      frame_basis.mode_kind(1) != ModeKind::fock)
    fail(ErrorCode::configuration, "frame state must live on a fock x fock basis");
  if (rho_frame.rows() != frame_basis.total_dim() || rho_frame.cols() != frame_basis.total_dim())
    fail(ErrorCode::shape, "state does not match the frame basis");
  const int nb0 = frame_basis.mode_dim(0), na0 = frame_basis.mode_dim(1);
  const int nb = dims.n_b > 0 ? dims.n_b : nb0 + 12;
  const int na = dims.n_a > 0 ? dims.n_a : na0 + 6;
  if (nb < nb0 || na < na0) fail(ErrorCode::configuration, "physical dimensions must not be smaller than the frame's");

  PhysicalState out;
  out.basis = shunted_basis(nb, na);
  out.purity_before = purity(rho_frame);

  // Gaussian part: quadratures map as r = R(theta) S(lambda) r~.
  const double wa = frame.source.omega_a;
  const double r_a = -std::log(std::pow(frame.omega_1 / wa, 0.25));
  const double r_b = -std::log(std::pow(frame.omega_2 / wa, 0.25));
  const Mat bop = Mat(embed_sparse(annihilation(nb).m, 0, out.basis));
  const Mat aop = Mat(embed_sparse(annihilation(na).m, 1, out.basis));
  const Mat beam = exp_anti_hermitian(-frame.theta * (aop * bop.adjoint() - aop.adjoint() * bop));
  const Mat sq_b = squeezer(nb, r_b), sq_a = squeezer(na, r_a);
  Mat sq(nb * na, nb * na);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) sq.block(i * na, j * na, na, na) = sq_b(i, j) * sq_a;
  const Mat g = beam * sq;

  const Mat padded = pad(rho_frame, nb0, na0, nb, na);
  out.rho = hermitian_part(g * padded * g.adjoint());
  out.purity_after = purity(out.rho);
  const Mat rho_b = reduce_to_mode(out.rho, out.basis, 0);
  const Mat rho_a = reduce_to_mode(out.rho, out.basis, 1);
  double edge = std::max(edge_weight(rho_b), edge_weight(rho_a));
  if (edge > leak_tol) {
    std::ostringstream os;
    os << "Gaussian back-transformation leaks " << edge << " into the outermost Fock levels; increase the"
       << " physical dimensions beyond (" << nb << ", " << na << ")";
    fail(ErrorCode::truncation, os.str());
  }

  // Displacement of the classical orbit; only the junction part is applied.
  const Eigen::Vector4cd amp = shunted_linear_response(frame.source);
  const cplx rot = std::exp(cplx(0.0, -frame.source.omega_p * t));
  const double x = (amp(0) * rot).real(), phi = (amp(1) * rot).real();
  const double px = (amp(2) * rot).real(), nq = (amp(3) * rot).real();
  out.a_displacement = cplx(x, px) / std::sqrt(2.0);
  out.b_displacement = cplx(std::exp(frame.zeta) * phi, std::exp(-frame.zeta) * nq) / std::sqrt(2.0);

  const double d = std::abs(out.b_displacement);
  int nj = dims.n_junction > 0 ? dims.n_junction
                               : nb + static_cast<int>(std::ceil(d * d + 2.0 * d * std::sqrt(nb) + 4.0 * d)) + 4;
  for (int attempt = 0;; ++attempt) {
    Mat rj = Mat::Zero(nj, nj);
    rj.topLeftCorner(nb, nb) = rho_b;
    const Mat dj = displacement(nj, out.b_displacement);
    rj = hermitian_part(dj * rj * dj.adjoint());
    const double e = edge_weight(rj);
    if (e <= leak_tol || dims.n_junction > 0 || attempt == 3) {
      if (e > leak_tol) {
        std::ostringstream os;
        os << "junction displacement leaks " << e << " at Fock dimension " << nj;
        fail(ErrorCode::truncation, os.str());
      }
      edge = std::max(edge, e);
      out.rho_junction = std::move(rj);
      out.junction_dim = nj;
      break;
    }
    nj = nj + nj / 2;
  }
  out.edge_population = edge;
  return out;
}

}  // namespace jfloq

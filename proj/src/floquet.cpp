#include "jfloq/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace jfloq {

void PropagatorOptions::validate() const {
  if (steps_per_period < 32) fail(ErrorCode::configuration, "steps_per_period must be >= 32");
  if (!(unitarity_tol > 0.0) || unitarity_tol > 1e-8)
    fail(ErrorCode::configuration, "unitarity_tol must be in (0, 1e-8]");
}

const char* to_string(Integrator m) {
  switch (m) {
    case Integrator::midpoint: return "midpoint";
    case Integrator::cf4: return "cf4";
  }
  return "?";
}

const char* to_string(ExpMethod m) {
  switch (m) {
    case ExpMethod::automatic: return "auto";
    case ExpMethod::taylor_sparse: return "taylor";
    case ExpMethod::spectral: return "spectral";
  }
  return "?";
}

Integrator integrator_from_string(const std::string& s) {
  if (s == "midpoint") return Integrator::midpoint;
  if (s == "cf4") return Integrator::cf4;
  fail(ErrorCode::configuration, "unknown integrator '" + s + "'");
}

ExpMethod exp_method_from_string(const std::string& s) {
  if (s == "auto") return ExpMethod::automatic;
  if (s == "taylor") return ExpMethod::taylor_sparse;
  if (s == "spectral") return ExpMethod::spectral;
  fail(ErrorCode::configuration, "unknown exponential method '" + s + "'");
}

namespace {

// Largest 1-norm of (H dt) handled by one Taylor series.
constexpr double kTaylorSubstepNorm = 4.0;
constexpr int kTaylorMaxTerms = 60;
constexpr int kPanel = 24;

class StepExponential {
 public:
  StepExponential(const DrivenHamiltonian& h, ExpMethod method) : h_(h) {
    sparse_ = method == ExpMethod::taylor_sparse ||
              (method == ExpMethod::automatic && h.prefers_sparse());
    banded_ = sparse_ && h.banded();
    const int n = h.dim();
    a_.resize(n, n);
    b_.resize(n, n);
  }

  // U <- exp(-i dt sum_i c_i H_i) U
  void apply(const std::vector<double>& c, double dt, Mat& u) {
    if (banded_) {
      h_.combine_banded(c, bands_);
      apply_taylor(h_.norm_bound(c) * dt, dt, u, [this](const Mat& x, Mat& y) { banded_product(x, y); });
    } else if (sparse_) {
      const SpMat gen = h_.combine_sparse(c);
      apply_taylor(h_.norm_bound(c) * dt, dt, u, [&gen](const Mat& x, Mat& y) { y.noalias() = gen * x; });
    } else {
      apply_spectral(h_.combine(c), dt, u);
    }
  }

 private:
  // y = H x with H stored by diagonals.
  template <class In, class Out>
  void banded_product(const In& x, Out& y) const {
    const int n = static_cast<int>(x.rows());
    y.setZero();
    const auto& offs = h_.band_offsets();
    for (std::size_t d = 0; d < offs.size(); ++d) {
      const int o = offs[d];
      const int r0 = std::max(0, -o), r1 = std::min(n, n - o);
      const auto v = bands_[d].segment(r0, r1 - r0);
      y.middleRows(r0, r1 - r0).noalias() += v.asDiagonal() * x.middleRows(r0 + o, r1 - r0);
    }
  }

  // Columns are advanced in cache-sized panels; each panel runs its whole series.
  template <class Product>
  void apply_taylor(double norm_dt, double dt, Mat& u, Product&& product) {
    const int sub = std::max(1, static_cast<int>(std::ceil(norm_dt / kTaylorSubstepNorm)));
    const double h = dt / sub;
    const int n = static_cast<int>(u.rows());
    for (int c0 = 0; c0 < u.cols(); c0 += kPanel) {
      const int w = std::min<int>(kPanel, static_cast<int>(u.cols()) - c0);
      auto panel = u.middleCols(c0, w);
      term_.resize(n, w);
      next_.resize(n, w);
      for (int s = 0; s < sub; ++s) {
        term_ = panel;
        const double scale2 = term_.cwiseAbs2().maxCoeff();
        int k = 1;
        for (; k <= kTaylorMaxTerms; ++k) {
          product(term_, next_);
          term_ = next_ * cplx(0.0, -h / k);
          panel += term_;
          if (term_.cwiseAbs2().maxCoeff() < 1e-34 * scale2) break;
        }
        if (k > kTaylorMaxTerms) fail(ErrorCode::integration_failure, "Taylor series did not converge");
      }
    }
  }

  void apply_spectral(const Mat& gen, double dt, Mat& u) {
    es_.compute(gen);
    if (es_.info() != Eigen::Success) fail(ErrorCode::integration_failure, "step eigensolver failed");
    const Mat& v = es_.eigenvectors();
    const Vec phase = (es_.eigenvalues().cast<cplx>() * cplx(0.0, -dt)).array().exp().matrix();
    a_.noalias() = v.adjoint() * u;
    a_ = phase.asDiagonal() * a_;
    u.noalias() = v * a_;
  }

  const DrivenHamiltonian& h_;
  bool sparse_ = false;
  bool banded_ = false;
  std::vector<Vec> bands_;
  Mat a_, b_, term_, next_;
  Eigen::SelfAdjointEigenSolver<Mat> es_;
};

std::vector<double> blend(const std::vector<double>& x, double wx, const std::vector<double>& y, double wy) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = wx * x[i] + wy * y[i];
  return out;
}

}  // namespace

Propagation propagate_period(const DrivenHamiltonian& h, const PropagatorOptions& opts, int n_samples) {
  opts.validate();
  const int steps = opts.steps_per_period;
  if (n_samples < 0 || (n_samples > 0 && steps % n_samples != 0))
    fail(ErrorCode::configuration, "steps_per_period must be a multiple of the stroboscopic sample count");
  const int n = h.dim();
  const double period = h.period();
  const double dt = period / steps;

  StepExponential step(h, opts.exp_method);
  Propagation out;
  out.steps = steps;
  Mat u = Mat::Identity(n, n);
  const int stride = n_samples > 0 ? steps / n_samples : 0;
  if (n_samples > 0) out.samples.reserve(n_samples);

  // Gauss-Legendre nodes and weights of the commutator-free scheme.
  const double r3 = std::sqrt(3.0);
  const double c1 = 0.5 - r3 / 6.0, c2 = 0.5 + r3 / 6.0;
  const double a1 = 0.25 - r3 / 6.0, a2 = 0.25 + r3 / 6.0;

  for (int s = 0; s < steps; ++s) {
    if (stride > 0 && s % stride == 0) out.samples.push_back(u);
    const double t = s * dt;
    if (opts.method == Integrator::midpoint) {
      step.apply(h.coefficients(t + 0.5 * dt), dt, u);
    } else {
      const auto f1 = h.coefficients(t + c1 * dt);
      const auto f2 = h.coefficients(t + c2 * dt);
      step.apply(blend(f1, a2, f2, a1), dt, u);
      step.apply(blend(f1, a1, f2, a2), dt, u);
    }
  }

  out.unitarity_error = unitarity_error(u);
  if (!(out.unitarity_error < opts.unitarity_tol)) {
    std::ostringstream os;
    os << "monodromy unitarity error " << out.unitarity_error << " exceeds " << opts.unitarity_tol << " ("
       << steps << " " << to_string(opts.method) << " steps, dt=" << dt << " s, norm bound per step "
       << h.norm_bound(h.coefficients(0.0)) * dt << ")";
    fail(ErrorCode::integration_failure, os.str());
  }
  out.monodromy = std::move(u);
  return out;
}

double step_doubling_error(const DrivenHamiltonian& h, const PropagatorOptions& opts) {
  PropagatorOptions fine = opts;
  fine.steps_per_period *= 2;
  const Mat u1 = propagate_period(h, opts).monodromy;
  const Mat u2 = propagate_period(h, fine).monodromy;
  return max_abs(u1 - u2);
}

double fold_quasi_energy(double e, double omega_p) {
  double f = std::remainder(e, omega_p);
  if (f <= -0.5 * omega_p) f += omega_p;
  if (f > 0.5 * omega_p) f -= omega_p;
  return f;
}

FloquetBasis floquet_modes(const Mat& monodromy, double period) {
  if (monodromy.rows() != monodromy.cols()) fail(ErrorCode::shape, "monodromy must be square");
  if (!(period > 0.0)) fail(ErrorCode::configuration, "period must be positive");
  const int n = static_cast<int>(monodromy.rows());
  Eigen::ComplexSchur<Mat> schur(monodromy);
  if (schur.info() != Eigen::Success) fail(ErrorCode::numerical, "Schur decomposition of the monodromy failed");
  const Mat& tri = schur.matrixT();
  const Mat& q = schur.matrixU();

  FloquetBasis fb;
  fb.period = period;
  fb.omega_p = kTwoPi / period;
  double off = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) off = std::max(off, std::abs(tri(i, j)));
  fb.eigen_residual = off;

  RVec eps(n);
  for (int i = 0; i < n; ++i) eps(i) = fold_quasi_energy(-std::arg(tri(i, i)) / period, fb.omega_p);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eps(a) < eps(b); });

  fb.quasi_energies.resize(n);
  fb.modes_t0.resize(n, n);
  for (int k = 0; k < n; ++k) {
    fb.quasi_energies(k) = eps(order[k]);
    Vec v = q.col(order[k]);
    // Fix the free phase: largest component real and positive.
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const cplx ph = v(imax) / std::abs(v(imax));
    fb.modes_t0.col(k) = v / ph;
  }

  fb.min_gap = n > 1 ? fb.omega_p : 0.0;
  const double tol = 1e-6 * fb.omega_p;
  for (int k = 0; k < n; ++k) {
    const int next = (k + 1) % n;
    if (next == k) break;
    double gap = fb.quasi_energies(next) - fb.quasi_energies(k);
    if (next == 0) gap += fb.omega_p;
    fb.min_gap = std::min(fb.min_gap, gap);
    if (gap < tol) fb.near_degenerate.emplace_back(k, next);
  }
  return fb;
}

void propagate_modes(FloquetBasis& basis, std::vector<Mat>&& samples) {
  const int nt = static_cast<int>(samples.size());
  if (nt < 2 || (nt & (nt - 1)) != 0)
    fail(ErrorCode::configuration, "stroboscopic sample count must be a power of two");
  const int n = basis.dim();
  basis.strobe = std::move(samples);
  Mat tmp(n, n);
  for (int j = 0; j < nt; ++j) {
    const double t = basis.period * j / nt;
    tmp.noalias() = basis.strobe[j] * basis.modes_t0;
    for (int a = 0; a < n; ++a) tmp.col(a) *= std::exp(kI * basis.quasi_energies(a) * t);
    basis.strobe[j].swap(tmp);
  }
}

double strobe_orthonormality_error(const FloquetBasis& basis) {
  double worst = unitarity_error(basis.modes_t0);
  for (const auto& m : basis.strobe) worst = std::max(worst, unitarity_error(m));
  return worst;
}

double periodicity_residual(const Mat& monodromy, const FloquetBasis& basis) {
  Mat next = monodromy * basis.modes_t0;
  for (int a = 0; a < basis.dim(); ++a) next.col(a) *= std::exp(kI * basis.quasi_energies(a) * basis.period);
  return max_abs(next - basis.modes_t0);
}

FourierElements fourier_elements(const FloquetBasis& basis, const Mat& coupling, int K) {
  const int nt = basis.n_t();
  const int n = basis.dim();
  if (nt == 0) fail(ErrorCode::precondition, "Floquet modes have not been propagated over the period");
  if (coupling.rows() != n || coupling.cols() != n) fail(ErrorCode::shape, "coupling operator does not match basis");
  if (K < 0 || K > nt / 2 - 1) {
    std::ostringstream os;
    os << "K=" << K << " aliases on a grid of " << nt << " samples (need K <= " << nt / 2 - 1 << ")";
    fail(ErrorCode::aliasing, os.str());
  }

  FourierElements fe;
  fe.K = K;
  fe.P.assign(2 * K + 1, Mat::Zero(n, n));
  const SpMat c = to_sparse(coupling);
  Mat cphi(n, n), bracket(n, n);
  double total = 0.0;
  for (int j = 0; j < nt; ++j) {
    const Mat& phi = basis.strobe[j];
    cphi.noalias() = c * phi;
    bracket.noalias() = phi.adjoint() * cphi;
    total += bracket.squaredNorm() / nt;
    for (int k = -K; k <= K; ++k) {
      const double angle = -kTwoPi * static_cast<double>(k) * j / nt;
      fe.P[k + K] += (std::polar(1.0, angle) / static_cast<double>(nt)) * bracket;
    }
  }
  double kept = 0.0;
  for (const auto& p : fe.P) kept += p.squaredNorm();
  fe.tail_fraction = total > 0.0 ? std::max(0.0, total - kept) / total : 0.0;

  double sym = 0.0;
  for (int k = -K; k <= K; ++k) sym = std::max(sym, max_abs(fe.at(-k) - fe.at(k).adjoint()));
  fe.symmetry_error = sym;
  return fe;
}

std::vector<int> match_modes(const Mat& previous, const Mat& current) {
  if (previous.rows() != current.rows()) fail(ErrorCode::shape, "mode sets live on different bases");
  const int np = static_cast<int>(previous.cols()), nc = static_cast<int>(current.cols());
  const RMat ov = (previous.adjoint() * current).cwiseAbs2();
  std::vector<std::pair<double, std::pair<int, int>>> cand;
  cand.reserve(static_cast<std::size_t>(np) * nc);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nc; ++j) cand.push_back({ov(i, j), {i, j}});
  std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<int> result(np, -1);
  std::vector<char> taken(nc, 0);
  int assigned = 0;
  for (const auto& [w, ij] : cand) {
    if (assigned == std::min(np, nc)) break;
    if (result[ij.first] >= 0 || taken[ij.second]) continue;
    result[ij.first] = ij.second;
    taken[ij.second] = 1;
    ++assigned;
  }
  return result;
}

}  // namespace jfloq

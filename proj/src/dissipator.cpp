#include "jfloq/dissipator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

namespace jfloq {

NoiseModel NoiseModel::white_from_kappa(double kappa, double temperature) {
  NoiseModel m;
  m.J0 = kappa / kTwoPi;
  m.temperature = temperature;
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  if (!(J0 >= 0.0) || !std::isfinite(J0)) fail(ErrorCode::configuration, "J0 must be finite and non-negative");
  if (!(temperature >= 0.0) || !std::isfinite(temperature))
    fail(ErrorCode::configuration, "temperature must be finite and non-negative");
}

double NoiseModel::J(double omega) const {
  if (!(omega > 0.0)) return 0.0;
  if (!spectrum) return J0;
  const double v = spectrum(omega);
  if (!(v >= 0.0)) fail(ErrorCode::configuration, "spectral density must be non-negative");
  return v;
}

double NoiseModel::n_th(double omega) const {
  if (temperature <= 0.0 || !(omega > 0.0)) return 0.0;
  const double x = kHbar * omega / (kBoltzmann * temperature);
  return 1.0 / std::expm1(x);
}

RateMatrix rates(const FourierElements& F, const FloquetBasis& basis, const NoiseModel& noise, bool keep_gamma) {
  noise.validate();
  const int n = basis.dim();
  if (F.dim() != n) fail(ErrorCode::shape, "Fourier elements and Floquet basis differ in dimension");
  const int K = F.K;
  const double w = basis.omega_p;
  const RVec& eps = basis.quasi_energies;
  const bool thermal = noise.temperature > 0.0;

  RateMatrix out;
  out.K = K;
  out.L = RMat::Zero(n, n);
  if (keep_gamma) out.gamma.assign(2 * K + 1, RMat::Zero(n, n));

  auto gamma_of = [&](double delta, cplx p) {
    if (!(delta > 0.0)) return 0.0;
    return kTwoPi * noise.J(delta) * std::norm(p);
  };

  for (int k = -K; k <= K; ++k) {
    const Mat& pk = F.at(k);
    const Mat& pmk = F.at(-k);
    for (int b = 0; b < n; ++b) {
      for (int a = 0; a < n; ++a) {
        const double delta = eps(b) - eps(a) + k * w;
        const double g = gamma_of(delta, pk(b, a));
        double l = g;
        if (thermal && delta != 0.0) {
          const double g_rev = gamma_of(-delta, pmk(a, b));
          const double nth = noise.n_th(std::abs(delta));
          if (g + g_rev > 0.0) l += nth * (g + g_rev);
        }
        out.L(a, b) += l;
        if (keep_gamma) out.gamma[k + K](a, b) = g;
      }
    }
  }
  return out;
}

RMat generator(const RMat& L) {
  if (L.rows() != L.cols()) fail(ErrorCode::shape, "rate matrix must be square");
  RMat R = L;
  R.diagonal().setZero();
  const RVec out = R.colwise().sum().transpose();
  R.diagonal() = -out;
  return R;
}

double max_column_sum(const RMat& R) {
  return R.size() == 0 ? 0.0 : R.colwise().sum().cwiseAbs().maxCoeff();
}

namespace {

// Strongly connected components of the transition graph (edge b -> a when
// L(a,b) > 0), iterative Tarjan.
std::vector<int> scc_labels(const RMat& L, int& count) {
  const int n = static_cast<int>(L.rows());
  std::vector<std::vector<int>> adj(n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a)
      if (a != b && L(a, b) > 0.0) adj[b].push_back(a);

  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on_stack(n, 0);
  int next_index = 0;
  count = 0;
  std::vector<std::pair<int, std::size_t>> call;
  for (int s = 0; s < n; ++s) {
    if (index[s] >= 0) continue;
    call.push_back({s, 0});
    index[s] = low[s] = next_index++;
    stack.push_back(s);
    on_stack[s] = 1;
    while (!call.empty()) {
      auto& [v, it] = call.back();
      if (it < adj[v].size()) {
        const int u = adj[v][it++];
        if (index[u] < 0) {
          index[u] = low[u] = next_index++;
          stack.push_back(u);
          on_stack[u] = 1;
          call.push_back({u, 0});
        } else if (on_stack[u]) {
          low[v] = std::min(low[v], index[u]);
        }
      } else {
        const int done = v;
        call.pop_back();
        if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        if (low[done] == index[done]) {
          int u;
          do {
            u = stack.back();
            stack.pop_back();
            on_stack[u] = 0;
            comp[u] = count;
          } while (u != done);
          ++count;
        }
      }
    }
  }
  return comp;
}

// Grassmann-Taksar-Heyman elimination on an irreducible chain; q(i,j) is the
// rate i -> j.
RVec gth(RMat q) {
  const Eigen::Index m = q.rows();
  q.diagonal().setZero();
  for (Eigen::Index k = m - 1; k >= 1; --k) {
    const double s = q.row(k).head(k).sum();
    if (!(s > 0.0)) fail(ErrorCode::numerical_rank, "transition graph is not irreducible on a closed class");
    q.col(k).head(k) /= s;
    q.topLeftCorner(k, k).noalias() += q.col(k).head(k) * q.row(k).head(k);
  }
  RVec pi = RVec::Zero(m);
  pi(0) = 1.0;
  for (Eigen::Index k = 1; k < m; ++k) pi(k) = pi.head(k).dot(q.col(k).head(k));
  return pi / pi.sum();
}

}  // namespace

RVec stationary_populations(const RMat& L, SteadyState* info) {
  const int n = static_cast<int>(L.rows());
  if (n == 0 || L.cols() != n) fail(ErrorCode::shape, "rate matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < L.size(); ++i)
    if (!(L.data()[i] >= 0.0) || !std::isfinite(L.data()[i]))
      fail(ErrorCode::numerical, "rate matrix must be finite and non-negative");

  int ncomp = 0;
  const std::vector<int> comp = scc_labels(L, ncomp);
  std::vector<char> closed(ncomp, 1);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a)
      if (a != b && L(a, b) > 0.0 && comp[a] != comp[b]) closed[comp[b]] = 0;

  std::vector<RVec> kernel;
  for (int c = 0; c < ncomp; ++c) {
    if (!closed[c]) continue;
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (comp[i] == c) members.push_back(i);
    const int m = static_cast<int>(members.size());
    RMat q(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) q(i, j) = L(members[j], members[i]);
    const RVec pi = m == 1 ? RVec::Ones(1) : gth(q);
    RVec full = RVec::Zero(n);
    for (int i = 0; i < m; ++i) full(members[i]) = pi(i);
    kernel.push_back(std::move(full));
  }
  if (kernel.empty()) fail(ErrorCode::numerical_rank, "no stationary vector found");

  // Several closed classes: the stationary state depends on the initial
  // condition; report the uniform mixture and flag it.
  RVec p = RVec::Zero(n);
  for (const auto& v : kernel) p += v;
  p /= static_cast<double>(kernel.size());
  p = p.cwiseMax(0.0);
  p /= p.sum();

  if (info != nullptr) {
    info->kernel_dim = static_cast<int>(kernel.size());
    info->non_unique = kernel.size() > 1;
    info->kernel = std::move(kernel);
    const RMat R = generator(L);
    const double scale = R.size() ? R.cwiseAbs().maxCoeff() : 0.0;
    info->residual = scale > 0.0 ? (R * p).cwiseAbs().maxCoeff() / scale : 0.0;
  }
  return p;
}

SteadyState steady_state(const RMat& L, const FloquetBasis& basis) {
  if (L.rows() != basis.dim()) fail(ErrorCode::shape, "rate matrix and Floquet basis differ in dimension");
  SteadyState ss;
  ss.p = stationary_populations(L, &ss);
  ss.degeneracy_flag = basis.degenerate();
  ss.rho_t0 = assemble_rho(ss.p, basis.modes_t0);
  return ss;
}

Mat assemble_rho(const RVec& p, const Mat& modes) {
  if (p.size() != modes.cols()) fail(ErrorCode::shape, "population vector does not match the modes");
  Mat weighted = modes * p.cast<cplx>().asDiagonal();
  return hermitian_part(weighted * modes.adjoint());
}

Mat assemble_rho(const RVec& p, const FloquetBasis& basis, int j) {
  if (j == 0 && basis.strobe.empty()) return assemble_rho(p, basis.modes_t0);
  if (j < 0 || j >= basis.n_t()) fail(ErrorCode::shape, "strobe index out of range");
  return assemble_rho(p, basis.strobe[j]);
}

Mat to_floquet_components(const Mat& rho, const FloquetBasis& basis, int j) {
  const Mat& m = (j == 0 && basis.strobe.empty()) ? basis.modes_t0 : basis.strobe.at(j);
  return m.adjoint() * rho * m;
}

Mat from_floquet_components(const Mat& rho_f, const FloquetBasis& basis, int j) {
  const Mat& m = (j == 0 && basis.strobe.empty()) ? basis.modes_t0 : basis.strobe.at(j);
  return m * rho_f * m.adjoint();
}

Mat evolve_floquet_master(const RMat& L, const Mat& rho_f, double t) {
  const Eigen::Index n = L.rows();
  if (rho_f.rows() != n || rho_f.cols() != n) fail(ErrorCode::shape, "state does not match rate matrix");
  const RMat R = generator(L);
  const RMat prop = (R * t).exp();
  const RVec p0 = rho_f.diagonal().real();
  const RVec p = prop * p0;
  const RVec out_rate = L.colwise().sum().transpose();  // sum_n L_na, all n
  Mat result(n, n);
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < n; ++a)
      result(a, b) = a == b ? cplx(p(a), 0.0) : rho_f(a, b) * std::exp(-0.5 * (out_rate(a) + out_rate(b)) * t);
  return result;
}

}  // namespace jfloq

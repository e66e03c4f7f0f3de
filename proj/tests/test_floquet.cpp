#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "jfloq/sweep.hpp"

using namespace jfloq;

namespace {

Mat random_hermitian(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return hermitian_part(m);
}

Mat random_unitary(int n, std::mt19937& rng) {
  Eigen::SelfAdjointEigenSolver<Mat> es(random_hermitian(n, rng));
  return es.eigenvectors();
}

DrivenHamiltonian small_shunted(double amp_mhz, int n_b = 6, int n_a = 4) {
  const ShuntedFrameParams f = derive_shunted_frame(preset("shunted", "paper").shunted(from_mhz(amp_mhz)));
  return build_shunted_hamiltonian(f, shunted_basis(n_b, n_a));
}

FloquetBasis solve(const DrivenHamiltonian& h, int steps, int n_t, Propagation* out = nullptr) {
  PropagatorOptions o;
  o.steps_per_period = steps;
  o.method = Integrator::cf4;
  Propagation p = propagate_period(h, o, n_t);
  FloquetBasis b = floquet_modes(p.monodromy, h.period());
  propagate_modes(b, std::move(p.samples));
  if (out != nullptr) *out = std::move(p);
  return b;
}

double dominant_line_hz(const DrivenHamiltonian& h, const Mat& coupling, double center_hz) {
  const FloquetBasis b = solve(h, 256, 64);
  const FourierElements F = fourier_elements(b, coupling, 12);
  const RateMatrix L = rates(F, b, NoiseModel::white_from_kappa(from_hz(1e5)));
  const SteadyState ss = steady_state(L.L, b);
  StarkWindow w;
  w.center_hz = center_hz;
  const auto lines = stark_lines(F, b, ss.p, w);
  REQUIRE_FALSE(lines.empty());
  return lines.front().frequency_hz;
}

}  // namespace

TEST_CASE("fold_quasi_energy maps into the half-open zone") {
  const double w = 3.0;
  CHECK(fold_quasi_energy(1.5, w) == doctest::Approx(1.5));
  CHECK(fold_quasi_energy(-1.5, w) == doctest::Approx(1.5));
  CHECK(fold_quasi_energy(4.0, w) == doctest::Approx(1.0));
  CHECK(fold_quasi_energy(-7.2, w) == doctest::Approx(-1.2));
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    const double e = u(rng), f = fold_quasi_energy(e, w);
    CHECK(f > -w / 2);
    CHECK(f <= w / 2);
    CHECK(std::abs(std::remainder(e - f, w)) < 1e-12);
  }
}

TEST_CASE("static limit reproduces the eigendecomposition") {
  std::mt19937 rng(4);
  const int d = 8;
  const double wp = 1.0;
  const Mat h0 = 0.7 * random_hermitian(d, rng);
  DrivenHamiltonian h(BasisSpec::fock(d), wp, 0.0);
  h.add_term(DriveShape::constant, h0);
  Propagation p;
  const FloquetBasis b = solve(h, 64, 16, &p);
  CHECK(p.unitarity_error < 1e-9);

  Eigen::SelfAdjointEigenSolver<Mat> es(h0);
  std::vector<double> folded;
  for (int i = 0; i < d; ++i) folded.push_back(fold_quasi_energy(es.eigenvalues()(i), wp));
  std::sort(folded.begin(), folded.end());
  for (int i = 0; i < d; ++i) CHECK(std::abs(b.quasi_energies(i) - folded[i]) < 1e-8 * wp);

  // Each mode is an eigenvector, and is constant in time.
  for (int a = 0; a < d; ++a) {
    const Vec v = b.modes_t0.col(a);
    const Vec hv = h0 * v;
    const cplx e = v.dot(hv);
    CHECK((hv - e * v).norm() < 1e-8);
    CHECK(std::abs(std::abs(b.strobe[5].col(a).dot(v)) - 1.0) < 1e-8);
  }
  CHECK(strobe_orthonormality_error(b) < 1e-9);
}

TEST_CASE("driven monodromy is unitary and the modes are periodic") {
  Propagation p;
  const DrivenHamiltonian h = small_shunted(400.0);
  const FloquetBasis b = solve(h, 128, 32, &p);
  CHECK(p.unitarity_error < 1e-9);
  CHECK(periodicity_residual(p.monodromy, b) < 1e-8);
  CHECK(strobe_orthonormality_error(b) < 1e-8);
  CHECK(b.eigen_residual < 1e-8);
  for (int i = 1; i < b.dim(); ++i) CHECK(b.quasi_energies(i) >= b.quasi_energies(i - 1));
}

TEST_CASE("cf4 converges faster than the midpoint rule") {
  const DrivenHamiltonian h = small_shunted(300.0, 5, 3);
  PropagatorOptions mid;
  mid.steps_per_period = 64;
  mid.method = Integrator::midpoint;
  PropagatorOptions cf4 = mid;
  cf4.method = Integrator::cf4;
  const double e_mid = step_doubling_error(h, mid), e_cf4 = step_doubling_error(h, cf4);
  CHECK(e_cf4 < e_mid);
  CHECK(e_cf4 < 1e-6);
  PropagatorOptions bad;
  bad.steps_per_period = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(integrator_from_string(to_string(Integrator::cf4)) == Integrator::cf4);
  CHECK_THROWS_AS(integrator_from_string("rk4"), Error);
}

TEST_CASE("Fourier elements obey P_{b a -k} = conj(P_{a b k})") {
  const DrivenHamiltonian h = small_shunted(400.0);
  const FloquetBasis b = solve(h, 128, 64);
  const ShuntedFrameParams f = derive_shunted_frame(preset("shunted", "paper").shunted(from_mhz(400.0)));
  const FourierElements F = fourier_elements(b, bath_coupling_shunted(f, h.basis()).m, 10);
  CHECK(F.symmetry_error < 1e-8);
  for (int k = -3; k <= 3; ++k) CHECK(max_abs(F.at(-k).adjoint() - F.at(k)) < 1e-8);
  CHECK(F.tail_fraction < 1e-6);
}

TEST_CASE("match_modes recovers a permutation with arbitrary phases") {
  std::mt19937 rng(9);
  const int d = 10;
  const Mat u = random_unitary(d, rng);
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::uniform_real_distribution<double> ph(0.0, kTwoPi);
  Mat v(d, d);
  for (int i = 0; i < d; ++i) v.col(perm[i]) = u.col(i) * std::exp(kI * ph(rng));
  const std::vector<int> m = match_modes(u, v);
  CHECK(m == perm);
}

TEST_CASE("unshunted displaced frame and lab frame give the same Stark line") {
  // Reduced transmon so that both frames fit: the lab frame carries the coherent
  // displacement in its Fock space.
  UnshuntedParams p = preset("unshunted", "paper").unshunted(0.0);
  p.A_p = pump_amplitude_for_nbar(0.3, p.omega_p, p.omega_a);
  const int n_max = 7;
  const DrivenHamiltonian frame = build_unshunted_hamiltonian(p, derive_unshunted_frame(p), unshunted_basis(n_max, 5));
  const DrivenHamiltonian lab = build_unshunted_lab_hamiltonian(p, unshunted_basis(n_max, 9));
  const double center = to_hz(p.omega_a) + 45e6;
  const double f_frame = dominant_line_hz(frame, bath_coupling_unshunted(frame.basis()).m, center);
  const double f_lab = dominant_line_hz(lab, bath_coupling_unshunted(lab.basis()).m, center);
  CHECK(std::abs(f_frame - f_lab) < 2e3);
  CHECK(std::abs(f_frame - 5.545e9) < 10e6);
}

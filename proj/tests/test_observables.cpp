#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "jfloq/sweep.hpp"

using namespace jfloq;

namespace {

ShuntedFrameParams frame(double A_p = 0.0, double E_J_GHz = -1.0) {
  ShuntedParams p = preset("shunted", "paper").shunted(A_p);
  if (E_J_GHz >= 0.0) p.E_J = from_ghz(E_J_GHz);
  return derive_shunted_frame(p);
}

struct Solved {
  FloquetBasis basis;
  FourierElements F;
  RVec p;
};

Solved solve_shunted(const ShuntedFrameParams& f, const BasisSpec& b) {
  const DrivenHamiltonian h = build_shunted_hamiltonian(f, b);
  PropagatorOptions o;
  o.steps_per_period = 128;
  o.method = Integrator::cf4;
  Propagation pr = propagate_period(h, o, 64);
  Solved s;
  s.basis = floquet_modes(pr.monodromy, h.period());
  propagate_modes(s.basis, std::move(pr.samples));
  s.F = fourier_elements(s.basis, bath_coupling_shunted(f, b).m, 12);
  s.p = steady_state(rates(s.F, s.basis, NoiseModel::white_from_kappa(from_hz(1e5))).L, s.basis).p;
  return s;
}

}  // namespace

TEST_CASE("populations, purity and impurity on trivial states") {
  const int d = 6;
  const Mat v = Mat::Identity(d, d);
  Mat rho = Mat::Zero(d, d);
  rho(2, 2) = 1.0;
  const Populations pop = populations_in_eigenbasis(rho, v);
  CHECK(pop.values(2) == doctest::Approx(1.0));
  CHECK(pop.mean_excitation == doctest::Approx(2.0));
  CHECK(std::abs(pop.leakage) < 1e-15);
  CHECK(purity(rho) == doctest::Approx(1.0));
  CHECK(std::abs(impurity(rho)) < 1e-15);

  const Mat mixed = Mat::Identity(d, d) / double(d);
  CHECK(impurity(mixed) == doctest::Approx(1.0 - 1.0 / d));

  // Populations over a truncated eigenbasis report the missing weight.
  const Populations part = populations_in_eigenbasis(mixed, v.leftCols(4));
  CHECK(part.leakage == doctest::Approx(2.0 / d));
  CHECK_THROWS_AS(populations_in_eigenbasis(mixed, Mat::Identity(5, 5)), Error);
}

TEST_CASE("label_by_overlap follows permutations and rejects collisions") {
  const Mat bare = Mat::Identity(4, 4);
  Mat dressed = Mat::Zero(4, 4);
  dressed(0, 2) = dressed(1, 0) = dressed(2, 3) = dressed(3, 1) = 1.0;
  const std::vector<int> idx = label_by_overlap(dressed, bare);
  CHECK(idx == std::vector<int>{2, 0, 3, 1});

  // Both bare states overlap most with the first dressed column.
  Mat tilted(2, 2);
  tilted << 0.8, 0.1,
            0.6, 0.1;
  CHECK_THROWS_AS(label_by_overlap(tilted, Mat::Identity(2, 2)), Error);
}

TEST_CASE("linear circuit has no Kerr") {
  const ShuntedFrameParams f = frame(0.0, 0.0);
  const StaticSpectrum s = static_spectrum_shunted(f, shunted_basis(6, 5));
  CHECK(std::abs(s.self_kerr_hz) < 1e-3);
  CHECK(std::abs(s.cross_kerr_hz) < 1e-3);
  CHECK(s.cavity_hz == doctest::Approx(to_hz(f.omega_a_t)).epsilon(1e-12));
}

TEST_CASE("uncoupled transmon leaves the cavity bare") {
  UnshuntedParams p = preset("unshunted", "paper").unshunted(0.0);
  p.g = 0.0;
  const StaticSpectrum s = static_spectrum_unshunted(p, 15, 5);
  CHECK(s.cavity_hz == doctest::Approx(to_hz(p.omega_a)).epsilon(1e-12));
  CHECK(std::abs(s.cross_kerr_hz) < 1e-3);
  CHECK(std::abs(s.self_kerr_hz) < 1e-3);
  CHECK(s.anharmonicity_hz < 0.0);
}

TEST_CASE("without pump the Floquet line and Kerr equal the static spectrum") {
  const ShuntedFrameParams f = frame();
  const BasisSpec b = shunted_basis(8, 5);
  const StaticSpectrum st = static_spectrum_shunted(f, b);
  const Solved s = solve_shunted(f, b);
  StarkWindow w;
  w.center_hz = to_hz(f.omega_a_t);
  const auto lines = stark_lines(s.F, s.basis, s.p, w);
  REQUIRE(lines.size() == 1);
  CHECK(std::abs(lines[0].frequency_hz - st.cavity_hz) < 1.0);
  const KerrEstimate k = kerr_strength(s.F, s.basis, s.p, w);
  CHECK(std::abs(k.kerr_hz - st.self_kerr_hz) < 1.0);
  CHECK(k.first.target == k.second.source);

  const AveragedPrediction av = averaged_model_predictions(f, b);
  CHECK(std::abs(av.frequency_hz - st.cavity_hz) < 1e-3);
  CHECK(std::abs(av.kerr_hz - st.self_kerr_hz) < 1e-3);
}

TEST_CASE("zero probe coupling yields no lines") {
  const ShuntedFrameParams f = frame(from_mhz(200.0));
  const BasisSpec b = shunted_basis(6, 4);
  Solved s = solve_shunted(f, b);
  const FourierElements zero = fourier_elements(s.basis, Mat::Zero(b.total_dim(), b.total_dim()), 4);
  StarkWindow w;
  w.center_hz = to_hz(f.omega_a_t);
  CHECK(stark_lines(zero, s.basis, s.p, w).empty());
  CHECK_THROWS_AS(kerr_strength(zero, s.basis, s.p, w), Error);
  CHECK_THROWS_AS(stark_lines(s.F, s.basis, RVec::Zero(b.total_dim()), w), Error);
}

TEST_CASE("back-transformation to the junction basis preserves purity") {
  const ShuntedFrameParams f = frame(pump_amplitude_for_nbar(50.0, from_ghz(6.0), from_ghz(5.5)));
  const BasisSpec b = shunted_basis(8, 4);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Mixture of low Fock states with random coherences.
  Mat psi = Mat::Zero(b.total_dim(), 3);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 6; ++i) psi(i * 4 + (c % 2), c) = cplx(u(rng), u(rng)) * std::pow(0.3, i);
  Mat rho = Mat::Zero(b.total_dim(), b.total_dim());
  const double w[3] = {0.7, 0.2, 0.1};
  for (int c = 0; c < 3; ++c) rho += w[c] * psi.col(c) * psi.col(c).adjoint() / psi.col(c).squaredNorm();
  const PhysicalState ps = to_physical_basis(rho, b, f);
  CHECK(std::abs(ps.purity_after - ps.purity_before) < 1e-8);
  CHECK(ps.purity_before == doctest::Approx(purity(rho)).epsilon(1e-12));
  CHECK(std::abs(ps.rho_junction.trace() - 1.0) < 1e-6);
  CHECK(ps.edge_population < 1e-4);
  CHECK_THROWS_AS(to_physical_basis(rho, unshunted_basis(3, 4), f), Error);
}

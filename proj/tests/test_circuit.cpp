#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "jfloq/sweep.hpp"

using namespace jfloq;

namespace {

UnshuntedParams transmon(double A_p = 0.0) { return preset("unshunted", "paper").unshunted(A_p); }
ShuntedParams shunt(double A_p = 0.0) { return preset("shunted", "paper").shunted(A_p); }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("parameter validation") {
  UnshuntedParams u = transmon();
  u.E_C = 0.0;
  CHECK(code_of([&] { u.validate(); }) == ErrorCode::configuration);
  u = transmon();
  u.omega_p = u.omega_a;
  CHECK(code_of([&] { u.validate(); }) == ErrorCode::singular_frame);
  CHECK(code_of([&] { derive_unshunted_frame(u); }) == ErrorCode::singular_frame);

  ShuntedParams s = shunt();
  s.E_L = -1.0;
  CHECK(code_of([&] { derive_shunted_frame(s); }) == ErrorCode::configuration);
  s = shunt();
  s.A_p = -1.0;
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::configuration);
}

TEST_CASE("unshunted displacement solves the driven oscillator equation") {
  const UnshuntedParams p = transmon(from_mhz(300.0));
  const UnshuntedFrame f = derive_unshunted_frame(p);
  const double h = 1e-4 / p.omega_p;
  for (double t : {0.0, 0.13e-9, 0.71e-9}) {
    const cplx dadt = (f.abar(t + h) - f.abar(t - h)) / (2.0 * h);
    const cplx rhs = -kI * p.omega_a * f.abar(t) + p.A_p * std::cos(p.omega_p * t);
    CHECK(std::abs(dadt - rhs) < 1e-6 * p.A_p);
  }
  CHECK(std::abs(f.theta_bar(0.0)) < 1e-15);
  CHECK(std::abs(f.theta_bar(0.25 * kTwoPi / p.omega_p) - std::remainder(f.xi, kTwoPi)) < 1e-12);
}

TEST_CASE("xi is linear in the pump amplitude") {
  const double a1 = from_mhz(100.0), a2 = from_mhz(370.0);
  const double u1 = derive_unshunted_frame(transmon(a1)).xi, u2 = derive_unshunted_frame(transmon(a2)).xi;
  CHECK(u2 / u1 == doctest::Approx(a2 / a1).epsilon(1e-12));
  const double s1 = derive_shunted_frame(shunt(a1)).xi, s2 = derive_shunted_frame(shunt(a2)).xi;
  CHECK(s2 / s1 == doctest::Approx(a2 / a1).epsilon(1e-12));
  CHECK(derive_shunted_frame(shunt()).xi == 0.0);
}

TEST_CASE("shunted frame diagonalizes the quadratic form") {
  const ShuntedParams p = shunt(from_mhz(200.0));
  const ShuntedFrameParams f = derive_shunted_frame(p);
  CHECK(f.quadratic_residual < 1e-12);

  // Normal-mode frequencies of H = r^T M r / 2 are |eigenvalues of J M|.
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = m(2, 2) = p.omega_a;
  m(1, 1) = p.E_L;
  m(3, 3) = 8.0 * p.E_C;
  m(2, 3) = m(3, 2) = std::sqrt(2.0) * p.g;
  Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
  j(0, 2) = j(1, 3) = 1.0;
  j(2, 0) = j(3, 1) = -1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> es(j * m);
  std::vector<double> w;
  for (int i = 0; i < 4; ++i) w.push_back(std::abs(es.eigenvalues()(i).imag()));
  std::sort(w.begin(), w.end());
  const double lo = std::min(f.omega_a_t, f.omega_b_t), hi = std::max(f.omega_a_t, f.omega_b_t);
  CHECK(w[0] == doctest::Approx(lo).epsilon(1e-10));
  CHECK(w[3] == doctest::Approx(hi).epsilon(1e-10));

  ShuntedFrameParams bent = f;
  bent.theta += 1e-3;
  CHECK(shunted_quadratic_residual(p, bent) > 1e-6);
  // The oscillator-like mode stays close to the bare oscillator.
  CHECK(std::abs(f.phi_a) < 0.2 * std::abs(f.phi_b));
}

TEST_CASE("xi equals the amplitude of the classical junction phase orbit") {
  for (double amp : {50.0, 400.0}) {
    const ShuntedParams p = shunt(from_mhz(amp));
    const ShuntedFrameParams f = derive_shunted_frame(p);
    const Eigen::Vector4cd r = shunted_linear_response(p);
    CHECK(std::abs(r(1)) == doctest::Approx(std::abs(f.xi)).epsilon(1e-9));
  }
}

TEST_CASE("offset charge is periodic with period one") {
  UnshuntedParams p = transmon();
  p.N_g = 0.2;
  const Eigenbasis e0 = transmon_eigenbasis(p, 25);
  p.N_g = 1.2;
  const Eigenbasis e1 = transmon_eigenbasis(p, 25);
  for (int k = 0; k < 12; ++k) CHECK(std::abs(e1.energies(k) - e0.energies(k)) < 1e-9 * std::abs(e0.energies(k)));
}

TEST_CASE("confined levels of the paper transmon") {
  const UnshuntedParams p = transmon();
  const ConfinementEstimate c = confined_levels(p, transmon_eigenbasis(p, 25));
  CHECK(c.confined_levels >= 7);
  CHECK(c.confined_levels <= 9);
  CHECK(c.levels_below_top > c.confined_levels);
}

TEST_CASE("nbar_est and pump amplitude are inverse") {
  const double wp = from_ghz(6.0), wa = from_ghz(5.5);
  for (double n : {0.0, 1.0, 37.5, 500.0})
    CHECK(nbar_est(pump_amplitude_for_nbar(n, wp, wa), wp, wa) == doctest::Approx(n).epsilon(1e-12));
  CHECK(code_of([&] { pump_amplitude_for_nbar(-1.0, wp, wa); }) == ErrorCode::configuration);
  CHECK(code_of([&] { nbar_est(1.0, wa, wa); }) == ErrorCode::singular_frame);
}

TEST_CASE("driven Hamiltonians are Hermitian and periodic") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const UnshuntedParams up = transmon(from_mhz(250.0));
  const DrivenHamiltonian hu = build_unshunted_hamiltonian(up, derive_unshunted_frame(up), unshunted_basis(5, 4));
  const ShuntedFrameParams sf = derive_shunted_frame(shunt(from_mhz(250.0)));
  const DrivenHamiltonian hs = build_shunted_hamiltonian(sf, shunted_basis(6, 4));
  for (const DrivenHamiltonian* h : {&hu, &hs})
    for (int i = 0; i < 4; ++i) {
      const double t = u(rng) * h->period();
      const Mat a = h->at(t).m, b = h->at(t + h->period()).m;
      CHECK(hermiticity_error(a) < 1e-9 * max_abs(a));
      CHECK(max_abs(a - b) < 1e-9 * max_abs(a));
    }
  CHECK(code_of([&] { build_shunted_hamiltonian(sf, unshunted_basis(3, 4)); }) == ErrorCode::configuration);
  DrivenHamiltonian bad(shunted_basis(3, 3), from_ghz(6.0), 0.0);
  CHECK(code_of([&] { bad.add_term(DriveShape::constant, Mat::Zero(4, 4)); }) == ErrorCode::shape);
}

TEST_CASE("time-averaged model reduces to the static Hamiltonian without pump") {
  const ShuntedFrameParams f = derive_shunted_frame(shunt());
  const BasisSpec b = shunted_basis(6, 4);
  const Mat avg = time_averaged_hamiltonian(f, b).m;
  const Mat h0 = build_shunted_hamiltonian(f, b, 0.0).m;
  CHECK(max_abs(avg - h0) < 1e-12 * max_abs(h0));
}

TEST_CASE("bath couplings") {
  const BasisSpec ub = unshunted_basis(3, 5);
  const Mat cu = bath_coupling(Model::unshunted, nullptr, ub).m;
  CHECK(hermiticity_error(cu) == 0.0);
  const ShuntedFrameParams f = derive_shunted_frame(shunt());
  CHECK(code_of([&] { bath_coupling(Model::shunted, nullptr, shunted_basis(4, 4)); }) == ErrorCode::configuration);
  // Without the oscillator-junction coupling, nu is the bare oscillator operator.
  ShuntedParams p = shunt();
  p.g = 0.0;
  const ShuntedFrameParams f0 = derive_shunted_frame(p);
  CHECK(std::abs(f0.bath_weight_a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(f0.bath_weight_b) < 1e-12);
  CHECK(std::abs(f.bath_weight_b) > 0.0);
}

TEST_CASE("diagnostic eigenbases converge and report it") {
  const ShuntedParams p = shunt();
  const Eigenbasis nu = shunted_transmon_eigenbasis(p, 60);
  CHECK(nu.convergence < 1e-6);
  CHECK(code_of([&] { shunted_transmon_eigenbasis(p, 40); }) == ErrorCode::convergence);
  CHECK(nu.energies(1) > nu.energies(0));
  CHECK(code_of([&] { transmon_eigenbasis(transmon(), 3); }) == ErrorCode::convergence);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "jfloq/hilbert.hpp"

using namespace jfloq;

namespace {

Mat random_hermitian(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return hermitian_part(m);
}

Mat random_density(int n, std::mt19937& rng) {
  const Mat h = random_hermitian(n, rng);
  Mat rho = h * h.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("basis dimensions and charge windows") {
  const BasisSpec b({{ModeKind::charge, 7}, {ModeKind::fock, 4}});
  CHECK(b.total_dim() == 28);
  CHECK(b.charge_nmax(0) == 3);
  CHECK_THROWS_AS(b.charge_nmax(1), Error);
  CHECK(BasisSpec::charge(5).total_dim() == 11);
  CHECK_THROWS_AS(BasisSpec({{ModeKind::fock, 0}}), Error);
  CHECK_THROWS_AS(BasisSpec({{ModeKind::charge, 4}}), Error);
}

TEST_CASE("ladder operators satisfy the truncated commutator") {
  const int d = 9;
  const Mat a = annihilation(d).m;
  const Mat comm = a * a.adjoint() - a.adjoint() * a;
  for (int n = 0; n < d - 1; ++n) CHECK(std::abs(comm(n, n) - 1.0) < 1e-14);
  CHECK(std::abs(comm(d - 1, d - 1) + double(d - 1)) < 1e-12);
  CHECK(max_abs(a.adjoint() * a - number_operator(d).m) < 1e-14);
}

TEST_CASE("charge operators: [N, e^{i theta}] and cos^2 + sin^2 inside the window") {
  const int n_max = 6;
  const Mat N = charge_number(n_max).m;
  const Mat c = cos_theta(n_max).m;
  const Mat s = sin_theta(n_max).m;
  CHECK(is_hermitian(N));
  CHECK(is_hermitian(c));
  CHECK(is_hermitian(s));
  const Mat e = c + kI * s;
  CHECK(max_abs(N * e - e * N + e) < 1e-14);
  const Mat one = c * c + s * s;
  for (int i = 1; i < 2 * n_max; ++i) CHECK(std::abs(one(i, i) - 1.0) < 1e-14);
  CHECK(std::abs(c.trace()) < 1e-14);
}

TEST_CASE("embed matches the Kronecker product with mode 0 outermost") {
  std::mt19937 rng(7);
  const BasisSpec b({{ModeKind::fock, 3}, {ModeKind::fock, 4}, {ModeKind::fock, 2}});
  const Mat x = random_hermitian(4, rng);
  const Mat i3 = Mat::Identity(3, 3), i2 = Mat::Identity(2, 2);
  const Mat expected = Eigen::kroneckerProduct(i3, Mat(Eigen::kroneckerProduct(x, i2)));
  const Operator op{BasisSpec::fock(4), x};
  CHECK(max_abs(embed(op, 1, b).m - expected) < 1e-14);
  CHECK_THROWS_AS(embed(op, 0, b), Error);
  CHECK_THROWS_AS(embed(op, 3, b), Error);
}

TEST_CASE("operators on different modes commute") {
  std::mt19937 rng(11);
  const BasisSpec b({{ModeKind::fock, 4}, {ModeKind::fock, 5}});
  for (int trial = 0; trial < 5; ++trial) {
    const Mat x = embed({BasisSpec::fock(4), random_hermitian(4, rng)}, 0, b).m;
    const Mat y = embed({BasisSpec::fock(5), random_hermitian(5, rng)}, 1, b).m;
    CHECK(max_abs(x * y - y * x) < 1e-12);
  }
}

TEST_CASE("reduce_to_mode inverts the product state and preserves the trace") {
  std::mt19937 rng(3);
  const BasisSpec b({{ModeKind::fock, 3}, {ModeKind::fock, 4}});
  const Mat r0 = random_density(3, rng), r1 = random_density(4, rng);
  const Mat rho = Eigen::kroneckerProduct(r0, r1);
  CHECK(max_abs(reduce_to_mode(rho, b, 0) - r0) < 1e-13);
  CHECK(max_abs(reduce_to_mode(rho, b, 1) - r1) < 1e-13);

  const Mat mixed = random_density(12, rng);
  const Mat red = reduce_to_mode(mixed, b, 1);
  CHECK(std::abs(red.trace() - 1.0) < 1e-13);
  CHECK(is_hermitian(red, 1e-13));
}

TEST_CASE("matrix_cos_sin agrees with the scalar functions on eigenvalues") {
  std::mt19937 rng(5);
  const Mat phi = random_hermitian(6, rng);
  const auto [c, s] = matrix_cos_sin({BasisSpec::fock(6), phi});
  CHECK(max_abs(c.m * c.m + s.m * s.m - Mat::Identity(6, 6)) < 1e-12);
  CHECK(max_abs(c.m * s.m - s.m * c.m) < 1e-12);
  CHECK(max_abs(c.m * phi - phi * c.m) < 1e-12);

  const Mat diag = Eigen::VectorXcd::LinSpaced(5, -2.0, 2.0).asDiagonal();
  const auto [cd, sd] = matrix_cos_sin({BasisSpec::fock(5), diag});
  for (int i = 0; i < 5; ++i) {
    const double x = -2.0 + i;
    CHECK(std::abs(cd.m(i, i) - std::cos(x)) < 1e-14);
    CHECK(std::abs(sd.m(i, i) - std::sin(x)) < 1e-14);
  }
}

TEST_CASE("hermiticity and unitarity diagnostics") {
  std::mt19937 rng(13);
  const Mat h = random_hermitian(5, rng);
  CHECK(hermiticity_error(h) == 0.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Mat u = es.eigenvectors();
  CHECK(is_unitary(u, 1e-12));
  CHECK_FALSE(is_unitary(2.0 * u));
  const SpMat sp = to_sparse(h, 1e300);
  CHECK(sp.nonZeros() == 0);
}

#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace jfloq {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<cplx>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// SI constants (exact since the 2019 redefinition).
inline constexpr double kPlanck = 6.62607015e-34;
inline constexpr double kHbar = kPlanck / kTwoPi;
inline constexpr double kBoltzmann = 1.380649e-23;

// Internal energies are angular frequencies (rad/s, hbar = 1).
inline constexpr double from_hz(double f_hz) { return kTwoPi * f_hz; }
inline constexpr double to_hz(double omega) { return omega / kTwoPi; }
inline constexpr double from_mhz(double f) { return from_hz(f * 1e6); }
inline constexpr double from_ghz(double f) { return from_hz(f * 1e9); }

enum class ErrorCode {
  invalid_dimension,
  shape,
  contract_violation,
  configuration,
  singular_frame,
  unstable_frame,
  convergence,
  integration_failure,
  numerical,
  numerical_rank,
  aliasing,
  precondition,
  timeout,
  truncation,
  ladder_identification,
  io,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// C boundary can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace jfloq

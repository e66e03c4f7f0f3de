#pragma once

#include <utility>
#include <vector>

#include "jfloq/types.hpp"

namespace jfloq {

enum class ModeKind { fock, charge };

struct Mode {
  ModeKind kind;
  int dim;
  bool operator==(const Mode&) const = default;
};

/// Ordered tensor-product truncation. Charge modes cover N in [-N_max, N_max].
class BasisSpec {
 public:
  BasisSpec() = default;
  explicit BasisSpec(std::vector<Mode> modes);

  static BasisSpec fock(int dim) { return BasisSpec({{ModeKind::fock, dim}}); }
  static BasisSpec charge(int n_max) {
    return BasisSpec({{ModeKind::charge, 2 * n_max + 1}});
  }

  const std::vector<Mode>& modes() const { return modes_; }
  int num_modes() const { return static_cast<int>(modes_.size()); }
  int mode_dim(int i) const { return modes_.at(i).dim; }
  ModeKind mode_kind(int i) const { return modes_.at(i).kind; }
  int total_dim() const;
  int charge_nmax(int i) const;

  bool operator==(const BasisSpec&) const = default;

 private:
  std::vector<Mode> modes_;
};

/// Dense complex operator tied to the basis it acts on.
struct Operator {
  BasisSpec basis;
  Mat m;

  int dim() const { return static_cast<int>(m.rows()); }
  Operator adjoint() const { return {basis, m.adjoint()}; }
};

double max_abs(const Mat& m);
double hermiticity_error(const Mat& m);
double unitarity_error(const Mat& m);
bool is_hermitian(const Mat& m, double tol = 1e-12);
bool is_unitary(const Mat& m, double tol = 1e-9);

/// (M + M^dagger)/2, exactly Hermitian in floating point.
Mat hermitian_part(const Mat& m);

Operator annihilation(int dim);
Operator number_operator(int dim);
Operator identity(const BasisSpec& basis);

Operator charge_number(int n_max);
/// (sum_N |N><N+1| + h.c.)/2 on the charge window.
Operator cos_theta(int n_max);
/// (sum_N |N><N+1| - h.c.)/(2i) on the charge window.
Operator sin_theta(int n_max);

/// I x ... x op x ... x I with op on `mode_index`.
Operator embed(const Operator& op, int mode_index, const BasisSpec& basis);
SpMat embed_sparse(const Mat& op, int mode_index, const BasisSpec& basis);

/// cos(Phi) and sin(Phi) of a Hermitian operator, via its eigendecomposition.
std::pair<Operator, Operator> matrix_cos_sin(const Operator& phi);

/// Partial trace keeping a single mode.
Mat reduce_to_mode(const Mat& rho, const BasisSpec& basis, int keep);

SpMat to_sparse(const Mat& m, double drop_below = 0.0);

}  // namespace jfloq

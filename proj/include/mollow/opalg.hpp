#pragma once

// Tensor-product Hilbert spaces and dense operators on them.
//
// Basis ordering: subsystem 0 is the slowest-varying index, so for a layout
// [(s, 2), (a1, 4)] the basis index of |s, n> is s*4 + n. This is the same
// ordering produced by kron(A_s, A_a1).
//
// Frequencies are measured from the laser frequency and every rate is in
// units of the emitter decay rate gamma_sigma.

#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "mollow/dense.hpp"
#include "mollow/error.hpp"

namespace mollow {

struct Subsystem {
  std::string label;
  Index dim = 0;

  bool operator==(const Subsystem&) const = default;
};

class SpaceLayout {
 public:
  SpaceLayout(std::initializer_list<Subsystem> subsystems);
  explicit SpaceLayout(std::vector<Subsystem> subsystems);

  Index dim() const noexcept { return total_; }
  std::size_t size() const noexcept { return subsystems_.size(); }
  const Subsystem& operator[](std::size_t slot) const { return subsystems_[slot]; }
  const std::vector<Subsystem>& subsystems() const noexcept { return subsystems_; }

  bool contains(const std::string& label) const noexcept;
  /// Position of `label`; throws unknown-label.
  std::size_t slot(const std::string& label) const;
  Index dim_of(const std::string& label) const { return subsystems_[slot(label)].dim; }

  /// Stride of a slot in the flat basis index.
  Index stride(std::size_t slot) const { return strides_[slot]; }
  /// Digit of `slot` in flat index `index`.
  Index digit(Index index, std::size_t slot) const {
    return (index / strides_[slot]) % subsystems_[slot].dim;
  }

  /// Sub-layout with the given labels, kept in this layout's order.
  SpaceLayout restricted(const std::vector<std::string>& labels) const;

  bool operator==(const SpaceLayout& other) const { return subsystems_ == other.subsystems_; }

 private:
  std::vector<Subsystem> subsystems_;
  std::vector<Index> strides_;
  Index total_ = 1;
};

using LayoutPtr = std::shared_ptr<const SpaceLayout>;

LayoutPtr make_layout(std::vector<Subsystem> subsystems);

/// Dense operator on a layout.
class Operator {
 public:
  Operator(LayoutPtr layout, Matrix matrix);

  static Operator zero(LayoutPtr layout);
  static Operator identity(LayoutPtr layout);

  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const SpaceLayout& layout() const noexcept { return *layout_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  Index dim() const noexcept { return matrix_.rows(); }

  Operator dagger() const { return {layout_, matrix_.adjoint()}; }
  bool is_hermitian(double tol = kAlgebraTol) const {
    return mollow::is_hermitian(matrix_, tol);
  }
  Complex trace() const { return matrix_.trace(); }

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(Complex s) {
    matrix_ *= s;
    return *this;
  }

 private:
  LayoutPtr layout_;
  Matrix matrix_;
};

Operator operator+(Operator lhs, const Operator& rhs);
Operator operator-(Operator lhs, const Operator& rhs);
Operator operator*(const Operator& lhs, const Operator& rhs);
Operator operator*(Complex s, Operator op);
inline Operator operator*(double s, Operator op) { return Complex(s) * std::move(op); }
Operator commutator(const Operator& a, const Operator& b);

bool same_layout(const SpaceLayout& a, const SpaceLayout& b);

/// Positive semidefinite, unit-trace operator. Construction validates
/// Hermiticity and trace to 1e-10 and positivity to -1e-8.
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op);
  DensityMatrix(LayoutPtr layout, Matrix matrix)
      : DensityMatrix(Operator(std::move(layout), std::move(matrix))) {}

  /// Symmetrizes, renormalizes, then validates.
  static DensityMatrix from_approximate(const Operator& op);

  const Operator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  const SpaceLayout& layout() const noexcept { return op_.layout(); }
  const LayoutPtr& layout_ptr() const noexcept { return op_.layout_ptr(); }
  Index dim() const noexcept { return op_.dim(); }

  double purity() const;
  double min_eigenvalue() const;

 private:
  Operator op_;
};

class StateVector {
 public:
  StateVector(LayoutPtr layout, Vector amplitudes);

  /// Product state from per-slot basis indices.
  static StateVector basis(LayoutPtr layout, const std::vector<Index>& digits);

  const SpaceLayout& layout() const noexcept { return *layout_; }
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const Vector& amplitudes() const noexcept { return amps_; }
  double norm() const { return amps_.norm(); }
  StateVector normalized() const;
  DensityMatrix projector() const;

 private:
  LayoutPtr layout_;
  Vector amps_;
};

/// Bosonic annihilation operator truncated to `dim` Fock states.
Matrix annihilation(Index dim);

/// Tensor `local` into `slot` of `layout`, identities elsewhere.
Operator embed(const Matrix& local, const LayoutPtr& layout, const std::string& slot);

/// Extend an operator on a sub-layout to `joint`, identity on the other
/// slots. Every label of op's layout must exist in `joint` in the same order.
Operator lift(const Operator& op, const LayoutPtr& joint);

/// Number operator a†a of one slot.
Operator number(const LayoutPtr& layout, const std::string& slot);
Operator lowering(const LayoutPtr& layout, const std::string& slot);

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep);
/// Same reduction on an arbitrary operator (no validation of the result).
Operator partial_trace(const Operator& op, const std::vector<std::string>& keep);

Complex expectation(const DensityMatrix& rho, const Operator& op);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Product of per-slot density matrices (given in layout order).
DensityMatrix tensor_product(const LayoutPtr& layout, const std::vector<Matrix>& factors);

}  // namespace mollow

#pragma once

// Time evolution and two-time correlations via the quantum regression theorem.

#include <map>
#include <string>
#include <vector>

#include "mollow/grid.hpp"
#include "mollow/liouville.hpp"

namespace mollow {

/// exp(L t) acting on vectorized operators. Small, well-conditioned
/// Liouvillians use one eigendecomposition for every t; otherwise a
/// scaling-and-squaring exponential is built per distinct step and cached
/// (the cache makes one instance unsafe to share between threads).
class Propagator {
 public:
  explicit Propagator(const Superoperator& L);

  Vector apply(const Vector& x, double t) const;
  Matrix apply(const Matrix& x, double t) const;
  bool uses_eigenbasis() const noexcept { return eigen_; }

 private:
  const Matrix& step_matrix(double t) const;

  Index d_;
  Matrix dense_;
  bool eigen_ = false;
  Matrix vecs_, inv_;
  Vector vals_;
  mutable std::map<double, Matrix> cache_;
};

DensityMatrix evolve(const LindbladModel& model, const DensityMatrix& rho0, double t);

enum class Direction { Forward, Backward };

struct CorrelationPoint {
  double tau = 0.0;
  double value = 0.0;
};

struct CorrelationCurve {
  std::vector<CorrelationPoint> points;
  std::string label1, label2;
  /// Stationary normalization constants <op1^dag op1>, <op2^dag op2>.
  double n1 = 0.0, n2 = 0.0;
};

/// Normalized g2 between op1 (at time 0) and op2 (at time tau). Positive
/// tau: Tr[op2^dag op2 e^{L tau}(op1 rho op1^dag)] / (n1 n2). Negative tau
/// exchanges the operators. With Direction::Backward the sign of every tau
/// is flipped before evaluation.
CorrelationCurve g2_cross(const LindbladModel& model, const Operator& op1, const Operator& op2,
                          const std::vector<double>& tau_grid,
                          Direction direction = Direction::Forward,
                          const std::string& label1 = "op1", const std::string& label2 = "op2");

/// Same, reusing a known steady state and propagator.
CorrelationCurve g2_cross(const Propagator& prop, const DensityMatrix& rho_ss, const Operator& op1,
                          const Operator& op2, const std::vector<double>& tau_grid);

/// <c^dag c^dag c c> / <c^dag c>^2 in the given state.
double g2_auto_zero(const DensityMatrix& rho, const Operator& op);
double g2_auto_zero(const LindbladModel& model, const Operator& op);

}  // namespace mollow

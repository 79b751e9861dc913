#pragma once

// Superoperators in column-stacking convention: vec(A X B) = (B^T kron A) vec(X),
// and d vec(rho)/dt = L vec(rho).

#include <Eigen/SparseCore>
#include <vector>

#include "mollow/modelkit.hpp"

namespace mollow {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

class Superoperator {
 public:
  Superoperator(LayoutPtr layout, SparseMatrix matrix);

  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const SpaceLayout& layout() const noexcept { return *layout_; }
  /// Hilbert-space dimension d; the matrix is d^2 x d^2.
  Index hilbert_dim() const noexcept { return layout_->dim(); }
  const SparseMatrix& sparse() const noexcept { return matrix_; }
  Matrix dense() const { return Matrix(matrix_); }

  Vector apply(const Vector& v) const { return matrix_ * v; }
  Operator apply(const Operator& rho) const;

 private:
  LayoutPtr layout_;
  SparseMatrix matrix_;
};

Superoperator liouvillian_matrix(const LindbladModel& model);

/// Direct evaluation of -i[H, rho] + sum rate (c rho c^dag - {c^dag c, rho}/2).
Matrix lindblad_rhs(const LindbladModel& model, const Matrix& rho);

/// Unique stationary state. Throws degenerate-steady-state when the kernel
/// of L is more than one-dimensional.
DensityMatrix steady_state(const Superoperator& L);
DensityMatrix steady_state(const LindbladModel& model);

/// Sorted distinct imaginary parts of the eigenvalues of M = -L.
std::vector<double> transition_energies(const Superoperator& L, double merge_tol = 1e-6);

struct SpectrumPoint {
  double omega = 0.0;
  double density = 0.0;
};

struct SpectrumTable {
  std::vector<SpectrumPoint> points;
  /// Weight of the elastic (delta) peak, |<c>|^2 / <c^dag c>. The tabulated
  /// density is the inelastic remainder, normalized to unit integral.
  double coherent_fraction = 0.0;
};

/// Emission spectrum of `emitter` by Liouvillian eigendecomposition:
/// S(w) = Re sum_k c_k / (i w - l_k) over the non-stationary modes, with c_k
/// the mode weights of Tr[c^dag e^{L tau}(c rho_ss)].
SpectrumTable emission_spectrum(const LindbladModel& model, const Operator& emitter,
                                const std::vector<double>& omega_grid);

}  // namespace mollow

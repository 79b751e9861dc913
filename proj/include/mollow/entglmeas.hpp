#pragma once

// Entanglement and nonclassicality measures on detector or polariton states.

#include <string>

#include "mollow/modelkit.hpp"

namespace mollow {

/// Transpose of the `slot` indices only.
Operator partial_transpose(const Operator& op, const std::string& slot);
Operator partial_transpose(const DensityMatrix& rho, const std::string& slot);

/// log2 of the trace norm of the partial transpose. Eigenvalues in
/// [-1e-8, 0) count as zero.
double log_negativity(const DensityMatrix& rho, const std::string& slot);

/// Cauchy-Schwarz coefficient R = <a^dag b^dag b a>^2 / (<a^dag2 a^2> <b^dag2 b^2>).
/// R > 1 violates the classical inequality. Throws undefined-R when an
/// autocorrelator vanishes.
double csi_R(const DensityMatrix& rho, const Operator& a, const Operator& b);

enum class DetectionBasis { Bare, Polariton };

/// Normalized restriction of a two-mode state to {|00>, |10>, |01>, |11>}
/// (first label = first index).
struct DetectionMatrix {
  Eigen::Matrix4cd theta;
  /// Weight of the block before normalization.
  double norm = 0.0;
};

/// Builds theta from `rho` (reduced to the two slots first). In the
/// polariton basis |m, n> = l^dag^m u^dag^n |vac>, normalized, with
///   l = c_a a - c_b b,  u = c_b a + c_a b,
///   c_a = sqrt((1 + d/q)/2), c_b = sqrt((1 - d/q)/2), d = omega_b - omega_a,
///   q = sqrt(d^2 + 4 g^2).
DetectionMatrix detection_matrix(const DensityMatrix& rho, const std::string& slot_a,
                                 const std::string& slot_b,
                                 DetectionBasis basis = DetectionBasis::Bare,
                                 const PolaritonSpec* spec = nullptr);

/// Wootters concurrence of the 4x4 matrix.
double concurrence(const DetectionMatrix& theta);
double concurrence(const Eigen::Matrix4cd& theta);

/// Squared Uhlmann fidelity (Tr sqrt(sqrt(r) s sqrt(r)))^2.
double fidelity(const Matrix& rho, const Matrix& sigma);
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
/// Tr sqrt(sqrt(r) s sqrt(r)).
double root_fidelity(const Matrix& rho, const Matrix& sigma);

/// Remove the joint vacuum (basis index 0) and renormalize.
DensityMatrix postselect_remove_vacuum(const DensityMatrix& rho);
DetectionMatrix postselect_remove_vacuum(const DetectionMatrix& theta);

enum class BellState { PhiMinus, PsiMinus };

/// Amplitudes in the detection basis: Phi- = (|00> - |11>)/sqrt2,
/// Psi- = (|01> - |10>)/sqrt2.
Eigen::Vector4cd bell_vector(BellState bell);

struct BellReport {
  /// Optimal w in (1 - w)|vac><vac| + w|B><B|.
  double bell_weight = 0.0;
  double vacuum_weight = 1.0;
  /// Root fidelity Tr sqrt(...) of theta to the optimal model state.
  double fidelity_to_model = 0.0;
  /// The same optimum in the squared convention.
  double fidelity_squared = 0.0;
  /// Root fidelity against the unnormalized block, i.e. with the
  /// population outside {0,1}^2 kept in the full state.
  double fidelity_full_space = 0.0;
  /// Tr theta^2 of the normalized block.
  double bell_purity = 0.0;
  /// Block weight before normalization.
  double block_weight = 0.0;
};

BellReport bell_report(const DetectionMatrix& theta, BellState bell);
/// Two-mode state in the bare basis, first slot = first index.
BellReport bell_report(const DensityMatrix& rho_detectors, BellState bell);

}  // namespace mollow

#pragma once

// Driven two-level source cascaded into two sideband detectors (or into a
// photon-exciton pair), with parameter sweeps and 1-D optimizers on top.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mollow/entglmeas.hpp"
#include "mollow/liouville.hpp"

namespace mollow {

inline const std::string kSourceSlot = "s";
inline const std::string kPlusSlot = "a1";   // detector at omega_plus
inline const std::string kMinusSlot = "a2";  // detector at omega_minus
inline const std::string kPhotonSlot = "a";
inline const std::string kExcitonSlot = "b";

/// Top Fock level population above which a truncation is reported unhealthy.
inline constexpr double kTruncationThreshold = 1e-4;

struct MollowConfig {
  double omega = 1.0;  // drive amplitude
  double delta = 0.0;  // 2LS minus laser frequency
  double gamma = 1.0;
  double Gamma = 1.0;  // detector linewidth
  /// Detector frequencies relative to the laser; default to the sidebands.
  std::optional<double> omega_plus, omega_minus;
  Index truncation = 4;
  double lambda = 0.5, kappa = 0.0, epsilon = 1.0;

  /// Throws config-error on out-of-range values.
  void validate() const;
};

struct Sidebands {
  double plus = 0.0;
  double minus = 0.0;
};

/// +-sqrt(4 omega^2 + delta^2).
Sidebands sideband_frequencies(double delta, double omega);
/// Configured detector frequencies, falling back to the sidebands.
Sidebands detector_frequencies(const MollowConfig& cfg);

/// Layout {s, a1, a2}; a1 sits at omega_plus, a2 at omega_minus.
LindbladModel build_system(const MollowConfig& cfg);

struct TruncationReport {
  double top_population = 0.0;
  std::string slot;  // worst slot
  bool healthy = true;
};

TruncationReport truncation_health(const DensityMatrix& rho, const std::vector<std::string>& slots,
                                   double threshold = kTruncationThreshold);

struct SweepResultRow {
  double omega = 0.0, delta = 0.0, Gamma = 0.0;
  double negativity = 0.0;
  double R = 0.0;
  double g2_cross0 = 0.0;
  double gamma_over_omegaplus = 0.0;
  /// Emission rate Gamma <a1^dag a1> of the omega_plus detector.
  double intensity = 0.0;
  double bell_weight = 0.0, bell_fidelity = 0.0, bell_purity = 0.0;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const;
  /// Flags joined by ';', empty when clean.
  std::string flag_string() const;
};

/// Steady state and every detector measure at one parameter point. Numerical
/// failures become NaN fields plus a flag; nothing is thrown.
SweepResultRow evaluate_point(const MollowConfig& cfg);

/// Logarithmic negativity of the two-detector state alone (the optimizer
/// objective). Solver failures count as zero.
double detector_negativity(const MollowConfig& cfg);

/// Rows over omegas x deltas at the base Gamma, row-major (omega outer).
std::vector<SweepResultRow> entanglement_map(const MollowConfig& base,
                                             const std::vector<double>& omegas,
                                             const std::vector<double>& deltas,
                                             unsigned threads = 0);

struct Search1D {
  /// hi < lo selects an automatic upper bound.
  double lo = 0.0, hi = -1.0;
  std::size_t coarse = 17;
  /// Absolute tolerance on the argument.
  double tol = 1e-3;
};

struct Optimum {
  double argmax = 0.0;
  double value = 0.0;
  /// False when the objective is zero on the whole scan.
  bool defined = false;
};

/// Coarse scan plus golden-section refinement. Ties go to the smaller argument.
Optimum maximize_1d(const std::function<double(double)>& f, double lo, double hi,
                    std::size_t coarse, double tol);

/// Best detuning at the base omega and Gamma, over delta >= 0 (the
/// negativity is even in delta). Automatic range: [0, max(4 omega, 4 gamma)].
Optimum optimal_detuning(const MollowConfig& base, Search1D search = {});
/// Best drive at the base delta and Gamma. Automatic range: [0, 1.5 |delta| + gamma].
Optimum optimal_drive(const MollowConfig& base, Search1D search = {});

/// Rows over omegas x Gammas with delta set to the optimal detuning of each
/// point (delta is NaN and flagged when no point is entangled).
std::vector<SweepResultRow> optimal_map(const MollowConfig& base, const std::vector<double>& omegas,
                                        const std::vector<double>& gammas, Search1D search = {},
                                        unsigned threads = 0);

struct PolaritonStudy {
  PolaritonSpec spec;  // with the resolved mode frequencies
  Sidebands lines;
  DetectionMatrix theta;       // polariton basis
  DetectionMatrix theta_post;  // vacuum removed
  double concurrence = 0.0;
  double concurrence_post = 0.0;
  BellReport bell;  // of theta_post against vacuum + Psi-
  TruncationReport health;
};

/// Source cascaded into a photon (slot a) and an exciton (slot b) with half
/// the emission each. When `sideband_resonant`, the photon is put at
/// omega_plus and the exciton at omega_minus. Throws truncation-health when
/// the top Fock level is populated beyond the threshold.
PolaritonStudy polariton_study(const MollowConfig& source, PolaritonSpec spec,
                               bool sideband_resonant = true);

/// Run `job(i)` for i in [0, n) over `threads` workers (0 = hardware).
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job);

}  // namespace mollow

#pragma once

// Lindblad models: the driven two-level emitter, its cascade into target
// modes, and target Hamiltonians.
//
// Dissipator convention: each channel (rate, c) contributes
//   rate * (c rho c^dag - {c^dag c, rho} / 2).

#include <optional>
#include <string>
#include <vector>

#include "mollow/opalg.hpp"

namespace mollow {

struct Channel {
  double rate = 0.0;
  Operator collapse;
  std::string label;
};

class LindbladModel {
 public:
  /// Validates Hermiticity of `hamiltonian`, rates >= 0 and unique labels.
  LindbladModel(Operator hamiltonian, std::vector<Channel> channels);

  const LayoutPtr& layout_ptr() const noexcept { return hamiltonian_.layout_ptr(); }
  const SpaceLayout& layout() const noexcept { return hamiltonian_.layout(); }
  const Operator& hamiltonian() const noexcept { return hamiltonian_; }
  const std::vector<Channel>& channels() const noexcept { return channels_; }
  Index dim() const noexcept { return hamiltonian_.dim(); }

  bool has_channel(const std::string& label) const noexcept;
  const Channel& channel(const std::string& label) const;

 private:
  Operator hamiltonian_;
  std::vector<Channel> channels_;
};

struct TargetSpec {
  std::string slot;
  double Gamma = 1.0;
  double lambda = 0.5;
  double kappa = 0.0;
  double epsilon = 1.0;
  /// Target frequency minus the laser frequency. Informational: the free
  /// target energy is carried by the target Hamiltonian passed to cascade().
  double detuning = 0.0;

  /// Effective cascade fraction epsilon * lambda * (1 - kappa).
  double alpha() const { return epsilon * lambda * (1.0 - kappa); }
};

struct CascadeSpec {
  double gamma_sigma = 1.0;
  std::string source_slot = "s";
  std::vector<TargetSpec> targets;
};

struct PolaritonSpec {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double g = 0.0;
  double Gamma_a = 10.0;
  double Gamma_b = 0.1;
  Index truncation_a = 4;
  Index truncation_b = 4;
};

/// Label of the blended jump operator sqrt(lambda gamma) sigma + sqrt((1-kappa) Gamma) a
/// for a target slot.
std::string cascade_channel_label(const std::string& target_slot);
inline const std::string kResidualSourceLabel = "sigma_res";

/// H = delta sigma^dag sigma + omega (sigma + sigma^dag) on a single slot "s",
/// one decay channel (gamma, sigma, "sigma").
LindbladModel build_driven_2ls(double delta, double omega, double gamma,
                               const std::string& slot = "s");

/// Cascade `source` (on a sub-layout of the target Hamiltonian's layout) into
/// the target modes, in explicit Lindblad form. The source channel labelled
/// "sigma" is replaced by the blended and residual channels; other source
/// channels are carried over.
LindbladModel cascade(const LindbladModel& source, const CascadeSpec& spec,
                      const Operator& target_hamiltonian);

/// (omega1 a1^dag a1 + omega2 a2^dag a2), frequencies relative to the laser.
Operator detector_hamiltonian(double omega1, double omega2, const LayoutPtr& layout,
                              const std::string& slot1 = "a1", const std::string& slot2 = "a2");

/// omega_a a^dag a + omega_b b^dag b + g (a^dag b + b^dag a).
Operator polariton_hamiltonian(const PolaritonSpec& spec, const LayoutPtr& layout,
                               const std::string& slot_a = "a", const std::string& slot_b = "b");

}  // namespace mollow

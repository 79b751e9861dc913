#include "mollow/modelkit.hpp"

#include <cmath>
#include <set>

namespace mollow {

LindbladModel::LindbladModel(Operator hamiltonian, std::vector<Channel> channels)
    : hamiltonian_(std::move(hamiltonian)), channels_(std::move(channels)) {
  require(hamiltonian_.is_hermitian(kAlgebraTol), ErrorCode::NonHermitian,
          "model Hamiltonian is not Hermitian");
  std::set<std::string> seen;
  for (const auto& c : channels_) {
    require(std::isfinite(c.rate) && c.rate >= 0.0, ErrorCode::InvalidArgument,
            "channel '" + c.label + "' has a negative rate");
    require(seen.insert(c.label).second, ErrorCode::InvalidArgument,
            "duplicate channel label '" + c.label + "'");
    require(c.collapse.layout() == layout(), ErrorCode::LayoutMismatch,
            "channel '" + c.label + "' lives on another layout");
  }
}

bool LindbladModel::has_channel(const std::string& label) const noexcept {
  for (const auto& c : channels_)
    if (c.label == label) return true;
  return false;
}

const Channel& LindbladModel::channel(const std::string& label) const {
  for (const auto& c : channels_)
    if (c.label == label) return c;
  fail(ErrorCode::UnknownLabel, "unknown channel '" + label + "'");
}

std::string cascade_channel_label(const std::string& target_slot) { return "O_" + target_slot; }

LindbladModel build_driven_2ls(double delta, double omega, double gamma, const std::string& slot) {
  require(gamma > 0.0, ErrorCode::InvalidArgument, "gamma must be positive");
  require(std::isfinite(delta) && std::isfinite(omega), ErrorCode::InvalidArgument,
          "non-finite drive parameters");
  auto layout = make_layout({{slot, 2}});
  const Operator s = lowering(layout, slot);
  const Operator sd = s.dagger();
  Operator h = delta * (sd * s) + omega * (s + sd);
  return LindbladModel(std::move(h), {{gamma, s, "sigma"}});
}

LindbladModel cascade(const LindbladModel& source, const CascadeSpec& spec,
                      const Operator& target_hamiltonian) {
  require(target_hamiltonian.is_hermitian(kAlgebraTol), ErrorCode::NonHermitian,
          "target Hamiltonian is not Hermitian");
  require(spec.gamma_sigma > 0.0, ErrorCode::InvalidArgument, "gamma_sigma must be positive");
  const LayoutPtr& joint = target_hamiltonian.layout_ptr();
  require(joint->dim_of(spec.source_slot) == 2, ErrorCode::InvalidDimension,
          "source slot must be a two-level system");

  double lambda_sum = 0.0;
  for (const auto& t : spec.targets) {
    require(t.lambda >= 0.0 && t.lambda <= 1.0 && t.kappa >= 0.0 && t.kappa <= 1.0,
            ErrorCode::InvalidArgument, "lambda and kappa must lie in [0, 1]");
    require(t.epsilon > 0.0 && t.epsilon <= 1.0, ErrorCode::InvalidArgument,
            "epsilon must lie in (0, 1]");
    require(t.Gamma >= 0.0, ErrorCode::InvalidArgument, "target rate must be nonnegative");
    require(t.slot != spec.source_slot, ErrorCode::InvalidArgument, "target slot equals source");
    joint->slot(t.slot);
    lambda_sum += t.epsilon * t.lambda;
  }
  require(lambda_sum <= 1.0 + 1e-12, ErrorCode::InvalidArgument,
          "cascade fractions sum to more than one");

  const double gamma = spec.gamma_sigma;
  const Operator s = lowering(joint, spec.source_slot);
  const Operator sd = s.dagger();

  Operator h = lift(source.hamiltonian(), joint) + target_hamiltonian;
  std::vector<Channel> channels;
  for (const auto& c : source.channels()) {
    if (c.label == "sigma") {
      require(std::abs(c.rate - gamma) <= 1e-12 * gamma, ErrorCode::InvalidArgument,
              "source decay rate differs from gamma_sigma");
      continue;
    }
    channels.push_back({c.rate, lift(c.collapse, joint), c.label});
  }

  for (const auto& t : spec.targets) {
    const Operator a = lowering(joint, t.slot);
    const double lam = t.epsilon * t.lambda;
    // Interference of the coherent drive of the target by the source field
    // with the blended jump below cancels the back-action on the source.
    const double coupling = 0.5 * std::sqrt(t.alpha() * gamma * t.Gamma);
    h += (kI * coupling) * (sd * a - a.dagger() * s);
    Operator o = std::sqrt(lam * gamma) * s + std::sqrt((1.0 - t.kappa) * t.Gamma) * a;
    channels.push_back({1.0, std::move(o), cascade_channel_label(t.slot)});
    if (t.kappa > 0.0) channels.push_back({t.kappa * t.Gamma, a, t.slot});
  }
  const double residual = (1.0 - lambda_sum) * gamma;
  if (residual > 1e-14) channels.push_back({residual, s, kResidualSourceLabel});

  // Remove rounding asymmetry so the Hermiticity check is exact.
  h = Operator(joint, hermitian_part(h.matrix()));
  return LindbladModel(std::move(h), std::move(channels));
}

Operator detector_hamiltonian(double omega1, double omega2, const LayoutPtr& layout,
                              const std::string& slot1, const std::string& slot2) {
  return omega1 * number(layout, slot1) + omega2 * number(layout, slot2);
}

Operator polariton_hamiltonian(const PolaritonSpec& spec, const LayoutPtr& layout,
                               const std::string& slot_a, const std::string& slot_b) {
  require(spec.g >= 0.0, ErrorCode::InvalidArgument, "polariton coupling must be nonnegative");
  require(layout->dim_of(slot_a) == spec.truncation_a && layout->dim_of(slot_b) == spec.truncation_b,
          ErrorCode::DimensionMismatch, "polariton truncations do not match the layout");
  const Operator a = lowering(layout, slot_a);
  const Operator b = lowering(layout, slot_b);
  return spec.omega_a * number(layout, slot_a) + spec.omega_b * number(layout, slot_b) +
         spec.g * (a.dagger() * b + b.dagger() * a);
}

}  // namespace mollow

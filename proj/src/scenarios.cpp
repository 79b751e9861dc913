#include "mollow/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "mollow/diagnostics.hpp"
#include "mollow/grid.hpp"

namespace mollow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check(bool ok, const std::string& what) { require(ok, ErrorCode::ConfigError, what); }

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void MollowConfig::validate() const {
  check(finite(omega) && omega >= 0.0, "omega must be finite and >= 0");
  check(finite(delta), "delta must be finite");
  check(finite(gamma) && gamma > 0.0, "gamma must be positive");
  check(finite(Gamma) && Gamma > 0.0, "Gamma must be positive");
  check(!omega_plus || finite(*omega_plus), "omega_plus must be finite");
  check(!omega_minus || finite(*omega_minus), "omega_minus must be finite");
  check(truncation >= 2 && truncation <= 12, "truncation must lie in [2, 12]");
  check(lambda >= 0.0 && 2.0 * lambda * epsilon <= 1.0 + 1e-12,
        "lambda must be >= 0 with 2 epsilon lambda <= 1");
  check(kappa >= 0.0 && kappa <= 1.0, "kappa must lie in [0, 1]");
  check(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
}

Sidebands sideband_frequencies(double delta, double omega) {
  const double w = std::sqrt(4.0 * omega * omega + delta * delta);
  return {w, -w};
}

Sidebands detector_frequencies(const MollowConfig& cfg) {
  const Sidebands sb = sideband_frequencies(cfg.delta, cfg.omega);
  return {cfg.omega_plus.value_or(sb.plus), cfg.omega_minus.value_or(sb.minus)};
}

LindbladModel build_system(const MollowConfig& cfg) {
  cfg.validate();
  const Sidebands f = detector_frequencies(cfg);
  auto l = make_layout({{kSourceSlot, 2}, {kPlusSlot, cfg.truncation}, {kMinusSlot, cfg.truncation}});
  CascadeSpec spec;
  spec.gamma_sigma = cfg.gamma;
  spec.source_slot = kSourceSlot;
  spec.targets = {{kPlusSlot, cfg.Gamma, cfg.lambda, cfg.kappa, cfg.epsilon, f.plus},
                  {kMinusSlot, cfg.Gamma, cfg.lambda, cfg.kappa, cfg.epsilon, f.minus}};
  return cascade(build_driven_2ls(cfg.delta, cfg.omega, cfg.gamma, kSourceSlot), spec,
                 detector_hamiltonian(f.plus, f.minus, l, kPlusSlot, kMinusSlot));
}

TruncationReport truncation_health(const DensityMatrix& rho, const std::vector<std::string>& slots,
                                   double threshold) {
  TruncationReport r;
  for (const auto& s : slots) {
    const DensityMatrix red = partial_trace(rho, {s});
    const Index top = red.dim() - 1;
    const double p = red.matrix()(top, top).real();
    if (p >= r.top_population) {
      r.top_population = p;
      r.slot = s;
    }
  }
  r.healthy = r.top_population < threshold;
  return r;
}

bool SweepResultRow::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

std::string SweepResultRow::flag_string() const {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

SweepResultRow evaluate_point(const MollowConfig& cfg) {
  SweepResultRow row;
  row.omega = cfg.omega;
  row.delta = cfg.delta;
  row.Gamma = cfg.Gamma;
  const Sidebands f = detector_frequencies(cfg);
  row.gamma_over_omegaplus = f.plus != 0.0 ? cfg.Gamma / std::abs(f.plus) : kNaN;

  auto fail_all = [&](const std::string& flag) {
    row.negativity = row.R = row.g2_cross0 = row.intensity = kNaN;
    row.bell_weight = row.bell_fidelity = row.bell_purity = kNaN;
    row.flags.push_back(flag);
    return row;
  };
  std::optional<DensityMatrix> rho;
  try {
    rho = steady_state(build_system(cfg));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    return fail_all("solver-failed");
  }
  const TruncationReport health = truncation_health(*rho, {kPlusSlot, kMinusSlot});
  if (!health.healthy) {
    std::ostringstream msg;
    msg << "truncation " << cfg.truncation << " too small at omega=" << cfg.omega
        << " delta=" << cfg.delta << " Gamma=" << cfg.Gamma << ": top level of " << health.slot
        << " holds " << health.top_population;
    warn(msg.str());
    row.flags.push_back("truncation");
  }
  const DensityMatrix det = partial_trace(*rho, {kPlusSlot, kMinusSlot});
  const LayoutPtr& l = det.layout_ptr();
  const Operator a1 = lowering(l, kPlusSlot), a2 = lowering(l, kMinusSlot);

  row.negativity = log_negativity(det, kMinusSlot);
  const double n1 = expectation(det, a1.dagger() * a1).real();
  const double n2 = expectation(det, a2.dagger() * a2).real();
  row.intensity = cfg.Gamma * n1;
  try {
    row.R = csi_R(det, a1, a2);
    if (row.R <= 1.0) row.flags.push_back("classical");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UndefinedRatio) throw;
    row.R = kNaN;
    row.flags.push_back("R-undefined");
  }
  if (n1 > 1e-300 && n2 > 1e-300) {
    row.g2_cross0 = expectation(det, a1.dagger() * a2.dagger() * a2 * a1).real() / (n1 * n2);
  } else {
    row.g2_cross0 = kNaN;
    row.flags.push_back("g2-undefined");
  }
  try {
    const BellReport b = bell_report(detection_matrix(det, kPlusSlot, kMinusSlot), BellState::PhiMinus);
    row.bell_weight = b.bell_weight;
    row.bell_fidelity = b.fidelity_to_model;
    row.bell_purity = b.bell_purity;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::VanishingNorm) throw;
    row.bell_weight = row.bell_fidelity = row.bell_purity = kNaN;
    row.flags.push_back("bell-undefined");
  }
  return row;
}

double detector_negativity(const MollowConfig& cfg) {
  try {
    const DensityMatrix rho = steady_state(build_system(cfg));
    return log_negativity(partial_trace(rho, {kPlusSlot, kMinusSlot}), kMinusSlot);
  } catch (const Error& e) {
    if (!is_numerical(e.code())) throw;
    return 0.0;
  }
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SweepResultRow> entanglement_map(const MollowConfig& base,
                                             const std::vector<double>& omegas,
                                             const std::vector<double>& deltas, unsigned threads) {
  require(!omegas.empty() && !deltas.empty(), ErrorCode::ConfigError, "empty sweep grid");
  base.validate();
  std::vector<SweepResultRow> rows(omegas.size() * deltas.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    MollowConfig cfg = base;
    cfg.omega = omegas[i / deltas.size()];
    cfg.delta = deltas[i % deltas.size()];
    rows[i] = evaluate_point(cfg);
  });
  return rows;
}

Optimum maximize_1d(const std::function<double(double)>& f, double lo, double hi,
                    std::size_t coarse, double tol) {
  require(finite(lo) && finite(hi) && hi > lo, ErrorCode::ConfigError, "invalid search range");
  require(coarse >= 3, ErrorCode::ConfigError, "coarse scan needs at least 3 points");
  require(tol > 0.0, ErrorCode::ConfigError, "search tolerance must be positive");
  const std::vector<double> xs = linspace(lo, hi, coarse);
  std::vector<double> ys(xs.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ys[i] = f(xs[i]);
    if (ys[i] > ys[best] + 1e-12 * std::max(1.0, std::abs(ys[best]))) best = i;
  }
  Optimum opt{xs[best], ys[best], ys[best] > 0.0};
  if (!opt.defined) {
    opt.argmax = kNaN;
    opt.value = 0.0;
    return opt;
  }
  double a = xs[best > 0 ? best - 1 : 0], b = xs[std::min(best + 1, xs.size() - 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = f1 >= f2 ? x1 : x2, ym = std::max(f1, f2);
  if (ym > opt.value) {
    opt.argmax = xm;
    opt.value = ym;
  }
  return opt;
}

Optimum optimal_detuning(const MollowConfig& base, Search1D search) {
  base.validate();
  const double hi = search.hi > search.lo ? search.hi : std::max(4.0 * base.omega, 4.0 * base.gamma);
  require(search.lo >= 0.0, ErrorCode::ConfigError, "detuning search starts below zero");
  return maximize_1d(
      [&](double d) {
        MollowConfig cfg = base;
        cfg.delta = d;
        return detector_negativity(cfg);
      },
      search.lo, hi, search.coarse, search.tol);
}

Optimum optimal_drive(const MollowConfig& base, Search1D search) {
  base.validate();
  const double hi = search.hi > search.lo ? search.hi : 1.5 * std::abs(base.delta) + base.gamma;
  require(search.lo >= 0.0, ErrorCode::ConfigError, "drive search starts below zero");
  return maximize_1d(
      [&](double w) {
        MollowConfig cfg = base;
        cfg.omega = w;
        return detector_negativity(cfg);
      },
      search.lo, hi, search.coarse, search.tol);
}

std::vector<SweepResultRow> optimal_map(const MollowConfig& base, const std::vector<double>& omegas,
                                        const std::vector<double>& gammas, Search1D search,
                                        unsigned threads) {
  require(!omegas.empty() && !gammas.empty(), ErrorCode::ConfigError, "empty sweep grid");
  base.validate();
  std::vector<SweepResultRow> rows(omegas.size() * gammas.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    MollowConfig cfg = base;
    cfg.omega = omegas[i / gammas.size()];
    cfg.Gamma = gammas[i % gammas.size()];
    const Optimum opt = optimal_detuning(cfg, search);
    if (opt.defined) {
      cfg.delta = opt.argmax;
      rows[i] = evaluate_point(cfg);
    } else {
      // Nothing entangled on the scan; report the resonant point.
      cfg.delta = 0.0;
      rows[i] = evaluate_point(cfg);
      rows[i].delta = kNaN;
      rows[i].flags.push_back("delta-undefined");
    }
  });
  return rows;
}

PolaritonStudy polariton_study(const MollowConfig& source, PolaritonSpec spec, bool sideband_resonant) {
  source.validate();
  require(spec.truncation_a >= 2 && spec.truncation_b >= 2, ErrorCode::ConfigError,
          "polariton truncations must be >= 2");
  require(spec.Gamma_a > 0.0 && spec.Gamma_b >= 0.0 && spec.g >= 0.0, ErrorCode::ConfigError,
          "invalid polariton rates");
  PolaritonStudy out;
  out.lines = sideband_frequencies(source.delta, source.omega);
  if (sideband_resonant) {
    spec.omega_a = out.lines.plus;
    spec.omega_b = out.lines.minus;
  }
  out.spec = spec;

  auto l = make_layout(
      {{kSourceSlot, 2}, {kPhotonSlot, spec.truncation_a}, {kExcitonSlot, spec.truncation_b}});
  CascadeSpec cs;
  cs.gamma_sigma = source.gamma;
  cs.source_slot = kSourceSlot;
  cs.targets = {{kPhotonSlot, spec.Gamma_a, source.lambda, source.kappa, source.epsilon, spec.omega_a},
                {kExcitonSlot, spec.Gamma_b, source.lambda, source.kappa, source.epsilon, spec.omega_b}};
  const LindbladModel model =
      cascade(build_driven_2ls(source.delta, source.omega, source.gamma, kSourceSlot), cs,
              polariton_hamiltonian(spec, l, kPhotonSlot, kExcitonSlot));
  const DensityMatrix rho = steady_state(model);
  out.health = truncation_health(rho, {kPhotonSlot, kExcitonSlot});
  if (!out.health.healthy) {
    std::ostringstream msg;
    msg << "top Fock level of " << out.health.slot << " holds " << out.health.top_population
        << "; increase the truncation to at least "
        << std::max(spec.truncation_a, spec.truncation_b) + 2;
    fail(ErrorCode::TruncationHealth, msg.str());
  }
  out.theta = detection_matrix(rho, kPhotonSlot, kExcitonSlot, DetectionBasis::Polariton, &spec);
  out.theta_post = postselect_remove_vacuum(out.theta);
  out.concurrence = concurrence(out.theta);
  out.concurrence_post = concurrence(out.theta_post);
  out.bell = bell_report(out.theta_post, BellState::PsiMinus);
  return out;
}

}  // namespace mollow

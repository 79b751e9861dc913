// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <unistd.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "mollow/cli.hpp"
#include "mollow/correlator.hpp"
#include "mollow/diagnostics.hpp"
#include "mollow/entglmeas.hpp"
#include "mollow/grid.hpp"
#include "mollow/liouville.hpp"
#include "mollow/modelkit.hpp"
#include "mollow/scenarios.hpp"
#include "mollow/trajec.hpp"
#include "oracles.hpp"

using namespace mollow;
namespace fs = std::filesystem;

namespace {

int failures = 0;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void criterion(int id, const std::string& name, const std::function<bool(std::string&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail += std::string(" exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !ok;
  std::cout << (ok ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << detail
            << fmt(" (%.1fs)", s) << std::endl;
}

Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

// Random cascade of the driven emitter into two detectors, with the oracle
// generator of the mixed commutator form.
struct RandomCascade {
  LindbladModel model, source;
  Matrix direct;
};

RandomCascade random_cascade(std::mt19937_64& rng, Index trunc) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto l = make_layout({{"s", 2}, {"a1", trunc}, {"a2", trunc}});
  const LindbladModel src = build_driven_2ls(6.0 * u(rng) - 3.0, 2.0 * u(rng), 1.0);
  CascadeSpec spec;
  spec.targets = {{"a1", 0.1 + 3.0 * u(rng), 0.6 * u(rng), 0.5 * u(rng), 0.5 + 0.5 * u(rng), 0.0},
                  {"a2", 0.1 + 3.0 * u(rng), 0.4 * u(rng), 0.5 * u(rng), 0.5 + 0.5 * u(rng), 0.0}};
  const Operator hd = detector_hamiltonian(6.0 * u(rng) - 3.0, 6.0 * u(rng) - 3.0, l);
  LindbladModel m = cascade(src, spec, hd);
  const Matrix s = lowering(l, "s").matrix();
  const Matrix h = (lift(src.hamiltonian(), l) + hd).matrix();
  std::vector<oracle::CascadeTerm> terms;
  for (const auto& t : spec.targets)
    terms.push_back({lowering(l, t.slot).matrix(), t.Gamma, t.lambda, t.kappa, t.epsilon});
  Matrix direct = oracle::superop_from_map(
      [&](const Matrix& r) { return oracle::direct_cascade_rhs(h, s, 1.0, terms, r); }, l->dim());
  return {std::move(m), src, std::move(direct)};
}

// Two-mode product and mixture states with a nonnegative P function.
DensityMatrix classical_state(std::mt19937_64& rng, const LayoutPtr& l, Index dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto mode = [&]() -> Matrix {
    if (u(rng) < 0.5) return oracle::thermal_state(0.5 * u(rng), dim);
    return oracle::coherent_state(std::polar(u(rng), 6.283185307179586 * u(rng)), dim);
  };
  const int terms = 1 + static_cast<int>(4 * u(rng));
  Matrix rho = Matrix::Zero(dim * dim, dim * dim);
  double wsum = 0.0;
  for (int k = 0; k < terms; ++k) {
    const double w = 0.1 + u(rng);
    rho += w * kron(mode(), mode());
    wsum += w;
  }
  return DensityMatrix(l, rho / wsum);
}

double crossing_down(const std::vector<double>& x, const std::vector<double>& y, std::size_t from) {
  for (std::size_t k = from; k + 1 < x.size(); ++k)
    if (y[k] >= 1.0 && y[k + 1] < 1.0) return x[k] + (x[k + 1] - x[k]) * (y[k] - 1.0) / (y[k] - y[k + 1]);
  return std::nan("");
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mollow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace

int main() {
  std::vector<std::string> warnings;
  set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
  std::cout.setf(std::ios::unitbuf);

  criterion(1, "steady state against the optical Bloch solution", [](std::string& d) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ud(-5.0, 5.0), uo(0.05, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double delta = ud(rng), omega = uo(rng);
      const DensityMatrix r = steady_state(build_driven_2ls(delta, omega, 1.0));
      const double ref = omega * omega / (delta * delta + 0.25 + 2.0 * omega * omega);
      worst = std::max(worst, std::abs(r.matrix()(1, 1).real() - ref));
    }
    d = fmt("max |rho_ee - oracle| = %.2e over 20 draws", worst);
    return worst < 1e-10;
  });

  criterion(2, "no back-action of the detectors on the source", [](std::string& d) {
    std::mt19937_64 rng(202);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const RandomCascade rc = random_cascade(rng, 3);
      const DensityMatrix joint = steady_state(rc.model);
      worst = std::max(worst, trace_distance(partial_trace(joint, {"s"}), steady_state(rc.source)));
    }
    d = fmt("max trace distance = %.2e over 10 cascades", worst);
    return worst < 1e-8;
  });

  criterion(3, "Lindblad-form cascade generator equals the direct form", [](std::string& d) {
    std::mt19937_64 rng(303);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const RandomCascade rc = random_cascade(rng, 3);
      worst = std::max(worst, max_abs(liouvillian_matrix(rc.model).dense() - rc.direct));
    }
    d = fmt("max elementwise difference = %.2e", worst);
    return worst < 1e-12;
  });

  criterion(4, "transition energies approach the sideband lines", [](std::string& d) {
    auto rel_error = [](double delta, double omega) {
      const auto e = transition_energies(liouvillian_matrix(build_driven_2ls(delta, omega, 1.0)));
      const double line = std::sqrt(4.0 * omega * omega + delta * delta);
      return std::max(std::abs(e.back() - line), std::abs(e.front() + line)) / line;
    };
    double worst = 0.0;
    for (double delta : {5.0, 7.5, 10.0, 12.5, 15.0, 20.0})
      for (double omega : {2.0, 3.0, 4.0, 6.0, 8.0, 10.0}) worst = std::max(worst, rel_error(delta, omega));
    std::vector<double> trend;
    for (double s : {1.0, 2.0, 4.0, 8.0}) trend.push_back(rel_error(5.0 * s, 2.0 * s));
    bool shrinking = true;
    for (std::size_t k = 1; k < trend.size(); ++k) shrinking &= trend[k] < trend[k - 1];
    d = fmt("worst relative error %.2e on the grid; along (5,2)*s for s=1,2,4,8: %.1e %.1e %.1e %.1e",
            worst, trend[0], trend[1], trend[2], trend[3]);
    return worst < 0.05 && shrinking;
  });

  criterion(5, "resonant sideband cross-correlation is symmetric", [](std::string& d) {
    MollowConfig c;
    const LindbladModel m = build_system(c);
    const auto taus = linspace(-10.0, 10.0, 401);
    const CorrelationCurve g = g2_cross(m, lowering(m.layout_ptr(), kPlusSlot),
                                        lowering(m.layout_ptr(), kMinusSlot), taus);
    double worst = 0.0;
    for (std::size_t k = 0; k < taus.size(); ++k)
      worst = std::max(worst, std::abs(g.points[k].value - g.points[taus.size() - 1 - k].value));
    d = fmt("max |g2(tau) - g2(-tau)| = %.2e, g2(0) = %.4f", worst, g.points[200].value);
    return worst < 1e-6;
  });

  criterion(6, "heralded photon statistics from quantum trajectories", [](std::string& d) {
    const std::size_t n_detuned = 200000, n_resonant = 50000, batch = 5000;
    const double duration = 200.0, burn_in = 30.0, hist_tau = 8.0;
    const std::size_t bins = 40;
    const auto taus = linspace(0.1, 6.0, 60);
    auto run = [&](double delta, std::size_t count, std::uint64_t seed, DelayHistogram* hist,
                   LindbladModel* model_out) {
      MollowConfig c;
      c.delta = delta;
      c.kappa = 0.5;
      const LindbladModel m = build_system(c);
      if (model_out) *model_out = m;
      const JumpSimulator sim(m);
      const StateVector vac = StateVector::basis(m.layout_ptr(), {0, 0, 0});
      ClickStats st;
      for (std::size_t s = 0; s < count; s += batch) {
        const auto recs = run_ensemble(sim, vac, duration, seed, s, std::min(batch, count - s));
        const ClickStats b = click_statistics(recs, kMinusSlot, kPlusSlot, taus, burn_in, true);
        if (s == 0) st = b;
        else st += b;
        if (hist) *hist += delay_histogram(recs, kMinusSlot, kPlusSlot, hist_tau, bins, burn_in, true);
      }
      return st;
    };
    DelayHistogram hist;
    LindbladModel model = build_driven_2ls(0, 0, 1);
    const ClickStats detuned = run(1.85, n_detuned, 6001, &hist, &model);
    const ClickStats resonant = run(0.0, n_resonant, 6002, nullptr, nullptr);

    // (i) histogram against bin-averaged regression values
    std::vector<double> fine;
    const std::size_t sub = 16;
    for (std::size_t k = 0; k < bins; ++k)
      for (std::size_t j = 0; j < sub; ++j)
        fine.push_back(hist.edges[k] + (hist.edges[k + 1] - hist.edges[k]) * (j + 0.5) / sub);
    const CorrelationCurve reg = g2_cross(model, lowering(model.layout_ptr(), kMinusSlot),
                                          lowering(model.layout_ptr(), kPlusSlot), fine);
    double worst_z = 0.0;
    std::size_t outside = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      double avg = 0.0;
      for (std::size_t j = 0; j < sub; ++j) avg += reg.points[k * sub + j].value / sub;
      const double z = std::abs(hist.g2(k) - avg) / hist.g2_error(k);
      worst_z = std::max(worst_z, z);
      outside += z > 3.0;
    }
    // (ii)-(iv) ratios
    const auto r1 = heralding_ratio(detuned, resonant, 1);
    const auto r2 = heralding_ratio(detuned, resonant, 2);
    std::vector<double> y1;
    std::size_t peak = 0, undefined = 0;
    for (std::size_t k = 0; k < r1.size(); ++k) {
      y1.push_back(r1[k].defined ? r1[k].value : std::nan(""));
      if (r1[k].defined && (!r1[peak].defined || r1[k].value > r1[peak].value)) peak = k;
    }
    const double peak_value = y1[peak], peak_tau = taus[peak];
    const double cross = crossing_down(taus, y1, peak);
    // r2plus only where the reference holds enough two-click windows to
    // resolve a ratio; short windows at weak drive rarely contain two clicks.
    const std::uint64_t min_events = 25;
    double worst_r2 = 0.0;
    std::size_t unresolved = 0, unresolved_late = 0;
    for (std::size_t k = 0; k < r2.size() && taus[k] <= 4.0 + 1e-12; ++k) {
      if (resonant.counts[2][k] < min_events) {
        ++unresolved;
        unresolved_late += taus[k] >= 1.0;
        continue;
      }
      if (!r2[k].defined) ++undefined;
      else worst_r2 = std::max(worst_r2, r2[k].value);
    }
    const bool i = outside == 0;
    const bool ii = peak_value >= 1.10 && peak_value <= 1.35;
    const bool iii = cross >= 1.5 && cross <= 2.5;
    const bool iv = undefined == 0 && unresolved_late == 0 && worst_r2 < 1.0;
    d = fmt("(i) %s %zu/%zu bins beyond 3 sigma, max z %.2f; (ii) %s peak r1 %.3f at tau %.1f; "
            "(iii) %s r1 crosses 1 at tau %.2f; (iv) %s max r2plus %.3f on (0,4], %zu unresolved (%zu at tau >= 1), %zu undefined; "
            "heralds %llu detuned / %llu resonant",
            i ? "ok" : "NO", outside, bins, worst_z, ii ? "ok" : "NO", peak_value, peak_tau,
            iii ? "ok" : "NO", cross, iv ? "ok" : "NO", worst_r2, unresolved, unresolved_late, undefined,
            static_cast<unsigned long long>(detuned.heralds[0]),
            static_cast<unsigned long long>(resonant.heralds[0]));
    return i && ii && iii && iv;
  });

  criterion(7, "drive optimum at large detuning sits at 0.58 |delta|", [](std::string& d) {
    bool ok = true;
    for (double delta : {20.0, 40.0}) {
      MollowConfig c;
      c.delta = delta;
      c.Gamma = 0.1;
      const Optimum o = optimal_drive(c, {0.0, -1.0, 33, 1e-3});
      c.omega = o.argmax;
      const SweepResultRow r = evaluate_point(c);
      const double ratio = o.argmax / delta;
      ok &= o.defined && std::abs(ratio - 0.58) <= 0.05;
      d += fmt("delta %.0f: omega_opt/delta %.4f (N %.4f%s); ", delta, ratio, o.value,
               r.has_flag("truncation") ? ", truncation flagged" : "");
    }
    return ok;
  });

  double delta_opt_10 = std::nan("");
  criterion(8, "optimal detuning near twice the drive", [&](std::string& d) {
    MollowConfig c;
    c.omega = 10.0;
    c.Gamma = 0.1;
    const Optimum o = optimal_detuning(c);
    delta_opt_10 = o.argmax;
    d = fmt("omega 10, Gamma 0.1: delta_opt %.4f, delta_opt/omega %.4f, N %.4f", o.argmax,
            o.argmax / 10.0, o.value);
    return o.defined && o.argmax / 10.0 >= 1.6 && o.argmax / 10.0 <= 2.4;
  });

  criterion(9, "detector state is vacuum plus a Phi- Bell pair", [&](std::string& d) {
    MollowConfig c;
    c.omega = 10.0;
    c.Gamma = 0.1;
    c.delta = delta_opt_10;
    const SweepResultRow r = evaluate_point(c);
    const DensityMatrix rho = partial_trace(steady_state(build_system(c)), {kPlusSlot, kMinusSlot});
    const BellReport b = bell_report(rho, BellState::PhiMinus);
    d = fmt("fidelity %.4f (squared %.4f), bell weight %.5f, purity %.4f%s", r.bell_fidelity,
            b.fidelity_squared, r.bell_weight, r.bell_purity,
            r.flag_string().empty() ? "" : (", flags " + r.flag_string()).c_str());
    return r.bell_fidelity >= 0.95 && r.bell_weight <= 0.006 && std::abs(r.bell_purity - 0.916) <= 0.05;
  });

  criterion(10, "Cauchy-Schwarz violation requires narrow detectors", [](std::string& d) {
    MollowConfig base;
    const auto omegas = linspace(0.5, 10.0, 21);
    const auto gammas = logspace(0.1, 10.0, 21);
    const auto rows = optimal_map(base, omegas, gammas, {0.0, -1.0, 11, 1e-2});
    std::size_t violating = 0, broken = 0, nan_r = 0;
    double widest = 0.0;
    for (const auto& r : rows) {
      if (std::isnan(r.R)) ++nan_r;
      if (r.R > 1.0) {
        ++violating;
        widest = std::max(widest, r.gamma_over_omegaplus);
        broken += !(r.gamma_over_omegaplus < 1.0);
      }
    }
    std::mt19937_64 rng(1010);
    const Index dim = 24;
    auto l = make_layout({{"a", dim}, {"b", dim}});
    const Operator a = lowering(l, "a"), b = lowering(l, "b");
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) worst = std::max(worst, csi_R(classical_state(rng, l, dim), a, b));
    d = fmt("%zu/%zu grid points with R > 1, largest Gamma/omega_plus among them %.3f, %zu outside; "
            "%zu undefined R; classical suite max R %.12f",
            violating, rows.size(), widest, broken, nan_r, worst);
    return broken == 0 && worst <= 1.0 + 1e-9;
  });

  criterion(11, "entanglement degrades with detector linewidth", [](std::string& d) {
    std::vector<double> n;
    for (double g : {0.1, 1.0, 10.0}) {
      MollowConfig c;
      c.omega = 5.0;
      c.Gamma = g;
      const Optimum o = optimal_detuning(c);
      n.push_back(o.value);
      d += fmt("Gamma %.1f: delta_opt %.3f N %.4f; ", g, o.argmax, o.value);
    }
    const bool monotone = n[0] > n[1] && n[1] > n[2];
    d += fmt("monotone %s, N(Gamma=10) < 0.01 %s", monotone ? "yes" : "no", n[2] < 0.01 ? "yes" : "no");
    return monotone && n[2] < 0.01;
  });

  criterion(12, "polariton concurrence and Psi- fidelity", [](std::string& d) {
    MollowConfig src;
    src.omega = 4.9;
    src.delta = 8.92;
    PolaritonSpec p;
    p.g = 300.0;
    p.Gamma_a = 10.0;
    p.Gamma_b = 0.1;
    const PolaritonStudy s = polariton_study(src, p);
    d = fmt("post-selected concurrence %.4f (before %.4f), fidelity %.4f (squared %.4f), top level %.1e",
            s.concurrence_post, s.concurrence, s.bell.fidelity_to_model, s.bell.fidelity_squared,
            s.health.top_population);
    return s.concurrence_post >= 0.85 && s.concurrence_post <= 0.95 && s.bell.fidelity_to_model >= 0.99;
  });

  criterion(13, "measure unit suite", [](std::string& d) {
    auto l = make_layout({{"a", 2}, {"b", 2}});
    const Eigen::Vector4cd phi = bell_vector(BellState::PhiMinus), psi = bell_vector(BellState::PsiMinus);
    const double n_phi = log_negativity(DensityMatrix(l, Matrix(phi * phi.adjoint())), "b");
    std::mt19937_64 rng(1313);
    double n_sep = 0.0;
    for (int k = 0; k < 20; ++k) {
      Matrix rho = Matrix::Zero(4, 4);
      for (int j = 0; j < 3; ++j)
        rho += kron(oracle::random_density(2, rng), oracle::random_density(2, rng)) / 3.0;
      n_sep = std::max(n_sep, log_negativity(DensityMatrix(l, rho), "b"));
    }
    const Eigen::Matrix4cd psi_proj = psi * psi.adjoint();
    const double c_psi = concurrence(psi_proj);
    double werner = 0.0;
    for (double p : {0.4, 0.8}) {
      const Eigen::Matrix4cd w = p * psi_proj + (1.0 - p) / 4.0 * Eigen::Matrix4cd::Identity();
      werner = std::max(werner, std::abs(concurrence(w) - (3.0 * p - 1.0) / 2.0));
    }
    const Index dim = 20;
    auto m = make_layout({{"a", dim}, {"b", dim}});
    const Operator a = lowering(m, "a"), b = lowering(m, "b");
    const double r_th =
        csi_R(DensityMatrix(m, kron(oracle::thermal_state(0.2, dim), oracle::thermal_state(0.3, dim))), a, b);
    const double r_coh = csi_R(
        DensityMatrix(m, kron(oracle::coherent_state(0.7, dim), oracle::coherent_state(Complex(0.2, 0.5), dim))),
        a, b);
    const LindbladModel tls = build_driven_2ls(0.3, 1.1, 1.0);
    const double g2 = g2_auto_zero(tls, lowering(tls.layout_ptr(), "s"));
    d = fmt("N(Phi-) %.12f, max N(separable) %.1e, C(Psi-) %.12f, Werner error %.1e, "
            "R thermal %.12f, R coherent %.12f, g2(0) %.1e",
            n_phi, n_sep, c_psi, werner, r_th, r_coh, g2);
    return std::abs(n_phi - 1.0) < 1e-9 && n_sep < 1e-9 && std::abs(c_psi - 1.0) < 1e-9 && werner < 1e-9 &&
           std::abs(r_th - 0.25) < 1e-9 && std::abs(r_coh - 1.0) < 1e-9 && std::abs(g2) < 1e-9;
  });

  criterion(14, "identical config and seed give byte-identical outputs", [](std::string& d) {
    const fs::path root = fs::temp_directory_path() / fmt("mollow_acceptance_%d", static_cast<int>(::getpid()));
    fs::create_directories(root);
    std::ofstream(root / "c.json") << R"({
      "seed": 2024,
      "model": {"omega": 1, "delta": 1.85},
      "mc": {"trajectories": 200, "reference_trajectories": 100},
      "map": {"omega": {"min": 1, "max": 4, "points": 3}, "Gamma": {"min": 0.3, "max": 3, "points": 3, "log": true}},
      "g2": {"tau": {"min": -5, "max": 5, "points": 51}}
    })";
    std::size_t files = 0, differ = 0;
    bool ran = true;
    for (const std::string sub : {"mc", "map", "g2", "spectrum", "lines", "optimal"}) {
      const fs::path a = root / (sub + "_a"), b = root / (sub + "_b"), m = root / (sub + "_m");
      ran &= run_cli({sub, "--config", (root / "c.json").string(), "--out", a.string()}) == 0;
      ran &= run_cli({sub, "--config", (root / "c.json").string(), "--out", b.string()}) == 0;
      ran &= run_cli({sub, "--config", (a / "manifest.json").string(), "--out", m.string()}) == 0;
      for (const auto& e : fs::directory_iterator(a)) {
        const auto name = e.path().filename();
        ++files;
        differ += slurp(a / name) != slurp(b / name) || slurp(a / name) != slurp(m / name);
      }
    }
    fs::remove_all(root);
    d = fmt("%zu output files over 6 subcommands, %zu differ between reruns or manifest reruns", files, differ);
    return ran && files > 0 && differ == 0;
  });

  for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
  std::cout << (failures ? fmt("%d criteria failed", failures) : std::string("all criteria passed")) << std::endl;
  return failures ? 1 : 0;
}

#include "mollow/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mollow/correlator.hpp"
#include "mollow/diagnostics.hpp"
#include "mollow/error.hpp"
#include "mollow/grid.hpp"
#include "mollow/io.hpp"
#include "mollow/trajec.hpp"

#ifndef MOLLOW_VERSION
#define MOLLOW_VERSION "0.0.0"
#endif

namespace mollow::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check(bool ok, const std::string& what) { require(ok, ErrorCode::ConfigError, what); }

// One JSON object; every read marks its key, finish() rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    check(j.is_object(), path_ + " must be an object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const char* key, double& dst) {
    if (const json* v = find(key)) {
      check(v->is_number(), where(key) + " must be a number");
      dst = v->get<double>();
    }
  }
  void get(const char* key, std::optional<double>& dst) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        dst.reset();
        return;
      }
      check(v->is_number(), where(key) + " must be a number or null");
      dst = v->get<double>();
    }
  }
  template <class Int>
    requires std::is_integral_v<Int>
  void get(const char* key, Int& dst) {
    if (const json* v = find(key)) {
      check(v->is_number_integer() && v->get<long long>() >= 0,
            where(key) + " must be a non-negative integer");
      dst = static_cast<Int>(v->get<unsigned long long>());
    }
  }
  void get(const char* key, std::optional<std::size_t>& dst) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        dst.reset();
        return;
      }
      std::size_t x = 0;
      get(key, x);
      dst = x;
    }
  }
  void get(const char* key, bool& dst) {
    if (const json* v = find(key)) {
      check(v->is_boolean(), where(key) + " must be a boolean");
      dst = v->get<bool>();
    }
  }
  void get(const char* key, std::string& dst) {
    if (const json* v = find(key)) {
      check(v->is_string(), where(key) + " must be a string");
      dst = v->get<std::string>();
    }
  }
  void get(const char* key, Range& r) {
    if (const json* v = find(key)) {
      Section s(*v, where(key));
      s.get("min", r.min);
      s.get("max", r.max);
      s.get("points", r.points);
      s.get("log", r.log);
      s.finish();
    }
  }
  /// Sub-object, or nullptr when absent.
  const json* object(const char* key) { return find(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      check(seen_.count(it.key()) > 0, "unknown key " + where(it.key().c_str()));
  }

 private:
  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ordered_json range_json(const Range& r) {
  return {{"min", r.min}, {"max", r.max}, {"points", r.points}, {"log", r.log}};
}

template <class T>
ordered_json opt_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void check_range(const Range& r, const std::string& name) {
  check(std::isfinite(r.min) && std::isfinite(r.max), name + " bounds must be finite");
  check(r.points >= 1, name + ".points must be at least 1");
  check(r.max >= r.min, name + ".max must not be below min");
  check(!r.log || r.min > 0.0, name + " on a log scale needs min > 0");
}

bool is_detector(const std::string& s) { return s == kPlusSlot || s == kMinusSlot; }

}  // namespace

std::vector<double> Range::values() const {
  return log ? logspace(min, max, points) : linspace(min, max, points);
}

void RunConfig::validate() const {
  model.validate();
  check_range(spectrum.omega, "spectrum.omega");
  check_range(lines.omega, "lines.omega");
  check(lines.omega.min >= 0.0, "lines.omega must be non-negative");
  check_range(g2.tau, "g2.tau");
  check(is_detector(g2.first) && is_detector(g2.second), "g2 operators must be a1 or a2");

  check(mc.trajectories >= 1, "mc.trajectories must be at least 1");
  check(!mc.reference_trajectories || *mc.reference_trajectories >= 1,
        "mc.reference_trajectories must be at least 1");
  check(std::isfinite(mc.duration) && mc.duration > 0.0, "mc.duration must be positive");
  check(std::isfinite(mc.burn_in) && mc.burn_in >= 0.0 && mc.burn_in < mc.duration,
        "mc.burn_in must lie in [0, duration)");
  check(mc.kappa >= 0.0 && mc.kappa <= 1.0, "mc.kappa must lie in [0, 1]");
  check(is_detector(mc.herald) && is_detector(mc.signal), "mc herald and signal must be a1 or a2");
  check_range(mc.tau, "mc.tau");
  check(mc.tau.min > 0.0, "mc.tau must be positive");
  check(!mc.reference_delta || std::isfinite(*mc.reference_delta), "mc.reference_delta must be finite");
  check(mc.histogram_tau > 0.0 && std::isfinite(mc.histogram_tau), "mc.histogram_tau must be positive");
  check(mc.duration > mc.burn_in + 2.0 * mc.histogram_tau,
        "mc.duration must exceed burn_in + 2 histogram_tau");
  check(mc.histogram_bins >= 1, "mc.histogram_bins must be at least 1");
  check(mc.batch >= 1, "mc.batch must be at least 1");

  check(map.mode == "detuning" || map.mode == "optimal", "map.mode must be detuning or optimal");
  check_range(map.omega, "map.omega");
  check_range(map.delta, "map.delta");
  check_range(map.Gamma, "map.Gamma");
  check(map.omega.min >= 0.0, "map.omega must be non-negative");
  check(map.Gamma.min > 0.0, "map.Gamma must be positive");
  check(optimal.variable == "delta" || optimal.variable == "omega",
        "optimal.variable must be delta or omega");

  check(search.coarse >= 3, "search.coarse must be at least 3");
  check(search.tol > 0.0 && std::isfinite(search.tol), "search.tol must be positive");
  check(std::isfinite(search.lo) && std::isfinite(search.hi), "search bounds must be finite");

  check(polariton.g >= 0.0 && std::isfinite(polariton.g), "polariton.g must be non-negative");
  check(polariton.Gamma_a > 0.0, "polariton.Gamma_a must be positive");
  check(!polariton.Gamma_b || *polariton.Gamma_b > 0.0, "polariton.Gamma_b must be positive");
  check(polariton.truncation_a >= 2 && polariton.truncation_a <= 12 &&
            polariton.truncation_b >= 2 && polariton.truncation_b <= 12,
        "polariton truncations must lie in 2..12");
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  Section top(j, "");
  top.find("_manifest");
  top.get("seed", c.seed);
  top.get("threads", c.threads);
  if (const json* v = top.object("model")) {
    Section s(*v, "model");
    MollowConfig& m = c.model;
    s.get("omega", m.omega);
    s.get("delta", m.delta);
    s.get("gamma", m.gamma);
    s.get("Gamma", m.Gamma);
    s.get("omega_plus", m.omega_plus);
    s.get("omega_minus", m.omega_minus);
    s.get("truncation", m.truncation);
    s.get("lambda", m.lambda);
    s.get("kappa", m.kappa);
    s.get("epsilon", m.epsilon);
    s.finish();
  }
  if (const json* v = top.object("spectrum")) {
    Section s(*v, "spectrum");
    s.get("omega", c.spectrum.omega);
    s.finish();
  }
  if (const json* v = top.object("lines")) {
    Section s(*v, "lines");
    s.get("omega", c.lines.omega);
    s.finish();
  }
  if (const json* v = top.object("g2")) {
    Section s(*v, "g2");
    s.get("first", c.g2.first);
    s.get("second", c.g2.second);
    s.get("tau", c.g2.tau);
    s.finish();
  }
  if (const json* v = top.object("mc")) {
    Section s(*v, "mc");
    auto& m = c.mc;
    s.get("trajectories", m.trajectories);
    s.get("duration", m.duration);
    s.get("burn_in", m.burn_in);
    s.get("kappa", m.kappa);
    s.get("herald", m.herald);
    s.get("signal", m.signal);
    s.get("tau", m.tau);
    s.get("reference_delta", m.reference_delta);
    s.get("reference_trajectories", m.reference_trajectories);
    s.get("histogram_tau", m.histogram_tau);
    s.get("histogram_bins", m.histogram_bins);
    s.get("batch", m.batch);
    s.get("write_trajectories", m.write_trajectories);
    s.finish();
  }
  if (const json* v = top.object("map")) {
    Section s(*v, "map");
    s.get("mode", c.map.mode);
    s.get("omega", c.map.omega);
    s.get("delta", c.map.delta);
    s.get("Gamma", c.map.Gamma);
    s.finish();
  }
  if (const json* v = top.object("optimal")) {
    Section s(*v, "optimal");
    s.get("variable", c.optimal.variable);
    s.finish();
  }
  if (const json* v = top.object("search")) {
    Section s(*v, "search");
    s.get("lo", c.search.lo);
    s.get("hi", c.search.hi);
    s.get("coarse", c.search.coarse);
    s.get("tol", c.search.tol);
    s.finish();
  }
  if (const json* v = top.object("polariton")) {
    Section s(*v, "polariton");
    auto& p = c.polariton;
    s.get("g", p.g);
    s.get("Gamma_a", p.Gamma_a);
    s.get("Gamma_b", p.Gamma_b);
    s.get("truncation_a", p.truncation_a);
    s.get("truncation_b", p.truncation_b);
    s.get("sideband_resonant", p.sideband_resonant);
    s.get("omega_a", p.omega_a);
    s.get("omega_b", p.omega_b);
    s.finish();
  }
  top.finish();
  return c;
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  const MollowConfig& m = c.model;
  j["model"] = {{"omega", m.omega},           {"delta", m.delta},
                {"gamma", m.gamma},           {"Gamma", m.Gamma},
                {"omega_plus", opt_json(m.omega_plus)}, {"omega_minus", opt_json(m.omega_minus)},
                {"truncation", m.truncation}, {"lambda", m.lambda},
                {"kappa", m.kappa},           {"epsilon", m.epsilon}};
  j["spectrum"] = {{"omega", range_json(c.spectrum.omega)}};
  j["lines"] = {{"omega", range_json(c.lines.omega)}};
  j["g2"] = {{"first", c.g2.first}, {"second", c.g2.second}, {"tau", range_json(c.g2.tau)}};
  const auto& mc = c.mc;
  j["mc"] = {{"trajectories", mc.trajectories},
             {"duration", mc.duration},
             {"burn_in", mc.burn_in},
             {"kappa", mc.kappa},
             {"herald", mc.herald},
             {"signal", mc.signal},
             {"tau", range_json(mc.tau)},
             {"reference_delta", opt_json(mc.reference_delta)},
             {"reference_trajectories", opt_json(mc.reference_trajectories)},
             {"histogram_tau", mc.histogram_tau},
             {"histogram_bins", mc.histogram_bins},
             {"batch", mc.batch},
             {"write_trajectories", mc.write_trajectories}};
  j["map"] = {{"mode", c.map.mode},
              {"omega", range_json(c.map.omega)},
              {"delta", range_json(c.map.delta)},
              {"Gamma", range_json(c.map.Gamma)}};
  j["optimal"] = {{"variable", c.optimal.variable}};
  j["search"] = {{"lo", c.search.lo}, {"hi", c.search.hi}, {"coarse", c.search.coarse},
                 {"tol", c.search.tol}};
  const auto& p = c.polariton;
  j["polariton"] = {{"g", p.g},
                    {"Gamma_a", p.Gamma_a},
                    {"Gamma_b", opt_json(p.Gamma_b)},
                    {"truncation_a", p.truncation_a},
                    {"truncation_b", p.truncation_b},
                    {"sideband_resonant", p.sideband_resonant},
                    {"omega_a", p.omega_a},
                    {"omega_b", p.omega_b}};
  return j;
}

namespace {

using Files = std::vector<std::pair<std::string, std::string>>;  // name, content

template <class F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

Files run_spectrum(const RunConfig& c) {
  const LindbladModel m = build_driven_2ls(c.model.delta, c.model.omega, c.model.gamma);
  const SpectrumTable t = emission_spectrum(m, lowering(m.layout_ptr(), "s"), c.spectrum.omega.values());
  ordered_json meta{{"coherent_fraction", t.coherent_fraction}};
  return {{"spectrum.csv", render([&](std::ostream& os) { io::write_spectrum_csv(os, t); })},
          {"spectrum.json", io::dump_json(meta)}};
}

Files run_lines(const RunConfig& c) {
  std::ostringstream os;
  os << "Omega,index,energy\n";
  for (double w : c.lines.omega.values()) {
    const auto e = transition_energies(liouvillian_matrix(build_driven_2ls(c.model.delta, w, c.model.gamma)));
    for (std::size_t k = 0; k < e.size(); ++k)
      os << io::format_number(w) << ',' << k << ',' << io::format_number(e[k]) << '\n';
  }
  return {{"lines.csv", os.str()}};
}

Files run_g2(const RunConfig& c) {
  const LindbladModel m = build_system(c.model);
  const auto& l = m.layout_ptr();
  const CorrelationCurve curve = g2_cross(m, lowering(l, c.g2.first), lowering(l, c.g2.second),
                                          c.g2.tau.values(), Direction::Forward, c.g2.first, c.g2.second);
  return {{"g2.csv", render([&](std::ostream& os) { io::write_correlation_csv(os, curve); })}};
}

struct McTally {
  ClickStats stats;
  DelayHistogram hist;
  std::vector<TrajectoryRecord> kept;
};

McTally simulate(const RunConfig& c, double delta, std::uint64_t master, std::size_t count, bool keep) {
  MollowConfig cfg = c.model;
  cfg.delta = delta;
  cfg.kappa = c.mc.kappa;
  const LindbladModel m = build_system(cfg);
  const TruncationReport h = truncation_health(steady_state(m), {kPlusSlot, kMinusSlot});
  if (!h.healthy) {
    std::ostringstream msg;
    msg << "mc: top Fock level of " << h.slot << " holds " << h.top_population << " at delta "
        << delta;
    warn(msg.str());
  }
  const JumpSimulator sim(m);
  const StateVector vac = StateVector::basis(m.layout_ptr(), {0, 0, 0});
  const std::vector<double> taus = c.mc.tau.values();
  McTally t;
  bool first = true;
  for (std::size_t start = 0; start < count; start += c.mc.batch) {
    const std::size_t n = std::min(c.mc.batch, count - start);
    auto recs = run_ensemble(sim, vac, c.mc.duration, master, start, n, c.threads);
    ClickStats st = click_statistics(recs, c.mc.herald, c.mc.signal, taus, c.mc.burn_in, true);
    DelayHistogram dh = delay_histogram(recs, c.mc.herald, c.mc.signal, c.mc.histogram_tau,
                                        c.mc.histogram_bins, c.mc.burn_in, true);
    if (first) {
      t.stats = std::move(st);
      t.hist = std::move(dh);
      first = false;
    } else {
      t.stats += st;
      t.hist += dh;
    }
    if (keep) std::move(recs.begin(), recs.end(), std::back_inserter(t.kept));
  }
  require(t.hist.heralds > 0 && t.hist.signals > 0, ErrorCode::InsufficientStatistics,
          "no herald or signal clicks in the observation window");
  return t;
}

Files run_mc(const RunConfig& c) {
  const McTally main = simulate(c, c.model.delta, c.seed, c.mc.trajectories, c.mc.write_trajectories);
  Files out;
  out.emplace_back("clicks.csv", render([&](std::ostream& os) { io::write_click_stats_csv(os, main.stats); }));
  out.emplace_back("delay.csv", render([&](std::ostream& os) { io::write_delay_csv(os, main.hist); }));
  if (c.mc.reference_delta) {
    const McTally ref = simulate(c, *c.mc.reference_delta, splitmix64(c.seed),
                                 c.mc.reference_trajectories.value_or(c.mc.trajectories), false);
    out.emplace_back("clicks_reference.csv",
                     render([&](std::ostream& os) { io::write_click_stats_csv(os, ref.stats); }));
    out.emplace_back("ratio.csv",
                     render([&](std::ostream& os) { io::write_ratio_csv(os, main.stats, ref.stats); }));
  }
  if (c.mc.write_trajectories)
    out.emplace_back("trajectories.jsonl",
                     render([&](std::ostream& os) { io::write_trajectories_jsonl(os, main.kept); }));
  return out;
}

Files run_map(const RunConfig& c) {
  const auto rows = c.map.mode == "detuning"
                        ? entanglement_map(c.model, c.map.omega.values(), c.map.delta.values(), c.threads)
                        : optimal_map(c.model, c.map.omega.values(), c.map.Gamma.values(), c.search, c.threads);
  return {{"map.csv", render([&](std::ostream& os) { io::write_sweep_csv(os, rows); })}};
}

Files run_optimal(const RunConfig& c) {
  const bool over_delta = c.optimal.variable == "delta";
  const Optimum o = over_delta ? optimal_detuning(c.model, c.search) : optimal_drive(c.model, c.search);
  MollowConfig at = c.model;
  if (o.defined) (over_delta ? at.delta : at.omega) = o.argmax;
  SweepResultRow r = evaluate_point(at);
  if (!o.defined) {
    (over_delta ? r.delta : r.omega) = std::nan("");
    r.flags.push_back(over_delta ? "delta-undefined" : "omega-undefined");
  }
  return {{"optimal.csv", render([&](std::ostream& os) { io::write_sweep_csv(os, {r}); })}};
}

Files run_polariton(const RunConfig& c) {
  PolaritonSpec spec;
  spec.g = c.polariton.g;
  spec.Gamma_a = c.polariton.Gamma_a;
  spec.Gamma_b = c.polariton.Gamma_b.value_or(c.polariton.Gamma_a / 100.0);
  spec.truncation_a = c.polariton.truncation_a;
  spec.truncation_b = c.polariton.truncation_b;
  spec.omega_a = c.polariton.omega_a;
  spec.omega_b = c.polariton.omega_b;
  const PolaritonStudy s = polariton_study(c.model, spec, c.polariton.sideband_resonant);
  ordered_json j;
  j["basis"] = {"vac", "l", "u", "lu"};
  j["omega_a"] = s.spec.omega_a;
  j["omega_b"] = s.spec.omega_b;
  j["concurrence"] = s.concurrence;
  j["concurrence_post"] = s.concurrence_post;
  j["bell"] = io::bell_json(s.bell);
  j["top_population"] = s.health.top_population;
  j["theta"] = io::matrix_json(s.theta.theta);
  j["theta_norm"] = s.theta.norm;
  j["theta_post"] = io::matrix_json(s.theta_post.theta);
  return {{"polariton.json", io::dump_json(j)}};
}

}  // namespace

std::vector<std::string> execute(const std::string& sub, const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  Files files;
  if (sub == "spectrum") files = run_spectrum(cfg);
  else if (sub == "lines") files = run_lines(cfg);
  else if (sub == "g2") files = run_g2(cfg);
  else if (sub == "mc") files = run_mc(cfg);
  else if (sub == "map") files = run_map(cfg);
  else if (sub == "optimal") files = run_optimal(cfg);
  else if (sub == "polariton") files = run_polariton(cfg);
  else fail(ErrorCode::ConfigError, "unknown subcommand " + sub);

  ordered_json manifest;
  ordered_json outputs = ordered_json::array();
  for (const auto& f : files) outputs.push_back(f.first);
  outputs.push_back("manifest.json");
  manifest["_manifest"] = {{"subcommand", sub}, {"version", MOLLOW_VERSION}, {"outputs", outputs}};
  const ordered_json resolved = to_json(cfg);
  for (auto it = resolved.begin(); it != resolved.end(); ++it) manifest[it.key()] = it.value();
  files.emplace_back("manifest.json", manifest.dump(2) + "\n");

  // Single writer, after every result is in hand.
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + out_dir);
  std::vector<std::string> written;
  for (const auto& [name, content] : files) {
    const auto path = std::filesystem::path(out_dir) / name;
    io::write_file(path, content);
    written.push_back(path.string());
  }
  return written;
}

namespace {

void report(std::ostream& err, std::string_view code, const std::string& message) {
  err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sideband detector entanglement of a driven two-level emitter", "mollow"};
  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  long long trajectories = 0;
  app.add_option("--config", config_path, "JSON config (all keys optional)");
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (0 = all cores)");
  auto* traj_opt = app.add_option("--trajectories", trajectories, "trajectory count for mc");
  app.require_subcommand(1, 1);
  for (const auto& name : kSubcommands) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report(err, to_string(ErrorCode::ConfigError), e.what());
    return kConfig;
  }

  try {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      require(static_cast<bool>(f), ErrorCode::ConfigError, "cannot read config " + config_path);
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
      }
    }
    RunConfig cfg = parse_config(j);
    if (*seed_opt) cfg.seed = seed;
    if (*threads_opt) cfg.threads = threads;
    if (*traj_opt) {
      require(trajectories >= 1, ErrorCode::ConfigError, "--trajectories must be at least 1");
      cfg.mc.trajectories = static_cast<std::size_t>(trajectories);
    }
    const auto files = execute(app.get_subcommands().front()->get_name(), cfg, out_dir);
    for (const auto& f : files) out << f << '\n';
    return kOk;
  } catch (const Error& e) {
    report(err, to_string(e.code()), e.what());
    if (e.code() == ErrorCode::IoError) return kOther;
    return is_numerical(e.code()) ? kNumerical : kConfig;
  } catch (const std::exception& e) {
    report(err, "internal", e.what());
    return kOther;
  }
}

}  // namespace mollow::cli

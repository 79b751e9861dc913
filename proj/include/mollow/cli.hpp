#pragma once

// Command-line front end. A run reads one JSON config (every key optional,
// unknown keys rejected), writes its tables into the output directory and
// finishes with manifest.json, which is itself a valid config.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mollow/scenarios.hpp"

namespace mollow::cli {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kNumerical = 3 };

struct Range {
  double min = 0.0, max = 1.0;
  std::size_t points = 21;
  bool log = false;
  std::vector<double> values() const;
};

struct RunConfig {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  MollowConfig model;

  struct Spectrum {
    Range omega{-8.0, 8.0, 801, false};
  } spectrum;

  struct Lines {
    Range omega{0.0, 8.0, 81, false};
  } lines;

  struct G2 {
    std::string first = kMinusSlot, second = kPlusSlot;
    Range tau{-10.0, 10.0, 401, false};
  } g2;

  struct Mc {
    std::size_t trajectories = 1000;
    double duration = 200.0;
    double burn_in = 30.0;
    /// Cascaded fraction kept out of the detectors; the rest of the source
    /// emission is counted by the O_n ports.
    double kappa = 0.5;
    std::string herald = kMinusSlot, signal = kPlusSlot;
    Range tau{0.1, 6.0, 60, false};
    /// Comparison run at this detuning (ratios r(n, tau)); none when absent.
    std::optional<double> reference_delta = 0.0;
    std::optional<std::size_t> reference_trajectories;
    double histogram_tau = 10.0;
    std::size_t histogram_bins = 100;
    std::size_t batch = 2000;
    bool write_trajectories = false;
  } mc;

  struct Map {
    /// "detuning": omega x delta at model.Gamma; "optimal": omega x Gamma at delta_opt.
    std::string mode = "optimal";
    Range omega{0.5, 10.0, 21, false};
    Range delta{0.0, 20.0, 21, false};
    Range Gamma{0.1, 10.0, 21, true};
  } map;

  struct Optimal {
    /// "delta" or "omega".
    std::string variable = "delta";
  } optimal;

  Search1D search;

  struct Polariton {
    double g = 300.0;
    double Gamma_a = 10.0;
    /// Defaults to Gamma_a / 100.
    std::optional<double> Gamma_b;
    Index truncation_a = 4, truncation_b = 4;
    bool sideband_resonant = true;
    double omega_a = 0.0, omega_b = 0.0;
  } polariton;

  /// Throws config-error.
  void validate() const;
};

/// Strict parse: unknown keys, wrong types and bad values throw config-error.
/// A top-level "_manifest" entry is ignored.
RunConfig parse_config(const nlohmann::json& j);
nlohmann::ordered_json to_json(const RunConfig& cfg);

inline const std::vector<std::string> kSubcommands{"spectrum", "lines", "g2",      "mc",
                                                   "map",      "optimal", "polariton"};

/// Execute one subcommand; returns the output files written (manifest last).
std::vector<std::string> execute(const std::string& subcommand, const RunConfig& cfg,
                                 const std::string& out_dir);

/// Full command line: parse flags, run, report errors as one JSON line on `err`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mollow::cli

#pragma once

// Serialization of results: CSV tables, JSON lines and JSON matrices.
// Numbers are written in shortest round-trip form so reruns are byte-identical.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mollow/correlator.hpp"
#include "mollow/entglmeas.hpp"
#include "mollow/scenarios.hpp"
#include "mollow/trajec.hpp"

namespace mollow::io {

/// Shortest decimal that parses back to `x`; "nan", "inf", "-inf" otherwise.
std::string format_number(double x);

inline const char* kSweepHeader =
    "Omega,Delta,Gamma,negativity,R,g2_cross0,gamma_over_omegaplus,intensity,bell_weight,"
    "bell_fidelity,bell_purity,flags";

void write_sweep_csv(std::ostream& os, const std::vector<SweepResultRow>& rows);
void write_spectrum_csv(std::ostream& os, const SpectrumTable& table);
void write_correlation_csv(std::ostream& os, const CorrelationCurve& curve);
void write_click_stats_csv(std::ostream& os, const ClickStats& stats);
/// tau_gamma,r0,r1,r2plus; undefined ratios are nan.
void write_ratio_csv(std::ostream& os, const ClickStats& num, const ClickStats& den);
/// tau_gamma,g2,g2_error,pairs
void write_delay_csv(std::ostream& os, const DelayHistogram& h);
/// One `{seed, clicks:[{t, channel}]}` object per line.
void write_trajectories_jsonl(std::ostream& os, const std::vector<TrajectoryRecord>& records);

/// {"re": [[...]], "im": [[...]]}, row-major.
nlohmann::json matrix_json(const Eigen::Matrix4cd& m);
nlohmann::json bell_json(const BellReport& b);

/// Replace `path` with `content`; throws io-error.
void write_file(const std::filesystem::path& path, const std::string& content);
/// Pretty JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace mollow::io

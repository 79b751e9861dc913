#include "mollow/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "mollow/error.hpp"

namespace mollow::io {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace {

void row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << format_number(v);
    first = false;
  }
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepResultRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    row(os, {r.omega, r.delta, r.Gamma, r.negativity, r.R, r.g2_cross0, r.gamma_over_omegaplus,
             r.intensity, r.bell_weight, r.bell_fidelity, r.bell_purity});
    os << ',' << r.flag_string() << '\n';
  }
}

void write_spectrum_csv(std::ostream& os, const SpectrumTable& table) {
  os << "omega_over_gamma,spectral_density\n";
  for (const auto& p : table.points) {
    row(os, {p.omega, p.density});
    os << '\n';
  }
}

void write_correlation_csv(std::ostream& os, const CorrelationCurve& curve) {
  os << "tau_gamma,g2\n";
  for (const auto& p : curve.points) {
    row(os, {p.tau, p.value});
    os << '\n';
  }
}

void write_click_stats_csv(std::ostream& os, const ClickStats& st) {
  os << "tau_gamma,p0,p1,p2plus,heralds\n";
  for (std::size_t k = 0; k < st.tau.size(); ++k) {
    const bool any = st.heralds[k] > 0;
    const double nan = std::nan("");
    row(os, {st.tau[k], any ? st.p(0, k) : nan, any ? st.p(1, k) : nan, any ? st.p(2, k) : nan});
    os << ',' << st.heralds[k] << '\n';
  }
}

void write_ratio_csv(std::ostream& os, const ClickStats& num, const ClickStats& den) {
  std::array<std::vector<RatioPoint>, 3> r;
  for (int n = 0; n < 3; ++n) r[n] = heralding_ratio(num, den, n);
  os << "tau_gamma,r0,r1,r2plus\n";
  for (std::size_t k = 0; k < num.tau.size(); ++k) {
    os << format_number(num.tau[k]);
    for (int n = 0; n < 3; ++n)
      os << ',' << format_number(r[n][k].defined ? r[n][k].value : std::nan(""));
    os << '\n';
  }
}

void write_delay_csv(std::ostream& os, const DelayHistogram& h) {
  os << "tau_gamma,g2,g2_error,pairs\n";
  for (std::size_t k = 0; k < h.pairs.size(); ++k) {
    row(os, {h.center(k), h.g2(k), h.g2_error(k)});
    os << ',' << h.pairs[k] << '\n';
  }
}

void write_trajectories_jsonl(std::ostream& os, const std::vector<TrajectoryRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["clicks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.clicks) j["clicks"].push_back({{"t", c.t}, {"channel", c.channel}});
    os << j.dump() << '\n';
  }
}

nlohmann::json matrix_json(const Eigen::Matrix4cd& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json a = nlohmann::json::array(), b = nlohmann::json::array();
    for (int j = 0; j < 4; ++j) {
      a.push_back(m(i, j).real());
      b.push_back(m(i, j).imag());
    }
    re.push_back(a);
    im.push_back(b);
  }
  return {{"re", re}, {"im", im}};
}

nlohmann::json bell_json(const BellReport& b) {
  return {{"bell_weight", b.bell_weight},
          {"vacuum_weight", b.vacuum_weight},
          {"fidelity_to_model", b.fidelity_to_model},
          {"fidelity_squared", b.fidelity_squared},
          {"fidelity_full_space", b.fidelity_full_space},
          {"bell_purity", b.bell_purity},
          {"block_weight", b.block_weight}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::IoError, "cannot open " + path.string());
  f << content;
  f.flush();
  require(static_cast<bool>(f), ErrorCode::IoError, "cannot write " + path.string());
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace mollow::io

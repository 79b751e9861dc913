#include "mollow/trajec.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace mollow {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

namespace {

// Uniform on the open interval (0, 1) from 53 random bits.
double open_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

JumpSimulator::JumpSimulator(const LindbladModel& model, TrajectoryOptions options)
    : model_(model), opt_(options) {
  require(!model_.channels().empty(), ErrorCode::InvalidArgument, "model has no jump channels");
  require(opt_.check_step > 0.0 && opt_.norm_tol > 0.0, ErrorCode::InvalidArgument,
          "invalid trajectory options");
  heff_ = model_.hamiltonian().matrix();
  decay_ = Matrix::Zero(heff_.rows(), heff_.cols());
  for (std::size_t k = 0; k < model_.channels().size(); ++k) {
    const Channel& c = model_.channels()[k];
    if (c.rate <= 0.0) continue;
    const Matrix& m = c.collapse.matrix();
    decay_ += c.rate * (m.adjoint() * m);
    active_.push_back(k);
    jumps_.push_back(Matrix(std::sqrt(c.rate) * m).sparseView(0.0, 0.0));
  }
  require(!active_.empty(), ErrorCode::InvalidArgument, "every jump channel has zero rate");
  heff_ -= (0.5 * kI) * decay_;
  step_ = (heff_ * Complex(0.0, -opt_.check_step)).exp();

  Eigen::ComplexEigenSolver<Matrix> es(heff_);
  if (es.info() != Eigen::Success) return;
  Eigen::PartialPivLU<Matrix> lu(es.eigenvectors());
  Matrix inv = lu.inverse();
  const double cond = es.eigenvectors().cwiseAbs().rowwise().sum().maxCoeff() *
                      inv.cwiseAbs().rowwise().sum().maxCoeff();
  const Matrix rebuilt = es.eigenvectors() * es.eigenvalues().asDiagonal() * inv;
  if (!(cond < 1e8) || max_abs(rebuilt - heff_) > 1e-11 * std::max(1.0, max_abs(heff_))) return;
  vecs_ = es.eigenvectors();
  inv_ = std::move(inv);
  vals_ = es.eigenvalues();
  gram_ = vecs_.adjoint() * vecs_;
  step_factor_ = (vals_ * Complex(0.0, -opt_.check_step)).array().exp().matrix();
  eigen_ = true;
}

Vector JumpSimulator::propagate(const Vector& psi, double t) const {
  return (heff_ * Complex(0.0, -t)).exp() * psi;
}

TrajectoryRecord JumpSimulator::run(const StateVector& psi0, double duration, std::uint64_t seed,
                                    Vector* final_state) const {
  require(std::isfinite(duration) && duration > 0.0, ErrorCode::InvalidArgument,
          "trajectory duration must be positive");
  require(psi0.layout() == model_.layout(), ErrorCode::LayoutMismatch,
          "initial state lives on another layout");
  std::mt19937_64 rng(seed);
  TrajectoryRecord rec{seed, duration, {}};

  // State representation: eigen coefficients or the plain vector.
  Vector psi = psi0.normalized().amplitudes();
  Vector c = eigen_ ? Vector(inv_ * psi) : psi;
  auto advance = [&](const Vector& x, double s) -> Vector {
    if (s == opt_.check_step) return eigen_ ? Vector(x.cwiseProduct(step_factor_)) : Vector(step_ * x);
    if (!eigen_) return propagate(x, s);
    return x.cwiseProduct(Vector((vals_ * Complex(0.0, -s)).array().exp().matrix()));
  };
  auto norm2 = [&](const Vector& x) -> double {
    return eigen_ ? x.dot(gram_ * x).real() : x.squaredNorm();
  };
  // Squared norm and its derivative -sum_k |J_k psi|^2, sharing one product.
  Vector gx;
  auto norm_slope = [&](const Vector& x, double& d) -> double {
    if (!eigen_) {
      gx.noalias() = decay_ * x;
      d = -x.dot(gx).real();
      return x.squaredNorm();
    }
    gx.noalias() = gram_ * x;
    d = 2.0 * gx.dot(x.cwiseProduct(vals_)).imag();
    return x.dot(gx).real();
  };

  double t = 0.0;
  double n_now = 1.0;
  double u = open_uniform(rng);
  while (t < duration) {
    const double h = std::min(opt_.check_step, duration - t);
    Vector next = advance(c, h);
    const double n_end = norm2(next);
    // The squared norm decreases monotonically between jumps, so a crossing
    // cannot hide inside a step that ends above the threshold.
    if (n_end > u) {
      c = std::move(next);
      n_now = n_end;
      t += h;
      continue;
    }
    // Root of norm2(advance(c, s)) = u on (0, h]; start from log-linear
    // interpolation, then safeguarded Newton.
    double lo = 0.0, hi = h;
    double s = h;
    if (n_end > 0.0 && n_now > n_end) s = h * std::log(n_now / u) / std::log(n_now / n_end);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    Vector cs = advance(c, s);
    double d = 0.0;
    double f = norm_slope(cs, d) - u;
    for (int it = 0; it < 200; ++it) {
      (f > 0.0 ? lo : hi) = s;
      if (std::abs(f) <= opt_.norm_tol * u || hi - lo < 1e-15 * std::max(1.0, t)) break;
      double trial = 0.5 * (lo + hi);
      if (d < 0.0) {
        const double newton = s - f / d;
        if (newton > lo && newton < hi) trial = newton;
      }
      s = trial;
      cs = advance(c, s);
      f = norm_slope(cs, d) - u;
    }
    if (t + s >= duration) {
      c = advance(c, duration - t);
      break;
    }
    t += s;
    psi = eigen_ ? Vector(vecs_ * cs) : cs;

    double total = 0.0;
    std::vector<double> w(jumps_.size());
    for (std::size_t k = 0; k < jumps_.size(); ++k) total += (w[k] = (jumps_[k] * psi).squaredNorm());
    require(total > 0.0, ErrorCode::VanishingNorm, "no channel can fire at a jump");
    const double pick = open_uniform(rng) * total;
    std::size_t k = 0;
    for (double acc = w[0]; acc < pick && k + 1 < w.size(); acc += w[++k]) {
    }
    psi = jumps_[k] * psi;
    psi /= psi.norm();
    rec.clicks.push_back({t, model_.channels()[active_[k]].label});
    c = eigen_ ? Vector(inv_ * psi) : psi;
    n_now = 1.0;
    u = open_uniform(rng);
  }
  if (final_state) {
    *final_state = eigen_ ? Vector(vecs_ * c) : c;
    final_state->normalize();
  }
  return rec;
}

TrajectoryRecord run_trajectory(const LindbladModel& model, const StateVector& psi0,
                                double duration, std::uint64_t seed) {
  return JumpSimulator(model).run(psi0, duration, seed);
}

std::vector<TrajectoryRecord> run_ensemble(const JumpSimulator& sim, const StateVector& psi0,
                                           double duration, std::uint64_t master,
                                           std::size_t first, std::size_t count,
                                           unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::vector<TrajectoryRecord> out(count);
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < count; i += threads)
      out[i] = sim.run(psi0, duration, trajectory_seed(master, first + i));
  };
  if (threads <= 1 || !sim.uses_eigenbasis()) {
    for (std::size_t i = 0; i < count; ++i)
      out[i] = sim.run(psi0, duration, trajectory_seed(master, first + i));
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        work(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

double ClickStats::p(int n, std::size_t k) const {
  if (heralds[k] == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(counts[static_cast<std::size_t>(n)][k]) /
         static_cast<double>(heralds[k]);
}

ClickStats& ClickStats::operator+=(const ClickStats& other) {
  if (tau.empty() && counts.empty()) return *this = other;
  require(herald == other.herald && signal == other.signal && tau == other.tau,
          ErrorCode::DimensionMismatch, "cannot merge statistics over different grids");
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t k = 0; k < tau.size(); ++k) counts[n][k] += other.counts[n][k];
  for (std::size_t k = 0; k < tau.size(); ++k) heralds[k] += other.heralds[k];
  return *this;
}

namespace {

std::vector<double> times_of(const TrajectoryRecord& r, const std::string& label) {
  std::vector<double> t;
  for (const auto& c : r.clicks)
    if (c.channel == label) t.push_back(c.t);
  return t;
}

}  // namespace

ClickStats click_statistics(const std::vector<TrajectoryRecord>& records, const std::string& herald,
                            const std::string& signal, const std::vector<double>& tau_grid,
                            double burn_in, bool allow_empty) {
  require(!records.empty(), ErrorCode::InvalidArgument, "no trajectory records");
  require(!tau_grid.empty(), ErrorCode::InvalidArgument, "empty window grid");
  for (double t : tau_grid)
    require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidArgument, "window lengths must be >= 0");
  ClickStats st;
  st.herald = herald;
  st.signal = signal;
  st.tau = tau_grid;
  st.counts.assign(3, std::vector<std::uint64_t>(tau_grid.size(), 0));
  st.heralds.assign(tau_grid.size(), 0);
  for (const auto& r : records) {
    const auto sig = times_of(r, signal);
    for (const auto& c : r.clicks) {
      if (c.channel != herald || c.t < burn_in) continue;
      const auto first = std::upper_bound(sig.begin(), sig.end(), c.t);
      for (std::size_t k = 0; k < tau_grid.size(); ++k) {
        const double end = c.t + tau_grid[k];
        if (end > r.duration) continue;
        const auto n = std::upper_bound(first, sig.end(), end) - first;
        ++st.heralds[k];
        ++st.counts[static_cast<std::size_t>(std::min<long>(n, 2))][k];
      }
    }
  }
  require(allow_empty || *std::max_element(st.heralds.begin(), st.heralds.end()) > 0,
          ErrorCode::InsufficientStatistics, "no herald clicks after burn-in");
  return st;
}

std::vector<RatioPoint> heralding_ratio(const ClickStats& num, const ClickStats& den, int n) {
  require(num.tau == den.tau, ErrorCode::DimensionMismatch, "window grids differ");
  require(n >= 0 && n <= 2, ErrorCode::InvalidArgument, "photon number must be 0, 1 or 2plus");
  std::vector<RatioPoint> out;
  for (std::size_t k = 0; k < num.tau.size(); ++k) {
    const double a = num.p(n, k), b = den.p(n, k);
    RatioPoint p{num.tau[k], a / b, true};
    if (!(b > 0.0) || !std::isfinite(a)) {
      p.value = std::numeric_limits<double>::quiet_NaN();
      p.defined = false;
    }
    out.push_back(p);
  }
  return out;
}

DelayHistogram& DelayHistogram::operator+=(const DelayHistogram& other) {
  if (edges.empty()) return *this = other;
  require(herald == other.herald && signal == other.signal && edges == other.edges,
          ErrorCode::DimensionMismatch, "cannot merge histograms over different bins");
  for (std::size_t k = 0; k < pairs.size(); ++k) pairs[k] += other.pairs[k];
  heralds += other.heralds;
  signals += other.signals;
  observed_time += other.observed_time;
  return *this;
}

double DelayHistogram::g2(std::size_t k) const {
  const double rate = static_cast<double>(signals) / observed_time;
  const double expected = static_cast<double>(heralds) * rate * (edges[k + 1] - edges[k]);
  return static_cast<double>(pairs[k]) / expected;
}

double DelayHistogram::g2_error(std::size_t k) const {
  const double rate = static_cast<double>(signals) / observed_time;
  const double expected = static_cast<double>(heralds) * rate * (edges[k + 1] - edges[k]);
  return std::sqrt(std::max<double>(static_cast<double>(pairs[k]), 1.0)) / expected;
}

DelayHistogram delay_histogram(const std::vector<TrajectoryRecord>& records,
                               const std::string& herald, const std::string& signal,
                               double tau_max, std::size_t bins, double burn_in, bool allow_empty) {
  require(!records.empty(), ErrorCode::InvalidArgument, "no trajectory records");
  require(tau_max > 0.0 && bins > 0, ErrorCode::InvalidArgument, "invalid histogram range");
  DelayHistogram h;
  h.herald = herald;
  h.signal = signal;
  h.tau_max = tau_max;
  h.edges = linspace(-tau_max, tau_max, bins + 1);
  h.pairs.assign(bins, 0);
  const double width = 2.0 * tau_max / static_cast<double>(bins);
  for (const auto& r : records) {
    require(r.duration > burn_in + 2.0 * tau_max, ErrorCode::InvalidArgument,
            "trajectory too short for the delay window");
    const auto sig = times_of(r, signal);
    h.observed_time += r.duration - burn_in;
    for (double ts : sig)
      if (ts >= burn_in) ++h.signals;
    for (const auto& c : r.clicks) {
      if (c.channel != herald || c.t < burn_in + tau_max || c.t > r.duration - tau_max) continue;
      ++h.heralds;
      auto it = std::lower_bound(sig.begin(), sig.end(), c.t - tau_max);
      for (; it != sig.end() && *it < c.t + tau_max; ++it) {
        if (herald == signal && *it == c.t) continue;
        const auto k = static_cast<std::size_t>((*it - c.t + tau_max) / width);
        if (k < bins) ++h.pairs[k];
      }
    }
  }
  require(allow_empty || (h.heralds > 0 && h.signals > 0), ErrorCode::InsufficientStatistics,
          "no herald or signal clicks in the observation window");
  return h;
}

}  // namespace mollow

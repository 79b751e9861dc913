#pragma once

// Monte Carlo wavefunction (quantum jump) unraveling with per-channel click
// records, and conditional counting statistics over those records.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mollow/correlator.hpp"

namespace mollow {

struct Click {
  double t = 0.0;
  std::string channel;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  double duration = 0.0;
  std::vector<Click> clicks;
};

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);
/// Seed of trajectory `index` under `master`; independent of run order.
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);

struct TrajectoryOptions {
  /// Step between norm checks, in 1/gamma. The norm only decays between
  /// jumps, so the step affects speed, not accuracy.
  double check_step = 2.0;
  /// Relative tolerance on the squared norm at a jump.
  double norm_tol = 1e-12;
};

/// Jump simulator for one model. The non-Hermitian evolution
/// exp(-i H_eff t) is applied in the eigenbasis of H_eff when it is well
/// conditioned, otherwise by a cached matrix exponential per step length.
/// Thread-safe after construction when the eigenbasis path is active.
class JumpSimulator {
 public:
  explicit JumpSimulator(const LindbladModel& model, TrajectoryOptions options = {});

  /// When `final_state` is given it receives the normalized state at `duration`.
  TrajectoryRecord run(const StateVector& psi0, double duration, std::uint64_t seed,
                       Vector* final_state = nullptr) const;

  const LindbladModel& model() const noexcept { return model_; }
  bool uses_eigenbasis() const noexcept { return eigen_; }

 private:
  Vector propagate(const Vector& psi, double t) const;

  LindbladModel model_;
  TrajectoryOptions opt_;
  Matrix heff_;
  Matrix decay_;  // sum rate c^dag c
  Matrix step_;   // exp(-i H_eff check_step)
  std::vector<std::size_t> active_;  // channels with rate > 0
  std::vector<SparseMatrix> jumps_;  // sqrt(rate) * c for active channels
  bool eigen_ = false;
  Matrix vecs_, inv_, gram_;
  Vector vals_, step_factor_;
};

TrajectoryRecord run_trajectory(const LindbladModel& model, const StateVector& psi0,
                                double duration, std::uint64_t seed);

/// Trajectories 0..count-1 under `master`, distributed over `threads`
/// workers (0 = hardware concurrency). Output order is by index.
std::vector<TrajectoryRecord> run_ensemble(const JumpSimulator& sim, const StateVector& psi0,
                                           double duration, std::uint64_t master,
                                           std::size_t first, std::size_t count,
                                           unsigned threads = 0);

struct ClickStats {
  std::string herald, signal;
  std::vector<double> tau;
  /// counts[n][k]: heralds whose window (t, t + tau_k] holds n signal clicks,
  /// with n = 0, 1 and 2 meaning two or more.
  std::vector<std::vector<std::uint64_t>> counts;
  /// heralds[k]: heralds with a complete window at tau_k.
  std::vector<std::uint64_t> heralds;

  double p(int n, std::size_t k) const;
  /// Merge statistics gathered with the same labels and grid.
  ClickStats& operator+=(const ClickStats& other);
};

/// Counting statistics after a transient `burn_in`. A herald at t contributes
/// to bin k only when t + tau_k does not exceed the record duration.
/// `allow_empty` skips the insufficient-statistics check (batch tallies).
ClickStats click_statistics(const std::vector<TrajectoryRecord>& records, const std::string& herald,
                            const std::string& signal, const std::vector<double>& tau_grid,
                            double burn_in = 10.0, bool allow_empty = false);

struct RatioPoint {
  double tau = 0.0;
  double value = 0.0;
  bool defined = true;
};

/// p(n, tau) of `num` over `den`, n = 0, 1 or 2 for "two or more". Bins
/// where the denominator vanishes are kept and flagged undefined.
std::vector<RatioPoint> heralding_ratio(const ClickStats& num, const ClickStats& den, int n);

/// Delay histogram of signal clicks around herald clicks, normalized to the
/// uncorrelated expectation: an estimate of g2(tau) with tau = t_signal - t_herald.
struct DelayHistogram {
  std::string herald, signal;
  double tau_max = 0.0;
  std::vector<double> edges;  // bin edges on [-tau_max, tau_max]
  std::vector<std::uint64_t> pairs;
  std::uint64_t heralds = 0;
  std::uint64_t signals = 0;
  double observed_time = 0.0;

  DelayHistogram& operator+=(const DelayHistogram& other);
  double center(std::size_t k) const { return 0.5 * (edges[k] + edges[k + 1]); }
  double g2(std::size_t k) const;
  /// Poisson standard error of g2(k).
  double g2_error(std::size_t k) const;
};

/// Heralds are taken from [burn_in + tau_max, duration - tau_max] so that
/// every bin is fully observed; the signal rate is measured over
/// [burn_in, duration].
DelayHistogram delay_histogram(const std::vector<TrajectoryRecord>& records,
                               const std::string& herald, const std::string& signal,
                               double tau_max, std::size_t bins, double burn_in = 10.0,
                               bool allow_empty = false);

}  // namespace mollow

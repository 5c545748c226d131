#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wwlab/cellfree.hpp"
#include "wwlab/rng.hpp"

namespace wwlab {

// Per-layer step sizes for the unfolded projected gradient ascent, plus the
// smoothing temperature the objective was trained with.
struct UnfoldedSchedule {
  std::vector<double> layer_steps;
  double smoothing_temperature = 0.05;
  std::uint64_t training_seed = 0;
  double training_objective = 0.0;

  int layers() const { return static_cast<int>(layer_steps.size()); }
  void validate() const;

  static UnfoldedSchedule constant(double step, int layers, double tau_soft = 0.05);
};

// One entry per recorded iterate, starting with the initial point, so
// objective.front() is the value before the first update and
// objective.back() the final one. power holds total transmit power at the
// same iterates.
struct OptimizerTrace {
  std::vector<double> objective;
  std::vector<double> power;
};

// Matched filter baseline for unicast scenarios. Columns are proportional to
// the conjugated channel rows with equal per-user power summing to
// num_stations * P, then one global factor puts the most loaded station
// exactly at its budget. A single shared factor (rather than per-station
// rescaling) keeps every column parallel to its matched filter.
PrecoderSet mrt(const ChannelRealization& channel);

// Alternating MMSE-receiver / weight / precoder updates for the sum spectral
// efficiency under a sum power budget num_stations * P, starting from mrt().
// The precoder step solves (A + mu I) v_k = weight_k * conj(u_k) * b_k with
// mu >= 0 found by bisection so total power meets the budget. Stops after
// max_iters or when the relative objective change drops below tol. The trace
// is non-decreasing within 1e-9 per step.
std::pair<PrecoderSet, OptimizerTrace> wmmse_sum_se(const ChannelRealization& channel,
                                                    int max_iters, double tol);

// Soft minimum of per-user spectral efficiencies:
//   f = -tau_soft * ln sum_k exp(-SE_k / tau_soft)
// Satisfies min SE - tau_soft * ln K <= f <= min SE.
double smoothed_min_rate(const ChannelRealization& channel, const PrecoderSet& w,
                         double tau_soft);

// Gradient of smoothed_min_rate in the precoder entries, scaled so that the
// real and imaginary parts of each entry equal the partial derivatives with
// respect to the real and imaginary coordinates (twice the Wirtinger
// derivative in the conjugate entry). Ascent direction: w + step * gradient
// increases the objective to first order.
ComplexMatrix smoothed_min_rate_gradient(const ChannelRealization& channel,
                                         const PrecoderSet& w, double tau_soft);

// Starting point for projected gradient ascent: per-group averaged matched
// filters, power-normalized the same way as mrt(). Never the zero matrix.
PrecoderSet pgd_init(const ChannelRealization& channel);

// Runs one projected gradient ascent pass:
//   w <- project_power(w + mu_l * smoothed_min_rate_gradient(w))
// for each layer step mu_l. Every iterate is feasible. The trace records the
// smoothed objective: initial point first, then one entry per layer.
std::pair<PrecoderSet, OptimizerTrace> pgd_run(const ChannelRealization& channel,
                                               const UnfoldedSchedule& schedule,
                                               const PrecoderSet& w0);

// 13 log-spaced constant steps 10^-3 .. 10^0 (quarter-decade spacing).
std::vector<double> default_step_grid();

struct TrainConfig {
  double tau_soft = 0.05;
  std::vector<double> step_grid = default_step_grid();
  int nm_max_evals = 120;
  double nm_initial_spread = 0.25;
  int threads = 1;
};

// Every candidate evaluated during training, in evaluation order, with its
// training objective. The returned schedule is the best row (earliest wins
// ties), so its objective dominates the whole log by construction.
struct TrainResult {
  UnfoldedSchedule schedule;
  std::vector<std::pair<std::vector<double>, double>> candidate_log;
};

// Trains per-layer steps on a seeded ensemble of train_channels draws:
// evaluates every constant schedule from config.step_grid, then refines with
// Nelder-Mead over the per-layer log-steps starting at the best constant.
// All candidates see the same channels (common random numbers), so the
// search is deterministic given rng. Training channel i is drawn from
// rng.substream(i); that layout is part of the contract so objectives can be
// reproduced externally.
TrainResult train_unfolded(const Scenario& scenario, int layers, int train_channels,
                           RngStream rng, const TrainConfig& config = {});

struct ScheduleComparisonRow {
  std::string scheme;
  double tau_csi = 0.0;
  int layers = 0;
  double mean_min_se = 0.0;
  double std_min_se = 0.0;
  double mean_total_se = 0.0;
  int num_channels = 0;
};

// Held-out evaluation: for each test channel and each CSI error level, the
// precoder is computed from the corrupted channel estimate but the rates are
// measured on the true channel. Reports mean and population standard
// deviation of the true per-user minimum SE and of total SE. Rows are
// ordered by (schedule, tau_csi) as given. Stream layout is part of the
// contract: channel i is drawn from rng.substream(i) and its corruption
// noise for error level j from rng.substream(i, 4096 + j), so results are
// paired across schedules and error levels.
std::vector<ScheduleComparisonRow> compare_schedules(
    const Scenario& scenario,
    const std::vector<std::pair<std::string, UnfoldedSchedule>>& schedules,
    int test_channels, const std::vector<double>& tau_csi_list, RngStream rng,
    int threads = 1);

}  // namespace wwlab

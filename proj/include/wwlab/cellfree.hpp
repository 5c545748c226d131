#pragma once

#include <vector>

#include "wwlab/linalg.hpp"

namespace wwlab {

/// Downlink deployment: num_stations multi-antenna transmitters jointly serve
/// num_users single-antenna terminals split into multicast groups (unicast is
/// the special case of one group per user). Channels are normalized Rayleigh;
/// per_link_gain is a hook for large-scale fading and defaults to 1.
struct Scenario {
  int num_stations = 1;
  int antennas_per_station = 1;
  int num_users = 1;
  std::vector<int> group_assignment;  // per user, in [0, num_groups)
  double noise_power = 1.0;           // linear watts
  double power_budget_per_station = 1.0;
  double bandwidth_hz = 20e6;
  double per_link_gain = 1.0;

  [[nodiscard]] int total_antennas() const { return num_stations * antennas_per_station; }
  [[nodiscard]] int num_groups() const;
  [[nodiscard]] std::vector<std::vector<int>> users_by_group() const;
  void validate() const;

  /// One singleton group per user.
  static Scenario unicast(int stations, int antennas, int users, double noise_power,
                          double power_budget, double bandwidth_hz = 20e6);
  /// Users 0..K-1 split into `groups` contiguous blocks of equal size.
  static Scenario multicast(int stations, int antennas, int users, int groups,
                            double noise_power, double power_budget,
                            double bandwidth_hz = 20e6);
};

/// One channel draw: row k holds user k's coefficients across all service
/// antennas (stations stacked in order, antennas_per_station rows each).
struct ChannelRealization {
  Scenario scenario;
  ComplexMatrix h;  // num_users x total_antennas
};

/// One complex precoding vector per group, stacked as columns.
struct PrecoderSet {
  ComplexMatrix w;  // total_antennas x num_groups
};

struct RateReport {
  Eigen::VectorXd sinr;          // per user, linear
  Eigen::VectorXd se;            // per user, bits/s/Hz
  double total_se = 0.0;         // sum over users
  Eigen::VectorXd group_min_se;  // worst user per group
};

ChannelRealization draw_channel(const Scenario& scenario, RngStream rng);

/// Gauss-Markov CSI corruption: hhat = sqrt(1 - tau^2) h + tau e with fresh
/// unit-variance complex Gaussian error, so per-entry variance is preserved.
/// tau = 0 returns the input unchanged; tau = 1 is fully uninformative.
ChannelRealization corrupt_csi(const ChannelRealization& channel, double tau, RngStream rng);

/// Per-user SINR and spectral efficiency for precoder set `w` on channel
/// `channel`, using gain(k, g) = h.row(k) * w.col(g).
RateReport sinr_and_se(const ChannelRealization& channel, const PrecoderSet& w);

/// Exact Euclidean projection onto the per-station power ball: any station
/// whose total power exceeds the budget has its antenna rows scaled down to
/// meet it with equality; compliant stations are untouched.
PrecoderSet project_power(const PrecoderSet& w, const Scenario& scenario);

double station_power(const PrecoderSet& w, const Scenario& scenario, int station);
bool power_feasible(const PrecoderSet& w, const Scenario& scenario, double tol = 1e-9);

}  // namespace wwlab

#include "wwlab/cellfree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wwlab {

int Scenario::num_groups() const {
  int g = 0;
  for (int v : group_assignment) g = std::max(g, v + 1);
  return g;
}

std::vector<std::vector<int>> Scenario::users_by_group() const {
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(num_groups()));
  for (int k = 0; k < static_cast<int>(group_assignment.size()); ++k) {
    groups[static_cast<std::size_t>(group_assignment[static_cast<std::size_t>(k)])].push_back(k);
  }
  return groups;
}

void Scenario::validate() const {
  if (num_stations < 1 || antennas_per_station < 1 || num_users < 1) {
    throw std::invalid_argument("Scenario: counts must be at least 1");
  }
  if (static_cast<int>(group_assignment.size()) != num_users) {
    throw std::invalid_argument("Scenario: group_assignment must have one entry per user");
  }
  const int g = num_groups();
  std::vector<int> members(static_cast<std::size_t>(g), 0);
  for (int v : group_assignment) {
    if (v < 0) throw std::invalid_argument("Scenario: negative group index");
    ++members[static_cast<std::size_t>(v)];
  }
  for (int m : members) {
    if (m == 0) throw std::invalid_argument("Scenario: every group needs at least one user");
  }
  if (!(noise_power > 0.0)) throw std::invalid_argument("Scenario: noise_power must be positive");
  if (!(power_budget_per_station > 0.0)) {
    throw std::invalid_argument("Scenario: power budget must be positive");
  }
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("Scenario: bandwidth must be positive");
  if (!(per_link_gain > 0.0)) throw std::invalid_argument("Scenario: per_link_gain must be positive");
}

Scenario Scenario::unicast(int stations, int antennas, int users, double noise_power,
                           double power_budget, double bandwidth_hz) {
  Scenario s;
  s.num_stations = stations;
  s.antennas_per_station = antennas;
  s.num_users = users;
  s.group_assignment.resize(static_cast<std::size_t>(users));
  for (int k = 0; k < users; ++k) s.group_assignment[static_cast<std::size_t>(k)] = k;
  s.noise_power = noise_power;
  s.power_budget_per_station = power_budget;
  s.bandwidth_hz = bandwidth_hz;
  s.validate();
  return s;
}

Scenario Scenario::multicast(int stations, int antennas, int users, int groups,
                             double noise_power, double power_budget, double bandwidth_hz) {
  if (groups < 1 || users % groups != 0) {
    throw std::invalid_argument("Scenario::multicast: users must split evenly into groups");
  }
  Scenario s;
  s.num_stations = stations;
  s.antennas_per_station = antennas;
  s.num_users = users;
  s.group_assignment.resize(static_cast<std::size_t>(users));
  const int per_group = users / groups;
  for (int k = 0; k < users; ++k) s.group_assignment[static_cast<std::size_t>(k)] = k / per_group;
  s.noise_power = noise_power;
  s.power_budget_per_station = power_budget;
  s.bandwidth_hz = bandwidth_hz;
  s.validate();
  return s;
}

ChannelRealization draw_channel(const Scenario& scenario, RngStream rng) {
  scenario.validate();
  ComplexMatrix h = sample_complex_gaussian(scenario.num_users, scenario.total_antennas(), rng);
  if (scenario.per_link_gain != 1.0) h *= std::sqrt(scenario.per_link_gain);
  return ChannelRealization{scenario, std::move(h)};
}

ChannelRealization corrupt_csi(const ChannelRealization& channel, double tau, RngStream rng) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("corrupt_csi: tau must lie in [0, 1]");
  }
  if (tau == 0.0) return channel;
  const ComplexMatrix error = sample_complex_gaussian(channel.h.rows(), channel.h.cols(), rng);
  ChannelRealization out = channel;
  out.h = std::sqrt(1.0 - tau * tau) * channel.h + tau * error;
  return out;
}

RateReport sinr_and_se(const ChannelRealization& channel, const PrecoderSet& w) {
  const Scenario& sc = channel.scenario;
  sc.validate();
  const int num_groups = sc.num_groups();
  if (channel.h.rows() != sc.num_users || channel.h.cols() != sc.total_antennas()) {
    throw std::invalid_argument("sinr_and_se: channel shape does not match scenario");
  }
  if (w.w.rows() != sc.total_antennas() || w.w.cols() != num_groups) {
    throw std::invalid_argument("sinr_and_se: precoder shape does not match scenario");
  }
  require_finite(channel.h, "sinr_and_se: channel");
  require_finite(w.w, "sinr_and_se: precoder");

  const ComplexMatrix gains = channel.h * w.w;  // num_users x num_groups
  RateReport report;
  report.sinr.resize(sc.num_users);
  report.se.resize(sc.num_users);
  report.group_min_se = Eigen::VectorXd::Constant(num_groups, std::numeric_limits<double>::infinity());
  for (int k = 0; k < sc.num_users; ++k) {
    const int gk = sc.group_assignment[static_cast<std::size_t>(k)];
    double interference = 0.0;
    for (int g = 0; g < num_groups; ++g) {
      if (g != gk) interference += std::norm(gains(k, g));
    }
    const double signal = std::norm(gains(k, gk));
    const double sinr = signal / (interference + sc.noise_power);
    report.sinr(k) = sinr;
    report.se(k) = std::log2(1.0 + sinr);
    report.group_min_se(gk) = std::min(report.group_min_se(gk), report.se(k));
  }
  report.total_se = report.se.sum();
  return report;
}

double station_power(const PrecoderSet& w, const Scenario& scenario, int station) {
  const int n = scenario.antennas_per_station;
  return w.w.middleRows(static_cast<Eigen::Index>(station) * n, n).squaredNorm();
}

PrecoderSet project_power(const PrecoderSet& w, const Scenario& scenario) {
  scenario.validate();
  if (w.w.rows() != scenario.total_antennas()) {
    throw std::invalid_argument("project_power: precoder row count does not match scenario");
  }
  PrecoderSet out = w;
  const double budget = scenario.power_budget_per_station;
  for (int b = 0; b < scenario.num_stations; ++b) {
    const double used = station_power(out, scenario, b);
    if (used > budget) {
      out.w.middleRows(static_cast<Eigen::Index>(b) * scenario.antennas_per_station,
                       scenario.antennas_per_station) *= std::sqrt(budget / used);
    }
  }
  return out;
}

bool power_feasible(const PrecoderSet& w, const Scenario& scenario, double tol) {
  for (int b = 0; b < scenario.num_stations; ++b) {
    if (station_power(w, scenario, b) > scenario.power_budget_per_station + tol) return false;
  }
  return true;
}

}  // namespace wwlab

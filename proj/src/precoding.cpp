#include "wwlab/precoding.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>

#include "wwlab/parallel.hpp"

namespace wwlab {
namespace {

constexpr double kLn2 = 0.6931471805599453;

void require_unicast(const Scenario& scenario, const char* who) {
  if (scenario.num_groups() != scenario.num_users) {
    throw std::invalid_argument(std::string(who) + ": unicast grouping required");
  }
}

// Equal column powers summing to num_stations * P, then one global factor so
// the most loaded station sits exactly at its budget. Column powers stay
// proportional, so each column keeps its direction.
PrecoderSet scale_to_budget(ComplexMatrix w, const Scenario& scenario) {
  const int groups = scenario.num_groups();
  const double budget = static_cast<double>(scenario.num_stations) *
                        scenario.power_budget_per_station;
  for (int g = 0; g < groups; ++g) {
    const double n = w.col(g).norm();
    if (n == 0.0) throw std::domain_error("precoding: zero precoder column");
    w.col(g) *= std::sqrt(budget / groups) / n;
  }
  PrecoderSet p{std::move(w)};
  double worst = 0.0;
  for (int b = 0; b < scenario.num_stations; ++b) {
    worst = std::max(worst, station_power(p, scenario, b));
  }
  p.w *= std::sqrt(scenario.power_budget_per_station / worst);
  return p;
}

}  // namespace

void UnfoldedSchedule::validate() const {
  if (layer_steps.empty()) throw std::invalid_argument("UnfoldedSchedule: no layers");
  for (double s : layer_steps) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("UnfoldedSchedule: steps must be positive");
    }
  }
  if (!(smoothing_temperature > 0.0)) {
    throw std::invalid_argument("UnfoldedSchedule: smoothing temperature must be positive");
  }
}

UnfoldedSchedule UnfoldedSchedule::constant(double step, int layers, double tau_soft) {
  if (layers < 1) throw std::invalid_argument("UnfoldedSchedule: layers must be at least 1");
  UnfoldedSchedule s;
  s.layer_steps.assign(static_cast<std::size_t>(layers), step);
  s.smoothing_temperature = tau_soft;
  s.validate();
  return s;
}

PrecoderSet mrt(const ChannelRealization& channel) {
  const Scenario& sc = channel.scenario;
  sc.validate();
  require_unicast(sc, "mrt");
  ComplexMatrix w = channel.h.adjoint();  // column k = conj(h_k)
  return scale_to_budget(std::move(w), sc);
}

namespace {

// Total power of the regularized precoder solve, expressed through the
// eigendecomposition of the quadratic term: p(mu) = sum_i r_i / (lambda_i + mu)^2
// where r_i collects the squared projections of the right-hand sides onto
// eigenvector i. Rows whose projection is pure rounding noise are dropped so
// a singular quadratic term does not fake infinite power at mu = 0.
struct PowerProfile {
  Eigen::VectorXd lambda;
  Eigen::VectorXd rowsq;

  double power(double mu) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (rowsq(i) == 0.0) continue;
      const double denom = lambda(i) + mu;
      if (denom <= 0.0) return std::numeric_limits<double>::infinity();
      total += rowsq(i) / (denom * denom);
    }
    return total;
  }
};

}  // namespace

std::pair<PrecoderSet, OptimizerTrace> wmmse_sum_se(const ChannelRealization& channel,
                                                    int max_iters, double tol) {
  const Scenario& sc = channel.scenario;
  sc.validate();
  require_unicast(sc, "wmmse_sum_se");
  if (max_iters < 0) throw std::invalid_argument("wmmse_sum_se: max_iters must be nonnegative");
  if (!(tol >= 0.0)) throw std::invalid_argument("wmmse_sum_se: tol must be nonnegative");

  const int k_users = sc.num_users;
  const double sigma2 = sc.noise_power;
  const double budget = static_cast<double>(sc.num_stations) * sc.power_budget_per_station;

  PrecoderSet w = mrt(channel);
  OptimizerTrace trace;
  auto record = [&](const PrecoderSet& p) {
    const RateReport r = sinr_and_se(channel, p);
    trace.objective.push_back(r.total_se);
    trace.power.push_back(p.w.squaredNorm());
    return r.total_se;
  };
  double prev = record(w);

  for (int iter = 0; iter < max_iters; ++iter) {
    const ComplexMatrix gains = channel.h * w.w;  // K x K
    Eigen::VectorXcd u(k_users);
    Eigen::VectorXd weight(k_users);
    for (int k = 0; k < k_users; ++k) {
      const double t = gains.row(k).squaredNorm() + sigma2;
      const std::complex<double> g = gains(k, k);
      u(k) = g / t;
      const double err = 1.0 - std::norm(g) / t;  // in [sigma2/t, 1]
      weight(k) = 1.0 / err;
    }

    Eigen::VectorXd wu2(k_users);
    Eigen::VectorXcd rhs_scale(k_users);
    for (int k = 0; k < k_users; ++k) {
      wu2(k) = weight(k) * std::norm(u(k));
      rhs_scale(k) = weight(k) * std::conj(u(k));
    }
    const ComplexMatrix quad = channel.h.adjoint() * wu2.asDiagonal() * channel.h;
    const ComplexMatrix rhs = channel.h.adjoint() * rhs_scale.asDiagonal();

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(quad);
    PowerProfile profile;
    profile.lambda = es.eigenvalues().cwiseMax(0.0);
    ComplexMatrix projected = es.eigenvectors().adjoint() * rhs;
    profile.rowsq = projected.rowwise().squaredNorm();
    const double total_rowsq = profile.rowsq.sum();
    for (Eigen::Index i = 0; i < profile.rowsq.size(); ++i) {
      if (profile.rowsq(i) <= 1e-28 * total_rowsq) {
        profile.rowsq(i) = 0.0;
        projected.row(i).setZero();
      }
    }

    double mu = 0.0;
    if (profile.power(0.0) > budget) {
      // Bisect to floating-point adjacency; each probe is O(n), so running
      // the interval down completely is cheap and puts the power on the
      // budget to machine precision.
      double lo = 0.0;
      double hi = std::sqrt(total_rowsq / budget);
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (profile.power(mid) > budget ? lo : hi) = mid;
      }
      mu = hi;
    }

    Eigen::VectorXd inv_scale(profile.lambda.size());
    for (Eigen::Index i = 0; i < profile.lambda.size(); ++i) {
      const double denom = profile.lambda(i) + mu;
      inv_scale(i) = (profile.rowsq(i) > 0.0 && denom > 0.0) ? 1.0 / denom : 0.0;
    }
    w.w = es.eigenvectors() * (inv_scale.asDiagonal() * projected);

    const double obj = record(w);
    if (std::abs(obj - prev) <= tol * std::max(1.0, std::abs(obj))) {
      prev = obj;
      break;
    }
    prev = obj;
  }
  return {std::move(w), std::move(trace)};
}

double smoothed_min_rate(const ChannelRealization& channel, const PrecoderSet& w,
                         double tau_soft) {
  if (!(tau_soft > 0.0)) throw std::invalid_argument("smoothed_min_rate: tau_soft must be positive");
  const RateReport r = sinr_and_se(channel, w);
  const double lo = r.se.minCoeff();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < r.se.size(); ++k) acc += std::exp(-(r.se(k) - lo) / tau_soft);
  return lo - tau_soft * std::log(acc);
}

ComplexMatrix smoothed_min_rate_gradient(const ChannelRealization& channel,
                                         const PrecoderSet& w, double tau_soft) {
  if (!(tau_soft > 0.0)) {
    throw std::invalid_argument("smoothed_min_rate_gradient: tau_soft must be positive");
  }
  const Scenario& sc = channel.scenario;
  const RateReport r = sinr_and_se(channel, w);  // validates shapes
  const int k_users = sc.num_users;
  const int groups = sc.num_groups();
  const double sigma2 = sc.noise_power;

  const ComplexMatrix gains = channel.h * w.w;  // K x G

  // softmin weights rho_k, stabilized around the minimum
  const double lo = r.se.minCoeff();
  Eigen::VectorXd rho(k_users);
  for (int k = 0; k < k_users; ++k) rho(k) = std::exp(-(r.se(k) - lo) / tau_soft);
  rho /= rho.sum();

  // coef(k, g): complex factor on conj(h_k) contributed by user k to column g
  ComplexMatrix coef = ComplexMatrix::Zero(k_users, groups);
  for (int k = 0; k < k_users; ++k) {
    const int gk = sc.group_assignment[static_cast<std::size_t>(k)];
    const double s = std::norm(gains(k, gk));
    const double t = gains.row(k).squaredNorm() + sigma2;  // all groups + noise
    const double t_in = t - s;                             // interference + noise
    const double base = rho(k) / kLn2;
    for (int g = 0; g < groups; ++g) {
      if (g == gk) {
        coef(k, g) = base / t * gains(k, g);
      } else {
        coef(k, g) = -base * s / (t * t_in) * gains(k, g);
      }
    }
  }
  // column g = sum_k coef(k,g) * conj(h_k); factor 2 maps the Wirtinger
  // derivative onto real-coordinate partials.
  return 2.0 * (channel.h.adjoint() * coef);
}

PrecoderSet pgd_init(const ChannelRealization& channel) {
  const Scenario& sc = channel.scenario;
  sc.validate();
  const int groups = sc.num_groups();
  ComplexMatrix w = ComplexMatrix::Zero(sc.total_antennas(), groups);
  const auto members = sc.users_by_group();
  for (int g = 0; g < groups; ++g) {
    for (int k : members[static_cast<std::size_t>(g)]) {
      w.col(g) += channel.h.row(k).adjoint();
    }
    w.col(g) /= static_cast<double>(members[static_cast<std::size_t>(g)].size());
    if (w.col(g).norm() == 0.0) w(0, g) = 1.0;  // measure-zero guard, keeps w0 nonzero
  }
  return scale_to_budget(std::move(w), sc);
}

std::pair<PrecoderSet, OptimizerTrace> pgd_run(const ChannelRealization& channel,
                                               const UnfoldedSchedule& schedule,
                                               const PrecoderSet& w0) {
  // A zero step is a legal no-op layer here, so only finiteness is required;
  // the strict positivity invariant applies to trained schedules.
  for (double s : schedule.layer_steps) {
    if (!std::isfinite(s)) throw std::invalid_argument("pgd_run: non-finite step");
  }
  if (!(schedule.smoothing_temperature > 0.0)) {
    throw std::invalid_argument("pgd_run: smoothing temperature must be positive");
  }
  if (!power_feasible(w0, channel.scenario)) {
    throw std::invalid_argument("pgd_run: initial precoder violates a station budget");
  }
  const double tau = schedule.smoothing_temperature;
  PrecoderSet w = w0;
  OptimizerTrace trace;
  trace.objective.push_back(smoothed_min_rate(channel, w, tau));
  trace.power.push_back(w.w.squaredNorm());
  for (double step : schedule.layer_steps) {
    const ComplexMatrix grad = smoothed_min_rate_gradient(channel, w, tau);
    w.w += step * grad;
    w = project_power(w, channel.scenario);
    trace.objective.push_back(smoothed_min_rate(channel, w, tau));
    trace.power.push_back(w.w.squaredNorm());
  }
  return {std::move(w), std::move(trace)};
}

std::vector<double> default_step_grid() {
  std::vector<double> grid;
  grid.reserve(13);
  for (int k = 0; k <= 12; ++k) grid.push_back(std::pow(10.0, -3.0 + 0.25 * k));
  return grid;
}

namespace {

std::vector<double> exp_steps(const std::vector<double>& log_steps) {
  std::vector<double> out(log_steps.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_steps[i]);
  return out;
}

}  // namespace

TrainResult train_unfolded(const Scenario& scenario, int layers, int train_channels,
                           RngStream rng, const TrainConfig& config) {
  scenario.validate();
  if (layers < 1) throw std::invalid_argument("train_unfolded: layers must be at least 1");
  if (train_channels < 1) {
    throw std::invalid_argument("train_unfolded: train_channels must be at least 1");
  }
  if (!(config.tau_soft > 0.0)) {
    throw std::invalid_argument("train_unfolded: tau_soft must be positive");
  }
  if (config.step_grid.empty()) throw std::invalid_argument("train_unfolded: empty step grid");
  for (double s : config.step_grid) {
    if (!(s > 0.0)) throw std::invalid_argument("train_unfolded: grid steps must be positive");
  }
  if (config.nm_max_evals < 0) {
    throw std::invalid_argument("train_unfolded: nm_max_evals must be nonnegative");
  }

  // Fixed training ensemble: every candidate is scored on the same channels.
  std::vector<ChannelRealization> channels;
  channels.reserve(static_cast<std::size_t>(train_channels));
  for (int i = 0; i < train_channels; ++i) {
    channels.push_back(draw_channel(scenario, rng.substream(static_cast<std::uint64_t>(i))));
  }

  TrainResult result;
  auto evaluate = [&](const std::vector<double>& steps) {
    for (double s : steps) {
      if (!std::isfinite(s) || !(s > 0.0) || s > 1e6) {
        result.candidate_log.emplace_back(steps, -1e300);
        return -1e300;
      }
    }
    UnfoldedSchedule sched;
    sched.layer_steps = steps;
    sched.smoothing_temperature = config.tau_soft;
    const std::vector<double> values =
        parallel_map(train_channels, config.threads, [&](int i) {
          const ChannelRealization& ch = channels[static_cast<std::size_t>(i)];
          const auto [w, trace] = pgd_run(ch, sched, pgd_init(ch));
          return smoothed_min_rate(ch, w, config.tau_soft);
        });
    double sum = 0.0;
    for (double v : values) sum += v;  // fixed order: independent of threads
    const double objective = sum / static_cast<double>(train_channels);
    result.candidate_log.emplace_back(steps, objective);
    return objective;
  };

  double best_constant = config.step_grid.front();
  double best_constant_obj = -std::numeric_limits<double>::infinity();
  for (double c : config.step_grid) {
    const double obj = evaluate(std::vector<double>(static_cast<std::size_t>(layers), c));
    if (obj > best_constant_obj) {
      best_constant_obj = obj;
      best_constant = c;
    }
  }

  // Nelder-Mead on the per-layer log-steps, seeded at the best constant.
  struct Vertex {
    std::vector<double> x;
    double g;  // negated objective
  };
  const int dim = layers;
  int evals_left = config.nm_max_evals;
  auto eval_log = [&](const std::vector<double>& x) {
    --evals_left;
    return -evaluate(exp_steps(x));
  };

  if (evals_left > dim + 1) {
    std::vector<Vertex> simplex;
    std::vector<double> x0(static_cast<std::size_t>(dim), std::log(best_constant));
    simplex.push_back({x0, -best_constant_obj});
    for (int d = 0; d < dim && evals_left > 0; ++d) {
      std::vector<double> x = x0;
      x[static_cast<std::size_t>(d)] += config.nm_initial_spread;
      simplex.push_back({x, eval_log(x)});
    }

    auto order = [&] {
      std::stable_sort(simplex.begin(), simplex.end(),
                       [](const Vertex& a, const Vertex& b) { return a.g < b.g; });
    };
    order();

    while (evals_left > 0 && static_cast<int>(simplex.size()) == dim + 1) {
      double diameter = 0.0;
      for (const auto& v : simplex) {
        for (int d = 0; d < dim; ++d) {
          diameter = std::max(diameter, std::abs(v.x[static_cast<std::size_t>(d)] -
                                                 simplex[0].x[static_cast<std::size_t>(d)]));
        }
      }
      if (diameter < 1e-9) break;

      std::vector<double> centroid(static_cast<std::size_t>(dim), 0.0);
      for (int v = 0; v < dim; ++v) {  // all but worst
        for (int d = 0; d < dim; ++d) {
          centroid[static_cast<std::size_t>(d)] +=
              simplex[static_cast<std::size_t>(v)].x[static_cast<std::size_t>(d)] / dim;
        }
      }
      Vertex& worst = simplex.back();
      auto blend = [&](double coeff) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) {
          const std::size_t i = static_cast<std::size_t>(d);
          x[i] = centroid[i] + coeff * (centroid[i] - worst.x[i]);
        }
        return x;
      };

      const std::vector<double> xr = blend(1.0);
      const double gr = eval_log(xr);
      if (gr < simplex[0].g) {
        if (evals_left <= 0) {
          worst = {xr, gr};
          order();
          break;
        }
        const std::vector<double> xe = blend(2.0);
        const double ge = eval_log(xe);
        worst = (ge < gr) ? Vertex{xe, ge} : Vertex{xr, gr};
      } else if (gr < simplex[static_cast<std::size_t>(dim - 1)].g) {
        worst = {xr, gr};
      } else {
        if (evals_left <= 0) break;
        const bool outside = gr < worst.g;
        const std::vector<double> xc = blend(outside ? 0.5 : -0.5);
        const double gc = eval_log(xc);
        if (gc < (outside ? gr : worst.g)) {
          worst = {xc, gc};
        } else {
          // shrink toward the best vertex
          for (std::size_t v = 1; v < simplex.size() && evals_left > 0; ++v) {
            for (int d = 0; d < dim; ++d) {
              const std::size_t i = static_cast<std::size_t>(d);
              simplex[v].x[i] = simplex[0].x[i] + 0.5 * (simplex[v].x[i] - simplex[0].x[i]);
            }
            simplex[v].g = eval_log(simplex[v].x);
          }
        }
      }
      order();
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.candidate_log.size(); ++i) {
    if (result.candidate_log[i].second > result.candidate_log[best].second) best = i;
  }
  UnfoldedSchedule winner;
  winner.layer_steps = result.candidate_log[best].first;
  winner.smoothing_temperature = config.tau_soft;
  winner.training_seed = rng.seed;
  winner.training_objective = result.candidate_log[best].second;
  winner.validate();
  result.schedule = std::move(winner);
  return result;
}

std::vector<ScheduleComparisonRow> compare_schedules(
    const Scenario& scenario,
    const std::vector<std::pair<std::string, UnfoldedSchedule>>& schedules,
    int test_channels, const std::vector<double>& tau_csi_list, RngStream rng,
    int threads) {
  scenario.validate();
  if (test_channels < 1) {
    throw std::invalid_argument("compare_schedules: test_channels must be at least 1");
  }
  for (const auto& [name, sched] : schedules) sched.validate();
  for (double tau : tau_csi_list) {
    if (!(tau >= 0.0) || !(tau <= 1.0)) {
      throw std::invalid_argument("compare_schedules: tau_csi must lie in [0, 1]");
    }
  }

  const std::size_t n_sched = schedules.size();
  const std::size_t n_tau = tau_csi_list.size();
  struct Sample {
    double min_se;
    double total_se;
  };
  const auto per_channel = parallel_map(test_channels, threads, [&](int i) {
    const auto truth = draw_channel(scenario, rng.substream(static_cast<std::uint64_t>(i)));
    std::vector<Sample> samples(n_sched * n_tau);
    for (std::size_t j = 0; j < n_tau; ++j) {
      const auto observed =
          corrupt_csi(truth, tau_csi_list[j],
                      rng.substream(static_cast<std::uint64_t>(i), 4096 + j));
      const PrecoderSet w0 = pgd_init(observed);
      for (std::size_t s = 0; s < n_sched; ++s) {
        const auto [w, trace] = pgd_run(observed, schedules[s].second, w0);
        const RateReport r = sinr_and_se(truth, w);
        samples[s * n_tau + j] = {r.se.minCoeff(), r.total_se};
      }
    }
    return samples;
  });

  std::vector<ScheduleComparisonRow> rows;
  rows.reserve(n_sched * n_tau);
  for (std::size_t s = 0; s < n_sched; ++s) {
    for (std::size_t j = 0; j < n_tau; ++j) {
      ScheduleComparisonRow row;
      row.scheme = schedules[s].first;
      row.tau_csi = tau_csi_list[j];
      row.layers = schedules[s].second.layers();
      row.num_channels = test_channels;
      double min_sum = 0.0;
      double tot_sum = 0.0;
      for (int i = 0; i < test_channels; ++i) {
        min_sum += per_channel[static_cast<std::size_t>(i)][s * n_tau + j].min_se;
        tot_sum += per_channel[static_cast<std::size_t>(i)][s * n_tau + j].total_se;
      }
      row.mean_min_se = min_sum / test_channels;
      row.mean_total_se = tot_sum / test_channels;
      double var = 0.0;
      for (int i = 0; i < test_channels; ++i) {
        const double d = per_channel[static_cast<std::size_t>(i)][s * n_tau + j].min_se -
                         row.mean_min_se;
        var += d * d;
      }
      row.std_min_se = std::sqrt(var / test_channels);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace wwlab

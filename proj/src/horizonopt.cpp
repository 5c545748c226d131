#include "wwlab/horizonopt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wwlab {
namespace {

double contraction_at(const std::vector<double>& steps, double lambda) {
  double prod = 1.0;
  for (double s : steps) prod *= std::abs(1.0 - s * lambda);
  return prod;
}

// Ternary search for the maximum of |p| on [lo, hi]; |p| is unimodal between
// adjacent grid-resolved extrema once the grid is finer than the root spacing.
double refine_max(const std::vector<double>& steps, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (contraction_at(steps, m1) < contraction_at(steps, m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return contraction_at(steps, 0.5 * (lo + hi));
}

}  // namespace

void StepSchedule::validate() const {
  if (!(mu > 0.0) || !(l >= mu)) {
    throw std::invalid_argument("StepSchedule: need 0 < mu <= l");
  }
  for (double s : steps) {
    if (!(s > 0.0)) throw std::invalid_argument("StepSchedule: steps must be positive");
  }
}

double worst_case_factor(const StepSchedule& schedule) {
  schedule.validate();
  const auto& steps = schedule.steps;
  if (steps.empty()) return 1.0;
  if (schedule.l == schedule.mu) return contraction_at(steps, schedule.mu);

  const int t = static_cast<int>(steps.size());
  const int grid = std::max(64, 10 * t * t);
  const double lo = schedule.mu;
  const double hi = schedule.l;
  std::vector<double> values(static_cast<std::size_t>(grid) + 1);
  for (int i = 0; i <= grid; ++i) {
    const double lambda = lo + (hi - lo) * static_cast<double>(i) / grid;
    values[static_cast<std::size_t>(i)] = contraction_at(steps, lambda);
  }

  double best = std::max(values.front(), values.back());
  for (int i = 1; i < grid; ++i) {
    if (values[static_cast<std::size_t>(i)] >= values[static_cast<std::size_t>(i - 1)] &&
        values[static_cast<std::size_t>(i)] >= values[static_cast<std::size_t>(i + 1)]) {
      const double a = lo + (hi - lo) * static_cast<double>(i - 1) / grid;
      const double b = lo + (hi - lo) * static_cast<double>(i + 1) / grid;
      best = std::max(best, refine_max(steps, a, b));
    }
  }
  return best;
}

StepSchedule chebyshev_schedule(int t, double mu, double l) {
  if (t < 1) throw std::invalid_argument("chebyshev_schedule: t must be at least 1");
  StepSchedule schedule;
  schedule.mu = mu;
  schedule.l = l;
  schedule.validate();
  const double center = 0.5 * (l + mu);
  const double radius = 0.5 * (l - mu);
  schedule.steps.resize(static_cast<std::size_t>(t));
  for (int i = 1; i <= t; ++i) {
    const double node = center + radius * std::cos((2.0 * i - 1.0) * M_PI / (2.0 * t));
    schedule.steps[static_cast<std::size_t>(i - 1)] = 1.0 / node;
  }
  return schedule;
}

StepSchedule best_constant_schedule(int t, double mu, double l) {
  if (t < 1) throw std::invalid_argument("best_constant_schedule: t must be at least 1");
  StepSchedule schedule;
  schedule.mu = mu;
  schedule.l = l;
  schedule.validate();
  schedule.steps.assign(static_cast<std::size_t>(t), 2.0 / (mu + l));
  return schedule;
}

double chebyshev_t(int n, double x) {
  if (n < 0) throw std::invalid_argument("chebyshev_t: order must be nonnegative");
  double t_prev = 1.0;
  if (n == 0) return t_prev;
  double t_cur = x;
  for (int k = 2; k <= n; ++k) {
    const double t_next = 2.0 * x * t_cur - t_prev;
    t_prev = t_cur;
    t_cur = t_next;
  }
  return t_cur;
}

}  // namespace wwlab

#pragma once

#include <vector>

namespace wwlab {

/// Step-size schedule for gradient descent on quadratics whose Hessian
/// spectrum lies in [mu, l]. The worst-case error contraction after running
/// the whole schedule is max over lambda in [mu, l] of prod_t |1 - step_t *
/// lambda|; schedules here are designs that shrink that factor for a fixed
/// iteration budget.
struct StepSchedule {
  std::vector<double> steps;
  double mu = 1.0;
  double l = 1.0;

  void validate() const;
};

/// Worst-case contraction factor of the schedule over its spectrum interval,
/// found on a dense grid (>= 10 T^2 points plus the endpoints) with ternary
/// refinement around every interior local maximum.
double worst_case_factor(const StepSchedule& schedule);

/// Minimax-optimal schedule of length t: step reciprocals are the Chebyshev
/// nodes of [mu, l], so the contraction polynomial is the scaled Chebyshev
/// polynomial with worst-case factor 1 / |T_t((l + mu) / (l - mu))|.
StepSchedule chebyshev_schedule(int t, double mu, double l);

/// Constant step 2 / (mu + l) repeated t times, the best single step; its
/// factor is ((l - mu) / (l + mu))^t.
StepSchedule best_constant_schedule(int t, double mu, double l);

/// Chebyshev polynomial T_n(x) by the three-term recurrence.
double chebyshev_t(int n, double x);

}  // namespace wwlab

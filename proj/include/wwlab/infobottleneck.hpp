#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wwlab/rng.hpp"

namespace wwlab {

/// Finite joint distribution p(x, y): nonnegative entries summing to 1, with
/// every x carrying positive marginal mass.
struct DiscreteJoint {
  Eigen::MatrixXd p;  // |X| x |Y|

  void validate() const;
};

/// Stochastic encoder p(z|x): each row a distribution over Z.
struct IBEncoder {
  Eigen::MatrixXd q;  // |X| x |Z|

  void validate() const;
};

struct IBSolution {
  IBEncoder encoder;
  double i_xz = 0.0;  // bits
  double i_zy = 0.0;  // bits
  std::vector<double> objective_trace;  // I(X;Z) - beta * I(Z;Y), bits, one per iteration
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // max encoder change at the last iteration
};

struct IBSweepPoint {
  double beta = 0.0;
  double i_xz = 0.0;
  double i_zy = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// I(X;Y) in bits, with the 0 log 0 = 0 convention.
double mutual_information(const DiscreteJoint& joint);

/// Self-consistent bottleneck iteration minimizing I(X;Z) - beta * I(Z;Y)
/// over encoders with |Z| = z_card: alternately induce q(z) and q(y|z) from
/// the current encoder and reassign q(z|x) proportional to
/// q(z) exp(-beta KL(p(y|x) || q(y|z))). The objective is non-increasing at
/// every iteration; q(y|z) is floored at 1e-300 before any logarithm.
IBSolution ib_solve(const DiscreteJoint& joint, double beta, int z_card, const IBEncoder& init,
                    int max_iters, double tol);

/// Information-plane sweep: for each beta (in the order given), the best of
/// `restarts` perturbed-uniform initializations plus a warm start from the
/// previous beta's solution, selected by lowest objective with ties broken by
/// restart index (the warm start ranks last).
std::vector<IBSweepPoint> ib_sweep(const DiscreteJoint& joint, const std::vector<double>& betas,
                                   int z_card, int restarts, RngStream rng, int max_iters = 2000,
                                   double tol = 1e-10);

/// Perturbed-uniform encoder rows (relative perturbation scale 1e-2).
IBEncoder perturbed_uniform_encoder(int x_card, int z_card, RngStream rng);

}  // namespace wwlab

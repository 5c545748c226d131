#pragma once

#include <Eigen/Dense>
#include <vector>

namespace wwlab {

/// Discrete factor graph. A factor's table is stored flat in row-major order
/// over its variable tuple (the last listed variable varies fastest). Tables
/// are nonnegative with at least one positive entry; the graph may contain
/// cycles.
struct FactorGraph {
  struct Factor {
    std::vector<int> vars;
    std::vector<double> table;
  };

  std::vector<int> cardinalities;
  std::vector<Factor> factors;

  void validate() const;
};

struct MarginalsResult {
  std::vector<Eigen::VectorXd> marginals;
  bool converged = false;
  int iterations = 0;
};

/// Sum-product with a synchronous (flooding) schedule: all messages in a
/// round are computed from the previous round, so the result is independent
/// of update order. Messages are kept normalized in the linear domain with a
/// 1e-300 underflow floor. Exact on acyclic graphs once max_iters covers the
/// graph diameter; on loopy graphs non-convergence is reported through the
/// flag, never as an error.
MarginalsResult sum_product(const FactorGraph& graph, int max_iters, double damping, double tol);

/// Exact marginals by full enumeration of the joint table. The joint alphabet
/// is capped at 1e6 states (std::length_error beyond); an all-zero joint is a
/// std::domain_error.
std::vector<Eigen::VectorXd> brute_force_marginals(const FactorGraph& graph);

}  // namespace wwlab

#include "wwlab/beliefprop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wwlab {
namespace {

constexpr double kFloor = 1e-300;

std::size_t table_size(const FactorGraph& g, const FactorGraph::Factor& f) {
  std::size_t n = 1;
  for (int v : f.vars) n *= static_cast<std::size_t>(g.cardinalities[static_cast<std::size_t>(v)]);
  return n;
}

void floor_and_normalize(Eigen::VectorXd& msg) {
  msg = msg.cwiseMax(kFloor);
  msg /= msg.sum();
}

}  // namespace

void FactorGraph::validate() const {
  for (int c : cardinalities) {
    if (c < 1) throw std::invalid_argument("FactorGraph: cardinalities must be at least 1");
  }
  for (const Factor& f : factors) {
    std::vector<int> seen;
    for (int v : f.vars) {
      if (v < 0 || v >= static_cast<int>(cardinalities.size())) {
        throw std::invalid_argument("FactorGraph: factor references unknown variable");
      }
      if (std::find(seen.begin(), seen.end(), v) != seen.end()) {
        throw std::invalid_argument("FactorGraph: factor lists a variable twice");
      }
      seen.push_back(v);
    }
    if (f.table.size() != table_size(*this, f)) {
      throw std::invalid_argument("FactorGraph: table size does not match variable cardinalities");
    }
    bool any_positive = false;
    for (double x : f.table) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("FactorGraph: table entries must be finite and nonnegative");
      }
      any_positive = any_positive || x > 0.0;
    }
    if (!any_positive) throw std::invalid_argument("FactorGraph: factor table is all zero");
  }
}

MarginalsResult sum_product(const FactorGraph& graph, int max_iters, double damping, double tol) {
  graph.validate();
  if (max_iters < 0) throw std::invalid_argument("sum_product: max_iters must be nonnegative");
  if (!(damping >= 0.0 && damping < 1.0)) {
    throw std::invalid_argument("sum_product: damping must lie in [0, 1)");
  }

  const int num_vars = static_cast<int>(graph.cardinalities.size());
  const int num_factors = static_cast<int>(graph.factors.size());

  // neighbors[v] = (factor index, slot of v inside that factor)
  std::vector<std::vector<std::pair<int, int>>> neighbors(static_cast<std::size_t>(num_vars));
  for (int fi = 0; fi < num_factors; ++fi) {
    const auto& vars = graph.factors[static_cast<std::size_t>(fi)].vars;
    for (int slot = 0; slot < static_cast<int>(vars.size()); ++slot) {
      neighbors[static_cast<std::size_t>(vars[static_cast<std::size_t>(slot)])].emplace_back(fi, slot);
    }
  }

  auto uniform_for = [&](int var) {
    const int card = graph.cardinalities[static_cast<std::size_t>(var)];
    return Eigen::VectorXd::Constant(card, 1.0 / card);
  };

  // Messages live per (factor, slot), both directions.
  std::vector<std::vector<Eigen::VectorXd>> to_factor(static_cast<std::size_t>(num_factors));
  std::vector<std::vector<Eigen::VectorXd>> to_var(static_cast<std::size_t>(num_factors));
  for (int fi = 0; fi < num_factors; ++fi) {
    const auto& vars = graph.factors[static_cast<std::size_t>(fi)].vars;
    for (int v : vars) {
      to_factor[static_cast<std::size_t>(fi)].push_back(uniform_for(v));
      to_var[static_cast<std::size_t>(fi)].push_back(uniform_for(v));
    }
  }

  MarginalsResult result;
  for (int round = 0; round < max_iters; ++round) {
    double max_change = 0.0;

    // Variable-to-factor messages, all from the previous round's snapshot.
    auto new_to_factor = to_factor;
    for (int v = 0; v < num_vars; ++v) {
      for (const auto& [fi, slot] : neighbors[static_cast<std::size_t>(v)]) {
        Eigen::VectorXd msg =
            Eigen::VectorXd::Ones(graph.cardinalities[static_cast<std::size_t>(v)]);
        for (const auto& [fj, slot_j] : neighbors[static_cast<std::size_t>(v)]) {
          if (fj == fi && slot_j == slot) continue;
          msg = msg.cwiseProduct(to_var[static_cast<std::size_t>(fj)][static_cast<std::size_t>(slot_j)]);
          msg = msg.cwiseMax(kFloor);
        }
        floor_and_normalize(msg);
        auto& cell = new_to_factor[static_cast<std::size_t>(fi)][static_cast<std::size_t>(slot)];
        msg = (1.0 - damping) * msg + damping * cell;
        max_change = std::max(max_change, (msg - cell).cwiseAbs().maxCoeff());
        cell = std::move(msg);
      }
    }
    to_factor = std::move(new_to_factor);

    // Factor-to-variable messages from the fresh variable messages.
    auto new_to_var = to_var;
    for (int fi = 0; fi < num_factors; ++fi) {
      const auto& factor = graph.factors[static_cast<std::size_t>(fi)];
      const int arity = static_cast<int>(factor.vars.size());
      std::vector<int> cards(static_cast<std::size_t>(arity));
      for (int s = 0; s < arity; ++s) {
        cards[static_cast<std::size_t>(s)] =
            graph.cardinalities[static_cast<std::size_t>(factor.vars[static_cast<std::size_t>(s)])];
      }
      for (int slot = 0; slot < arity; ++slot) {
        Eigen::VectorXd msg = Eigen::VectorXd::Zero(cards[static_cast<std::size_t>(slot)]);
        std::vector<int> assignment(static_cast<std::size_t>(arity), 0);
        for (std::size_t idx = 0; idx < factor.table.size(); ++idx) {
          double weight = factor.table[idx];
          if (weight != 0.0) {
            for (int s = 0; s < arity; ++s) {
              if (s == slot) continue;
              weight *= to_factor[static_cast<std::size_t>(fi)][static_cast<std::size_t>(s)](
                  assignment[static_cast<std::size_t>(s)]);
            }
            msg(assignment[static_cast<std::size_t>(slot)]) += weight;
          }
          // odometer, last variable fastest
          for (int s = arity - 1; s >= 0; --s) {
            if (++assignment[static_cast<std::size_t>(s)] < cards[static_cast<std::size_t>(s)]) break;
            assignment[static_cast<std::size_t>(s)] = 0;
          }
        }
        floor_and_normalize(msg);
        auto& cell = new_to_var[static_cast<std::size_t>(fi)][static_cast<std::size_t>(slot)];
        msg = (1.0 - damping) * msg + damping * cell;
        max_change = std::max(max_change, (msg - cell).cwiseAbs().maxCoeff());
        cell = std::move(msg);
      }
    }
    to_var = std::move(new_to_var);

    result.iterations = round + 1;
    if (max_change < tol) {
      result.converged = true;
      break;
    }
  }

  result.marginals.reserve(static_cast<std::size_t>(num_vars));
  for (int v = 0; v < num_vars; ++v) {
    Eigen::VectorXd belief = uniform_for(v);
    if (!neighbors[static_cast<std::size_t>(v)].empty()) {
      belief = Eigen::VectorXd::Ones(graph.cardinalities[static_cast<std::size_t>(v)]);
      for (const auto& [fi, slot] : neighbors[static_cast<std::size_t>(v)]) {
        belief = belief.cwiseProduct(
            to_var[static_cast<std::size_t>(fi)][static_cast<std::size_t>(slot)]);
        belief = belief.cwiseMax(kFloor);
      }
      floor_and_normalize(belief);
    }
    result.marginals.push_back(std::move(belief));
  }
  return result;
}

std::vector<Eigen::VectorXd> brute_force_marginals(const FactorGraph& graph) {
  graph.validate();
  const int num_vars = static_cast<int>(graph.cardinalities.size());

  double joint_size = 1.0;
  for (int c : graph.cardinalities) joint_size *= c;
  if (joint_size > 1e6) {
    throw std::length_error("brute_force_marginals: joint alphabet exceeds 1e6 states");
  }

  std::vector<Eigen::VectorXd> marginals;
  marginals.reserve(static_cast<std::size_t>(num_vars));
  for (int c : graph.cardinalities) marginals.push_back(Eigen::VectorXd::Zero(c));

  std::vector<int> assignment(static_cast<std::size_t>(num_vars), 0);
  const auto total = static_cast<std::size_t>(joint_size);
  double z = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    double weight = 1.0;
    for (const auto& factor : graph.factors) {
      std::size_t idx = 0;
      for (int v : factor.vars) {
        idx = idx * static_cast<std::size_t>(graph.cardinalities[static_cast<std::size_t>(v)]) +
              static_cast<std::size_t>(assignment[static_cast<std::size_t>(v)]);
      }
      weight *= factor.table[idx];
      if (weight == 0.0) break;
    }
    z += weight;
    if (weight != 0.0) {
      for (int v = 0; v < num_vars; ++v) {
        marginals[static_cast<std::size_t>(v)](assignment[static_cast<std::size_t>(v)]) += weight;
      }
    }
    for (int v = num_vars - 1; v >= 0; --v) {
      if (++assignment[static_cast<std::size_t>(v)] <
          graph.cardinalities[static_cast<std::size_t>(v)]) {
        break;
      }
      assignment[static_cast<std::size_t>(v)] = 0;
    }
  }

  if (z <= 0.0) throw std::domain_error("brute_force_marginals: joint distribution is all zero");
  for (auto& m : marginals) m /= z;
  return marginals;
}

}  // namespace wwlab

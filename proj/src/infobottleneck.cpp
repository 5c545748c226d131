#include "wwlab/infobottleneck.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace wwlab {
namespace {

constexpr double kProbFloor = 1e-300;
constexpr double kLn2 = 0.6931471805599453;

// MI of an unvalidated joint table (rows or columns may be all zero), nats.
double mi_nats(const Eigen::MatrixXd& joint) {
  const Eigen::VectorXd row = joint.rowwise().sum();
  const Eigen::RowVectorXd col = joint.colwise().sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < joint.rows(); ++i) {
    for (Eigen::Index j = 0; j < joint.cols(); ++j) {
      const double pij = joint(i, j);
      if (pij > 0.0) acc += pij * std::log(pij / (row(i) * col(j)));
    }
  }
  return acc;
}

}  // namespace

void DiscreteJoint::validate() const {
  if (p.size() == 0) throw std::domain_error("DiscreteJoint: empty table");
  if (!p.allFinite()) throw std::domain_error("DiscreteJoint: non-finite entries");
  if (p.minCoeff() < 0.0) throw std::domain_error("DiscreteJoint: negative probability");
  if (std::abs(p.sum() - 1.0) > 1e-12) {
    throw std::domain_error("DiscreteJoint: probabilities must sum to 1");
  }
  const Eigen::VectorXd row = p.rowwise().sum();
  if (row.minCoeff() <= 0.0) {
    throw std::domain_error("DiscreteJoint: every x needs positive marginal mass");
  }
}

void IBEncoder::validate() const {
  if (q.size() == 0) throw std::domain_error("IBEncoder: empty table");
  if (!q.allFinite()) throw std::domain_error("IBEncoder: non-finite entries");
  if (q.minCoeff() < 0.0) throw std::domain_error("IBEncoder: negative probability");
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    if (std::abs(q.row(i).sum() - 1.0) > 1e-12) {
      throw std::domain_error("IBEncoder: rows must sum to 1");
    }
  }
}

double mutual_information(const DiscreteJoint& joint) {
  joint.validate();
  return mi_nats(joint.p) / kLn2;
}

IBSolution ib_solve(const DiscreteJoint& joint, double beta, int z_card, const IBEncoder& init,
                    int max_iters, double tol) {
  joint.validate();
  init.validate();
  if (!(beta >= 0.0)) throw std::invalid_argument("ib_solve: beta must be nonnegative");
  if (z_card < 1) throw std::invalid_argument("ib_solve: z_card must be at least 1");
  if (init.q.rows() != joint.p.rows() || init.q.cols() != z_card) {
    throw std::invalid_argument("ib_solve: init shape must be |X| x z_card");
  }
  if (max_iters < 0) throw std::invalid_argument("ib_solve: max_iters must be nonnegative");

  const Eigen::Index nx = joint.p.rows();
  const Eigen::Index ny = joint.p.cols();
  const Eigen::VectorXd px = joint.p.rowwise().sum();
  Eigen::MatrixXd pyx = joint.p;  // p(y|x)
  for (Eigen::Index x = 0; x < nx; ++x) pyx.row(x) /= px(x);

  IBSolution sol;
  sol.encoder = init;
  Eigen::MatrixXd& q = sol.encoder.q;

  auto objective_bits = [&](const Eigen::MatrixXd& enc) {
    const Eigen::MatrixXd joint_xz = px.asDiagonal() * enc;
    const Eigen::MatrixXd joint_zy = enc.transpose() * joint.p;
    const double ixz = mi_nats(joint_xz) / kLn2;
    const double izy = mi_nats(joint_zy) / kLn2;
    return std::tuple<double, double, double>(ixz - beta * izy, ixz, izy);
  };

  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd qz = q.transpose() * px;             // q(z)
    Eigen::MatrixXd qyz = q.transpose() * joint.p;             // q(z, y) -> q(y|z)
    for (Eigen::Index z = 0; z < z_card; ++z) {
      if (qz(z) > kProbFloor) {
        qyz.row(z) /= qz(z);
      } else {
        qyz.row(z).setConstant(1.0 / static_cast<double>(ny));
      }
    }

    // log q(z|x) = log q(z) - beta KL(p(y|x) || q(y|z)) + const(x)
    Eigen::MatrixXd logits(nx, z_card);
    for (Eigen::Index x = 0; x < nx; ++x) {
      for (Eigen::Index z = 0; z < z_card; ++z) {
        double kl = 0.0;
        for (Eigen::Index y = 0; y < ny; ++y) {
          const double p_cond = pyx(x, y);
          if (p_cond > 0.0) kl += p_cond * std::log(p_cond / std::max(qyz(z, y), kProbFloor));
        }
        logits(x, z) = std::log(std::max(qz(z), kProbFloor)) - beta * kl;
      }
    }

    Eigen::MatrixXd q_new(nx, z_card);
    for (Eigen::Index x = 0; x < nx; ++x) {
      const double shift = logits.row(x).maxCoeff();
      Eigen::RowVectorXd w = (logits.row(x).array() - shift).exp();
      q_new.row(x) = w / w.sum();
    }

    sol.residual = (q_new - q).cwiseAbs().maxCoeff();
    q = std::move(q_new);
    sol.iterations = iter + 1;

    const auto [obj, ixz, izy] = objective_bits(q);
    sol.objective_trace.push_back(obj);
    sol.i_xz = ixz;
    sol.i_zy = izy;

    if (sol.residual < tol) {
      sol.converged = true;
      break;
    }
  }

  if (sol.objective_trace.empty()) {
    const auto [obj, ixz, izy] = objective_bits(q);
    sol.objective_trace.push_back(obj);
    sol.i_xz = ixz;
    sol.i_zy = izy;
  }
  return sol;
}

IBEncoder perturbed_uniform_encoder(int x_card, int z_card, RngStream rng) {
  if (x_card < 1 || z_card < 1) {
    throw std::invalid_argument("perturbed_uniform_encoder: cardinalities must be at least 1");
  }
  Xoshiro256pp gen(rng);
  Eigen::MatrixXd q(x_card, z_card);
  for (Eigen::Index x = 0; x < x_card; ++x) {
    for (Eigen::Index z = 0; z < z_card; ++z) q(x, z) = 1.0 + 1e-2 * gen.uniform01();
    q.row(x) /= q.row(x).sum();
  }
  return IBEncoder{std::move(q)};
}

std::vector<IBSweepPoint> ib_sweep(const DiscreteJoint& joint, const std::vector<double>& betas,
                                   int z_card, int restarts, RngStream rng, int max_iters,
                                   double tol) {
  joint.validate();
  if (betas.empty()) throw std::invalid_argument("ib_sweep: betas must be non-empty");
  if (restarts < 1) throw std::invalid_argument("ib_sweep: need at least one restart");

  const int nx = static_cast<int>(joint.p.rows());
  std::vector<IBSweepPoint> points;
  points.reserve(betas.size());
  IBEncoder warm;  // best encoder from the previous beta

  for (std::size_t bi = 0; bi < betas.size(); ++bi) {
    const double beta = betas[bi];
    IBSolution best;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
      const IBEncoder init = perturbed_uniform_encoder(nx, z_card, rng.substream(bi, static_cast<std::uint64_t>(r)));
      IBSolution sol = ib_solve(joint, beta, z_card, init, max_iters, tol);
      if (!have_best || sol.objective_trace.back() < best.objective_trace.back()) {
        best = std::move(sol);
        have_best = true;
      }
    }
    if (warm.q.size() != 0) {
      IBSolution sol = ib_solve(joint, beta, z_card, warm, max_iters, tol);
      if (sol.objective_trace.back() < best.objective_trace.back()) best = std::move(sol);
    }

    warm = best.encoder;
    IBSweepPoint point;
    point.beta = beta;
    point.i_xz = best.i_xz;
    point.i_zy = best.i_zy;
    point.objective = best.objective_trace.back();
    point.iterations = best.iterations;
    point.converged = best.converged;
    points.push_back(point);
  }
  return points;
}

}  // namespace wwlab

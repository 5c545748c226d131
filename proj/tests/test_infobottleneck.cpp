#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wwlab/infobottleneck.hpp"
#include "wwlab/rng.hpp"

using namespace wwlab;

namespace {

// Entropy-style mutual information of any nonnegative joint, tolerating empty
// rows or columns. Independent of the library path.
double mi_of(const Eigen::MatrixXd& p) {
  const Eigen::VectorXd px = p.rowwise().sum();
  const Eigen::VectorXd py = p.colwise().sum();
  double mi = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) > 0.0) mi += p(i, j) * std::log2(p(i, j) / (px(i) * py(j)));
    }
  }
  return mi;
}

DiscreteJoint random_joint(int x_card, int y_card, RngStream rng) {
  Xoshiro256pp gen(rng);
  Eigen::MatrixXd p(x_card, y_card);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = 0.05 + gen.uniform01();
  }
  p /= p.sum();
  return DiscreteJoint{p};
}

DiscreteJoint noisy_pair() {
  Eigen::MatrixXd p(2, 2);
  p << 0.4, 0.1, 0.1, 0.4;
  return DiscreteJoint{p};
}

// Objective of a fixed encoder on a joint, evaluated from first principles.
double encoder_objective(const DiscreteJoint& joint, const Eigen::MatrixXd& q, double beta) {
  const Eigen::VectorXd px = joint.p.rowwise().sum();
  const Eigen::MatrixXd pxz = px.asDiagonal() * q;       // p(x, z)
  const Eigen::MatrixXd pzy = q.transpose() * joint.p;   // p(z, y)
  return mi_of(pxz) - beta * mi_of(pzy);
}

}  // namespace

TEST_CASE("independent pairs carry no information") {
  Eigen::VectorXd px(2);
  px << 0.3, 0.7;
  Eigen::VectorXd py(3);
  py << 0.2, 0.5, 0.3;
  const DiscreteJoint joint{Eigen::MatrixXd(px * py.transpose())};
  CHECK(std::abs(mutual_information(joint)) <= 1e-14);
}

TEST_CASE("a noiseless channel carries its full alphabet") {
  const DiscreteJoint joint{Eigen::MatrixXd(Eigen::MatrixXd::Identity(4, 4) / 4.0)};
  CHECK(mutual_information(joint) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mutual information matches the entropy decomposition") {
  for (int trial = 0; trial < 5; ++trial) {
    const DiscreteJoint joint = random_joint(3, 3, RngStream{81, 0}.substream(trial));
    CHECK(mutual_information(joint) == doctest::Approx(mi_of(joint.p)).epsilon(1e-12));
  }
}

TEST_CASE("malformed joints are rejected") {
  Eigen::MatrixXd negative(2, 2);
  negative << 0.6, 0.5, -0.1, 0.0;
  CHECK_THROWS_AS(mutual_information(DiscreteJoint{negative}), std::domain_error);

  Eigen::MatrixXd unnormalized(2, 2);
  unnormalized << 0.4, 0.4, 0.4, 0.4;
  CHECK_THROWS_AS(mutual_information(DiscreteJoint{unnormalized}), std::domain_error);

  Eigen::MatrixXd empty_row(2, 2);
  empty_row << 0.5, 0.5, 0.0, 0.0;
  CHECK_THROWS_AS(mutual_information(DiscreteJoint{empty_row}), std::domain_error);
}

TEST_CASE("the bottleneck objective never increases along the iteration") {
  for (int trial = 0; trial < 20; ++trial) {
    const RngStream rng = RngStream{82, 0}.substream(trial);
    const DiscreteJoint joint = random_joint(3, 3, rng);
    const IBEncoder init = perturbed_uniform_encoder(3, 3, rng.substream(1));
    const IBSolution sol = ib_solve(joint, 2.0, 3, init, 500, 1e-12);
    REQUIRE(!sol.objective_trace.empty());
    for (std::size_t i = 1; i < sol.objective_trace.size(); ++i) {
      CHECK(sol.objective_trace[i] <= sol.objective_trace[i - 1] + 1e-10);
    }
    for (Eigen::Index r = 0; r < sol.encoder.q.rows(); ++r) {
      CHECK(sol.encoder.q.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(sol.encoder.q.row(r).minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("at zero pressure the encoder forgets its input") {
  const DiscreteJoint joint = random_joint(3, 3, RngStream{83, 0});
  const IBEncoder init = perturbed_uniform_encoder(3, 3, RngStream{84, 0});
  const IBSolution sol = ib_solve(joint, 0.0, 3, init, 500, 1e-12);
  CHECK(sol.i_xz <= 1e-9);
}

TEST_CASE("strong relevance pressure keeps nearly all the label information") {
  const DiscreteJoint joint = noisy_pair();
  const double i_xy = mutual_information(joint);
  const IBEncoder init = perturbed_uniform_encoder(2, 2, RngStream{85, 0});
  const IBSolution sol = ib_solve(joint, 100.0, 2, init, 2000, 1e-12);
  CHECK(sol.i_zy >= 0.99 * i_xy);

  // It also beats every deterministic two-way encoder on the objective.
  double best_det = 1e300;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2, 2);
      q(0, a) = 1.0;
      q(1, b) = 1.0;
      best_det = std::min(best_det, encoder_objective(joint, q, 100.0));
    }
  }
  CHECK(sol.objective_trace.back() <= best_det + 1e-6);
}

TEST_CASE("the solver is deterministic") {
  const DiscreteJoint joint = random_joint(3, 4, RngStream{86, 0});
  const IBEncoder init = perturbed_uniform_encoder(3, 2, RngStream{87, 0});
  const IBSolution a = ib_solve(joint, 1.5, 2, init, 300, 1e-11);
  const IBSolution b = ib_solve(joint, 1.5, 2, init, 300, 1e-11);
  CHECK(a.encoder.q == b.encoder.q);
  CHECK(a.objective_trace == b.objective_trace);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("cluster labels are arbitrary") {
  const DiscreteJoint joint = random_joint(3, 3, RngStream{88, 0});
  const IBEncoder init = perturbed_uniform_encoder(3, 3, RngStream{89, 0});
  IBEncoder swapped = init;
  swapped.q.col(0).swap(swapped.q.col(2));
  const IBSolution a = ib_solve(joint, 2.0, 3, init, 500, 1e-12);
  const IBSolution b = ib_solve(joint, 2.0, 3, swapped, 500, 1e-12);
  CHECK(a.i_xz == doctest::Approx(b.i_xz).epsilon(1e-8));
  CHECK(a.i_zy == doctest::Approx(b.i_zy).epsilon(1e-8));
  CHECK(a.objective_trace.back() == doctest::Approx(b.objective_trace.back()).epsilon(1e-8));
}

TEST_CASE("sweep points respect the information ordering") {
  const DiscreteJoint joint = random_joint(3, 3, RngStream{90, 0});
  const double i_xy = mutual_information(joint);
  const std::vector<double> betas = {0.0, 0.5, 1.0, 2.0, 5.0, 20.0};
  const auto points = ib_sweep(joint, betas, 3, 10, RngStream{91, 0});
  REQUIRE(points.size() == betas.size());
  for (const auto& pt : points) {
    CHECK(pt.i_zy <= i_xy + 1e-9);
    CHECK(pt.i_zy <= pt.i_xz + 1e-9);
    CHECK(pt.i_xz >= -1e-12);
    CHECK(pt.i_zy >= -1e-12);
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    CHECK(points[i].i_zy >= points[i - 1].i_zy - 1e-6);
  }
}

TEST_CASE("a single cluster carries nothing") {
  const DiscreteJoint joint = random_joint(3, 3, RngStream{92, 0});
  const auto points = ib_sweep(joint, {1.0}, 1, 3, RngStream{93, 0});
  REQUIRE(points.size() == 1);
  CHECK(points[0].i_xz <= 1e-12);
  CHECK(points[0].i_zy <= 1e-12);
}

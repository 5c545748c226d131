#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wwlab/ratereduction.hpp"

using namespace wwlab;

namespace {

Eigen::MatrixXd real_gaussian(Eigen::Index rows, Eigen::Index cols, RngStream rng) {
  Eigen::MatrixXd out(rows, cols);
  Xoshiro256pp gen(rng);
  double z0 = 0.0;
  double z1 = 0.0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      gen.gaussian_pair(z0, z1);
      out(r, c) = z0;
    }
  }
  return out;
}

FeatureBatch random_batch(int d, int m, int classes, RngStream rng, double eps_sq = 0.5) {
  FeatureBatch batch;
  batch.z = real_gaussian(d, m, rng);
  batch.epsilon_sq = eps_sq;
  Xoshiro256pp gen(rng.substream(999));
  for (int i = 0; i < m; ++i) {
    batch.memberships.push_back(static_cast<int>(gen.next_u64() % classes));
  }
  // Pin one column per class so no class is empty.
  for (int j = 0; j < classes && j < m; ++j) batch.memberships[static_cast<std::size_t>(j)] = j;
  return batch;
}

// log2 det(I + alpha Z Z^T) / 2 straight from the eigenvalues of Z Z^T.
double rate_by_eigenvalues(const Eigen::MatrixXd& z, double alpha) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z * z.transpose());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    sum += std::log2(1.0 + alpha * std::max(0.0, es.eigenvalues()(i)));
  }
  return 0.5 * sum;
}

Eigen::MatrixXd columns_of_class(const FeatureBatch& batch, int cls) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < batch.memberships.size(); ++i) {
    if (batch.memberships[i] == cls) idx.push_back(static_cast<Eigen::Index>(i));
  }
  Eigen::MatrixXd out(batch.z.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = batch.z.col(idx[i]);
  return out;
}

}  // namespace

TEST_CASE("coding rate of the zero batch is zero") {
  FeatureBatch batch;
  batch.z = Eigen::MatrixXd::Zero(3, 5);
  batch.memberships = {0, 0, 1, 1, 1};
  CHECK(coding_rate(batch) == 0.0);
  CHECK(conditional_coding_rate(batch) == 0.0);
  CHECK(rate_reduction(batch) == 0.0);
}

TEST_CASE("coding rate of one unit column in two dimensions") {
  FeatureBatch batch;
  batch.z = Eigen::MatrixXd::Zero(2, 1);
  batch.z(0, 0) = 1.0;
  batch.memberships = {0};
  batch.epsilon_sq = 0.5;
  // alpha = d / (m eps^2) = 4, so R = log2(1 + 4) / 2.
  CHECK(coding_rate(batch) == doctest::Approx(0.5 * std::log2(5.0)).epsilon(1e-12));
}

TEST_CASE("coding rate matches the eigenvalue form") {
  FeatureBatch batch = random_batch(6, 40, 2, RngStream{51, 0});
  const double alpha = 6.0 / (40.0 * batch.epsilon_sq);
  CHECK(coding_rate(batch) == doctest::Approx(rate_by_eigenvalues(batch.z, alpha)).epsilon(1e-9));
}

TEST_CASE("coding rate is rotation invariant") {
  FeatureBatch batch = random_batch(6, 30, 2, RngStream{52, 0});
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(real_gaussian(6, 6, RngStream{53, 0})).householderQ();
  FeatureBatch rotated = batch;
  rotated.z = q * batch.z;
  CHECK(coding_rate(rotated) == doctest::Approx(coding_rate(batch)).epsilon(1e-9));
  CHECK(conditional_coding_rate(rotated) ==
        doctest::Approx(conditional_coding_rate(batch)).epsilon(1e-9));
}

TEST_CASE("one class makes the conditional rate collapse onto the total") {
  FeatureBatch batch = random_batch(4, 20, 1, RngStream{54, 0});
  CHECK(conditional_coding_rate(batch) == doctest::Approx(coding_rate(batch)).epsilon(1e-12));
  CHECK(std::abs(rate_reduction(batch)) <= 1e-9);
}

TEST_CASE("conditional rate sums the per-class terms") {
  FeatureBatch batch = random_batch(5, 24, 2, RngStream{55, 0});
  const double m = static_cast<double>(batch.z.cols());
  double expected = 0.0;
  for (int j = 0; j < 2; ++j) {
    const Eigen::MatrixXd zj = columns_of_class(batch, j);
    const double mj = static_cast<double>(zj.cols());
    const double alpha_j = 5.0 / (mj * batch.epsilon_sq);
    expected += (mj / m) * rate_by_eigenvalues(zj, alpha_j);
  }
  CHECK(conditional_coding_rate(batch) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("splitting a batch never lowers the coding rate") {
  for (int trial = 0; trial < 100; ++trial) {
    const int classes = 1 + trial % 4;
    FeatureBatch batch = random_batch(4, 18, classes, RngStream{56, 0}.substream(trial));
    CHECK(rate_reduction(batch) >= -1e-9);
  }
}

TEST_CASE("empty classes carry zero weight and zero operators") {
  FeatureBatch batch = random_batch(4, 12, 1, RngStream{57, 0});
  for (std::size_t i = 0; i < batch.memberships.size(); ++i) {
    batch.memberships[i] = (i % 2 == 0) ? 0 : 2;  // class 1 stays empty
  }
  const ReduLayerParams params = redunet_layer(batch);
  REQUIRE(params.c_list.size() == 3);
  CHECK(params.gamma[1] == 0.0);
  CHECK(params.c_list[1].norm() == 0.0);
  CHECK(params.gamma[0] + params.gamma[1] + params.gamma[2] == doctest::Approx(1.0).epsilon(1e-12));

  FeatureBatch relabeled = batch;
  for (auto& c : relabeled.memberships) c = (c == 2) ? 1 : 0;
  CHECK(conditional_coding_rate(batch) ==
        doctest::Approx(conditional_coding_rate(relabeled)).epsilon(1e-12));
}

TEST_CASE("layer operators invert the batch covariance") {
  FeatureBatch batch = random_batch(5, 30, 3, RngStream{58, 0});
  const ReduLayerParams params = redunet_layer(batch);
  const double alpha = 5.0 / (30.0 * batch.epsilon_sq);
  const Eigen::MatrixXd gram =
      Eigen::MatrixXd::Identity(5, 5) + alpha * (batch.z * batch.z.transpose());
  CHECK((params.e * gram - alpha * Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-8);
  for (const auto& c : params.c_list) {
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("zero features yield scaled identity operators") {
  FeatureBatch batch;
  batch.z = Eigen::MatrixXd::Zero(3, 8);
  batch.memberships = std::vector<int>(8, 0);
  batch.epsilon_sq = 0.5;
  const ReduLayerParams params = redunet_layer(batch);
  const double alpha = 3.0 / (8.0 * 0.5);
  const double alpha_0 = alpha;  // single class holds every column
  CHECK((params.e - alpha * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((params.c_list[0] - alpha_0 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("forward pass keeps every column on the unit sphere") {
  FeatureBatch batch = random_batch(4, 16, 2, RngStream{59, 0});
  const ReduForwardResult result = redunet_forward(batch, 3, 0.5, 1.0);
  for (Eigen::Index i = 0; i < result.features.z.cols(); ++i) {
    CHECK(result.features.z.col(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(result.layer_features.size() == 4);
  CHECK(result.delta_r_trace.size() == 3);
}

TEST_CASE("zero layers only normalizes") {
  FeatureBatch batch = random_batch(4, 10, 2, RngStream{60, 0});
  const ReduForwardResult result = redunet_forward(batch, 0, 0.5, 1.0);
  CHECK(result.delta_r_trace.empty());
  REQUIRE(result.layer_features.size() == 1);
  Eigen::MatrixXd expected = batch.z;
  for (Eigen::Index i = 0; i < expected.cols(); ++i) expected.col(i) /= expected.col(i).norm();
  CHECK((result.features.z - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("relabeling classes does not change the forward dynamics") {
  FeatureBatch batch = random_batch(4, 16, 2, RngStream{61, 0});
  FeatureBatch swapped = batch;
  for (auto& c : swapped.memberships) c = 1 - c;
  const ReduForwardResult a = redunet_forward(batch, 5, 0.5, 1.0);
  const ReduForwardResult b = redunet_forward(swapped, 5, 0.5, 1.0);
  for (std::size_t i = 0; i < a.delta_r_trace.size(); ++i) {
    CHECK(a.delta_r_trace[i] == doctest::Approx(b.delta_r_trace[i]).epsilon(1e-9));
  }
  CHECK((a.features.z - b.features.z).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("separated mixture climbs in rate reduction and classifies better") {
  FeatureBatch batch = gaussian_mixture_batch(8, 100, 2, 4.0, 1.0, RngStream{12, 0}.substream(1));
  batch.epsilon_sq = 0.5;
  const ReduForwardResult result = redunet_forward(batch, 20, 0.5, 100.0);
  REQUIRE(result.delta_r_trace.size() == 20);
  for (std::size_t i = 1; i < result.delta_r_trace.size(); ++i) {
    CHECK(result.delta_r_trace[i] > result.delta_r_trace[i - 1]);
  }
  CHECK(nearest_subspace_accuracy(result.features, 1) >= nearest_subspace_accuracy(batch, 1));
}

TEST_CASE("mixture batches are deterministic with the documented shape") {
  const FeatureBatch a = gaussian_mixture_batch(6, 9, 3, 4.0, 0.1, RngStream{63, 0});
  const FeatureBatch b = gaussian_mixture_batch(6, 9, 3, 4.0, 0.1, RngStream{63, 0});
  CHECK(a.z == b.z);
  CHECK(a.memberships == b.memberships);
  CHECK(a.z.rows() == 6);
  CHECK(a.z.cols() == 27);
  const auto counts = a.class_counts();
  REQUIRE(counts.size() == 3);
  for (int c : counts) CHECK(c == 9);
}

TEST_CASE("noiseless mixture collapses onto means the stated distance apart") {
  const FeatureBatch batch = gaussian_mixture_batch(7, 12, 3, 3.0, 0.0, RngStream{64, 0});
  std::vector<Eigen::VectorXd> means;
  for (int j = 0; j < 3; ++j) {
    const Eigen::MatrixXd zj = columns_of_class(batch, j);
    for (Eigen::Index i = 0; i < zj.cols(); ++i) {
      CHECK((zj.col(i) - zj.col(0)).norm() <= 1e-12);
    }
    means.push_back(zj.col(0));
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      CHECK((means[static_cast<std::size_t>(a)] - means[static_cast<std::size_t>(b)]).norm() ==
            doctest::Approx(3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("attention with one token adds its projection back") {
  Eigen::MatrixXd tokens(3, 1);
  tokens << 1.0, 2.0, 3.0;
  DictionaryBlock block;
  Eigen::MatrixXd head = Eigen::MatrixXd::Zero(3, 2);
  head(0, 0) = 1.0;
  head(1, 1) = 1.0;
  block.heads = {head};
  block.step = 1.0;
  Eigen::MatrixXd expected(3, 1);
  expected << 2.0, 4.0, 3.0;
  CHECK((mssa_forward(tokens, block) - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("attention matches its definition head by head") {
  const Eigen::MatrixXd tokens = real_gaussian(4, 6, RngStream{65, 0});
  DictionaryBlock block;
  for (int k = 0; k < 2; ++k) {
    const Eigen::MatrixXd raw = real_gaussian(4, 2, RngStream{66, 0}.substream(k));
    block.heads.push_back(Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() *
                          Eigen::MatrixXd::Identity(4, 2));
  }
  block.step = 0.7;

  Eigen::MatrixXd expected = tokens;
  for (const auto& u : block.heads) {
    const Eigen::MatrixXd projected = u.transpose() * tokens;
    Eigen::MatrixXd attn = projected.transpose() * projected / std::sqrt(2.0);
    for (Eigen::Index c = 0; c < attn.cols(); ++c) {
      const Eigen::ArrayXd weights = (attn.col(c).array() - attn.col(c).maxCoeff()).exp();
      attn.col(c) = (weights / weights.sum()).matrix();
      CHECK(attn.col(c).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    expected += block.step * (u * (projected * attn));
  }
  CHECK((mssa_forward(tokens, block) - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("attention is inert on zero tokens and at step zero") {
  DictionaryBlock block;
  block.heads = {Eigen::MatrixXd::Identity(3, 2)};
  block.step = 0.5;
  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(3, 4);
  CHECK(mssa_forward(zeros, block) == zeros);

  block.step = 0.0;
  const Eigen::MatrixXd tokens = real_gaussian(3, 4, RngStream{67, 0});
  CHECK(mssa_forward(tokens, block) == tokens);
}

TEST_CASE("attention rejects a non-orthonormal head") {
  Eigen::MatrixXd head(3, 2);
  head << 1.0, 0.0, 1.0, 0.0, 0.0, 1.0;
  DictionaryBlock block;
  block.heads = {head};
  CHECK_THROWS_AS(mssa_forward(Eigen::MatrixXd::Ones(3, 2), block), std::invalid_argument);
}

TEST_CASE("shrinkage step holds its fixed point exactly") {
  DictionaryBlock block;
  block.dictionary = Eigen::MatrixXd::Identity(2, 2);
  block.step = 0.5;
  block.sparsity_weight = 1.0;
  Eigen::MatrixXd codes(2, 1);
  codes << 2.0, 0.0;
  Eigen::MatrixXd target(2, 1);
  target << 3.0, 0.0;
  CHECK(ista_step(codes, target, block) == codes);
}

TEST_CASE("heavy sparsity pins the codes at zero") {
  DictionaryBlock block;
  block.dictionary = real_gaussian(4, 6, RngStream{68, 0});
  block.step = 0.01;
  block.sparsity_weight = 1e4;
  const Eigen::MatrixXd zero_codes = Eigen::MatrixXd::Zero(6, 3);
  const Eigen::MatrixXd target = real_gaussian(4, 3, RngStream{69, 0});
  CHECK(ista_step(zero_codes, target, block).norm() == 0.0);
}

TEST_CASE("shrinkage never raises the penalized objective") {
  for (int trial = 0; trial < 100; ++trial) {
    const RngStream rng = RngStream{70, 0}.substream(trial);
    DictionaryBlock block;
    block.dictionary = real_gaussian(6, 8, rng.substream(0));
    const double sigma = spectral_norm(block.dictionary);
    block.step = 0.9 / (sigma * sigma);
    block.sparsity_weight = 0.1;
    const Eigen::MatrixXd target = real_gaussian(6, 5, rng.substream(1));
    const Eigen::MatrixXd codes = real_gaussian(8, 5, rng.substream(2)).cwiseAbs();
    const Eigen::MatrixXd next = ista_step(codes, target, block);
    CHECK(next.minCoeff() >= 0.0);
    CHECK(lasso_objective(next, target, block) <=
          lasso_objective(codes, target, block) + 1e-12);
  }
}

TEST_CASE("shrinkage rejects inconsistent shapes") {
  DictionaryBlock block;
  block.dictionary = Eigen::MatrixXd::Identity(3, 4);
  block.step = 0.1;
  CHECK_THROWS_AS(
      ista_step(Eigen::MatrixXd::Zero(5, 2), Eigen::MatrixXd::Zero(3, 2), block),
      std::invalid_argument);
  CHECK_THROWS_AS(
      ista_step(Eigen::MatrixXd::Zero(4, 2), Eigen::MatrixXd::Zero(3, 3), block),
      std::invalid_argument);
}

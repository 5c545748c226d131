#include "wwlab/ratereduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wwlab {
namespace {

constexpr double kLn2 = 0.6931471805599453;

Eigen::MatrixXd class_columns(const Eigen::MatrixXd& z, const std::vector<int>& memberships,
                              int cls, int count) {
  Eigen::MatrixXd out(z.rows(), count);
  int col = 0;
  for (int i = 0; i < static_cast<int>(memberships.size()); ++i) {
    if (memberships[static_cast<std::size_t>(i)] == cls) out.col(col++) = z.col(i);
  }
  return out;
}

// alpha (I + alpha G)^{-1} for symmetric PSD G.
Eigen::MatrixXd scaled_inverse(const Eigen::MatrixXd& gram, double alpha) {
  const Eigen::Index d = gram.rows();
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(d, d) + alpha * gram;
  return alpha * system.llt().solve(Eigen::MatrixXd::Identity(d, d));
}

}  // namespace

int FeatureBatch::num_classes() const {
  int n = 0;
  for (int c : memberships) n = std::max(n, c + 1);
  return n;
}

std::vector<int> FeatureBatch::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(num_classes()), 0);
  for (int c : memberships) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

void FeatureBatch::validate() const {
  if (z.rows() < 1 || z.cols() < 1) throw std::invalid_argument("FeatureBatch: empty features");
  if (!z.allFinite()) throw std::invalid_argument("FeatureBatch: non-finite features");
  if (static_cast<Eigen::Index>(memberships.size()) != z.cols()) {
    throw std::invalid_argument("FeatureBatch: one membership per column required");
  }
  for (int c : memberships) {
    if (c < 0) throw std::invalid_argument("FeatureBatch: negative class index");
  }
  if (!(epsilon_sq > 0.0)) throw std::invalid_argument("FeatureBatch: epsilon_sq must be positive");
}

double coding_rate(const FeatureBatch& batch) {
  batch.validate();
  const double d = static_cast<double>(batch.z.rows());
  const double m = static_cast<double>(batch.z.cols());
  const double alpha = d / (m * batch.epsilon_sq);
  const Eigen::MatrixXd gram = batch.z * batch.z.transpose();
  const Eigen::MatrixXd arg =
      Eigen::MatrixXd::Identity(batch.z.rows(), batch.z.rows()) + alpha * gram;
  return logdet_psd(arg) / (2.0 * kLn2);
}

double conditional_coding_rate(const FeatureBatch& batch) {
  batch.validate();
  const double d = static_cast<double>(batch.z.rows());
  const double m = static_cast<double>(batch.z.cols());
  const auto counts = batch.class_counts();
  double total = 0.0;
  for (int j = 0; j < static_cast<int>(counts.size()); ++j) {
    const int mj = counts[static_cast<std::size_t>(j)];
    if (mj == 0) continue;
    const double alpha_j = d / (static_cast<double>(mj) * batch.epsilon_sq);
    const Eigen::MatrixXd zj = class_columns(batch.z, batch.memberships, j, mj);
    const Eigen::MatrixXd arg = Eigen::MatrixXd::Identity(batch.z.rows(), batch.z.rows()) +
                                alpha_j * (zj * zj.transpose());
    total += static_cast<double>(mj) / (2.0 * m) * logdet_psd(arg) / kLn2;
  }
  return total;
}

double rate_reduction(const FeatureBatch& batch) {
  return coding_rate(batch) - conditional_coding_rate(batch);
}

ReduLayerParams redunet_layer(const FeatureBatch& batch) {
  batch.validate();
  const double d = static_cast<double>(batch.z.rows());
  const double m = static_cast<double>(batch.z.cols());
  const auto counts = batch.class_counts();

  ReduLayerParams params;
  params.e = scaled_inverse(batch.z * batch.z.transpose(), d / (m * batch.epsilon_sq));
  params.c_list.reserve(counts.size());
  params.gamma.reserve(counts.size());
  for (int j = 0; j < static_cast<int>(counts.size()); ++j) {
    const int mj = counts[static_cast<std::size_t>(j)];
    if (mj == 0) {
      params.c_list.emplace_back(Eigen::MatrixXd::Zero(batch.z.rows(), batch.z.rows()));
      params.gamma.push_back(0.0);
      continue;
    }
    const Eigen::MatrixXd zj = class_columns(batch.z, batch.memberships, j, mj);
    params.c_list.push_back(
        scaled_inverse(zj * zj.transpose(), d / (static_cast<double>(mj) * batch.epsilon_sq)));
    params.gamma.push_back(static_cast<double>(mj) / m);
  }
  return params;
}

namespace {

void normalize_columns(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const double n = z.col(i).norm();
    if (n > 0.0) z.col(i) /= n;
  }
}

}  // namespace

ReduForwardResult redunet_forward(const FeatureBatch& batch, int layers, double eta,
                                  double assignment_sharpness) {
  batch.validate();
  if (layers < 0) throw std::invalid_argument("redunet_forward: layers must be nonnegative");
  if (!(eta > 0.0)) throw std::invalid_argument("redunet_forward: eta must be positive");

  ReduForwardResult result;
  result.features = batch;
  normalize_columns(result.features.z);
  result.layer_features.push_back(result.features.z);

  const Eigen::Index m = batch.z.cols();
  for (int layer = 0; layer < layers; ++layer) {
    const ReduLayerParams params = redunet_layer(result.features);
    const Eigen::MatrixXd& z = result.features.z;
    const int num_classes = static_cast<int>(params.c_list.size());

    const Eigen::MatrixXd expanded = params.e * z;
    std::vector<Eigen::MatrixXd> compressed(static_cast<std::size_t>(num_classes));
    Eigen::MatrixXd scores(num_classes, m);
    scores.setConstant(-std::numeric_limits<double>::infinity());
    for (int j = 0; j < num_classes; ++j) {
      if (params.gamma[static_cast<std::size_t>(j)] == 0.0) continue;
      compressed[static_cast<std::size_t>(j)] = params.c_list[static_cast<std::size_t>(j)] * z;
      scores.row(j) =
          -assignment_sharpness * compressed[static_cast<std::size_t>(j)].colwise().norm();
    }

    Eigen::MatrixXd znew = z + eta * expanded;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double shift = scores.col(i).maxCoeff();
      Eigen::VectorXd weights = (scores.col(i).array() - shift).exp();
      for (int j = 0; j < num_classes; ++j) {
        if (params.gamma[static_cast<std::size_t>(j)] == 0.0) weights(j) = 0.0;
      }
      weights /= weights.sum();
      for (int j = 0; j < num_classes; ++j) {
        const double coeff = params.gamma[static_cast<std::size_t>(j)] * weights(j);
        if (coeff != 0.0) {
          znew.col(i) -= eta * coeff * compressed[static_cast<std::size_t>(j)].col(i);
        }
      }
    }
    normalize_columns(znew);
    result.features.z = std::move(znew);
    result.delta_r_trace.push_back(rate_reduction(result.features));
    result.layer_features.push_back(result.features.z);
  }
  return result;
}

double nearest_subspace_accuracy(const FeatureBatch& batch, int rank) {
  batch.validate();
  if (rank < 1) throw std::invalid_argument("nearest_subspace_accuracy: rank must be at least 1");
  const auto counts = batch.class_counts();
  const int num_classes = static_cast<int>(counts.size());

  std::vector<Eigen::MatrixXd> bases(static_cast<std::size_t>(num_classes));
  for (int j = 0; j < num_classes; ++j) {
    const int mj = counts[static_cast<std::size_t>(j)];
    if (mj == 0) continue;
    const Eigen::MatrixXd zj = class_columns(batch.z, batch.memberships, j, mj);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(zj, Eigen::ComputeThinU);
    const int r = std::min<int>({rank, static_cast<int>(zj.rows()), mj});
    bases[static_cast<std::size_t>(j)] = svd.matrixU().leftCols(r);
  }

  int correct = 0;
  for (Eigen::Index i = 0; i < batch.z.cols(); ++i) {
    int best = -1;
    double best_score = -1.0;
    for (int j = 0; j < num_classes; ++j) {
      if (counts[static_cast<std::size_t>(j)] == 0) continue;
      const double score = (bases[static_cast<std::size_t>(j)].transpose() * batch.z.col(i)).squaredNorm();
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    if (best == batch.memberships[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.z.cols());
}

namespace {

Eigen::MatrixXd real_gaussian(Eigen::Index rows, Eigen::Index cols, RngStream rng) {
  Eigen::MatrixXd out(rows, cols);
  Xoshiro256pp gen(rng);
  double z0 = 0.0;
  double z1 = 0.0;
  bool have_spare = false;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (have_spare) {
        out(r, c) = z1;
        have_spare = false;
      } else {
        gen.gaussian_pair(z0, z1);
        out(r, c) = z0;
        have_spare = true;
      }
    }
  }
  return out;
}

}  // namespace

FeatureBatch gaussian_mixture_batch(int dimension, int samples_per_class, int classes,
                                    double mean_separation, double noise_std, RngStream rng) {
  if (dimension < 1 || samples_per_class < 1 || classes < 1) {
    throw std::invalid_argument("gaussian_mixture_batch: counts must be positive");
  }
  if (classes > dimension) {
    throw std::invalid_argument("gaussian_mixture_batch: needs classes <= dimension");
  }
  if (!(mean_separation >= 0.0) || !(noise_std >= 0.0)) {
    throw std::invalid_argument("gaussian_mixture_batch: separation and noise must be nonnegative");
  }

  // Means on mutually orthogonal random directions, so every pair of means is
  // exactly mean_separation apart.
  const Eigen::MatrixXd raw =
      real_gaussian(dimension, classes, rng.substream(static_cast<std::uint64_t>(classes)));
  const Eigen::MatrixXd directions = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() *
                                     Eigen::MatrixXd::Identity(dimension, classes);
  const double scale = mean_separation / std::sqrt(2.0);

  FeatureBatch batch;
  batch.z.resize(dimension, static_cast<Eigen::Index>(classes) * samples_per_class);
  batch.memberships.reserve(static_cast<std::size_t>(classes) * samples_per_class);
  for (int j = 0; j < classes; ++j) {
    Eigen::MatrixXd block =
        (scale * directions.col(j)).replicate(1, samples_per_class);
    if (noise_std > 0.0) {
      block += noise_std * real_gaussian(dimension, samples_per_class,
                                         rng.substream(static_cast<std::uint64_t>(j)));
    }
    batch.z.middleCols(static_cast<Eigen::Index>(j) * samples_per_class, samples_per_class) =
        block;
    for (int s = 0; s < samples_per_class; ++s) batch.memberships.push_back(j);
  }
  return batch;
}

void DictionaryBlock::validate_heads(Eigen::Index dim) const {
  for (const auto& u : heads) {
    if (u.rows() != dim || u.cols() < 1) {
      throw std::invalid_argument("DictionaryBlock: head shape does not match token dimension");
    }
    const Eigen::MatrixXd gram = u.transpose() * u;
    const double err =
        (gram - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-8) throw std::invalid_argument("DictionaryBlock: head is not orthonormal");
  }
}

Eigen::MatrixXd mssa_forward(const Eigen::MatrixXd& tokens, const DictionaryBlock& block) {
  if (tokens.size() == 0) throw std::invalid_argument("mssa_forward: empty token matrix");
  require_finite(tokens, "mssa_forward: tokens");
  block.validate_heads(tokens.rows());

  Eigen::MatrixXd out = tokens;
  for (const auto& u : block.heads) {
    const Eigen::MatrixXd projected = u.transpose() * tokens;            // p x n
    Eigen::MatrixXd similarity = projected.transpose() * projected;      // n x n
    similarity /= std::sqrt(static_cast<double>(u.cols()));
    // column softmax
    for (Eigen::Index c = 0; c < similarity.cols(); ++c) {
      const double shift = similarity.col(c).maxCoeff();
      Eigen::VectorXd w = (similarity.col(c).array() - shift).exp();
      similarity.col(c) = w / w.sum();
    }
    out += block.step * (u * (projected * similarity));
  }
  return out;
}

Eigen::MatrixXd ista_step(const Eigen::MatrixXd& codes, const Eigen::MatrixXd& target,
                          const DictionaryBlock& block) {
  const Eigen::MatrixXd& dict = block.dictionary;
  if (dict.rows() != target.rows() || dict.cols() != codes.rows() ||
      codes.cols() != target.cols()) {
    throw std::invalid_argument("ista_step: dictionary/codes/target shapes are inconsistent");
  }
  require_finite(codes, "ista_step: codes");
  require_finite(target, "ista_step: target");
  const Eigen::MatrixXd residual = target - dict * codes;
  const Eigen::MatrixXd gradient_step = codes + block.step * (dict.transpose() * residual);
  return (gradient_step.array() - block.step * block.sparsity_weight).cwiseMax(0.0).matrix();
}

double lasso_objective(const Eigen::MatrixXd& codes, const Eigen::MatrixXd& target,
                       const DictionaryBlock& block) {
  const double fit = 0.5 * (target - block.dictionary * codes).squaredNorm();
  return fit + block.sparsity_weight * codes.cwiseAbs().sum();
}

}  // namespace wwlab

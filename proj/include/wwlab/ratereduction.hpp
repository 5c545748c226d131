#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wwlab/linalg.hpp"
#include "wwlab/rng.hpp"

namespace wwlab {

/// Real feature matrix with one column per sample, class memberships acting
/// as the diagonal selectors of the per-class rate terms, and the
/// rate-distortion precision epsilon^2.
struct FeatureBatch {
  Eigen::MatrixXd z;            // d x m
  std::vector<int> memberships; // per column, in [0, num_classes)
  double epsilon_sq = 0.5;

  [[nodiscard]] int num_classes() const;
  [[nodiscard]] std::vector<int> class_counts() const;
  void validate() const;
};

/// Layer operators computed in closed form from the batch statistics: one
/// expansion operator, one compression operator per class, and the class
/// weights gamma_j = m_j / m. No learned weights anywhere.
struct ReduLayerParams {
  Eigen::MatrixXd e;                    // d x d
  std::vector<Eigen::MatrixXd> c_list;  // d x d per class (zero for empty classes)
  std::vector<double> gamma;            // m_j / m
};

/// Forward-only attention/sparsification block: orthonormal subspace heads
/// for the attention step and a dictionary for the shrinkage step.
struct DictionaryBlock {
  std::vector<Eigen::MatrixXd> heads;  // d x p each, orthonormal columns
  Eigen::MatrixXd dictionary;          // d x q
  double step = 1.0;
  double sparsity_weight = 0.0;

  void validate_heads(Eigen::Index dim) const;
};

/// Total coding rate R = (1/2) log2 det(I + (d / (m eps^2)) Z Z^T), bits.
double coding_rate(const FeatureBatch& batch);

/// Class-conditional coding rate
/// R^c = sum_j (m_j / 2m) log2 det(I + (d / (m_j eps^2)) Z_j Z_j^T), bits;
/// empty classes contribute zero.
double conditional_coding_rate(const FeatureBatch& batch);

/// R - R^c; nonnegative for any valid membership split.
double rate_reduction(const FeatureBatch& batch);

/// E = alpha (I + alpha Z Z^T)^{-1} and C_j = alpha_j (I + alpha_j Z_j Z_j^T)^{-1}
/// with alpha = d / (m eps^2), alpha_j = d / (m_j eps^2).
ReduLayerParams redunet_layer(const FeatureBatch& batch);

struct ReduForwardResult {
  FeatureBatch features;
  std::vector<double> delta_r_trace;  // one entry per layer, true memberships
  // Snapshots: the normalized input, then the features after each layer
  // (layers + 1 entries), for per-layer reporting.
  std::vector<Eigen::MatrixXd> layer_features;
};

/// Iterative feature refinement: per layer recompute the operators from the
/// current features and update every column with
///   z <- normalize(z + eta (E z - sum_j gamma_j pihat_j(z) C_j z)),
/// where pihat_j(z) ∝ exp(-sharpness ||C_j z||) over nonempty classes.
/// Columns are renormalized to the unit sphere after every layer.
ReduForwardResult redunet_forward(const FeatureBatch& batch, int layers, double eta,
                                  double assignment_sharpness);

/// Fraction of samples whose nearest class subspace (rank-`rank` principal
/// basis of each class's columns) matches their true class.
double nearest_subspace_accuracy(const FeatureBatch& batch, int rank);

/// Synthetic demo data: isotropic Gaussian blobs in R^dimension whose means
/// sit on mutually orthogonal random directions, every pair of means exactly
/// `mean_separation` apart, per-coordinate noise standard deviation
/// `noise_std`. Columns are grouped by class. The mean directions come from
/// rng.substream(classes) and class j's noise from rng.substream(j), so the
/// batch is reproducible from the stream alone. Requires classes <= dimension.
FeatureBatch gaussian_mixture_batch(int dimension, int samples_per_class, int classes,
                                    double mean_separation, double noise_std, RngStream rng);

/// Subspace self-attention: out = tokens + step * sum_k U_k (U_k^T tokens) A_k
/// with A_k = column softmax of (U_k^T tokens)^T (U_k^T tokens) / sqrt(p).
/// Every attention matrix is column-stochastic.
Eigen::MatrixXd mssa_forward(const Eigen::MatrixXd& tokens, const DictionaryBlock& block);

/// One nonnegative shrinkage-thresholding step on the codes:
/// codes <- max(0, codes + step D^T (target - D codes) - step * lambda).
/// With step <= 1 / spectral_norm(D)^2 the lasso objective cannot increase.
Eigen::MatrixXd ista_step(const Eigen::MatrixXd& codes, const Eigen::MatrixXd& target,
                          const DictionaryBlock& block);

/// (1/2) ||target - D codes||_F^2 + lambda * sum |codes|, the objective the
/// shrinkage step descends.
double lasso_objective(const Eigen::MatrixXd& codes, const Eigen::MatrixXd& target,
                       const DictionaryBlock& block);

}  // namespace wwlab

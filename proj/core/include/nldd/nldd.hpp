#pragma once

#include <cstdint>
#include <optional>

#include "nldd/br.hpp"
#include "nldd/data.hpp"

namespace nldd {

/// One training record for the loss model: distances between a validation
/// instance and a T1 instance, and the number of labels they disagree on.
struct DistancePair {
  double dx = 0.0;  // feature-space distance (standardized)
  double dy = 0.0;  // distance from p-hat to the T1 labelset
  int loss = 0;     // Hamming count, in [0, L]
  Index t1_row = 0;

  friend bool operator==(const DistancePair&, const DistancePair&) = default;
};

/// For one validation instance, the T1 pair with the smallest dx (ties: smaller
/// dy, then lower row) and the pair with the smallest dy (ties: smaller dx,
/// then lower row). A single pair is returned when both pick the same row.
std::vector<DistancePair> mine_pairs(FeatureView p_hat, LabelView true_labels, FeatureView z, const Matrix& t1_features_std,
                                     const LabelMatrix& t1_labels);

/// Same selection from precomputed candidate distances (one entry per T1 row).
/// Returns the selected row indices, one or two.
std::vector<Index> select_pairs(std::span<const double> dx, std::span<const double> dy);

struct BinomialFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  bool converged = false;
  int iterations = 0;
  double final_gradient_norm = 0.0;
  /// Set when fitting failed and fixed weights (beta1 = 0, beta2 = 1) are in use.
  bool fallback = false;
};

struct GlmOptions {
  int max_iter = 50;
  double tol = 1e-8;
};

/// Maximum likelihood fit of loss ~ Binomial(L, theta) with
/// logit(theta) = beta0 + beta1 dx + beta2 dy, by Newton-Raphson with step
/// halving. Throws TrainingError when every loss is 0 or every loss is L.
/// Non-convergence, including the divergence caused by separated data, is
/// reported through `converged`.
BinomialFit fit_binomial_glm(std::span<const DistancePair> pairs, int label_count, const GlmOptions& options = {});

double binomial_loglik(std::span<const DistancePair> pairs, int label_count, const Eigen::Vector3d& beta);
Eigen::Vector3d binomial_gradient(std::span<const DistancePair> pairs, int label_count, const Eigen::Vector3d& beta);

/// Per-label misclassification probability.
double theta(const BinomialFit& fit, double dx, double dy);
inline double linear_score(const BinomialFit& fit, double dx, double dy) {
  return fit.beta0 + fit.beta1 * dx + fit.beta2 * dy;
}

struct NlddParams {
  std::uint64_t seed = 0;
  double lambda = 1.0;
  double subsample_fraction = 1.0;
  unsigned threads = 1;
  GlmOptions glm{};
};

struct NlddTrainingInfo {
  Index train_rows = 0;  // after subsampling
  Index t1_rows = 0;
  Index t2_rows = 0;
  Index pair_count = 0;           // |S|
  std::uint64_t distance_ops = 0;  // (dx, dy) evaluations while mining
  std::string warning;            // set when the loss model fell back
};

struct NlddModel {
  BRModel br;  // fit on the full (subsampled) training data
  BinomialFit fit;
  Matrix train_features_std;
  LabelMatrix train_labelsets;
  StandardizationStats stats;
  NlddTrainingInfo info;

  Index label_count() const { return static_cast<Index>(train_labelsets.cols()); }
  Index feature_count() const { return stats.dimension(); }
};

/// Full training procedure, optionally returning the mined pairs.
NlddModel nldd_train(const Dataset& train, const NlddParams& params = {}, std::vector<DistancePair>* mined = nullptr);

struct NlddPrediction {
  Labelset labels;
  double theta = 0.5;
  Index train_row = 0;
  double dx = 0.0;
  double dy = 0.0;
};

/// Training labelset with the smallest estimated misclassification
/// probability; ties go to smaller dy, then smaller dx, then lower row.
NlddPrediction predict_with_confidence(const NlddModel& model, FeatureView x);
Labelset nldd_predict(const NlddModel& model, FeatureView x);

}  // namespace nldd

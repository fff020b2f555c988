#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "nldd/br.hpp"
#include "nldd/metrics.hpp"
#include "nldd/nldd.hpp"

namespace nldd {

enum class Method { br, smbr, nldd };

std::string_view method_name(Method m);
/// Throws std::invalid_argument for unknown names.
Method parse_method(std::string_view name);

struct MethodParams {
  std::uint64_t seed = 0;
  double lambda = 1.0;
  double subsample_fraction = 1.0;
  unsigned threads = 1;
};

struct SmbrModel {
  BRModel br;
  LabelsetIndex index;
};

/// A fitted model for any of the supported methods.
using TrainedMethod = std::variant<BRModel, SmbrModel, NlddModel>;

TrainedMethod train_method(Method method, const Dataset& train, const MethodParams& params);
Labelset predict_method(const TrainedMethod& model, FeatureView x);
/// Predictions for every row, computed on params.threads workers.
std::vector<Labelset> predict_all(const TrainedMethod& model, const Matrix& features, unsigned threads = 1);

std::vector<InstanceMetrics> score_all(const LabelMatrix& truth, std::span<const Labelset> predictions);

struct FoldPlan {
  std::vector<int> fold_assignments;
  int k = 0;

  std::vector<Index> test_rows(int fold) const;
  std::vector<Index> train_rows(int fold) const;
};

/// Seeded shuffle dealt round-robin, so fold sizes differ by at most one.
FoldPlan make_fold_plan(Index n, int k, std::uint64_t seed);

struct CrossValidationResult {
  FoldPlan plan;
  std::vector<MetricsReport> folds;
  MetricsReport mean;
};

CrossValidationResult cross_validate(const Dataset& data, Method method, int k, const MethodParams& params);

MetricsReport holdout_eval(const Dataset& train, const Dataset& test, Method method, const MethodParams& params);

/// Mean of reports, weighting each fold equally.
MetricsReport mean_report(std::span<const MetricsReport> reports);

/// Seeded train/test partition with round(train_fraction * N) training rows.
SplitPair holdout_split(Index n, double train_fraction, std::uint64_t seed);

enum class Alternative { less, greater, two_sided };

struct WilcoxonResult {
  double statistic = 0.0;  // W+
  double p_value = 1.0;
  Index n_effective = 0;
  bool exact = true;
  bool all_zero = false;
};

inline constexpr Index kWilcoxonExactLimit = 20;

/// Signed-rank test on the paired differences a - b. `greater` tests
/// whether a tends to exceed b.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, Alternative alternative);

/// Average ranks (1 = best) of each method across observations.
/// scores[obs][method]; lower_is_better selects the direction.
std::vector<double> average_ranks(const std::vector<std::vector<double>>& scores, bool lower_is_better);

/// Ranks with ties sharing their average rank, rank 1 for the smallest value.
std::vector<double> rank_average_ties(std::span<const double> values);

struct SyntheticParams {
  Index n = 400;
  Index d = 10;
  Index labels = 6;
  double correlation = 0.8;
  double noise = 0.1;
  double curvature = 1.0;
  std::uint64_t seed = 0;
};

/// Gaussian features; label j is 1 when
///
///     sqrt(c) * u + sqrt(1 - c) * (s_j + noise * e_j) > 0,
///     u = s0 + curvature * (s0^2 - 1) + noise * e0
///
/// where s0 is a linear score shared by all labels, s_j a label-specific
/// linear score and e0, e_j standard normal noise. Score directions are
/// orthonormal when L + 1 <= d, so c = 0 gives independent labels and c = 1
/// identical ones. The curvature bends the shared factor so that a linear
/// base learner only partly captures it.
Dataset generate_synthetic(const SyntheticParams& params);

struct ScalingRow {
  double fraction = 0.0;
  Index train_rows = 0;
  std::uint64_t distance_ops = 0;
  double wall_seconds = 0.0;
  double mean_mismatched_labels = 0.0;  // L * mean Hamming loss
};

/// NLDD trained on growing random fractions of `train`, tested on `test`.
std::vector<ScalingRow> scaling_experiment(const Dataset& train, const Dataset& test, std::span<const double> fractions,
                                           const MethodParams& params);
/// Splits `data` 75/25 first, then runs the experiment on the training part.
std::vector<ScalingRow> scaling_experiment(const Dataset& data, std::span<const double> fractions,
                                           const MethodParams& params);

struct ObservedSplit {
  std::vector<Index> observed;
  std::vector<Index> unobserved;
};

/// Partitions test rows by whether their exact labelset occurs in train.
ObservedSplit observed_labelset_split(const Dataset& train, const Dataset& test);

}  // namespace nldd

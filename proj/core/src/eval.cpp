#include "nldd/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "nldd/parallel.hpp"
#include "nldd/random.hpp"

namespace nldd {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::br:
      return "br";
    case Method::smbr:
      return "smbr";
    case Method::nldd:
      return "nldd";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "br") return Method::br;
  if (name == "smbr") return Method::smbr;
  if (name == "nldd") return Method::nldd;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected br, smbr or nldd)");
}

TrainedMethod train_method(Method method, const Dataset& train, const MethodParams& params) {
  switch (method) {
    case Method::br:
      return br_fit(train, params.lambda, params.threads);
    case Method::smbr:
      return SmbrModel{br_fit(train, params.lambda, params.threads), LabelsetIndex(train.labels)};
    case Method::nldd: {
      NlddParams p;
      p.seed = params.seed;
      p.lambda = params.lambda;
      p.subsample_fraction = params.subsample_fraction;
      p.threads = params.threads;
      return nldd_train(train, p);
    }
  }
  throw std::invalid_argument("unknown method");
}

Labelset predict_method(const TrainedMethod& model, FeatureView x) {
  struct Visitor {
    FeatureView x;
    Labelset operator()(const BRModel& m) const { return br_predict(m, x); }
    Labelset operator()(const SmbrModel& m) const { return smbr_predict(m.br, m.index, x); }
    Labelset operator()(const NlddModel& m) const { return nldd_predict(m, x); }
  };
  return std::visit(Visitor{x}, model);
}

std::vector<Labelset> predict_all(const TrainedMethod& model, const Matrix& features, unsigned threads) {
  std::vector<Labelset> out(static_cast<Index>(features.rows()));
  parallel_for(out.size(), threads, [&](Index i) { out[i] = predict_method(model, row_view(features, i)); });
  return out;
}

std::vector<InstanceMetrics> score_all(const LabelMatrix& truth, std::span<const Labelset> predictions) {
  if (static_cast<Index>(truth.rows()) != predictions.size()) throw DataError("prediction count does not match rows");
  std::vector<InstanceMetrics> out;
  out.reserve(predictions.size());
  for (Index i = 0; i < predictions.size(); ++i) out.push_back(score_instance(row_view(truth, i), predictions[i]));
  return out;
}

std::vector<Index> FoldPlan::test_rows(int fold) const {
  std::vector<Index> rows;
  for (Index i = 0; i < fold_assignments.size(); ++i)
    if (fold_assignments[i] == fold) rows.push_back(i);
  return rows;
}

std::vector<Index> FoldPlan::train_rows(int fold) const {
  std::vector<Index> rows;
  for (Index i = 0; i < fold_assignments.size(); ++i)
    if (fold_assignments[i] != fold) rows.push_back(i);
  return rows;
}

FoldPlan make_fold_plan(Index n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("cross-validation needs k >= 2");
  if (static_cast<Index>(k) > n) throw DataError("k = " + std::to_string(k) + " exceeds row count " + std::to_string(n));
  FoldPlan plan;
  plan.k = k;
  plan.fold_assignments.assign(n, 0);
  const auto order = random_permutation(n, seed);
  for (Index i = 0; i < n; ++i) plan.fold_assignments[order[i]] = static_cast<int>(i % static_cast<Index>(k));
  return plan;
}

MetricsReport mean_report(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw std::invalid_argument("no reports to average");
  MetricsReport m;
  for (const auto& r : reports) {
    m.hamming += r.hamming;
    m.zero_one += r.zero_one;
    m.jaccard += r.jaccard;
    m.f_measure += r.f_measure;
    m.n_instances += r.n_instances;
  }
  const auto n = static_cast<double>(reports.size());
  m.hamming /= n;
  m.zero_one /= n;
  m.jaccard /= n;
  m.f_measure /= n;
  return m;
}

namespace {

MetricsReport evaluate(const Dataset& train, const Dataset& test, Method method, const MethodParams& params) {
  const auto model = train_method(method, train, params);
  const auto predictions = predict_all(model, test.features, params.threads);
  return aggregate(score_all(test.labels, predictions));
}

template <typename E>
[[noreturn]] void rethrow_with_fold(const E& e, int fold) {
  throw E("fold " + std::to_string(fold) + ": " + e.what());
}

}  // namespace

CrossValidationResult cross_validate(const Dataset& data, Method method, int k, const MethodParams& params) {
  data.validate();
  CrossValidationResult result;
  result.plan = make_fold_plan(data.rows(), k, params.seed);
  for (int fold = 0; fold < k; ++fold) {
    const auto train_rows = result.plan.train_rows(fold);
    const auto test_rows = result.plan.test_rows(fold);
    MethodParams fold_params = params;
    fold_params.seed = derive_seed(params.seed, 1000 + static_cast<std::uint64_t>(fold));
    try {
      result.folds.push_back(evaluate(data.subset(train_rows), data.subset(test_rows), method, fold_params));
    } catch (const TrainingError& e) {
      rethrow_with_fold(e, fold);
    } catch (const DataError& e) {
      rethrow_with_fold(e, fold);
    }
  }
  result.mean = mean_report(result.folds);
  return result;
}

MetricsReport holdout_eval(const Dataset& train, const Dataset& test, Method method, const MethodParams& params) {
  if (test.rows() == 0) throw DataError("test set is empty");
  if (train.feature_count() != test.feature_count())
    throw DataError("train has " + std::to_string(train.feature_count()) + " features, test has " +
                    std::to_string(test.feature_count()));
  if (train.label_count() != test.label_count())
    throw DataError("train has " + std::to_string(train.label_count()) + " labels, test has " +
                    std::to_string(test.label_count()));
  return evaluate(train, test, method, params);
}

SplitPair holdout_split(Index n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train fraction must lie in (0, 1)");
  const auto order = random_permutation(n, seed);
  const auto keep = static_cast<Index>(std::llround(train_fraction * static_cast<double>(n)));
  if (keep == 0 || keep == n) throw DataError("holdout split leaves an empty side");
  SplitPair s;
  s.t1_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  s.t2_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(keep), order.end());
  std::sort(s.t1_indices.begin(), s.t1_indices.end());
  std::sort(s.t2_indices.begin(), s.t2_indices.end());
  return s;
}

std::vector<double> rank_average_ties(std::span<const double> values) {
  std::vector<Index> order(values.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (Index i = 0; i < order.size();) {
    Index j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j + 2);
    for (Index t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> average_ranks(const std::vector<std::vector<double>>& scores, bool lower_is_better) {
  if (scores.empty()) throw std::invalid_argument("no observations to rank");
  const auto methods = scores.front().size();
  std::vector<double> total(methods, 0.0);
  for (const auto& row : scores) {
    if (row.size() != methods) throw std::invalid_argument("ragged score table");
    std::vector<double> keyed(row);
    if (!lower_is_better)
      for (auto& v : keyed) v = -v;
    const auto r = rank_average_ties(keyed);
    for (Index m = 0; m < methods; ++m) total[m] += r[m];
  }
  for (auto& t : total) t /= static_cast<double>(scores.size());
  return total;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, Alternative alternative) {
  if (a.size() != b.size()) throw std::invalid_argument("Wilcoxon needs paired samples of equal length");
  if (a.empty()) throw std::invalid_argument("Wilcoxon needs at least one pair");

  std::vector<double> diffs;
  for (Index i = 0; i < a.size(); ++i)
    if (a[i] - b[i] != 0.0) diffs.push_back(a[i] - b[i]);

  WilcoxonResult result;
  result.n_effective = diffs.size();
  if (diffs.empty()) {
    result.all_zero = true;
    return result;
  }

  std::vector<double> magnitudes(diffs.size());
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::fabs(d); });
  const auto ranks = rank_average_ties(magnitudes);

  // Average ranks are multiples of 1/2; doubling makes them integers.
  std::vector<long> doubled(ranks.size());
  long observed = 0;
  for (Index i = 0; i < ranks.size(); ++i) {
    doubled[i] = std::lround(2.0 * ranks[i]);
    if (diffs[i] > 0.0) observed += doubled[i];
  }
  result.statistic = 0.5 * static_cast<double>(observed);
  const auto n = diffs.size();

  if (n <= kWilcoxonExactLimit) {
    // Null distribution of the doubled W+ over all 2^n sign assignments.
    const long max_sum = std::accumulate(doubled.begin(), doubled.end(), 0L);
    std::vector<double> ways(static_cast<Index>(max_sum) + 1, 0.0);
    ways[0] = 1.0;
    for (auto r : doubled)
      for (long s = max_sum; s >= r; --s) ways[static_cast<Index>(s)] += ways[static_cast<Index>(s - r)];
    const double total = std::ldexp(1.0, static_cast<int>(n));
    double upper = 0.0, lower = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
      if (s >= observed) upper += ways[static_cast<Index>(s)];
      if (s <= observed) lower += ways[static_cast<Index>(s)];
    }
    const double p_greater = upper / total;
    const double p_less = lower / total;
    result.exact = true;
    switch (alternative) {
      case Alternative::greater:
        result.p_value = p_greater;
        break;
      case Alternative::less:
        result.p_value = p_less;
        break;
      case Alternative::two_sided:
        result.p_value = std::min(1.0, 2.0 * std::min(p_greater, p_less));
        break;
    }
    return result;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  std::vector<double> sorted = magnitudes;
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < sorted.size();) {
    Index j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    variance -= (t * t * t - t) / 48.0;
    i = j + 1;
  }
  const double sd = std::sqrt(variance);
  const auto upper_tail = [](double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); };
  const double p_greater = upper_tail((result.statistic - mean - 0.5) / sd);
  const double p_less = 1.0 - upper_tail((result.statistic - mean + 0.5) / sd);
  result.exact = false;
  switch (alternative) {
    case Alternative::greater:
      result.p_value = p_greater;
      break;
    case Alternative::less:
      result.p_value = p_less;
      break;
    case Alternative::two_sided:
      result.p_value = std::min(1.0, 2.0 * std::min(p_greater, p_less));
      break;
  }
  return result;
}

Dataset generate_synthetic(const SyntheticParams& params) {
  if (params.n < 8) throw std::invalid_argument("synthetic data needs n >= 8");
  if (params.d < 2) throw std::invalid_argument("synthetic data needs d >= 2");
  if (params.labels < 2) throw std::invalid_argument("synthetic data needs L >= 2");
  if (!(params.correlation >= 0.0 && params.correlation <= 1.0))
    throw std::invalid_argument("correlation must lie in [0, 1]");
  if (!(params.noise >= 0.0)) throw std::invalid_argument("noise must be nonnegative");
  if (!std::isfinite(params.curvature)) throw std::invalid_argument("curvature must be finite");

  Rng rng(params.seed);
  const auto d = static_cast<Eigen::Index>(params.d);
  const auto scores = static_cast<Eigen::Index>(params.labels) + 1;

  // Column 0 is the shared direction, column j the direction of label j.
  Eigen::MatrixXd directions(d, scores);
  for (Eigen::Index k = 0; k < scores; ++k)
    for (Eigen::Index i = 0; i < d; ++i) directions(i, k) = rng.normal();
  for (Eigen::Index k = 0; k < scores; ++k) {
    if (scores <= d)
      for (Eigen::Index prev = 0; prev < k; ++prev)
        directions.col(k) -= directions.col(prev).dot(directions.col(k)) * directions.col(prev);
    directions.col(k).normalize();
  }

  const double shared = std::sqrt(params.correlation);
  const double own = std::sqrt(1.0 - params.correlation);
  Matrix features(static_cast<Eigen::Index>(params.n), d);
  LabelMatrix labels(static_cast<Eigen::Index>(params.n), static_cast<Eigen::Index>(params.labels));
  Eigen::VectorXd x(d);
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index i = 0; i < d; ++i) x[i] = rng.normal();
    features.row(r) = x.transpose();
    const Eigen::VectorXd s = directions.transpose() * x;
    const double common = s[0] + params.curvature * (s[0] * s[0] - 1.0) + params.noise * rng.normal();
    for (Eigen::Index j = 0; j < labels.cols(); ++j) {
      const double latent = shared * common + own * (s[j + 1] + params.noise * rng.normal());
      labels(r, j) = latent > 0.0 ? 1 : 0;
    }
  }
  return make_dataset(std::move(features), std::move(labels));
}

std::vector<ScalingRow> scaling_experiment(const Dataset& train, const Dataset& test, std::span<const double> fractions,
                                           const MethodParams& params) {
  std::vector<ScalingRow> rows;
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("fractions must lie in (0, 1]");
    NlddParams p;
    p.seed = params.seed;
    p.lambda = params.lambda;
    p.subsample_fraction = f;
    p.threads = params.threads;

    const auto start = std::chrono::steady_clock::now();
    NlddModel model;
    try {
      model = nldd_train(train, p);
    } catch (const DataError& e) {
      throw DataError("fraction " + std::to_string(f) + ": " + e.what());
    }
    const TrainedMethod trained = std::move(model);
    const auto predictions = predict_all(trained, test.features, params.threads);
    const auto report = aggregate(score_all(test.labels, predictions));
    const auto stop = std::chrono::steady_clock::now();

    const auto& info = std::get<NlddModel>(trained).info;
    ScalingRow row;
    row.fraction = f;
    row.train_rows = info.train_rows;
    row.distance_ops = info.distance_ops;
    row.wall_seconds = std::chrono::duration<double>(stop - start).count();
    row.mean_mismatched_labels = static_cast<double>(test.label_count()) * report.hamming;
    rows.push_back(row);
  }
  return rows;
}

std::vector<ScalingRow> scaling_experiment(const Dataset& data, std::span<const double> fractions,
                                           const MethodParams& params) {
  const auto split = holdout_split(data.rows(), 0.75, derive_seed(params.seed, 7));
  return scaling_experiment(data.subset(split.t1_indices), data.subset(split.t2_indices), fractions, params);
}

ObservedSplit observed_labelset_split(const Dataset& train, const Dataset& test) {
  if (train.label_count() != test.label_count()) throw DataError("train and test label counts differ");
  const LabelsetIndex index(train.labels);
  ObservedSplit split;
  for (Index i = 0; i < test.rows(); ++i) (index.contains(test.y(i)) ? split.observed : split.unobserved).push_back(i);
  return split;
}

}  // namespace nldd

#include "nldd/nldd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nldd/parallel.hpp"
#include "nldd/random.hpp"

namespace nldd {
namespace {

/// |logit(theta)| beyond this puts theta within 1e-13 of 0 or 1.
constexpr double kSaturatedScore = 30.0;

double euclidean(FeatureView a, FeatureView b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double euclidean(FeatureView p, LabelView y) {
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    const double d = p[i] - static_cast<double>(y[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

double log1p_exp(double f) { return f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f)); }

Eigen::Vector3d covariates(const DistancePair& p) { return {1.0, p.dx, p.dy}; }

int hamming_count(LabelView a, LabelView b) { return static_cast<int>(hamming_distance(a, b)); }

}  // namespace

std::vector<Index> select_pairs(std::span<const double> dx, std::span<const double> dy) {
  if (dx.empty() || dx.size() != dy.size()) throw DataError("pair mining needs a nonempty T1");
  Index by_x = 0;
  Index by_y = 0;
  for (Index j = 1; j < dx.size(); ++j) {
    if (dx[j] < dx[by_x] || (dx[j] == dx[by_x] && dy[j] < dy[by_x])) by_x = j;
    if (dy[j] < dy[by_y] || (dy[j] == dy[by_y] && dx[j] < dx[by_y])) by_y = j;
  }
  if (by_x == by_y) return {by_x};
  return {by_x, by_y};
}

std::vector<DistancePair> mine_pairs(FeatureView p_hat, LabelView true_labels, FeatureView z, const Matrix& t1_features_std,
                                     const LabelMatrix& t1_labels) {
  const auto n1 = static_cast<Index>(t1_features_std.rows());
  if (n1 == 0) throw DataError("pair mining needs a nonempty T1");
  if (static_cast<Index>(t1_labels.rows()) != n1) throw DataError("T1 feature and label rows differ");
  if (z.size() != static_cast<Index>(t1_features_std.cols())) throw DataError("feature dimension mismatch in mining");
  if (p_hat.size() != static_cast<Index>(t1_labels.cols()) || true_labels.size() != p_hat.size())
    throw DataError("label dimension mismatch in mining");

  std::vector<double> dx(n1), dy(n1);
  for (Index j = 0; j < n1; ++j) {
    dx[j] = euclidean(z, row_view(t1_features_std, j));
    dy[j] = euclidean(p_hat, row_view(t1_labels, j));
  }
  std::vector<DistancePair> out;
  for (auto j : select_pairs(dx, dy))
    out.push_back({dx[j], dy[j], hamming_count(true_labels, row_view(t1_labels, j)), j});
  return out;
}

double binomial_loglik(std::span<const DistancePair> pairs, int label_count, const Eigen::Vector3d& beta) {
  double ll = 0.0;
  for (const auto& p : pairs) {
    const double f = beta.dot(covariates(p));
    ll += p.loss * f - label_count * log1p_exp(f);
  }
  return ll;
}

Eigen::Vector3d binomial_gradient(std::span<const DistancePair> pairs, int label_count, const Eigen::Vector3d& beta) {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (const auto& p : pairs) {
    const Eigen::Vector3d x = covariates(p);
    g += (p.loss - label_count * inverse_logit(beta.dot(x))) * x;
  }
  return g;
}

BinomialFit fit_binomial_glm(std::span<const DistancePair> pairs, int label_count, const GlmOptions& options) {
  if (pairs.empty()) throw TrainingError("binomial regression needs at least one pair");
  if (label_count < 1) throw std::invalid_argument("label count must be positive");
  long long total = 0;
  bool all_zero = true;
  bool all_full = true;
  for (const auto& p : pairs) {
    if (p.loss < 0 || p.loss > label_count) throw DataError("loss count outside [0, L]");
    if (!std::isfinite(p.dx) || !std::isfinite(p.dy)) throw DataError("non-finite distance");
    total += p.loss;
    all_zero = all_zero && p.loss == 0;
    all_full = all_full && p.loss == label_count;
  }
  if (all_zero || all_full)
    throw TrainingError(std::string("binomial regression is degenerate: every loss is ") + (all_zero ? "0" : "L"));

  const double rate = static_cast<double>(total) / (static_cast<double>(pairs.size()) * label_count);
  Eigen::Vector3d beta(logit(rate), 0.0, 0.0);
  double current = binomial_loglik(pairs, label_count, beta);

  BinomialFit fit;
  Eigen::Vector3d g = binomial_gradient(pairs, label_count, beta);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < options.tol) {
      fit.converged = true;
      break;
    }
    Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
    for (const auto& p : pairs) {
      const Eigen::Vector3d x = covariates(p);
      const double t = inverse_logit(beta.dot(x));
      info.noalias() += label_count * t * (1.0 - t) * x * x.transpose();
    }
    // Minimum-norm step keeps constant covariates (e.g. all dx = 0) harmless.
    const Eigen::Vector3d step = info.completeOrthogonalDecomposition().solve(g);

    // Near the optimum the log-likelihood change drops below rounding noise.
    const double slack = 1e-12 * std::fabs(current);
    double scale = 1.0;
    Eigen::Vector3d candidate = beta + step;
    double value = binomial_loglik(pairs, label_count, candidate);
    for (int h = 0; h < 30 && !(value >= current - slack); ++h) {
      scale *= 0.5;
      candidate = beta + scale * step;
      value = binomial_loglik(pairs, label_count, candidate);
    }
    fit.iterations = iter + 1;
    if (!(value >= current - slack) || !candidate.allFinite()) break;
    beta = candidate;
    current = value;
    g = binomial_gradient(pairs, label_count, beta);
  }
  if (!fit.converged && g.lpNorm<Eigen::Infinity>() < options.tol) fit.converged = true;

  // Under separation the gradient vanishes only as the scores run off to
  // infinity, so a saturated fit counts as divergence.
  double max_score = 0.0;
  for (const auto& p : pairs) max_score = std::max(max_score, std::fabs(beta.dot(covariates(p))));
  if (max_score > kSaturatedScore) fit.converged = false;

  fit.beta0 = beta[0];
  fit.beta1 = beta[1];
  fit.beta2 = beta[2];
  fit.final_gradient_norm = g.lpNorm<Eigen::Infinity>();
  if (!beta.allFinite()) fit.converged = false;
  return fit;
}

double theta(const BinomialFit& fit, double dx, double dy) { return inverse_logit(linear_score(fit, dx, dy)); }

NlddModel nldd_train(const Dataset& full, const NlddParams& params, std::vector<DistancePair>* mined) {
  full.validate();
  if (!(params.subsample_fraction > 0.0 && params.subsample_fraction <= 1.0))
    throw std::invalid_argument("subsample fraction must lie in (0, 1]");

  Dataset data;
  if (params.subsample_fraction < 1.0) {
    const auto keep = static_cast<Index>(std::llround(params.subsample_fraction * static_cast<double>(full.rows())));
    auto order = random_permutation(full.rows(), derive_seed(params.seed, 1));
    order.resize(keep);
    std::sort(order.begin(), order.end());
    data = full.subset(order);
  } else {
    data = full;
  }
  if (data.rows() < 4) throw DataError("NLDD needs at least 4 training rows, got " + std::to_string(data.rows()));

  NlddModel model;
  model.stats = standardize_fit(data);
  model.train_features_std = standardize_apply(model.stats, data.features);
  model.train_labelsets = data.labels;

  const auto split = split_random(data, params.seed);
  const Dataset t1 = data.subset(split.t1_indices);
  const BRModel h_star = br_fit(t1, params.lambda, params.threads);

  Matrix t1_std(static_cast<Eigen::Index>(split.t1_indices.size()), model.train_features_std.cols());
  for (Index r = 0; r < split.t1_indices.size(); ++r)
    t1_std.row(static_cast<Eigen::Index>(r)) = model.train_features_std.row(static_cast<Eigen::Index>(split.t1_indices[r]));

  std::vector<std::vector<DistancePair>> per_instance(split.t2_indices.size());
  parallel_for(split.t2_indices.size(), params.threads, [&](Index i) {
    const Index row = split.t2_indices[i];
    const Vector p_hat = br_predict_proba(h_star, data.x(row));
    per_instance[i] = mine_pairs({p_hat.data(), static_cast<Index>(p_hat.size())}, data.y(row),
                                 row_view(model.train_features_std, row), t1_std, t1.labels);
  });

  std::vector<DistancePair> pairs;
  for (auto& v : per_instance)
    for (auto& p : v) {
      p.t1_row = split.t1_indices[p.t1_row];
      pairs.push_back(p);
    }

  model.info.train_rows = data.rows();
  model.info.t1_rows = split.t1_indices.size();
  model.info.t2_rows = split.t2_indices.size();
  model.info.pair_count = pairs.size();
  model.info.distance_ops = static_cast<std::uint64_t>(split.t1_indices.size()) * split.t2_indices.size();

  const int labels = static_cast<int>(data.label_count());
  try {
    model.fit = fit_binomial_glm(pairs, labels, params.glm);
  } catch (const TrainingError& e) {
    throw TrainingError(std::string("fitting the loss model on ") + std::to_string(pairs.size()) + " pairs: " + e.what());
  }
  if (!model.fit.converged) {
    const BinomialFit failed = model.fit;
    long long total = 0;
    for (const auto& p : pairs) total += p.loss;
    const double rate = static_cast<double>(total) / (static_cast<double>(pairs.size()) * labels);
    model.fit = {};
    model.fit.beta0 = logit(std::clamp(rate, kProbabilityFloor, 1.0 - kProbabilityFloor));
    model.fit.beta1 = 0.0;
    model.fit.beta2 = 1.0;
    model.fit.iterations = failed.iterations;
    model.fit.final_gradient_norm = failed.final_gradient_norm;
    model.fit.fallback = true;
    model.info.warning = "loss model did not converge after " + std::to_string(failed.iterations) +
                         " iterations (gradient " + std::to_string(failed.final_gradient_norm) +
                         "); using label-space distance only";
  }

  model.br = br_fit(data, params.lambda, params.threads);
  if (mined) *mined = std::move(pairs);
  return model;
}

NlddPrediction predict_with_confidence(const NlddModel& model, FeatureView x) {
  const Vector p_hat = br_predict_proba(model.br, x);
  std::vector<double> z(x.size());
  standardize_row(model.stats, x, z);
  const FeatureView p{p_hat.data(), static_cast<Index>(p_hat.size())};

  const auto n = static_cast<Index>(model.train_features_std.rows());
  if (n == 0) throw DataError("model holds no training rows");
  NlddPrediction best;
  double best_score = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double dx = euclidean(z, row_view(model.train_features_std, j));
    const double dy = euclidean(p, row_view(model.train_labelsets, j));
    const double score = linear_score(model.fit, dx, dy);
    const bool better = j == 0 || score < best_score ||
                        (score == best_score && (dy < best.dy || (dy == best.dy && dx < best.dx)));
    if (better) {
      best_score = score;
      best.train_row = j;
      best.dx = dx;
      best.dy = dy;
    }
  }
  best.labels = to_labelset(row_view(model.train_labelsets, best.train_row));
  best.theta = theta(model.fit, best.dx, best.dy);
  return best;
}

Labelset nldd_predict(const NlddModel& model, FeatureView x) { return predict_with_confidence(model, x).labels; }

}  // namespace nldd

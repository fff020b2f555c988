#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "nldd/eval.hpp"
#include "support/oracles.hpp"

using namespace nldd;

namespace {

Dataset synthetic(std::uint64_t seed, Index n = 200, double correlation = 0.8) {
  SyntheticParams p;
  p.n = n;
  p.seed = seed;
  p.correlation = correlation;
  return generate_synthetic(p);
}

double mean_pairwise_correlation(const LabelMatrix& y) {
  const Eigen::MatrixXd m = y.cast<double>();
  double total = 0;
  int pairs = 0;
  for (Eigen::Index a = 0; a < m.cols(); ++a)
    for (Eigen::Index b = a + 1; b < m.cols(); ++b) {
      const auto ca = m.col(a).array() - m.col(a).mean();
      const auto cb = m.col(b).array() - m.col(b).mean();
      total += (ca * cb).sum() / std::sqrt(ca.square().sum() * cb.square().sum());
      ++pairs;
    }
  return total / pairs;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("smbr") == Method::smbr);
  CHECK(method_name(Method::nldd) == "nldd");
  CHECK_THROWS_AS(parse_method("lp"), std::invalid_argument);
}

TEST_CASE("fold plans partition the rows") {
  for (int k : {2, 3, 10}) {
    const auto plan = make_fold_plan(47, k, 5);
    std::vector<int> sizes(k, 0);
    for (int f : plan.fold_assignments) {
      REQUIRE(f >= 0);
      REQUIRE(f < k);
      ++sizes[f];
    }
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
    std::set<Index> seen;
    for (int f = 0; f < k; ++f) {
      const auto test = plan.test_rows(f), train = plan.train_rows(f);
      CHECK(test.size() + train.size() == 47);
      for (auto r : test) CHECK(seen.insert(r).second);
    }
    CHECK(seen.size() == 47);
  }
  CHECK(make_fold_plan(47, 10, 5).fold_assignments == make_fold_plan(47, 10, 5).fold_assignments);
}

TEST_CASE("cross_validate") {
  const auto small = synthetic(0, 12);
  const auto loo = cross_validate(small, Method::br, 12, {});
  CHECK(loo.folds.size() == 12);
  for (const auto& f : loo.folds) CHECK(f.n_instances == 1);

  const auto data = synthetic(1, 120);
  const auto a = cross_validate(data, Method::nldd, 5, {});
  const auto b = cross_validate(data, Method::nldd, 5, {});
  CHECK(a.plan.fold_assignments == b.plan.fold_assignments);
  double hamming = 0;
  for (Index f = 0; f < 5; ++f) {
    CHECK(a.folds[f].hamming == b.folds[f].hamming);
    CHECK(a.folds[f].zero_one == b.folds[f].zero_one);
    hamming += a.folds[f].hamming;
  }
  CHECK(a.mean.hamming == doctest::Approx(hamming / 5.0).epsilon(1e-15));
}

TEST_CASE("cross-validation folds score the fold rows exactly") {
  const auto data = synthetic(2, 60);
  MethodParams params;
  params.seed = 4;
  const auto cv = cross_validate(data, Method::smbr, 3, params);
  for (int f = 0; f < 3; ++f) {
    const auto train_rows = cv.plan.train_rows(f), test_rows = cv.plan.test_rows(f);
    const auto train = data.subset(train_rows), test = data.subset(test_rows);
    MethodParams fold_params = params;
    fold_params.seed = derive_seed(params.seed, 1000 + static_cast<std::uint64_t>(f));
    const auto model = train_method(Method::smbr, train, fold_params);
    double z = 0;
    for (Index i = 0; i < test.rows(); ++i) z += oracle::set_metrics(to_labelset(test.y(i)), predict_method(model, test.x(i))).zero_one;
    CHECK(cv.folds[f].zero_one == doctest::Approx(z / static_cast<double>(test.rows())).epsilon(1e-15));
  }
}

TEST_CASE("holdout_eval") {
  const auto data = synthetic(3, 150);
  const auto self = holdout_eval(data, data, Method::nldd, {});
  CHECK(self.n_instances == 150);
  CHECK(self.hamming < 0.05);

  // three well-separated groups along x1: BR thresholds every row to its own
  // labelset, and the noise columns keep the mined losses non-degenerate
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Matrix x(60, 4);
  LabelMatrix y(60, 2);
  for (int i = 0; i < 60; ++i) {
    x(i, 0) = 3.0 * (i % 3 - 1) + u(gen);
    for (int j = 1; j < 4; ++j) x(i, j) = nd(gen);
    y(i, 0) = x(i, 0) > -1.5;
    y(i, 1) = x(i, 0) > 1.5;
  }
  const auto memo = make_dataset(x, y);
  const auto model = nldd_train(memo);
  REQUIRE(model.fit.beta1 >= 0.0);
  REQUIRE(model.fit.beta2 >= 0.0);
  for (Index i = 0; i < memo.rows(); ++i) REQUIRE(br_predict(model.br, memo.x(i)) == to_labelset(memo.y(i)));
  CHECK(holdout_eval(memo, memo, Method::nldd, {}).hamming == 0.0);
  CHECK_THROWS(holdout_eval(data, data.subset(std::vector<Index>{}), Method::br, {}));
}

TEST_CASE("holdout_split") {
  const auto s = holdout_split(40, 0.75, 1);
  CHECK(s.t1_indices.size() == 30);
  CHECK(s.t2_indices.size() == 10);
}

TEST_CASE("wilcoxon examples") {
  const std::vector<double> a{1.1, 2.2, 3.3, 4.4, 5.5}, zero(5, 0.0);
  const auto r = wilcoxon_signed_rank(a, zero, Alternative::greater);
  CHECK(r.statistic == 15.0);
  CHECK(r.p_value == 0.03125);
  CHECK(r.exact);

  const auto same = wilcoxon_signed_rank(a, a, Alternative::less);
  CHECK(same.p_value == 1.0);
  CHECK(same.statistic == 0.0);
  CHECK(same.all_zero);
  CHECK(same.n_effective == 0);
}

TEST_CASE("exact wilcoxon equals 2^n enumeration") {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + gen() % 12;
    std::vector<double> a(n), b(n);
    for (Index i = 0; i < n; ++i) {
      a[i] = static_cast<double>(gen() % 7) * 0.5;
      b[i] = static_cast<double>(gen() % 7) * 0.5;
    }
    for (auto [alt, tail] : {std::pair{Alternative::greater, oracle::Tail::greater}, std::pair{Alternative::less, oracle::Tail::less},
                             std::pair{Alternative::two_sided, oracle::Tail::two_sided}}) {
      double w = 0;
      const double p = oracle::enumerate_wilcoxon_p(a, b, tail, &w);
      const auto r = wilcoxon_signed_rank(a, b, alt);
      CHECK(r.p_value == p);
      CHECK(r.statistic == w);
      CHECK(r.statistic <= static_cast<double>(r.n_effective * (r.n_effective + 1)) / 2.0);
    }
  }
}

TEST_CASE("normal approximation above the exact limit") {
  // reference values from an independent statistics package (continuity and tie corrections)
  const std::vector<double> d{0.5, -1.25, 2, 3, 3, -0.5, 4, 1.5, 2.5, -2, 5, 6, 0.75,
                              1, 1, -3, 7, 2.25, 8, 0.25, 9, -0.125, 1.75, 3.5, 10};
  const std::vector<double> zero(d.size(), 0.0);
  const auto g = wilcoxon_signed_rank(d, zero, Alternative::greater);
  CHECK_FALSE(g.exact);
  CHECK(g.statistic == 285.0);
  CHECK(g.p_value == doctest::Approx(0.0005122996258251521).epsilon(1e-10));
  CHECK(wilcoxon_signed_rank(d, zero, Alternative::less).p_value == doctest::Approx(0.9995345172939768).epsilon(1e-10));
  CHECK(wilcoxon_signed_rank(d, zero, Alternative::two_sided).p_value == doctest::Approx(0.0010245992516503043).epsilon(1e-10));
}

TEST_CASE("average ranks") {
  // hand-ranked: obs 0 -> (1, 2, 3), obs 1 -> (2.5, 1, 2.5), obs 2 -> (3, 2, 1)
  const std::vector<std::vector<double>> scores{{0.1, 0.2, 0.3}, {0.5, 0.4, 0.5}, {0.9, 0.8, 0.7}};
  const auto lower = average_ranks(scores, true);
  CHECK(lower[0] == doctest::Approx(6.5 / 3.0));
  CHECK(lower[1] == doctest::Approx(5.0 / 3.0));
  CHECK(lower[2] == doctest::Approx(6.5 / 3.0));
  const auto higher = average_ranks(scores, false);
  CHECK(higher[0] == doctest::Approx(5.5 / 3.0));
  CHECK(higher[1] == doctest::Approx(7.0 / 3.0));
  CHECK(higher[2] == doctest::Approx(5.5 / 3.0));
  const std::vector<double> v{3, 1, 3, 2};
  CHECK(rank_average_ties(v) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("generate_synthetic") {
  const auto a = synthetic(5, 100);
  const auto b = synthetic(5, 100);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.rows() == 100);
  CHECK(a.feature_count() == 10);
  CHECK(a.label_count() == 6);

  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(dataset_summary(synthetic(seed, 300, 1.0)).distinct_labelsets <= 2);

  double c0 = 0, c5 = 0, c1 = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    c0 += mean_pairwise_correlation(synthetic(seed, 1000, 0.0).labels);
    c5 += mean_pairwise_correlation(synthetic(seed, 1000, 0.5).labels);
    c1 += mean_pairwise_correlation(synthetic(seed, 1000, 1.0).labels);
  }
  CHECK(std::fabs(c0 / 10.0) < 0.03);
  CHECK(c0 < c5);
  CHECK(c5 < c1);

  SyntheticParams bad;
  bad.n = 7;
  CHECK_THROWS(generate_synthetic(bad));
  bad = {};
  bad.correlation = 1.5;
  CHECK_THROWS(generate_synthetic(bad));
  bad = {};
  bad.labels = 1;
  CHECK_THROWS(generate_synthetic(bad));
}

TEST_CASE("independent labels at zero correlation") {
  // joint frequency of two labels equals the product of the marginals
  double worst = 0;
  const auto data = synthetic(0, 20000, 0.0);
  const Eigen::MatrixXd m = data.labels.cast<double>();
  for (Eigen::Index a = 0; a < m.cols(); ++a)
    for (Eigen::Index b = a + 1; b < m.cols(); ++b) {
      const double joint = (m.col(a).array() * m.col(b).array()).mean();
      worst = std::max(worst, std::fabs(joint - m.col(a).mean() * m.col(b).mean()));
    }
  CHECK(worst < 0.015);
}

TEST_CASE("scaling_experiment") {
  const auto all = synthetic(0, 300);
  std::vector<Index> tr(200), te(100);
  std::iota(tr.begin(), tr.end(), Index{0});
  std::iota(te.begin(), te.end(), Index{200});
  const std::vector<double> fractions{0.5, 1.0};
  const auto rows = scaling_experiment(all.subset(tr), all.subset(te), fractions, {});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].train_rows == 100);
  CHECK(rows[0].distance_ops == 50u * 50u);
  CHECK(rows[1].distance_ops == 100u * 100u);
  CHECK(static_cast<double>(rows[1].distance_ops) / static_cast<double>(rows[0].distance_ops) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(rows[1].wall_seconds >= 0.0);

  const std::vector<double> tiny{0.01};
  CHECK_THROWS(scaling_experiment(all.subset(tr), all.subset(te), tiny, {}));
}

TEST_CASE("more training data lowers mismatched labels") {
  const std::vector<double> fractions{0.1, 1.0};
  double small = 0, full = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = synthetic(seed, 400);
    MethodParams p;
    p.seed = seed;
    const auto rows = scaling_experiment(data, fractions, p);
    small += rows[0].mean_mismatched_labels;
    full += rows[1].mean_mismatched_labels;
  }
  CHECK(full <= small);
}

TEST_CASE("observed_labelset_split") {
  const auto data = synthetic(6, 80);
  const auto self = observed_labelset_split(data, data);
  CHECK(self.observed.size() == 80);
  CHECK(self.unobserved.empty());

  LabelMatrix y(3, 2), z(3, 2);
  y << 0, 1, 1, 0, 0, 1;
  z << 0, 1, 1, 1, 0, 0;
  const auto s = observed_labelset_split(make_dataset(Matrix::Zero(3, 1), y), make_dataset(Matrix::Zero(3, 1), z));
  CHECK(s.observed == std::vector<Index>{0});
  CHECK(s.unobserved == std::vector<Index>{1, 2});
  CHECK_THROWS_AS(observed_labelset_split(data, make_dataset(Matrix::Zero(3, 10), LabelMatrix::Zero(3, 2))), DataError);
}

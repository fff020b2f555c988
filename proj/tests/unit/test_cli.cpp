#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "nldd/eval.hpp"
#include "nldd/model_io.hpp"
#include "support/oracles.hpp"

using namespace nldd;
using json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "nldd");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) v.push_back(l);
  return v;
}

std::vector<json> records(const std::filesystem::path& p) {
  std::vector<json> v;
  for (const auto& l : lines(slurp(p))) v.push_back(json::parse(l));
  return v;
}

double field(const std::string& out, const std::string& key) {
  for (const auto& l : lines(out))
    if (l.rfind(key + " ", 0) == 0) return std::stod(l.substr(key.size()));
  FAIL("missing " << key);
  return 0;
}

Dataset fixture(std::uint64_t seed, Index n) {
  SyntheticParams p;
  p.n = n;
  p.seed = seed;
  return generate_synthetic(p);
}

}  // namespace

TEST_CASE("train writes a model and prints nonnegative coefficients") {
  oracle::TempDir dir;
  write_csv(fixture(0, 200), dir / "toy.csv");
  const auto r = run({"train", "--method", "nldd", "--data", (dir / "toy.csv").string(), "--labels", "6", "--model",
                      (dir / "m.json").string()});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "m.json"));
  CHECK(field(r.out, "beta1") >= 0.0);
  CHECK(field(r.out, "beta2") >= 0.0);
}

TEST_CASE("same seed gives byte-identical model files") {
  oracle::TempDir dir;
  write_csv(fixture(1, 150), dir / "toy.csv");
  for (const char* name : {"a.json", "b.json"})
    REQUIRE(run({"train", "--method", "nldd", "--data", (dir / "toy.csv").string(), "--labels", "6", "--seed", "5",
                 "--subsample", "0.7", "--model", (dir / name).string()})
                .code == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
}

TEST_CASE("predict") {
  oracle::TempDir dir;
  const auto data = fixture(2, 150);
  write_csv(data, dir / "toy.csv");
  REQUIRE(run({"train", "--method", "nldd", "--data", (dir / "toy.csv").string(), "--labels", "6", "--model",
               (dir / "m.json").string()})
              .code == 0);
  const auto r = run({"predict", "--model", (dir / "m.json").string(), "--data", (dir / "toy.csv").string(), "--confidence"});
  REQUIRE(r.code == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() == data.rows());

  const auto model = std::get<NlddModel>(load_model(dir / "m.json"));
  for (Index i = 0; i < data.rows(); ++i) {
    const auto pred = predict_with_confidence(model, data.x(i));
    std::string expected;
    for (Index l = 0; l < 6; ++l) expected += std::string(l ? "," : "") + (pred.labels[l] ? "1" : "0");
    CHECK(out[i].substr(0, expected.size()) == expected);
    const double t = std::stod(out[i].substr(expected.size() + 1));
    CHECK(t > 0.0);
    CHECK(t < 1.0);
  }

  REQUIRE(run({"predict", "--model", (dir / "m.json").string(), "--data", (dir / "toy.csv").string(), "--out",
               (dir / "p.csv").string()})
              .code == 0);
  CHECK(lines(slurp(dir / "p.csv")).size() == data.rows());
}

TEST_CASE("predict on a duplicated training row returns its labelset") {
  // separated groups along x1 plus noise columns; BR thresholds every row to
  // its own labelset
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
  oracle::TempDir dir;
  write_csv(make_dataset(x, y), dir / "groups.csv");
  const auto train = run({"train", "--method", "nldd", "--data", (dir / "groups.csv").string(), "--labels", "2", "--model",
                          (dir / "m.json").string()});
  REQUIRE(train.code == 0);
  REQUIRE(field(train.out, "beta1") >= 0.0);
  REQUIRE(field(train.out, "beta2") >= 0.0);
  const auto r = run({"predict", "--model", (dir / "m.json").string(), "--data", (dir / "groups.csv").string()});
  REQUIRE(r.code == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() == 60);
  for (int i = 0; i < 60; ++i) CHECK(out[i] == std::to_string(y(i, 0)) + "," + std::to_string(y(i, 1)));
}

TEST_CASE("eval with --cv echoes cross_validate") {
  oracle::TempDir dir;
  const auto data = fixture(3, 100);
  write_csv(data, dir / "toy.csv");
  const auto r = run({"eval", "--method", "smbr", "--data", (dir / "toy.csv").string(), "--labels", "6", "--cv", "10", "--seed",
                      "3", "--out", (dir / "report.jsonl").string()});
  REQUIRE(r.code == 0);
  const auto recs = records(dir / "report.jsonl");
  REQUIRE(recs.size() == 11);
  CHECK(recs.back()["fold"] == "mean");
  MethodParams p;
  p.seed = 3;
  const auto cv = cross_validate(data, Method::smbr, 10, p);
  for (Index f = 0; f < 10; ++f) {
    CHECK(recs[f]["fold"] == f);
    CHECK(recs[f]["hamming"].get<double>() == cv.folds[f].hamming);
    CHECK(recs[f]["zero_one"].get<double>() == cv.folds[f].zero_one);
    CHECK(recs[f]["jaccard"].get<double>() == cv.folds[f].jaccard);
    CHECK(recs[f]["f_measure"].get<double>() == cv.folds[f].f_measure);
  }
  CHECK(recs[10]["hamming"].get<double>() == cv.mean.hamming);
  // header, 10 folds, mean
  int table_rows = 0;
  for (const auto& l : lines(r.out))
    if (std::isdigit(static_cast<unsigned char>(l[0])) || l.rfind("mean", 0) == 0) ++table_rows;
  CHECK(table_rows == 11);
}

TEST_CASE("eval with --test reports observed and unobserved subsets") {
  oracle::TempDir dir;
  write_csv(fixture(4, 200), dir / "train.csv");
  write_csv(fixture(5, 100), dir / "test.csv");
  const auto r = run({"eval", "--method", "br", "--data", (dir / "train.csv").string(), "--test", (dir / "test.csv").string(),
                      "--labels", "6", "--out", (dir / "r.jsonl").string()});
  REQUIRE(r.code == 0);
  const auto recs = records(dir / "r.jsonl");
  REQUIRE(recs.size() >= 2);
  CHECK(recs[0]["fold"] == "test");
  Index parts = 0;
  for (Index i = 1; i < recs.size(); ++i) parts += recs[i]["n"].get<Index>();
  CHECK(parts == 100);
}

TEST_CASE("compare a method against itself") {
  oracle::TempDir dir;
  write_csv(fixture(6, 80), dir / "toy.csv");
  const auto r = run({"compare", "--method", "br,br", "--data", (dir / "toy.csv").string(), "--labels", "6", "--cv", "4", "--out",
                      (dir / "c.jsonl").string()});
  REQUIRE(r.code == 0);
  int wilcoxon = 0;
  for (const auto& rec : records(dir / "c.jsonl")) {
    if (rec["type"] == "rank") CHECK(rec["average_rank"].get<double>() == 1.5);
    if (rec["type"] == "wilcoxon") {
      CHECK(rec["p_value"].get<double>() == 1.0);
      ++wilcoxon;
    }
  }
  CHECK(wilcoxon == 8);
}

TEST_CASE("two methods on nine datasets give nine paired observations") {
  oracle::TempDir dir;
  std::vector<std::string> args{"compare", "--method", "br,smbr", "--labels", "6", "--cv", "3", "--out", (dir / "c.jsonl").string()};
  for (int i = 0; i < 9; ++i) {
    const auto name = (dir / ("d" + std::to_string(i) + ".csv")).string();
    write_csv(fixture(10 + i, 40), name);
    args.push_back("--data");
    args.push_back(name);
  }
  REQUIRE(run(args).code == 0);
  std::map<std::string, int> scores;
  for (const auto& rec : records(dir / "c.jsonl")) {
    if (rec["type"] == "score") ++scores[rec["metric"].get<std::string>() + "/" + rec["method"].get<std::string>()];
    if (rec["type"] == "wilcoxon") CHECK(rec["n_effective"].get<Index>() <= 9);
  }
  REQUIRE(scores.size() == 8);
  for (const auto& [key, count] : scores) CHECK(count == 9);
}

TEST_CASE("scaling and summary") {
  oracle::TempDir dir;
  write_csv(fixture(7, 120), dir / "toy.csv");
  const auto s = run({"scaling", "--data", (dir / "toy.csv").string(), "--labels", "6", "--fractions", "0.5,1.0", "--out",
                      (dir / "s.jsonl").string()});
  REQUIRE(s.code == 0);
  const auto recs = records(dir / "s.jsonl");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0]["distance_ops"].get<std::uint64_t>() == 23u * 22u);
  CHECK(recs[1]["distance_ops"].get<std::uint64_t>() == 45u * 45u);

  const auto sum = run({"summary", "--data", (dir / "toy.csv").string(), "--labels", "6"});
  REQUIRE(sum.code == 0);
  CHECK(sum.out.find("120") != std::string::npos);
}

TEST_CASE("exit codes") {
  oracle::TempDir dir;
  write_csv(fixture(8, 60), dir / "toy.csv");
  const auto data = (dir / "toy.csv").string();
  CHECK(run({"train", "--method", "nldd", "--data", data, "--model", (dir / "m.json").string()}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"eval", "--method", "lp", "--data", data, "--labels", "6"}).code == cli::kUsage);
  CHECK(run({"eval", "--data", data, "--labels", "6", "--lambda", "-1"}).code == cli::kUsage);
  CHECK(run({"predict", "--model", (dir / "m.json").string(), "--data", data}).code == cli::kData);

  std::ofstream(dir / "bad.csv") << "f,l\n1,0\n2,2\n";
  const auto bad = run({"summary", "--data", (dir / "bad.csv").string(), "--labels", "1"});
  CHECK(bad.code == cli::kData);
  CHECK(bad.err.find("line 3") != std::string::npos);

  // every labelset identical: all mined losses are 0
  std::ofstream(dir / "flat.csv") << "a,b,y1,y2\n1,2,1,0\n3,1,1,0\n0,5,1,0\n2,2,1,0\n4,4,1,0\n1,1,1,0\n";
  CHECK(run({"train", "--method", "nldd", "--data", (dir / "flat.csv").string(), "--labels", "2", "--model",
             (dir / "f.json").string()})
            .code == cli::kTraining);

  REQUIRE(run({"train", "--method", "br", "--data", data, "--labels", "6", "--model", (dir / "br.json").string()}).code == 0);
  std::ofstream(dir / "narrow.csv") << "a,b\n1,2\n";
  CHECK(run({"predict", "--model", (dir / "br.json").string(), "--data", (dir / "narrow.csv").string()}).code == cli::kData);
  CHECK(run({"predict", "--model", (dir / "br.json").string(), "--data", data, "--confidence"}).code == cli::kUsage);
}

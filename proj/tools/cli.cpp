#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nldd/data.hpp"
#include "nldd/eval.hpp"
#include "nldd/model_io.hpp"

namespace nldd::cli {
namespace {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> data;
  std::string test;
  std::vector<std::size_t> labels;
  std::string method = "nldd";
  std::string model;
  std::string out;
  std::uint64_t seed = 0;
  int cv = 0;
  double lambda = 1.0;
  double subsample = 1.0;
  bool confidence = false;
  unsigned threads = 1;
  std::string format = "csv";
  std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
};

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

Dataset load_dataset(const std::string& path, std::size_t labels, const std::string& format) {
  if (labels == 0) throw UsageError("--labels must be at least 1");
  if (format == "csv") return load_csv(path, labels);
  if (format == "sparse") return load_sparse(path, labels);
  throw UsageError("--format must be csv or sparse");
}

std::size_t labels_for(const Options& o, std::size_t i) {
  if (o.labels.empty()) throw UsageError("--labels is required");
  if (o.labels.size() == 1) return o.labels[0];
  if (o.labels.size() != o.data.size()) throw UsageError("give one --labels value, or one per --data");
  return o.labels[i];
}

MethodParams method_params(const Options& o) {
  if (!(o.lambda > 0.0)) throw UsageError("--lambda must be positive");
  if (!(o.subsample > 0.0 && o.subsample <= 1.0)) throw UsageError("--subsample must lie in (0, 1]");
  MethodParams p;
  p.seed = o.seed;
  p.lambda = o.lambda;
  p.subsample_fraction = o.subsample;
  p.threads = std::max(1u, o.threads);
  return p;
}

class ReportWriter {
public:
  explicit ReportWriter(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw DataError("cannot write report " + path);
  }
  void write(const json& record) {
    if (file_.is_open()) file_ << record.dump() << '\n';
  }

private:
  std::ofstream file_;
};

json metrics_json(const MetricsReport& r) {
  return {{"n", r.n_instances}, {"hamming", r.hamming}, {"zero_one", r.zero_one}, {"jaccard", r.jaccard},
          {"f_measure", r.f_measure}};
}

void print_metrics_header(std::ostream& out) {
  out << pad("fold", 12) << pad("n", 8) << pad("hamming", 10) << pad("zero_one", 10) << pad("jaccard", 10)
      << "f_measure\n";
}

void print_metrics_row(std::ostream& out, const std::string& name, const MetricsReport& r) {
  out << pad(name, 12) << pad(std::to_string(r.n_instances), 8) << pad(fixed(r.hamming), 10)
      << pad(fixed(r.zero_one), 10) << pad(fixed(r.jaccard), 10) << fixed(r.f_measure) << '\n';
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.data.size() != 1) throw UsageError("train takes exactly one --data");
  if (o.model.empty()) throw UsageError("--model is required");
  const Method method = parse_method(o.method);
  if (method == Method::smbr) throw UsageError("train supports --method br or nldd");
  const auto data = load_dataset(o.data[0], labels_for(o, 0), o.format);
  const auto params = method_params(o);

  out << "method      " << o.method << '\n'
      << "rows        " << data.rows() << '\n'
      << "features    " << data.feature_count() << '\n'
      << "labels      " << data.label_count() << '\n';
  if (method == Method::br) {
    const auto model = br_fit(data, params.lambda, params.threads);
    save_model(model, o.model);
  } else {
    const auto trained = std::get<NlddModel>(train_method(Method::nldd, data, params));
    if (!trained.info.warning.empty()) err << "warning: " << trained.info.warning << '\n';
    out << "train_rows  " << trained.info.train_rows << '\n'
        << "pairs       " << trained.info.pair_count << '\n'
        << "beta0       " << shortest(trained.fit.beta0) << '\n'
        << "beta1       " << shortest(trained.fit.beta1) << '\n'
        << "beta2       " << shortest(trained.fit.beta2) << '\n'
        << "converged   " << (trained.fit.converged ? "true" : "false") << '\n';
    save_model(trained, o.model);
  }
  out << "model       " << o.model << '\n';
  return kOk;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream&) {
  if (o.model.empty()) throw UsageError("--model is required");
  if (o.data.size() != 1) throw UsageError("predict takes exactly one --data");
  const auto model = load_model(o.model);
  const bool is_nldd = std::holds_alternative<NlddModel>(model);
  if (o.confidence && !is_nldd) throw UsageError("--confidence needs an nldd model");

  const Index d = is_nldd ? std::get<NlddModel>(model).feature_count() : std::get<BRModel>(model).feature_count();
  const Index labels = is_nldd ? std::get<NlddModel>(model).label_count() : std::get<BRModel>(model).label_count();
  Matrix features;
  if (o.format == "csv")
    features = load_csv_features(o.data[0], d, labels);
  else if (o.format == "sparse")
    features = load_sparse(o.data[0], labels, d).features;
  else
    throw UsageError("--format must be csv or sparse");

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary);
    if (!file) throw DataError("cannot write " + o.out);
  }
  std::ostream& sink = o.out.empty() ? out : file;
  for (Index r = 0; r < static_cast<Index>(features.rows()); ++r) {
    const auto x = row_view(features, r);
    Labelset y;
    std::optional<double> theta_hat;
    if (is_nldd) {
      auto p = predict_with_confidence(std::get<NlddModel>(model), x);
      y = std::move(p.labels);
      theta_hat = p.theta;
    } else {
      y = br_predict(std::get<BRModel>(model), x);
    }
    std::string line;
    for (Index i = 0; i < y.size(); ++i) line += (i ? "," : "") + std::string(y[i] ? "1" : "0");
    if (o.confidence) line += "," + shortest(*theta_hat);
    sink << line << '\n';
  }
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
  if (o.data.size() != 1) throw UsageError("eval takes exactly one --data");
  if (!o.test.empty() && o.cv != 0) throw UsageError("give either --test or --cv, not both");
  const Method method = parse_method(o.method);
  const auto data = load_dataset(o.data[0], labels_for(o, 0), o.format);
  const auto params = method_params(o);
  ReportWriter report(o.out);

  out << "method " << o.method << '\n';
  print_metrics_header(out);
  if (!o.test.empty()) {
    const auto test = load_dataset(o.test, labels_for(o, 0), o.format);
    if (test.feature_count() != data.feature_count() || test.label_count() != data.label_count())
      throw DataError("test dimensions do not match training data");
    const auto model = train_method(method, data, params);
    const auto predictions = predict_all(model, test.features, params.threads);
    const auto scores = score_all(test.labels, predictions);
    const auto total = aggregate(scores);
    print_metrics_row(out, "test", total);
    json rec = {{"method", o.method}, {"fold", "test"}};
    rec.update(metrics_json(total));
    report.write(rec);

    const auto split = observed_labelset_split(data, test);
    for (const auto& [name, rows] : {std::pair{"observed", split.observed}, std::pair{"unobserved", split.unobserved}}) {
      if (rows.empty()) continue;
      std::vector<InstanceMetrics> part;
      for (auto r : rows) part.push_back(scores[r]);
      const auto m = aggregate(part);
      print_metrics_row(out, name, m);
      json sub = {{"method", o.method}, {"fold", name}};
      sub.update(metrics_json(m));
      report.write(sub);
    }
    return kOk;
  }

  const int k = o.cv == 0 ? 10 : o.cv;
  if (k < 2) throw UsageError("--cv must be at least 2");
  const auto cv = cross_validate(data, method, k, params);
  for (int f = 0; f < k; ++f) {
    print_metrics_row(out, std::to_string(f), cv.folds[static_cast<Index>(f)]);
    json rec = {{"method", o.method}, {"fold", f}};
    rec.update(metrics_json(cv.folds[static_cast<Index>(f)]));
    report.write(rec);
  }
  print_metrics_row(out, "mean", cv.mean);
  json rec = {{"method", o.method}, {"fold", "mean"}};
  rec.update(metrics_json(cv.mean));
  report.write(rec);
  return kOk;
}

struct MetricSpec {
  const char* name;
  bool lower_is_better;
  double MetricsReport::*field;
};

constexpr MetricSpec kMetrics[] = {
    {"hamming", true, &MetricsReport::hamming},
    {"zero_one", true, &MetricsReport::zero_one},
    {"jaccard", false, &MetricsReport::jaccard},
    {"f_measure", false, &MetricsReport::f_measure},
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream&) {
  if (o.data.empty()) throw UsageError("compare needs at least one --data");
  const auto method_names = split_list(o.method);
  if (method_names.size() < 2) throw UsageError("compare needs at least two methods in --method");
  std::vector<Method> methods;
  std::vector<std::string> columns;
  std::map<std::string, int> seen;
  for (const auto& name : method_names) {
    methods.push_back(parse_method(name));
    const int n = ++seen[name];
    columns.push_back(n == 1 ? name : name + "#" + std::to_string(n));
  }
  const int k = o.cv == 0 ? 10 : o.cv;
  if (k < 2) throw UsageError("--cv must be at least 2");
  const auto params = method_params(o);

  // observations[unit][method]: a unit is a dataset, or a fold when only one
  // dataset is given.
  std::vector<std::string> units;
  std::vector<std::vector<MetricsReport>> observations;
  for (std::size_t i = 0; i < o.data.size(); ++i) {
    const auto data = load_dataset(o.data[i], labels_for(o, i), o.format);
    std::vector<CrossValidationResult> results;
    for (auto m : methods) results.push_back(cross_validate(data, m, k, params));
    if (o.data.size() > 1) {
      units.push_back(o.data[i]);
      std::vector<MetricsReport> row;
      for (const auto& r : results) row.push_back(r.mean);
      observations.push_back(std::move(row));
    } else {
      for (int f = 0; f < k; ++f) {
        units.push_back("fold " + std::to_string(f));
        std::vector<MetricsReport> row;
        for (const auto& r : results) row.push_back(r.folds[static_cast<Index>(f)]);
        observations.push_back(std::move(row));
      }
    }
  }
  if (observations.size() < 2) throw UsageError("compare needs at least two paired observations");

  ReportWriter report(o.out);
  std::size_t width = 12;
  for (const auto& u : units) width = std::max(width, u.size() + 2);

  for (const auto& metric : kMetrics) {
    out << "\n" << metric.name << (metric.lower_is_better ? " (lower is better)" : " (higher is better)") << '\n';
    out << pad("", width);
    for (const auto& c : columns) out << pad(c, 10);
    out << '\n';
    std::vector<std::vector<double>> table;
    for (std::size_t u = 0; u < units.size(); ++u) {
      std::vector<double> row;
      out << pad(units[u], width);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        const double v = observations[u][m].*metric.field;
        row.push_back(v);
        out << pad(fixed(v), 10);
        report.write({{"type", "score"}, {"unit", units[u]}, {"method", columns[m]}, {"metric", metric.name}, {"value", v}});
      }
      out << '\n';
      table.push_back(std::move(row));
    }
    const auto ranks = average_ranks(table, metric.lower_is_better);
    out << pad("av. ranks", width);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      out << pad(fixed(ranks[m], 2), 10);
      report.write({{"type", "rank"}, {"method", columns[m]}, {"metric", metric.name}, {"average_rank", ranks[m]}});
    }
    out << '\n';

    for (std::size_t a = 0; a < methods.size(); ++a) {
      for (std::size_t b = 0; b < methods.size(); ++b) {
        if (a == b) continue;
        std::vector<double> xa, xb;
        for (const auto& row : table) {
          xa.push_back(row[a]);
          xb.push_back(row[b]);
        }
        const auto w = wilcoxon_signed_rank(xa, xb, metric.lower_is_better ? Alternative::less : Alternative::greater);
        out << "  " << columns[a] << " better than " << columns[b] << ": W+ = " << fixed(w.statistic, 1)
            << ", n = " << w.n_effective << ", p = " << fixed(w.p_value) << (w.exact ? "" : " (normal approx.)")
            << (w.p_value < 0.05 ? "  *" : "") << '\n';
        report.write({{"type", "wilcoxon"},
                      {"metric", metric.name},
                      {"better", columns[a]},
                      {"worse", columns[b]},
                      {"statistic", w.statistic},
                      {"n_effective", w.n_effective},
                      {"p_value", w.p_value},
                      {"exact", w.exact},
                      {"significant", w.p_value < 0.05}});
      }
    }
  }
  return kOk;
}

int cmd_scaling(const Options& o, std::ostream& out, std::ostream&) {
  if (o.data.size() != 1) throw UsageError("scaling takes exactly one --data");
  const auto data = load_dataset(o.data[0], labels_for(o, 0), o.format);
  const auto params = method_params(o);
  for (double f : o.fractions)
    if (!(f > 0.0 && f <= 1.0)) throw UsageError("--fractions must lie in (0, 1]");
  const auto rows = scaling_experiment(data, o.fractions, params);
  ReportWriter report(o.out);
  out << pad("fraction", 10) << pad("rows", 8) << pad("distance_ops", 14) << pad("seconds", 10) << "mismatched\n";
  for (const auto& r : rows) {
    out << pad(fixed(r.fraction, 2), 10) << pad(std::to_string(r.train_rows), 8) << pad(std::to_string(r.distance_ops), 14)
        << pad(fixed(r.wall_seconds, 3), 10) << fixed(r.mean_mismatched_labels) << '\n';
    report.write({{"fraction", r.fraction},
                  {"train_rows", r.train_rows},
                  {"distance_ops", r.distance_ops},
                  {"wall_seconds", r.wall_seconds},
                  {"mean_mismatched_labels", r.mean_mismatched_labels}});
  }
  return kOk;
}

int cmd_summary(const Options& o, std::ostream& out, std::ostream&) {
  if (o.data.size() != 1) throw UsageError("summary takes exactly one --data");
  const auto data = load_dataset(o.data[0], labels_for(o, 0), o.format);
  const auto s = dataset_summary(data);
  out << "rows        " << s.rows << '\n'
      << "features    " << s.features << '\n'
      << "labels      " << s.labels << '\n'
      << "lcard       " << fixed(s.label_cardinality) << '\n'
      << "labelsets   " << s.distinct_labelsets << '\n';
  ReportWriter report(o.out);
  report.write({{"rows", s.rows},
                {"features", s.features},
                {"labels", s.labels},
                {"label_cardinality", s.label_cardinality},
                {"distinct_labelsets", s.distinct_labelsets}});
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-label classification with nearest labelsets using double distances"};
  app.name(args.empty() ? "nldd" : args[0]);
  app.require_subcommand(1);
  Options o;

  const auto add_data = [&](CLI::App* sub, bool many = false) {
    if (many)
      sub->add_option("--data", o.data, "Training data file (repeatable)")->required();
    else
      sub->add_option("--data", o.data, "Data file")->required()->expected(1);
    sub->add_option("--format", o.format, "Input format")->check(CLI::IsMember({"csv", "sparse"}));
  };
  const auto add_labels = [&](CLI::App* sub) {
    sub->add_option("--labels", o.labels, "Number of label columns")->required();
  };
  const auto add_training = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--lambda", o.lambda, "L2 penalty of the base classifiers");
    sub->add_option("--subsample", o.subsample, "Fraction of training rows used by nldd (0.7 suits large data)");
    sub->add_option("--threads", o.threads, "Worker threads (results do not depend on it)");
  };

  auto* train = app.add_subcommand("train", "Fit a model and write it to --model");
  add_data(train);
  add_labels(train);
  add_training(train);
  train->add_option("--method", o.method, "br or nldd")->check(CLI::IsMember({"br", "nldd"}));
  train->add_option("--model", o.model, "Output model file")->required();

  auto* predict = app.add_subcommand("predict", "Predict labelsets for the rows of --data");
  add_data(predict);
  predict->add_option("--model", o.model, "Model file")->required();
  predict->add_option("--out", o.out, "Output file (default: standard output)");
  predict->add_flag("--confidence", o.confidence, "Append the estimated per-label misclassification probability");

  auto* eval = app.add_subcommand("eval", "Cross-validate or evaluate on --test");
  add_data(eval);
  add_labels(eval);
  add_training(eval);
  eval->add_option("--method", o.method, "br, smbr or nldd")->check(CLI::IsMember({"br", "smbr", "nldd"}));
  eval->add_option("--test", o.test, "Held-out test file");
  eval->add_option("--cv", o.cv, "Number of folds (default 10)");
  eval->add_option("--out", o.out, "JSON-lines report file");

  auto* compare = app.add_subcommand("compare", "Compare methods with average ranks and Wilcoxon tests");
  add_data(compare, true);
  add_labels(compare);
  add_training(compare);
  compare->add_option("--method", o.method, "Comma-separated methods")->default_str("br,smbr,nldd");
  compare->add_option("--cv", o.cv, "Number of folds (default 10)");
  compare->add_option("--out", o.out, "JSON-lines report file");

  auto* scaling = app.add_subcommand("scaling", "NLDD cost and accuracy on growing training fractions");
  add_data(scaling);
  add_labels(scaling);
  add_training(scaling);
  scaling->add_option("--fractions", o.fractions, "Training fractions")->delimiter(',');
  scaling->add_option("--out", o.out, "JSON-lines report file");

  auto* summary = app.add_subcommand("summary", "Dataset statistics");
  add_data(summary);
  add_labels(summary);
  summary->add_option("--out", o.out, "JSON-lines report file");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("nldd");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (compare->parsed() && o.method == "nldd" && compare->count("--method") == 0) o.method = "br,smbr,nldd";

  try {
    if (train->parsed()) return cmd_train(o, out, err);
    if (predict->parsed()) return cmd_predict(o, out, err);
    if (eval->parsed()) return cmd_eval(o, out, err);
    if (compare->parsed()) return cmd_compare(o, out, err);
    if (scaling->parsed()) return cmd_scaling(o, out, err);
    if (summary->parsed()) return cmd_summary(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const TrainingError& e) {
    err << "training error: " << e.what() << '\n';
    return kTraining;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace nldd::cli

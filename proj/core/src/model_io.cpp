#include "nldd/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace nldd {
namespace {

using json = nlohmann::ordered_json;

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  return v;
}

json to_json(const StandardizationStats& s) { return {{"means", to_json(s.means)}, {"sds", to_json(s.sds)}}; }

StandardizationStats stats_from(const json& j) {
  StandardizationStats s{vector_from(j.at("means")), vector_from(j.at("sds"))};
  if (s.means.size() != s.sds.size()) throw DataError("standardization means and sds differ in length");
  return s;
}

json to_json(const BRModel& m) {
  json classifiers = json::array();
  for (const auto& c : m.classifiers) {
    if (const auto* lin = std::get_if<LinearProbModel>(&c)) {
      classifiers.push_back({{"type", "logistic"},
                             {"lambda", lin->lambda},
                             {"converged", lin->converged},
                             {"iterations", lin->iterations},
                             {"weights", to_json(lin->weights)}});
    } else {
      classifiers.push_back({{"type", "constant"}, {"p", std::get<ConstantProbModel>(c).p}});
    }
  }
  return {{"label_names", m.label_names}, {"stats", to_json(m.stats)}, {"classifiers", classifiers}};
}

BRModel br_from(const json& j) {
  BRModel m;
  m.label_names = j.at("label_names").get<std::vector<std::string>>();
  m.stats = stats_from(j.at("stats"));
  for (const auto& c : j.at("classifiers")) {
    const auto type = c.at("type").get<std::string>();
    if (type == "logistic") {
      LinearProbModel lin;
      lin.lambda = c.at("lambda").get<double>();
      lin.converged = c.at("converged").get<bool>();
      lin.iterations = c.at("iterations").get<int>();
      lin.weights = vector_from(c.at("weights"));
      if (lin.dimension() != m.stats.dimension()) throw DataError("classifier dimension does not match stats");
      m.classifiers.emplace_back(std::move(lin));
    } else if (type == "constant") {
      m.classifiers.emplace_back(ConstantProbModel{c.at("p").get<double>()});
    } else {
      throw DataError("unknown classifier type '" + type + "'");
    }
  }
  if (m.classifiers.size() != m.label_names.size()) throw DataError("classifier count does not match labels");
  return m;
}

std::string labelset_string(LabelView y) {
  std::string s(y.size(), '0');
  for (Index i = 0; i < y.size(); ++i)
    if (y[i]) s[i] = '1';
  return s;
}

json to_json(const NlddModel& m) {
  json fit = {{"beta0", m.fit.beta0},
              {"beta1", m.fit.beta1},
              {"beta2", m.fit.beta2},
              {"converged", m.fit.converged},
              {"iterations", m.fit.iterations},
              {"final_gradient_norm", m.fit.final_gradient_norm},
              {"fallback", m.fit.fallback}};
  json info = {{"train_rows", m.info.train_rows},
               {"t1_rows", m.info.t1_rows},
               {"t2_rows", m.info.t2_rows},
               {"pair_count", m.info.pair_count},
               {"distance_ops", m.info.distance_ops},
               {"warning", m.info.warning}};
  json features = json::array();
  json labelsets = json::array();
  for (Index r = 0; r < static_cast<Index>(m.train_features_std.rows()); ++r) {
    const auto x = row_view(m.train_features_std, r);
    features.push_back(json(std::vector<double>(x.begin(), x.end())));
    labelsets.push_back(labelset_string(row_view(m.train_labelsets, r)));
  }
  return {{"br", to_json(m.br)},       {"fit", fit},
          {"stats", to_json(m.stats)}, {"training", info},
          {"train_features_std", features}, {"train_labelsets", labelsets}};
}

NlddModel nldd_from(const json& j) {
  NlddModel m;
  m.br = br_from(j.at("br"));
  const auto& fit = j.at("fit");
  m.fit.beta0 = fit.at("beta0").get<double>();
  m.fit.beta1 = fit.at("beta1").get<double>();
  m.fit.beta2 = fit.at("beta2").get<double>();
  m.fit.converged = fit.at("converged").get<bool>();
  m.fit.iterations = fit.at("iterations").get<int>();
  m.fit.final_gradient_norm = fit.at("final_gradient_norm").get<double>();
  m.fit.fallback = fit.at("fallback").get<bool>();
  m.stats = stats_from(j.at("stats"));
  const auto& info = j.at("training");
  m.info.train_rows = info.at("train_rows").get<Index>();
  m.info.t1_rows = info.at("t1_rows").get<Index>();
  m.info.t2_rows = info.at("t2_rows").get<Index>();
  m.info.pair_count = info.at("pair_count").get<Index>();
  m.info.distance_ops = info.at("distance_ops").get<std::uint64_t>();
  m.info.warning = info.at("warning").get<std::string>();

  const auto& features = j.at("train_features_std");
  const auto& labelsets = j.at("train_labelsets");
  const auto n = features.size();
  if (n == 0 || labelsets.size() != n) throw DataError("model training rows are missing or inconsistent");
  const auto d = m.stats.dimension();
  const auto labels = m.br.label_count();
  if (m.br.feature_count() != d) throw DataError("model stats and classifiers disagree on dimension");
  m.train_features_std.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  m.train_labelsets.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(labels));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = features.at(r);
    const auto set = labelsets.at(r).get<std::string>();
    if (row.size() != d || set.size() != labels) throw DataError("model training row " + std::to_string(r) + " has wrong size");
    for (std::size_t c = 0; c < d; ++c)
      m.train_features_std(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row.at(c).get<double>();
    for (std::size_t c = 0; c < labels; ++c) {
      if (set[c] != '0' && set[c] != '1') throw DataError("invalid labelset string in model");
      m.train_labelsets(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = set[c] == '1';
    }
  }
  return m;
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  if (const auto* br = std::get_if<BRModel>(&model)) {
    doc["method"] = "br";
    doc["model"] = to_json(*br);
  } else {
    doc["method"] = "nldd";
    doc["model"] = to_json(std::get<NlddModel>(model));
  }
  return doc.dump(1) + "\n";
}

ModelFile deserialize_model(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    const auto version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError("unsupported model format_version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelFormatVersion) + ")");
    const auto method = doc.at("method").get<std::string>();
    if (method == "br") return br_from(doc.at("model"));
    if (method == "nldd") return nldd_from(doc.at("model"));
    throw DataError("unknown model method '" + method + "'");
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw DataError("failed writing " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_model(buf.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace nldd

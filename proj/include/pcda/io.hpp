#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <span>
#include <system_error>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "pcda/datagen.hpp"
#include "pcda/density.hpp"
#include "pcda/error.hpp"
#include "pcda/matrix.hpp"
#include "pcda/nn.hpp"
#include "pcda/trainer.hpp"

// File formats: JSON checkpoints, configs, assignments and metrics lines,
// and the `id[,label],f0,...` feature CSV. Every double is written in its
// shortest round-trip decimal form.

namespace pcda {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------- network

inline Json to_json(const Matrix& m) {
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const Json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

inline Json to_json(const Mlp& net) {
  Json layers = Json::array();
  for (const auto& layer : net.layers()) {
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      layers.push_back({{"type", "affine"},
                        {"in", a->in_dim()},
                        {"out", a->out_dim()},
                        {"weight", a->weight.data()},
                        {"bias", a->bias}});
    } else {
      layers.push_back({{"type", "relu"}});
    }
  }
  return layers;
}

inline Mlp mlp_from_json(const Json& j) {
  std::vector<Layer> layers;
  for (const auto& l : j) {
    const auto type = l.at("type").get<std::string>();
    if (type == "relu") {
      layers.emplace_back(ReluLayer{});
    } else if (type == "affine") {
      const auto in = l.at("in").get<std::size_t>();
      const auto out = l.at("out").get<std::size_t>();
      AffineLayer a(in, out);
      a.weight = Matrix(in, out, l.at("weight").get<std::vector<double>>());
      a.bias = l.at("bias").get<std::vector<double>>();
      if (a.bias.size() != out) throw ShapeError("checkpoint: bias length != out");
      layers.emplace_back(std::move(a));
    } else {
      throw ConfigError("checkpoint: unknown layer type '" + type + "'");
    }
  }
  return Mlp(std::move(layers));
}

inline Json to_json(const NetworkParams& p) {
  return Json{{"feature_extractor", to_json(p.feature_extractor)},
              {"source_classifier", to_json(p.source_classifier)},
              {"target_classifier", to_json(p.target_classifier)},
              {"discriminator", to_json(p.discriminator)}};
}

inline NetworkParams network_from_json(const Json& j) {
  NetworkParams p{mlp_from_json(j.at("feature_extractor")), mlp_from_json(j.at("source_classifier")),
                  mlp_from_json(j.at("target_classifier")), mlp_from_json(j.at("discriminator"))};
  p.validate();
  return p;
}

// ------------------------------------------------------------- assignment

inline Json to_json(const SubsetAssignment& a) {
  Json tiers = Json::object();
  for (std::size_t i = 0; i < a.ids.size(); ++i) tiers[std::to_string(a.ids[i])] = a.tiers[i];
  Json stats = Json::array();
  for (const auto& s : a.stats) {
    stats.push_back({{"category", s.category},
                     {"tier", s.tier},
                     {"count", s.count},
                     {"mean_distance", s.mean_distance}});
  }
  return Json{{"P", a.clusters}, {"k_percent", a.k_percent}, {"tiers", tiers}, {"stats", stats}};
}

inline SubsetAssignment assignment_from_json(const Json& j) {
  SubsetAssignment a;
  a.clusters = j.at("P").get<std::size_t>();
  a.k_percent = j.at("k_percent").get<double>();
  for (const auto& [key, tier] : j.at("tiers").items()) {
    a.ids.push_back(std::stoll(key));
    a.tiers.push_back(tier.get<int>());
  }
  for (const auto& s : j.at("stats")) {
    a.stats.push_back({s.at("category").get<int>(), s.at("tier").get<int>(),
                       s.at("count").get<std::size_t>(), s.at("mean_distance").get<double>()});
  }
  return a;
}

// ---------------------------------------------------------------- metrics

namespace detail {
inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
inline std::optional<double> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}
}  // namespace detail

inline Json to_json(const MetricsRecord& r) {
  return Json{{"epoch", r.epoch},
              {"stage", r.stage},
              {"j_total", r.j_total},
              {"j_cls_source", r.j_cls_source},
              {"j_cls_target", r.j_cls_target},
              {"j_domain", r.j_domain},
              {"j_ecl", r.j_ecl},
              {"lambda", r.lambda},
              {"learning_rate", r.learning_rate},
              {"active_target", r.active_target},
              {"acc_source", r.acc_source},
              {"acc_target", detail::optional_json(r.acc_target)},
              {"pl_acc_easy", detail::optional_json(r.pl_acc[0])},
              {"pl_acc_moderate", detail::optional_json(r.pl_acc[1])},
              {"pl_acc_hard", detail::optional_json(r.pl_acc[2])}};
}

inline MetricsRecord metrics_from_json(const Json& j) {
  MetricsRecord r;
  r.epoch = j.at("epoch").get<std::size_t>();
  r.stage = j.at("stage").get<std::size_t>();
  auto num = [&](const char* k) { return j.at(k).is_null() ? std::nan("") : j.at(k).get<double>(); };
  r.j_total = num("j_total");
  r.j_cls_source = num("j_cls_source");
  r.j_cls_target = num("j_cls_target");
  r.j_domain = num("j_domain");
  r.j_ecl = num("j_ecl");
  r.lambda = j.value("lambda", 0.0);
  r.learning_rate = j.value("learning_rate", 0.0);
  r.active_target = j.value("active_target", std::size_t{0});
  r.acc_source = j.value("acc_source", 0.0);
  r.acc_target = detail::optional_from(j, "acc_target");
  r.pl_acc[0] = detail::optional_from(j, "pl_acc_easy");
  r.pl_acc[1] = detail::optional_from(j, "pl_acc_moderate");
  r.pl_acc[2] = detail::optional_from(j, "pl_acc_hard");
  return r;
}

/// One JSON object per line; lines with an "error" key (abort diagnostics)
/// are skipped.
inline std::vector<MetricsRecord> read_metrics_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open metrics file " + path.string());
  std::vector<MetricsRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (j.contains("error")) continue;
    out.push_back(metrics_from_json(j));
  }
  return out;
}

// ----------------------------------------------------------------- config

/// Everything needed to reproduce a training run.
struct RunConfig {
  std::string source_csv;
  std::string target_csv;
  /// Optional; enables target and pseudo-label accuracy metrics.
  std::string target_eval_csv;
  std::string out_dir;
  TrainerConfig trainer;
};

inline Json to_json(const TrainerConfig& c) {
  const auto& s = c.schedule;
  Json comp = Json::array();
  for (const auto& q : s.composition) comp.push_back(q);
  return Json{{"feature_widths", c.feature_widths},
              {"discriminator_hidden", c.discriminator_hidden},
              {"eta0", c.optimizer.eta0},
              {"alpha", c.optimizer.alpha},
              {"gamma", c.optimizer.gamma},
              {"momentum", c.optimizer.momentum},
              {"feature_lr_scale", c.optimizer.feature_lr_scale},
              {"stage_epochs", s.stage_epochs},
              {"batch_composition", comp},
              {"source_batch", s.source_batch},
              {"lambda_mode", to_string(s.lambda_mode)},
              {"lambda", s.lambda},
              {"recluster_at_stage_start", s.recluster_at_stage_start},
              {"relabel_each_epoch", s.relabel_each_epoch},
              {"curriculum_subsets", s.curriculum_subsets},
              {"beta", c.loss.beta},
              {"margin", c.loss.margin},
              {"ecl_weight", c.loss.ecl_weight},
              {"k_percent", c.k_percent},
              {"clusters", c.clusters},
              {"seed", c.seed}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline TrainerConfig trainer_config_from_json(const Json& j) {
  static const std::vector<std::string> known{
      "feature_widths", "discriminator_hidden", "eta0", "alpha", "gamma", "momentum",
      "feature_lr_scale", "stage_epochs", "batch_composition", "source_batch", "lambda_mode",
      "lambda", "recluster_at_stage_start", "relabel_each_epoch", "curriculum_subsets", "beta",
      "margin", "ecl_weight", "k_percent", "clusters", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  TrainerConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("feature_widths", c.feature_widths);
  get("discriminator_hidden", c.discriminator_hidden);
  get("eta0", c.optimizer.eta0);
  get("alpha", c.optimizer.alpha);
  get("gamma", c.optimizer.gamma);
  get("momentum", c.optimizer.momentum);
  get("feature_lr_scale", c.optimizer.feature_lr_scale);
  get("stage_epochs", c.schedule.stage_epochs);
  if (j.contains("batch_composition")) {
    const auto& comp = j.at("batch_composition");
    if (comp.size() != c.schedule.composition.size()) {
      throw ConfigError("config: batch_composition needs one triple per stage 2..4");
    }
    for (std::size_t i = 0; i < comp.size(); ++i) c.schedule.composition[i] = comp[i].get<Composition>();
  }
  get("source_batch", c.schedule.source_batch);
  if (j.contains("lambda_mode")) c.schedule.lambda_mode = parse_lambda_mode(j.at("lambda_mode").get<std::string>());
  get("lambda", c.schedule.lambda);
  get("recluster_at_stage_start", c.schedule.recluster_at_stage_start);
  get("relabel_each_epoch", c.schedule.relabel_each_epoch);
  get("curriculum_subsets", c.schedule.curriculum_subsets);
  get("beta", c.loss.beta);
  get("margin", c.loss.margin);
  get("ecl_weight", c.loss.ecl_weight);
  get("k_percent", c.k_percent);
  get("clusters", c.clusters);
  get("seed", c.seed);
  return c;
}

inline Json to_json(const RunConfig& c) {
  Json j{{"source_csv", c.source_csv},
         {"target_csv", c.target_csv},
         {"target_eval_csv", c.target_eval_csv},
         {"out_dir", c.out_dir}};
  const Json trainer = to_json(c.trainer);
  for (const auto& [k, v] : trainer.items()) j[k] = v;
  return j;
}

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  Json rest = Json::object();
  for (const auto& [k, v] : j.items()) {
    if (k == "source_csv") c.source_csv = v.get<std::string>();
    else if (k == "target_csv") c.target_csv = v.get<std::string>();
    else if (k == "target_eval_csv") c.target_eval_csv = v.get<std::string>();
    else if (k == "out_dir") c.out_dir = v.get<std::string>();
    else rest[k] = v;
  }
  c.trainer = trainer_config_from_json(rest);
  return c;
}

inline Json to_json(const DatasetSpec& s) {
  return Json{{"preset", to_string(s.preset)},
              {"classes", s.classes},
              {"n_source", s.n_source},
              {"n_target", s.n_target},
              {"dim", s.dim},
              {"rotation_deg", s.rotation_deg},
              {"translation", s.translation},
              {"noise_sigma", s.noise_sigma},
              {"seed", s.seed}};
}

// -------------------------------------------------------------------- csv

/// Rows of a feature CSV. `labels` is empty when the file has no label column.
struct FeatureTable {
  std::vector<std::int64_t> ids;
  std::vector<int> labels;
  Matrix features;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  if (first < last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

}  // namespace detail

inline FeatureTable parse_feature_csv(std::istream& in, const std::string& name = "<csv>") {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "id") throw ConfigError(name + ":1: header must start with 'id'");
  const bool has_label = header.size() > 1 && header[1] == "label";
  const std::size_t first_feature = has_label ? 2 : 1;
  const std::size_t dim = header.size() - first_feature;
  if (dim == 0) throw ConfigError(name + ":1: no feature columns");
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[first_feature + k] != "f" + std::to_string(k)) {
      throw ConfigError(name + ":1: expected column 'f" + std::to_string(k) + "'");
    }
  }

  FeatureTable t;
  std::vector<double> data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = name + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) {
      throw ConfigError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(cells.size()));
    }
    std::int64_t id = 0;
    if (!detail::parse_number(cells[0], id)) throw ConfigError(where + ": bad id '" + cells[0] + "'");
    t.ids.push_back(id);
    if (has_label) {
      int y = 0;
      if (!detail::parse_number(cells[1], y) || y < 0) {
        throw ConfigError(where + ": bad label '" + cells[1] + "'");
      }
      t.labels.push_back(y);
    }
    for (std::size_t k = 0; k < dim; ++k) {
      double v = 0.0;
      if (!detail::parse_number(cells[first_feature + k], v) || !std::isfinite(v)) {
        throw ConfigError(where + ": bad value '" + cells[first_feature + k] + "'");
      }
      data.push_back(v);
    }
  }
  t.features = Matrix(t.ids.size(), dim, std::move(data));
  return t;
}

inline FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse_feature_csv(in, path.string());
}

inline void write_feature_csv(std::ostream& out, const Matrix& features,
                              std::span<const int> labels = {}) {
  out << "id";
  if (!labels.empty()) out << ",label";
  for (std::size_t k = 0; k < features.cols(); ++k) out << ",f" << k;
  out << '\n';
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out << i;
    if (!labels.empty()) out << ',' << labels[i];
    for (std::size_t k = 0; k < features.cols(); ++k) out << ',' << format_double(features(i, k));
    out << '\n';
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed: " + path.string());
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

/// Writes source.csv, target.csv (no labels), target_eval.csv and spec.json.
inline void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                          const DatasetPair& data) {
  std::filesystem::create_directories(dir);
  std::ostringstream s;
  write_feature_csv(s, data.source.features, data.source.labels);
  write_text(dir / "source.csv", s.str());
  std::ostringstream t;
  write_feature_csv(t, data.target.features);
  write_text(dir / "target.csv", t.str());
  std::ostringstream e;
  write_feature_csv(e, data.target.features, data.target.labels);
  write_text(dir / "target_eval.csv", e.str());
  write_text(dir / "spec.json", to_json(spec).dump(2) + "\n");
}

}  // namespace pcda

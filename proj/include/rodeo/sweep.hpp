#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rodeo/corruption.hpp"
#include "rodeo/dataset_io.hpp"
#include "rodeo/report.hpp"
#include "rodeo/sample.hpp"

namespace rodeo {

/// Invalid grid config; the message starts with the path to the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& corruption_parameter_names() {
  static const std::vector<std::string> names{
      "sigma_pos",   "pos_bias",    "sigma_shape", "sigma_size",          "sigma_ratio", "p_underpred",
      "p_overpred",  "expected_duplications",      "p_cls_confuse",       "random_box_size"};
  return names;
}

/// Numeric view of a spec field by name; random_box_size is nullopt when unset.
inline std::optional<double> get_parameter(const CorruptionSpec& s, const std::string& name) {
  if (name == "sigma_pos") return s.sigma_pos;
  if (name == "pos_bias") return s.pos_bias;
  if (name == "sigma_shape") return s.sigma_shape;
  if (name == "sigma_size") return s.sigma_size;
  if (name == "sigma_ratio") return s.sigma_ratio;
  if (name == "p_underpred") return s.p_underpred;
  if (name == "p_overpred") return s.p_overpred;
  if (name == "expected_duplications") return s.expected_duplications;
  if (name == "p_cls_confuse") return s.p_cls_confuse;
  if (name == "random_box_size") return s.random_box_size;
  throw std::invalid_argument("unknown corruption parameter '" + name + "'");
}

inline void set_parameter(CorruptionSpec& s, const std::string& name, std::optional<double> v) {
  if (name == "random_box_size") {
    s.random_box_size = v;
    return;
  }
  if (!v) throw std::invalid_argument(name + ": value required");
  if (name == "sigma_pos") s.sigma_pos = *v;
  else if (name == "pos_bias") s.pos_bias = *v;
  else if (name == "sigma_shape") s.sigma_shape = *v;
  else if (name == "sigma_size") s.sigma_size = *v;
  else if (name == "sigma_ratio") s.sigma_ratio = *v;
  else if (name == "p_underpred") s.p_underpred = *v;
  else if (name == "p_overpred") s.p_overpred = *v;
  else if (name == "expected_duplications") s.expected_duplications = *v;
  else if (name == "p_cls_confuse") s.p_cls_confuse = *v;
  else throw std::invalid_argument("unknown corruption parameter '" + name + "'");
}

struct SweepConfig {
  std::vector<CorruptionSpec> grid;
  std::size_t runs = 5;
  MetricConfig metrics;
  // empty keeps every metric of the Total row
  std::vector<std::string> metric_names;
};

struct SweepRow {
  std::size_t grid_index = 0;
  CorruptionSpec spec;  // seed is the base seed of the grid point
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t runs = 0;
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

namespace detail {

inline double config_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

inline std::vector<double> config_thresholds(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of IoU thresholds");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    const double t = config_number(v[i], p);
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError(p + ": threshold must lie in (0, 1]");
    out.push_back(t);
  }
  return out;
}

inline void apply_spec_field(CorruptionSpec& s, const std::string& key, const nlohmann::json& v,
                             const std::string& path) {
  if (key == "seed") {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(path + ": expected a non-negative integer");
    s.seed = v.get<std::uint64_t>();
    return;
  }
  const auto& names = corruption_parameter_names();
  if (std::find(names.begin(), names.end(), key) == names.end())
    throw ConfigError(path + ": unknown corruption parameter");
  if (key == "random_box_size" && v.is_null()) {
    s.random_box_size.reset();
    return;
  }
  set_parameter(s, key, config_number(v, path));
}

}  // namespace detail

/// Parses a grid document:
///   {"schema_version": "1.0", "base": {...}, "axes": {"p_underpred": [0, 0.5]},
///    "runs": 5, "metrics": {"acc_thresholds": [...], "ap_thresholds": [...],
///    "map_thresholds": [...] | null, "names": [...]}}
/// The grid is the cartesian product of the axes, first axis slowest.
inline SweepConfig parse_sweep_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("$: expected an object");
  static const std::set<std::string> known{"schema_version", "base", "axes", "runs", "metrics"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) throw ConfigError("$." + key + ": unknown key");
  if (doc.contains("schema_version") &&
      (!doc["schema_version"].is_string() || doc["schema_version"].get<std::string>() != kSchemaVersion))
    throw ConfigError(std::string("$.schema_version: expected \"") + kSchemaVersion + "\"");

  SweepConfig cfg;
  CorruptionSpec base;
  if (doc.contains("base")) {
    if (!doc["base"].is_object()) throw ConfigError("$.base: expected an object");
    for (const auto& [key, v] : doc["base"].items()) detail::apply_spec_field(base, key, v, "$.base." + key);
  }
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;
  if (doc.contains("axes")) {
    if (!doc["axes"].is_object()) throw ConfigError("$.axes: expected an object");
    for (const auto& [key, v] : doc["axes"].items()) {
      const auto path = "$.axes." + key;
      if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected a non-empty array");
      std::vector<nlohmann::json> values(v.begin(), v.end());
      for (std::size_t i = 0; i < values.size(); ++i) {
        CorruptionSpec probe = base;
        detail::apply_spec_field(probe, key, values[i], path + "[" + std::to_string(i) + "]");
      }
      axes.emplace_back(key, std::move(values));
    }
  }
  // odometer over the axes, last axis fastest
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    CorruptionSpec s = base;
    std::string where = "$.base";
    for (std::size_t a = 0; a < axes.size(); ++a) {
      detail::apply_spec_field(s, axes[a].first, axes[a].second[idx[a]], "$.axes." + axes[a].first);
      where = "$.axes." + axes[a].first + "[" + std::to_string(idx[a]) + "]";
    }
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
    cfg.grid.push_back(s);
    std::size_t a = axes.size();
    while (a > 0 && ++idx[a - 1] == axes[a - 1].second.size()) idx[--a] = 0;
    if (a == 0) break;
  }

  if (doc.contains("runs")) {
    const auto& r = doc["runs"];
    if (!r.is_number_integer() || r.get<long long>() < 1) throw ConfigError("$.runs: expected a positive integer");
    cfg.runs = r.get<std::size_t>();
  }
  if (doc.contains("metrics")) {
    const auto& m = doc["metrics"];
    if (!m.is_object()) throw ConfigError("$.metrics: expected an object");
    for (const auto& [key, v] : m.items()) {
      const auto path = "$.metrics." + key;
      if (key == "acc_thresholds") {
        cfg.metrics.acc_thresholds = detail::config_thresholds(v, path);
      } else if (key == "ap_thresholds") {
        cfg.metrics.ap_thresholds = detail::config_thresholds(v, path);
      } else if (key == "map_thresholds") {
        cfg.metrics.map_thresholds = v.is_null() ? std::vector<double>{} : detail::config_thresholds(v, path);
      } else if (key == "names") {
        if (!v.is_array()) throw ConfigError(path + ": expected an array of metric names");
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (!v[i].is_string()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a string");
          cfg.metric_names.push_back(v[i].get<std::string>());
        }
      } else {
        throw ConfigError(path + ": unknown key");
      }
    }
  }
  return cfg;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  try {
    return parse_sweep_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Corrupts the dataset `runs` times per grid point (seeds seed + run) and
/// reports mean and sample std of each selected Total-row metric.
inline std::vector<SweepRow> run_sweep(std::span<const ImageSample> dataset, std::span<const std::string> class_names,
                                       const SweepConfig& cfg, std::size_t workers = 1) {
  if (cfg.grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
  if (cfg.runs == 0) throw std::invalid_argument("run_sweep: runs must be positive");
  if (dataset.empty()) throw std::invalid_argument("run_sweep: empty dataset");
  MetricConfig mcfg = cfg.metrics;
  mcfg.per_class = false;
  mcfg.rodeo.workers = workers;
  const std::size_t k = class_names.empty() ? infer_num_classes(dataset) : class_names.size();

  std::vector<SweepRow> rows;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    std::map<std::string, std::vector<double>> values;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
      CorruptionSpec spec = cfg.grid[g];
      spec.seed = cfg.grid[g].seed + r;
      const auto corrupted = corrupt_dataset(dataset, spec, k, workers);
      const auto metrics = evaluate_metrics(corrupted, class_names, mcfg);
      for (const auto& [name, v] : metrics) values[name].push_back(v);
    }
    std::vector<std::string> names = cfg.metric_names;
    if (names.empty())
      for (const auto& [name, _] : values) names.push_back(name);
    for (const auto& name : names) {
      auto it = values.find(name);
      if (it == values.end()) throw std::invalid_argument("run_sweep: metric '" + name + "' is not computed");
      const auto& v = it->second;
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      rows.push_back({g, cfg.grid[g], name, mean, sd, v.size()});
    }
  }
  return rows;
}

namespace detail {

inline std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_optional(std::optional<double> v) { return v ? full_precision(*v) : std::string(); }

inline std::vector<std::string> read_csv_rows(std::istream& in, const std::vector<std::string>& expected_header,
                                              const std::string& source,
                                              std::vector<std::vector<std::string>>& records) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (header.empty()) {
      header = split_csv_line(line);
      if (header != expected_header)
        throw DatasetError(source + ": line " + std::to_string(line_no) + ": unexpected header (expected " +
                           join(expected_header, ",") + ")");
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DatasetError(source + ": line " + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    fields.push_back(std::to_string(line_no));  // carried for error messages
    records.push_back(std::move(fields));
  }
  if (header.empty()) throw DatasetError(source + ": missing CSV header");
  return header;
}

inline std::size_t parse_count(const std::string& text, const std::string& where) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw DatasetError(where + ": '" + text + "' is not a non-negative integer");
  return v;
}

}  // namespace detail

inline std::vector<std::string> sweep_table_header() {
  std::vector<std::string> h{"grid_index"};
  for (const auto& p : corruption_parameter_names()) h.push_back(p);
  for (const char* c : {"seed", "metric", "mean", "std", "runs"}) h.push_back(c);
  return h;
}

inline void write_sweep_table(std::ostream& out, std::span<const SweepRow> rows) {
  out << detail::join(sweep_table_header(), ",") << '\n';
  for (const auto& r : rows) {
    out << r.grid_index;
    for (const auto& p : corruption_parameter_names()) out << ',' << detail::csv_optional(get_parameter(r.spec, p));
    out << ',' << r.spec.seed << ',' << r.metric << ',' << detail::full_precision(r.mean) << ','
        << detail::full_precision(r.std) << ',' << r.runs << '\n';
  }
}

inline std::vector<SweepRow> read_sweep_table(std::istream& in, const std::string& source = "<input>") {
  const auto header = sweep_table_header();
  std::vector<std::vector<std::string>> records;
  detail::read_csv_rows(in, header, source, records);
  std::vector<SweepRow> rows;
  const auto& params = corruption_parameter_names();
  for (const auto& f : records) {
    const std::string where = source + ": line " + f.back();
    auto field = [&](std::size_t i) { return where + ": field '" + header[i] + "'"; };
    SweepRow r;
    r.grid_index = detail::parse_count(f[0], field(0));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& text = f[1 + i];
      std::optional<double> v;
      if (!text.empty()) v = detail::parse_decimal(text, field(1 + i));
      try {
        set_parameter(r.spec, params[i], v);
      } catch (const std::invalid_argument& e) {
        throw DatasetError(field(1 + i) + ": " + e.what());
      }
    }
    std::size_t c = 1 + params.size();
    r.spec.seed = detail::parse_count(f[c], field(c));
    r.metric = f[c + 1];
    if (r.metric.empty()) throw DatasetError(field(c + 1) + ": empty metric name");
    r.mean = detail::parse_decimal(f[c + 2], field(c + 2));
    r.std = detail::parse_decimal(f[c + 3], field(c + 3));
    r.runs = detail::parse_count(f[c + 4], field(c + 4));
    rows.push_back(std::move(r));
  }
  return rows;
}

/// One plot-ready record: a metric value against one varying parameter.
struct LongRow {
  std::size_t grid_index = 0;
  std::string axis;  // "none" when no parameter varies
  std::optional<double> axis_value;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t runs = 0;
  friend bool operator==(const LongRow&, const LongRow&) = default;
};

/// Parameters whose value differs between at least two rows.
inline std::vector<std::string> varying_parameters(std::span<const SweepRow> rows) {
  std::vector<std::string> out;
  for (const auto& p : corruption_parameter_names()) {
    for (const auto& r : rows) {
      if (get_parameter(r.spec, p) != get_parameter(rows.front().spec, p)) {
        out.push_back(p);
        break;
      }
    }
  }
  return out;
}

/// Melts a sweep table: one row per (grid point, metric, varying parameter).
inline std::vector<LongRow> to_long_format(std::span<const SweepRow> rows) {
  const auto axes = varying_parameters(rows);
  std::vector<LongRow> out;
  for (const auto& r : rows) {
    if (axes.empty()) {
      out.push_back({r.grid_index, "none", std::nullopt, r.metric, r.mean, r.std, r.runs});
      continue;
    }
    for (const auto& a : axes) out.push_back({r.grid_index, a, get_parameter(r.spec, a), r.metric, r.mean, r.std, r.runs});
  }
  return out;
}

/// Inverse of to_long_format over the varying parameters: one row per
/// (grid point, metric) with the parameter values recovered from the axes.
struct WideRow {
  std::size_t grid_index = 0;
  std::map<std::string, std::optional<double>> parameters;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t runs = 0;
  friend bool operator==(const WideRow&, const WideRow&) = default;
};

inline std::vector<WideRow> widen(std::span<const LongRow> rows) {
  std::vector<WideRow> out;
  std::map<std::pair<std::size_t, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.grid_index, r.metric);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({r.grid_index, {}, r.metric, r.mean, r.std, r.runs});
    }
    if (r.axis != "none") out[it->second].parameters[r.axis] = r.axis_value;
  }
  return out;
}

/// The wide view of a sweep table restricted to its varying parameters.
inline std::vector<WideRow> wide_view(std::span<const SweepRow> rows) {
  const auto axes = varying_parameters(rows);
  std::vector<WideRow> out;
  for (const auto& r : rows) {
    WideRow w{r.grid_index, {}, r.metric, r.mean, r.std, r.runs};
    for (const auto& a : axes) w.parameters[a] = get_parameter(r.spec, a);
    out.push_back(std::move(w));
  }
  return out;
}

inline const std::vector<std::string>& long_table_header() {
  static const std::vector<std::string> h{"grid_index", "axis", "axis_value", "metric", "mean", "std", "runs"};
  return h;
}

inline void write_long_table(std::ostream& out, std::span<const LongRow> rows) {
  out << detail::join(long_table_header(), ",") << '\n';
  for (const auto& r : rows) {
    out << r.grid_index << ',' << r.axis << ',' << detail::csv_optional(r.axis_value) << ',' << r.metric << ','
        << detail::full_precision(r.mean) << ',' << detail::full_precision(r.std) << ',' << r.runs << '\n';
  }
}

inline std::vector<LongRow> read_long_table(std::istream& in, const std::string& source = "<input>") {
  const auto& header = long_table_header();
  std::vector<std::vector<std::string>> records;
  detail::read_csv_rows(in, header, source, records);
  std::vector<LongRow> rows;
  for (const auto& f : records) {
    const std::string where = source + ": line " + f.back();
    auto field = [&](std::size_t i) { return where + ": field '" + header[i] + "'"; };
    LongRow r;
    r.grid_index = detail::parse_count(f[0], field(0));
    r.axis = f[1];
    if (!f[2].empty()) r.axis_value = detail::parse_decimal(f[2], field(2));
    r.metric = f[3];
    r.mean = detail::parse_decimal(f[4], field(4));
    r.std = detail::parse_decimal(f[5], field(5));
    r.runs = detail::parse_count(f[6], field(6));
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Per-axis summary: for each varying parameter, the metric means against
/// that parameter, as "axis,value,metric,mean,std" lines.
inline void write_axis_summary(std::ostream& out, std::span<const SweepRow> rows) {
  out << "axis,axis_value,metric,mean,std\n";
  const auto axes = varying_parameters(rows);
  for (const auto& a : axes) {
    for (const auto& r : rows) {
      out << a << ',' << detail::csv_optional(get_parameter(r.spec, a)) << ',' << r.metric << ','
          << detail::full_precision(r.mean) << ',' << detail::full_precision(r.std) << '\n';
    }
  }
}

}  // namespace rodeo

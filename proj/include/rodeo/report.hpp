#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rodeo/baselines.hpp"
#include "rodeo/metric.hpp"
#include "rodeo/sample.hpp"

namespace rodeo {

/// Which metrics to compute and at which IoU thresholds.
struct MetricConfig {
  std::vector<double> acc_thresholds{0.3};
  std::vector<double> ap_thresholds{0.3};
  // empty disables mAP
  std::vector<double> map_thresholds = default_map_thresholds();
  ApInterpolation interpolation = ApInterpolation::AllPoint;
  EvaluationOptions rodeo;
  bool per_class = false;
};

struct MetricRow {
  std::string label;
  std::optional<ClassId> cls;  // unset for the pooled Total row
  RodeoScores rodeo;
  std::vector<double> acc;
  std::vector<std::optional<double>> ap;
  std::optional<double> map;
};

struct MetricReport {
  MetricConfig config;
  std::vector<MetricRow> rows;  // per-class rows (if requested), Total last

  const MetricRow& total() const { return rows.back(); }
};

/// "acc@30" style label: threshold in percent, without a fraction when whole.
inline std::string threshold_label(const std::string& prefix, double t) {
  const double pct = t * 100.0;
  const double whole = std::round(pct);
  char buf[64];
  if (std::abs(pct - whole) < 1e-9) {
    std::snprintf(buf, sizeof buf, "%s@%.0f", prefix.c_str(), whole);
  } else {
    std::snprintf(buf, sizeof buf, "%s@%g", prefix.c_str(), pct);
  }
  return buf;
}

inline MetricReport compute_report(std::span<const ImageSample> dataset,
                                   std::span<const std::string> class_names, const MetricConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("compute_report: empty dataset");
  EvaluationOptions ropts = cfg.rodeo;
  if (!class_names.empty()) ropts.num_classes = class_names.size();
  const std::size_t k = detail::vocabulary_size(dataset, ropts);
  for (double t : cfg.acc_thresholds) detail::check_threshold(t);
  for (double t : cfg.ap_thresholds) detail::check_threshold(t);
  for (double t : cfg.map_thresholds) detail::check_threshold(t);

  const auto matches = match_dataset(dataset, ropts);
  const auto pooled = pool_matches(dataset, matches);

  std::map<double, std::vector<ThresholdedOutcome>> outcomes;
  auto outcomes_at = [&](double t) -> const std::vector<ThresholdedOutcome>& {
    auto it = outcomes.find(t);
    if (it == outcomes.end()) it = outcomes.emplace(t, threshold_match_dataset(dataset, t, k)).first;
    return it->second;
  };

  auto fill = [&](MetricRow& row) {
    for (double t : cfg.acc_thresholds) row.acc.push_back(accuracy(pooled_counts(outcomes_at(t), row.cls)));
    auto ap = [&](double t) -> std::optional<double> {
      const auto& o = outcomes_at(t);
      if (row.cls) return class_ap(dataset, o, *row.cls, cfg.interpolation);
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t c = 0; c < k; ++c) {
        if (auto v = class_ap(dataset, o, ClassId(c), cfg.interpolation)) {
          sum += *v;
          ++n;
        }
      }
      return n == 0 ? 0.0 : sum / static_cast<double>(n);
    };
    for (double t : cfg.ap_thresholds) row.ap.push_back(ap(t));
    if (!cfg.map_thresholds.empty()) {
      double sum = 0.0;
      bool defined = true;
      for (double t : cfg.map_thresholds) {
        const auto v = ap(t);
        defined = defined && v.has_value();
        sum += v.value_or(0.0);
      }
      if (defined) row.map = sum / static_cast<double>(cfg.map_thresholds.size());
    }
  };

  MetricReport report;
  report.config = cfg;
  if (cfg.per_class) {
    for (std::size_t c = 0; c < k; ++c) {
      MetricRow row;
      row.label = c < class_names.size() ? class_names[c] : std::to_string(c);
      row.cls = ClassId(c);
      row.rodeo = rodeo_per_class_from_pooled(pooled, ClassId(c), k);
      fill(row);
      report.rows.push_back(std::move(row));
    }
  }
  MetricRow total;
  total.label = "Total";
  total.rodeo = rodeo_from_pooled(pooled);
  fill(total);
  report.rows.push_back(std::move(total));
  return report;
}

/// Flat name -> value view of one row.
inline std::map<std::string, double> named_metrics(const MetricRow& row, const MetricConfig& cfg) {
  std::map<std::string, double> m;
  m["RoDeO/total"] = row.rodeo.total;
  m["RoDeO/loc"] = row.rodeo.loc;
  m["RoDeO/shape"] = row.rodeo.shape;
  m["RoDeO/cls"] = row.rodeo.cls;
  m["RoDeO/overunder"] = row.rodeo.overunder_factor();
  for (std::size_t i = 0; i < cfg.acc_thresholds.size(); ++i)
    m[threshold_label("acc", cfg.acc_thresholds[i])] = row.acc[i];
  for (std::size_t i = 0; i < cfg.ap_thresholds.size(); ++i)
    if (row.ap[i]) m[threshold_label("AP", cfg.ap_thresholds[i])] = *row.ap[i];
  if (row.map) m["mAP"] = *row.map;
  return m;
}

/// Total-row metrics of a dataset, keyed by name.
inline std::map<std::string, double> evaluate_metrics(std::span<const ImageSample> dataset,
                                                      std::span<const std::string> class_names,
                                                      MetricConfig cfg = {}) {
  cfg.per_class = false;
  const auto report = compute_report(dataset, class_names, cfg);
  return named_metrics(report.total(), report.config);
}

/// Aligned text table with four decimals; unsupported cells print as "-".
inline std::string format_table(const MetricReport& report) {
  const auto& cfg = report.config;
  std::vector<std::string> header{"Class", "RoDeO/cls", "RoDeO/loc", "RoDeO/shape", "RoDeO"};
  for (double t : cfg.acc_thresholds) header.push_back(threshold_label("acc", t));
  for (double t : cfg.ap_thresholds) header.push_back(threshold_label("AP", t));
  if (!cfg.map_thresholds.empty()) header.push_back("mAP");

  auto num = [](std::optional<double> v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : report.rows) {
    std::vector<std::string> line{row.label};
    const bool sup = row.rodeo.supported;
    for (double v : {row.rodeo.cls, row.rodeo.loc, row.rodeo.shape, row.rodeo.total})
      line.push_back(sup ? num(v) : "-");
    for (double v : row.acc) line.push_back(num(v));
    for (const auto& v : row.ap) line.push_back(num(v));
    if (!cfg.map_thresholds.empty()) line.push_back(num(row.map));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      const auto pad = std::string(width[c] - line[c].size(), ' ');
      if (c == 0) {
        out << line[c] << pad;
      } else {
        out << "  " << pad << line[c];
      }
    }
    out << '\n';
  };
  emit(header);
  for (const auto& line : cells) emit(line);
  return out.str();
}

}  // namespace rodeo

// rodeo: evaluate detections, run corruption sweeps, reshape sweep tables.

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rodeo/rodeo.hpp"

namespace {

using namespace rodeo;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_threshold(const std::string& text, const std::string& flag) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw UsageError(flag + ": '" + text + "' is not a number");
  if (!(v > 0.0 && v <= 1.0)) throw UsageError(flag + ": threshold " + text + " outside (0, 1]");
  return v;
}

// "0.3,0.5", "lo:hi:step", or "none" (empty list)
std::vector<double> parse_thresholds(const std::string& text, const std::string& flag) {
  if (text == "none") return {};
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError(flag + ": expected lo:hi:step, got '" + text + "'");
    const double lo = parse_threshold(parts[0], flag), hi = parse_threshold(parts[1], flag);
    const double step = parse_threshold(parts[2], flag);
    try {
      return threshold_range(lo, hi, step);
    } catch (const std::invalid_argument& e) {
      throw UsageError(flag + ": " + e.what());
    }
  }
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(parse_threshold(p, flag));
  if (out.empty()) throw UsageError(flag + ": empty threshold list");
  return out;
}

// Writes to the named file, or stdout when the name is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

nlohmann::json report_json(const MetricReport& r) {
  nlohmann::json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["acc_thresholds"] = r.config.acc_thresholds;
  doc["ap_thresholds"] = r.config.ap_thresholds;
  doc["map_thresholds"] = r.config.map_thresholds;
  doc["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j;
    j["class"] = row.label;
    for (const auto& [name, v] : named_metrics(row, r.config)) {
      // RoDeO is undefined for a class that never appears
      if (!row.rodeo.supported && name.rfind("RoDeO/", 0) == 0) {
        j[name] = nullptr;
      } else {
        j[name] = v;
      }
    }
    for (std::size_t i = 0; i < row.ap.size(); ++i)
      if (!row.ap[i]) j[threshold_label("AP", r.config.ap_thresholds[i])] = nullptr;
    if (!r.config.map_thresholds.empty() && !row.map) j["mAP"] = nullptr;
    doc["rows"].push_back(std::move(j));
  }
  return doc;
}

struct EvaluateArgs {
  std::string targets, predictions, format = "canonical-json", output;
  std::string acc = "0.3", ap = "0.3", map = "0.1:0.7:0.1", interpolation = "all-point";
  bool per_class = false, json = false;
  unsigned jobs = 1;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto fmt = parse_format(a.format);
  const auto t = load_dataset(a.targets, fmt);
  const auto p = load_dataset(a.predictions, fmt);
  const auto dataset = pair_datasets(t, p);

  MetricConfig cfg;
  cfg.acc_thresholds = parse_thresholds(a.acc, "--acc-thresholds");
  cfg.ap_thresholds = parse_thresholds(a.ap, "--ap-thresholds");
  cfg.map_thresholds = parse_thresholds(a.map, "--map-thresholds");
  if (a.interpolation == "11-point") {
    cfg.interpolation = ApInterpolation::ElevenPoint;
  } else if (a.interpolation != "all-point") {
    throw UsageError("--interpolation: expected all-point or 11-point");
  }
  cfg.per_class = a.per_class;
  cfg.rodeo.workers = a.jobs;
  if (dataset.empty()) throw std::runtime_error(a.targets + ": no images");

  const auto report = compute_report(dataset, t.classes, cfg);
  emit(a.output, a.json ? report_json(report).dump(2) + "\n" : format_table(report));
  return 0;
}

struct SweepArgs {
  std::string targets, grid, format = "canonical-json", output, summary;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  unsigned jobs = 1;
};

int cmd_sweep(const SweepArgs& a) {
  auto cfg = load_sweep_config(a.grid);
  if (a.seed)
    for (auto& s : cfg.grid) s.seed = *a.seed;
  if (a.runs) {
    if (*a.runs == 0) throw UsageError("--runs: must be positive");
    cfg.runs = *a.runs;
  }
  const auto t = load_dataset(a.targets, parse_format(a.format));
  Dataset dataset;
  for (const auto& img : t.images) dataset.push_back({img.image_id, img.image_size, img.boxes, {}});
  if (dataset.empty()) throw std::runtime_error(a.targets + ": no images");

  const auto rows = run_sweep(dataset, t.classes, cfg, a.jobs);
  std::ostringstream table;
  write_sweep_table(table, rows);
  emit(a.output, table.str());
  if (!a.summary.empty()) {
    std::ostringstream s;
    write_axis_summary(s, rows);
    emit(a.summary, s.str());
  }
  return 0;
}

int cmd_report(const std::string& input, const std::string& output) {
  std::ifstream in(input);
  if (!in) throw std::runtime_error(input + ": cannot open file");
  const auto rows = read_sweep_table(in, input);
  std::ostringstream out;
  write_long_table(out, to_long_format(rows));
  emit(output, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RoDeO detection metrics"};
  app.require_subcommand(1);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against targets");
  evaluate->add_option("--targets", ev.targets, "Target boxes file")->required();
  evaluate->add_option("--predictions", ev.predictions, "Predicted boxes file")->required();
  evaluate->add_option("--format", ev.format, "canonical-json, coco-corner-json or csv")->capture_default_str();
  evaluate->add_option("--acc-thresholds", ev.acc, "IoU thresholds for acc, e.g. 0.3,0.5")->capture_default_str();
  evaluate->add_option("--ap-thresholds", ev.ap, "IoU thresholds for AP")->capture_default_str();
  evaluate->add_option("--map-thresholds", ev.map, "lo:hi:step, a list, or none")->capture_default_str();
  evaluate->add_option("--interpolation", ev.interpolation, "all-point or 11-point")->capture_default_str();
  evaluate->add_flag("--per-class", ev.per_class, "Add one row per class");
  evaluate->add_flag("--json", ev.json, "Machine-readable output at full precision");
  evaluate->add_option("-o,--output", ev.output, "Output file (default stdout)");
  evaluate->add_option("-j,--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Corrupt the targets over a parameter grid and score each point");
  sweep->add_option("--targets", sw.targets, "Target boxes file")->required();
  sweep->add_option("--grid", sw.grid, "Grid config (JSON)")->required();
  sweep->add_option("--format", sw.format, "Targets file format")->capture_default_str();
  sweep->add_option("--seed", sw.seed, "Seed for every grid point (overrides the config)");
  sweep->add_option("--runs", sw.runs, "Runs per grid point (overrides the config)");
  sweep->add_option("-o,--output", sw.output, "Sweep table (default stdout)");
  sweep->add_option("--summary", sw.summary, "Also write a per-axis summary here");
  sweep->add_option("-j,--jobs", sw.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "Reshape a sweep table into long format");
  report->add_option("--input", report_in, "Sweep table")->required();
  report->add_option("-o,--output", report_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*evaluate) return cmd_evaluate(ev);
    if (*sweep) return cmd_sweep(sw);
    return cmd_report(report_in, report_out);
  } catch (const UsageError& e) {
    std::cerr << "rodeo: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rodeo: error: " << e.what() << '\n';
    return 1;
  }
}

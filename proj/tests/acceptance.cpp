// Acceptance suite: prints one PASS/FAIL line per criterion, exits nonzero
// if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "test_support.hpp"

using namespace rodeo;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Stat {
  double mean, std;
};

// mean and sample std of one metric at each grid point
std::vector<Stat> sweep_metric(const Dataset& d, const std::vector<CorruptionSpec>& grid, const std::string& metric,
                               std::size_t runs = 5) {
  SweepConfig cfg;
  cfg.grid = grid;
  cfg.runs = runs;
  cfg.metrics.acc_thresholds = {0.3, 0.5};
  cfg.metrics.ap_thresholds = {0.5};
  cfg.metrics.map_thresholds.clear();
  cfg.metric_names = {metric};
  std::vector<Stat> out;
  for (const auto& r : run_sweep(d, {}, cfg, 4)) out.push_back({r.mean, r.std});
  return out;
}

std::string fmt_stats(const std::vector<Stat>& v) {
  std::ostringstream s;
  s.precision(4);
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? " " : "") << v[i].mean << "+-" << v[i].std;
  return s.str();
}

// each step may move the wrong way by at most one run-to-run std
bool monotone_within_std(const std::vector<Stat>& v, int direction) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double step = (v[i + 1].mean - v[i].mean) * direction;
    if (step < -std::max(v[i].std, v[i + 1].std)) return false;
  }
  return true;
}

Outcome matching_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> n(1, 6);
  int mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    const auto t = fixture::random_boxes(rng, n(rng), 3);
    const auto p = fixture::random_boxes(rng, n(rng), 3);
    const auto cost = cost_matrix(t, p, {1.0, class_weight(t, p)});
    auto pairs = match_image(t, p).matched;
    // sum in the brute-force enumeration order so equal assignments give equal sums
    const bool wide = t.size() <= p.size();
    std::sort(pairs.begin(), pairs.end(),
              [&](const auto& a, const auto& b) { return wide ? a.target < b.target : a.prediction < b.prediction; });
    double total = 0.0;
    for (const auto& pr : pairs) total += cost(pr.target, pr.prediction);
    mismatches += total != fixture::brute_force_min_cost(cost);
  }
  return {mismatches == 0, std::to_string(mismatches) + "/500 instances differ from exhaustive search"};
}

Outcome closed_form_loc() {
  Rng rng(7);
  std::ostringstream s;
  bool ok = true;
  for (double sigma : {0.25, 0.5, 1.0}) {
    const Box t(0, 0, 3, 2);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += loc_score_pair(t, corrupt_position(t, sigma, rng));
    const double want = 1.0 / (1.0 + 2 * sigma * sigma * std::numbers::ln2);
    const double rel = std::abs(sum / n - want) / want;
    ok = ok && rel <= 0.02;
    s << "sigma " << sigma << ": rel err " << rel << "; ";
  }
  return {ok, s.str()};
}

Outcome underprediction_sweep() {
  const auto d = make_synthetic_dataset(SyntheticOptions{});
  std::vector<CorruptionSpec> grid;
  for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    CorruptionSpec s;
    s.sigma_pos = 0.5;
    s.p_underpred = p;
    grid.push_back(s);
  }
  const auto acc = sweep_metric(d, grid, "acc@50");
  const auto total = sweep_metric(d, grid, "RoDeO/total");
  const auto ap = sweep_metric(d, grid, "AP@50");
  const bool ok = monotone_within_std(acc, +1) && monotone_within_std(total, -1) && monotone_within_std(ap, -1);
  return {ok, "acc@50 [" + fmt_stats(acc) + "] RoDeO [" + fmt_stats(total) + "] AP@50 [" + fmt_stats(ap) + "]"};
}

Outcome overprediction_sweep() {
  const auto d = make_synthetic_dataset(SyntheticOptions{});
  std::vector<CorruptionSpec> grid;
  const std::vector<double> ed{0, 1, 2, 4};
  for (double e : ed) {
    CorruptionSpec s;
    s.sigma_pos = 0.5;
    s.expected_duplications = e;
    grid.push_back(s);
  }
  const auto total = sweep_metric(d, grid, "RoDeO/total");
  const auto factor = sweep_metric(d, grid, "RoDeO/overunder");
  const auto ap = sweep_metric(d, grid, "AP@50");
  bool ok = true;
  for (std::size_t i = 0; i + 1 < total.size(); ++i) ok = ok && total[i + 1].mean < total[i].mean;
  for (std::size_t i = 0; i < ed.size(); ++i) {
    const double want = 1.0 / (1.0 + ed[i]);
    ok = ok && std::abs(factor[i].mean - want) <= 0.03 * want;
  }
  for (std::size_t i = 1; i < ap.size(); ++i) ok = ok && ap[i].mean >= ap[i - 1].mean;
  return {ok, "RoDeO [" + fmt_stats(total) + "] factor [" + fmt_stats(factor) + "] AP@50 [" + fmt_stats(ap) + "]"};
}

Outcome invariance() {
  SyntheticOptions o;
  o.min_boxes = o.max_boxes = 1;
  o.num_images = 300;
  const auto d = make_synthetic_dataset(o);
  bool ok = true;
  std::ostringstream s;

  // base predictions carry shape noise and confusion; then move every box
  CorruptionSpec base;
  base.sigma_shape = 0.3;
  base.p_cls_confuse = 0.3;
  const auto before = corrupt_dataset(d, base, o.num_classes);
  auto moved = before;
  Rng rng(11);
  for (auto& img : moved)
    for (auto& p : img.predictions) p.box = corrupt_position(p.box, 0.7, rng);
  const auto a = evaluate_rodeo(before), b = evaluate_rodeo(moved);
  ok = ok && a.shape == b.shape && a.cls == b.cls && a.loc != b.loc;
  s << "position: shape " << a.shape << "->" << b.shape << ", cls " << a.cls << "->" << b.cls << "; ";

  // base predictions carry position noise and confusion; then reshape in place
  CorruptionSpec base2;
  base2.sigma_pos = 0.3;
  base2.p_cls_confuse = 0.3;
  const auto before2 = corrupt_dataset(d, base2, o.num_classes);
  auto reshaped = before2;
  for (auto& img : reshaped)
    for (auto& p : img.predictions) p.box = corrupt_shape(p.box, 0.5, rng);
  const auto c = evaluate_rodeo(before2), e = evaluate_rodeo(reshaped);
  ok = ok && c.loc == e.loc && c.cls == e.cls && c.shape != e.shape;
  s << "shape: loc " << c.loc << "->" << e.loc << ", cls " << c.cls << "->" << e.cls;
  return {ok, s.str()};
}

Outcome class_confusion() {
  const auto d = make_synthetic_dataset(SyntheticOptions{});
  CorruptionSpec s;
  s.p_cls_confuse = 1.0;
  const auto cls = sweep_metric(d, {s}, "RoDeO/cls")[0];
  const auto acc = sweep_metric(d, {s}, "acc@30")[0];
  std::ostringstream out;
  out << "RoDeO/cls " << cls.mean << ", acc@30 " << acc.mean;
  return {cls.mean <= 0.05 && acc.mean >= 0.5, out.str()};
}

Outcome harmonic_properties() {
  std::mt19937_64 rng(5);
  // (0, 1]
  std::uniform_real_distribution<double> u(std::nextafter(0.0, 1.0), std::nextafter(1.0, 2.0));
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    double x[3] = {std::min(u(rng), 1.0), std::min(u(rng), 1.0), std::min(u(rng), 1.0)};
    const double h = rodeo_total(x[0], x[1], x[2]);
    const double lo = std::min({x[0], x[1], x[2]}), hi = std::max({x[0], x[1], x[2]});
    bad += !(h >= lo && h <= hi);
    for (int k = 0; k < 3; ++k) {
      double y[3] = {x[0], x[1], x[2]};
      if (y[k] >= 1.0) continue;
      y[k] = y[k] + (1.0 - y[k]) * 0.5;
      bad += !(rodeo_total(y[0], y[1], y[2]) > h);
      y[k] = 0.0;
      bad += rodeo_total(y[0], y[1], y[2]) != 0.0;
    }
  }
  return {bad == 0, std::to_string(bad) + " violations over 10000 triples"};
}

Outcome golden_report() {
  MetricConfig cfg;
  cfg.acc_thresholds = {0.3, 0.5};
  cfg.ap_thresholds = {0.3, 0.5};
  cfg.map_thresholds = {0.3, 0.5};
  cfg.per_class = true;
  const auto got = format_table(compute_report(fixture::golden_dataset(), fixture::golden_classes(), cfg));
  std::ifstream in(std::string(RODEO_TEST_DATA) + "/golden_report.txt", std::ios::binary);
  if (!in) return {false, "golden_report.txt missing"};
  std::stringstream want;
  want << in.rdbuf();
  return {got == want.str(), got == want.str() ? "byte-identical" : "table differs:\n" + got};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
  };
  const std::vector<Criterion> criteria{
      {1, "matching oracle", matching_oracle, 10},
      {2, "closed-form localization", closed_form_loc, 30},
      {3, "underprediction sweep", underprediction_sweep, 120},
      {4, "box overprediction sweep", overprediction_sweep, 120},
      {5, "invariance", invariance, 60},
      {6, "class confusion", class_confusion, 60},
      {7, "summary-metric properties", harmonic_properties, 60},
      {8, "golden fixture report", golden_report, 10},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool pass = o.pass && secs < c.budget_s;
    failed += !pass;
    std::printf("%s criterion %d (%s) %.2fs: %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}

#include "metrics/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "common/error.hpp"

namespace pcsod::metrics {
namespace {

void check_inputs(std::span<const double> p, std::span<const std::uint8_t> g) {
  if (p.size() != g.size()) {
    throw_data("metrics: " + std::to_string(p.size()) + " predictions for " + std::to_string(g.size()) + " labels");
  }
  if (p.empty()) throw_data("metrics: empty view");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw_data("metrics: prediction outside [0, 1]");
  }
  for (auto v : g) {
    if (v > 1) throw_data("metrics: ground truth must be binary");
  }
}

void check_threshold(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw_usage("metrics: threshold outside [0, 1]");
}

// Largest grid index i with p >= i/255, using the same comparisons as
// confusion_at so the sweep and the direct path binarize identically.
std::size_t grid_level(double p) {
  auto i = static_cast<std::size_t>(std::clamp(std::floor(p * 255.0), 0.0, 255.0));
  while (i < kThresholds - 1 && p >= grid_threshold(i + 1)) ++i;
  while (i > 0 && p < grid_threshold(i)) --i;
  return i;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void summarize(MetricsReport& r) {
  r.max_e = *std::max_element(r.e_curve.begin(), r.e_curve.end());
  r.mean_e = mean(r.e_curve);
  if (r.f_defined) {
    r.max_f = *std::max_element(r.f_curve.begin(), r.f_curve.end());
    r.mean_f = mean(r.f_curve);
  } else {
    r.max_f = r.mean_f = std::numeric_limits<double>::quiet_NaN();
  }
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

double grid_threshold(std::size_t i) { return static_cast<double>(i) / 255.0; }

void MetricsConfig::validate() const {
  if (!(beta_sq > 0.0)) throw_usage("beta_sq must be positive");
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) throw_usage("iou_threshold outside [0, 1]");
  if (!(epsilon > 0.0)) throw_usage("epsilon must be positive");
}

Confusion confusion_at(std::span<const double> p, std::span<const std::uint8_t> g, double t) {
  check_inputs(p, g);
  check_threshold(t);
  Confusion c;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool b = p[i] >= t;
    if (b && g[i]) ++c.tp;
    else if (b) ++c.fp;
    else if (g[i]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double mae(std::span<const double> p, std::span<const std::uint8_t> g) {
  check_inputs(p, g);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - static_cast<double>(g[i]));
  return s / static_cast<double>(p.size());
}

std::optional<double> f_measure(const Confusion& c, double beta_sq) {
  if (c.tp + c.fn == 0) return std::nullopt;
  if (c.tp == 0) return 0.0;  // covers "nothing predicted" and prec = reca = 0
  const double prec = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double reca = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return (1.0 + beta_sq) * prec * reca / (beta_sq * prec + reca);
}

std::optional<double> f_measure_at(std::span<const double> p, std::span<const std::uint8_t> g, double t,
                                   double beta_sq) {
  return f_measure(confusion_at(p, g, t), beta_sq);
}

double e_measure(const Confusion& c, double epsilon) {
  const double n = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
  if (n == 0) throw_data("metrics: empty view");
  const double mean_b = static_cast<double>(c.tp + c.fp) / n;
  const double mean_g = static_cast<double>(c.tp + c.fn) / n;
  const bool b_const = c.tp + c.fp == 0 || c.fn + c.tn == 0;
  const bool g_const = c.tp + c.fn == 0 || c.fp + c.tn == 0;
  if (b_const && g_const) return mean_b == mean_g ? 1.0 : 0.0;
  // Every point in one (b, g) cell has the same alignment.
  auto cell = [&](double b, double gv) {
    const double pb = b - mean_b, pg = gv - mean_g;
    const double xi = 2.0 * pb * pg / (pb * pb + pg * pg + epsilon);
    return (1.0 + xi) * (1.0 + xi) / 4.0;
  };
  const double total = static_cast<double>(c.tp) * cell(1, 1) + static_cast<double>(c.fp) * cell(1, 0) +
                       static_cast<double>(c.fn) * cell(0, 1) + static_cast<double>(c.tn) * cell(0, 0);
  return total / n;
}

double e_measure_at(std::span<const double> p, std::span<const std::uint8_t> g, double t, double epsilon) {
  return e_measure(confusion_at(p, g, t), epsilon);
}

double iou(const Confusion& c) {
  const std::size_t uni = c.tp + c.fp + c.fn;
  return uni == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(uni);
}

double iou(std::span<const double> p, std::span<const std::uint8_t> g, double t) { return iou(confusion_at(p, g, t)); }

MetricsReport evaluate(std::span<const double> p, std::span<const std::uint8_t> g, const MetricsConfig& config) {
  config.validate();
  check_inputs(p, g);
  MetricsReport r;
  r.mae = mae(p, g);
  r.iou = iou(confusion_at(p, g, config.iou_threshold));

  // Histogram of grid levels per class; positives at threshold i are the
  // points with level >= i.
  std::array<std::size_t, kThresholds> pos{}, neg{};
  std::size_t gt_pos = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::size_t level = grid_level(p[i]);
    if (g[i]) {
      ++pos[level];
      ++gt_pos;
    } else {
      ++neg[level];
    }
  }
  const std::size_t gt_neg = p.size() - gt_pos;
  r.f_defined = gt_pos > 0;
  r.f_curve.assign(kThresholds, 0.0);
  r.e_curve.assign(kThresholds, 0.0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = kThresholds; k-- > 0;) {
    tp += pos[k];
    fp += neg[k];
    const Confusion c{tp, fp, gt_pos - tp, gt_neg - fp};
    r.f_curve[k] = f_measure(c, config.beta_sq).value_or(std::numeric_limits<double>::quiet_NaN());
    r.e_curve[k] = e_measure(c, config.epsilon);
  }
  summarize(r);
  return r;
}

MetricsReport aggregate(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw_data("metrics: nothing to aggregate");
  MetricsReport total;
  total.view_id = "aggregate";
  total.f_curve.assign(kThresholds, 0.0);
  total.e_curve.assign(kThresholds, 0.0);
  std::size_t f_views = 0;
  for (const auto& r : reports) {
    if (r.f_curve.size() != kThresholds || r.e_curve.size() != kThresholds) throw_data("metrics: malformed report");
    total.mae += r.mae;
    total.iou += r.iou;
    for (std::size_t k = 0; k < kThresholds; ++k) total.e_curve[k] += r.e_curve[k];
    if (r.f_defined) {
      ++f_views;
      for (std::size_t k = 0; k < kThresholds; ++k) total.f_curve[k] += r.f_curve[k];
    }
  }
  const double n = static_cast<double>(reports.size());
  total.mae /= n;
  total.iou /= n;
  for (auto& v : total.e_curve) v /= n;
  total.f_defined = f_views > 0;
  for (auto& v : total.f_curve) {
    v = f_views ? v / static_cast<double>(f_views) : std::numeric_limits<double>::quiet_NaN();
  }
  summarize(total);
  return total;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<MetricsReport>& views,
                      const MetricsReport& total) {
  std::ofstream out(path);
  if (!out) throw_data("cannot open for writing: " + path.string());
  out << "view_id,mae,iou,max_f,mean_f,max_e,mean_e\n";
  auto row = [&](const MetricsReport& r) {
    out << r.view_id << ',' << number(r.mae) << ',' << number(r.iou) << ',' << number(r.max_f) << ','
        << number(r.mean_f) << ',' << number(r.max_e) << ',' << number(r.mean_e) << '\n';
  };
  for (const auto& r : views) row(r);
  row(total);
  if (!out) throw_data("write failed: " + path.string());
}

void write_curve_csv(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream out(path);
  if (!out) throw_data("cannot open for writing: " + path.string());
  out << "threshold,f_measure,e_measure\n";
  for (std::size_t k = 0; k < kThresholds; ++k) {
    out << number(grid_threshold(k)) << ',' << number(report.f_curve[k]) << ',' << number(report.e_curve[k]) << '\n';
  }
  if (!out) throw_data("write failed: " + path.string());
}

}  // namespace pcsod::metrics

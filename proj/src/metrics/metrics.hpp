#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcsod::metrics {

inline constexpr std::size_t kThresholds = 256;

// Threshold i of the evaluation grid, i / 255.
double grid_threshold(std::size_t i);

struct MetricsConfig {
  double beta_sq = 0.3;
  double iou_threshold = 0.5;
  double epsilon = 1e-12;

  void validate() const;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Binarizes P >= t (inclusive).
Confusion confusion_at(std::span<const double> p, std::span<const std::uint8_t> g, double t);

double mae(std::span<const double> p, std::span<const std::uint8_t> g);

// Undefined (nullopt) when the ground truth has no positives.
std::optional<double> f_measure(const Confusion& c, double beta_sq = 0.3);
std::optional<double> f_measure_at(std::span<const double> p, std::span<const std::uint8_t> g, double t,
                                   double beta_sq = 0.3);

// Per-point enhanced alignment averaged over points.
double e_measure(const Confusion& c, double epsilon = 1e-12);
double e_measure_at(std::span<const double> p, std::span<const std::uint8_t> g, double t, double epsilon = 1e-12);

double iou(const Confusion& c);
double iou(std::span<const double> p, std::span<const std::uint8_t> g, double t = 0.5);

struct MetricsReport {
  std::string view_id;
  double mae = 0.0;
  double iou = 0.0;
  bool f_defined = true;  // false when no view had ground-truth positives
  std::vector<double> f_curve;
  std::vector<double> e_curve;
  double max_f = 0.0, mean_f = 0.0;
  double max_e = 0.0, mean_e = 0.0;
};

MetricsReport evaluate(std::span<const double> p, std::span<const std::uint8_t> g, const MetricsConfig& config = {});

// Averages per-view values and curves (views with undefined F are left out of
// the F average); scalar F/E are then taken from the averaged curves.
MetricsReport aggregate(const std::vector<MetricsReport>& reports);

// One row per view followed by a single "aggregate" row.
void write_report_csv(const std::filesystem::path& path, const std::vector<MetricsReport>& views,
                      const MetricsReport& total);
void write_curve_csv(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace pcsod::metrics

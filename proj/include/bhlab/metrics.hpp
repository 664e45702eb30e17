#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bhlab::metrics {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  /// Same predictions scored with the other class as positive.
  ConfusionCounts flipped() const { return {tn, fn, tp, fp}; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

/// Which ratios hit a 0/0 denominator (reported as 0).
struct DegenerateFlags {
  bool accuracy = false;
  bool sensitivity = false;
  bool ppv = false;
  bool npv = false;
  bool f1 = false;
};

struct MetricsReport {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double ppv = 0.0;
  double npv = 0.0;
  double f1 = 0.0;
  DegenerateFlags degenerate;
  std::vector<RocPoint> roc_points;
  double auc = 0.0;
  double single_point_auc = 0.0;
};

/// Positive class is malicious (label 1).
ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth);

/// Accuracy, sensitivity, PPV, NPV and F1 from the counts.
MetricsReport compute_metrics(const ConfusionCounts& c);

/// One point per distinct score (descending), with (0,0) and (1,1) added.
std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> truth);

double auc_trapezoid(std::span<const RocPoint> points);

/// Area under (0,0) -> (fpr,tpr) -> (1,1).
double single_point_auc(double tpr, double fpr);

/// compute_metrics plus the threshold-sweep ROC and the operating-point AUC.
MetricsReport evaluate(std::span<const int> predicted, std::span<const double> scores,
                       std::span<const int> truth);

}  // namespace bhlab::metrics

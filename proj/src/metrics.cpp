#include "bhlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bhlab/error.hpp"

namespace bhlab::metrics {

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
  degenerate = den == 0;
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predicted.size()) + " predictions vs " +
                                               std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw Error(ErrorCode::EmptyInput, "confusion of zero rows");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == 1, t = truth[i] == 1;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricsReport compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw Error(ErrorCode::EmptyInput, "metrics of zero rows");
  MetricsReport m;
  m.counts = c;
  m.accuracy = ratio(c.tp + c.tn, c.total(), m.degenerate.accuracy);
  m.sensitivity = ratio(c.tp, c.tp + c.fn, m.degenerate.sensitivity);
  m.ppv = ratio(c.tp, c.tp + c.fp, m.degenerate.ppv);
  m.npv = ratio(c.tn, c.tn + c.fn, m.degenerate.npv);
  m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, m.degenerate.f1);
  return m;
}

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "scores vs labels");
  const auto pos = static_cast<std::uint64_t>(std::count(truth.begin(), truth.end(), 1));
  const std::uint64_t neg = truth.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClassTruth, "ROC needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> pts{{0.0, 0.0}};
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (truth[order[k]] == 1 ? tp : fp) += 1;
    const bool last_of_tie = k + 1 == order.size() || scores[order[k + 1]] != scores[order[k]];
    if (last_of_tie) {
      pts.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos)});
    }
  }
  pts.push_back({1.0, 1.0});
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double auc_trapezoid(std::span<const RocPoint> points) {
  if (points.size() < 2) throw Error(ErrorCode::MalformedCurve, "need at least two points");
  if (points.front() != RocPoint{0.0, 0.0} || points.back() != RocPoint{1.0, 1.0}) {
    throw Error(ErrorCode::MalformedCurve, "curve must run from (0,0) to (1,1)");
  }
  double area = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!in_unit(points[i].fpr) || !in_unit(points[i].tpr)) {
      throw Error(ErrorCode::MalformedCurve, "coordinate outside [0,1]");
    }
    if (i == 0) continue;
    const RocPoint& a = points[i - 1];
    const RocPoint& b = points[i];
    if (b.fpr < a.fpr || (b.fpr == a.fpr && b.tpr < a.tpr)) {
      throw Error(ErrorCode::MalformedCurve, "points not sorted by (fpr, tpr)");
    }
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return area;
}

double single_point_auc(double tpr, double fpr) {
  if (!in_unit(tpr) || !in_unit(fpr)) throw Error(ErrorCode::OutOfRange, "tpr and fpr must lie in [0,1]");
  return (1.0 + tpr - fpr) / 2.0;
}

MetricsReport evaluate(std::span<const int> predicted, std::span<const double> scores,
                       std::span<const int> truth) {
  MetricsReport m = compute_metrics(confusion(predicted, truth));
  m.roc_points = roc_points(scores, truth);
  m.auc = auc_trapezoid(m.roc_points);
  const auto& c = m.counts;
  const double tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  m.single_point_auc = single_point_auc(tpr, fpr);
  return m;
}

}  // namespace bhlab::metrics

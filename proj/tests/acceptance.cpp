// Acceptance checks 1-7. One PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "bhlab/classifiers.hpp"
#include "bhlab/commands.hpp"
#include "bhlab/dataset.hpp"
#include "bhlab/metrics.hpp"
#include "bhlab/scenario.hpp"
#include "flow_oracle.hpp"
#include "net_fixture.hpp"

namespace fs = std::filesystem;
using namespace bhlab;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void report(int id, const char* name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail += std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    out.ok = false;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("over time budget");
  }
  if (!out.ok) ++failures;
  std::printf("%s criterion %d: %s (%.2f s)%s%s\n", out.ok ? "PASS" : "FAIL", id, name, secs,
              out.detail.empty() ? "" : " -- ", out.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void legend(Outcome& out) {
  struct Point {
    const char* name;
    double tpr, fpr, printed;
  };
  const Point pts[] = {{"GB", 0.86713287, 0.02116402, 0.923}, {"RF", 0.82517483, 0.01851852, 0.903},
                       {"SVM", 0.84615385, 0.01587302, 0.915}, {"KNN", 0.79020979, 0.01587302, 0.887},
                       {"GNB", 0.15384615, 0.0026455, 0.576},  {"LR", 0.30769231, 0.0978836, 0.605}};
  for (const auto& p : pts) {
    const double auc = metrics::single_point_auc(p.tpr, p.fpr);
    out.require(std::abs(auc - p.printed) <= 5e-4, std::string(p.name) + " gives " + fmt(auc));
  }
}

void identities(Outcome& out) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::uint64_t> d(0, 500);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    metrics::ConfusionCounts c{d(gen), d(gen), d(gen), d(gen)};
    if (c.total() == 0) c.tp = 1;
    const auto m = metrics::compute_metrics(c);
    if (std::abs(m.accuracy * c.total() - static_cast<double>(c.tp + c.tn)) > 1e-9) ++bad;
    const double denom = m.ppv + m.sensitivity;
    if (denom > 0 && std::abs(m.f1 - 2 * m.ppv * m.sensitivity / denom) > 1e-12) ++bad;
    for (double v : {m.accuracy, m.sensitivity, m.ppv, m.npv, m.f1}) {
      if (!(v >= 0.0 && v <= 1.0)) ++bad;
    }
    const double tpr = m.sensitivity;
    const double fpr = c.fp + c.tn ? static_cast<double>(c.fp) / (c.fp + c.tn) : 0.0;
    std::vector<metrics::RocPoint> curve{{0, 0}, {fpr, tpr}, {1, 1}};
    curve.erase(std::unique(curve.begin(), curve.end()), curve.end());
    if (std::is_sorted(curve.begin(), curve.end(), [](auto& a, auto& b) {
          return a.fpr < b.fpr || (a.fpr == b.fpr && a.tpr < b.tpr);
        })) {
      if (std::abs(metrics::auc_trapezoid(curve) - metrics::single_point_auc(tpr, fpr)) > 1e-12) ++bad;
    }
  }
  out.require(bad == 0, std::to_string(bad) + " identity violations");
}

void end_to_end(Outcome& out, const fs::path& dir) {
  const ScenarioConfig cfg;  // defaults: full parameter ranges, 500/1500 balance, 60/40 split
  const auto res = run_pipeline(cfg, dir);
  const auto& ev = res.evaluation;
  out.require(res.manifest.flows >= 2000, "only " + std::to_string(res.manifest.flows) + " flows");
  out.require(ev.malicious == 500 && ev.normal == 1500, "dataset not balanced to 500/1500");
  std::string summary;
  for (auto k : {ml::ModelKind::GB, ml::ModelKind::RF, ml::ModelKind::SVM, ml::ModelKind::KNN}) {
    const auto& m = ev.at(k).report;
    const std::string name(ml::to_string(k));
    summary += name + " acc " + fmt(m.accuracy) + " f1 " + fmt(m.f1) + "; ";
    out.require(m.accuracy >= 0.90, name + " accuracy " + fmt(m.accuracy) + " < 0.90");
    out.require(m.f1 >= 0.80, name + " F1 " + fmt(m.f1) + " < 0.80");
  }
  const double gb = ev.at(ml::ModelKind::GB).report.auc;
  const double gnb = ev.at(ml::ModelKind::GNB).report.auc;
  const double lr = ev.at(ml::ModelKind::LR).report.auc;
  out.require(gb >= gnb && gb >= lr,
              "AUC GB " + fmt(gb) + " vs GNB " + fmt(gnb) + " / LR " + fmt(lr));
  std::printf("  criterion 3 measurements: %zu flows (%zu malicious, %zu normal); %sAUC GB %s GNB %s LR %s\n",
              res.manifest.flows, res.manifest.malicious, res.manifest.normal, summary.c_str(),
              fmt(gb).c_str(), fmt(gnb).c_str(), fmt(lr).c_str());
}

void hand_trace(Outcome& out) {
  using aodv::Behavior;
  const auto pos = bhlab::testing::line(3, 200);
  for (bool attack : {true, false}) {
    const std::string tag = attack ? "blackhole B: " : "honest B: ";
    bhlab::testing::Net net(pos, {Behavior::Honest, attack ? Behavior::Blackhole : Behavior::Honest,
                                  Behavior::Honest});
    net.traffic->start_flow(net.flow(0, 2, 10));
    net.sim.run_until(SimTime::from_secs(30));
    const auto recs = net.monitor.finalize(net.sim.now());
    if (recs.size() != 1) {
      out.require(false, tag + "expected one flow");
      continue;
    }
    const auto& r = recs[0];
    const auto route = net.router->routes(node_id(0)).any(node_id(2));
    out.require(route && route->next_hop == node_id(1), tag + "route from A does not go via B");
    if (attack) {
      out.require(route && route->dest_seq >= net.router->config().seq_boost, tag + "forged reply lost");
      out.require(r.rx_packets == 0, tag + "delivery ratio not 0");
      out.require(r.blackhole_absorbed == 10, tag + "absorbed " + std::to_string(r.blackhole_absorbed));
      out.require(data::label_of(r) == 1, tag + "label not 1");
    } else {
      const int bfs = bhlab::testing::bfs_hops(pos, 250, 0)[2];
      out.require(r.rx_packets == 10 && r.tx_packets == 10, tag + "delivery ratio not 1");
      out.require(route && static_cast<int>(route->hop_count) == bfs && bfs == 2,
                  tag + "hop count differs from BFS");
      out.require(data::label_of(r) == 0, tag + "label not 0");
    }
  }
}

// Compact re-runs of the classifier oracles.
void oracles(Outcome& out) {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> noise(0, 1);
  auto blobs = [&](std::size_t n, double gap, std::size_t dims) {
    ml::FeatureMatrix x(n, dims);
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = i % 3 == 0;
      y.push_back(label);
      for (std::size_t j = 0; j < dims; ++j) x(i, j) = noise(gen) + label * gap + 5.0 * j;
    }
    return std::pair{x, y};
  };

  {  // KNN against exhaustive search
    auto [xtr, ytr] = blobs(200, 1.0, 4);
    auto [xte, yte] = blobs(200, 1.0, 4);
    ml::Knn knn;
    knn.fit(xtr, ytr);
    const auto pred = knn.predict(xte);
    ml::Standardizer s;
    s.fit(xtr);
    const auto a = s.transform(xtr), b = s.transform(xte);
    int mismatches = 0;
    for (std::size_t t = 0; t < b.rows(); ++t) {
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < 4; ++j) acc += (a(i, j) - b(t, j)) * (a(i, j) - b(t, j));
        d.emplace_back(acc, i);
      }
      std::sort(d.begin(), d.end());
      int ones = 0;
      for (int k = 0; k < 5; ++k) ones += ytr[d[k].second];
      mismatches += pred[t] != (ones >= 3);
    }
    out.require(mismatches == 0, "KNN disagrees on " + std::to_string(mismatches) + " rows");
  }
  {  // GNB closed form
    const auto x = ml::FeatureMatrix::from_rows({{1.0, 2.0}, {3.0, 5.0}, {2.0, 0.5}});
    ml::GaussianNb gnb;
    gnb.fit(x, std::vector<int>{0, 0, 1});
    const double eps = 1e-9 * 3.5, pi = std::acos(-1.0);
    const double q[2] = {1.5, 1.0};
    auto ll = [&](const double* m, const double* v) {
      double s = 0;
      for (int j = 0; j < 2; ++j) s += -0.5 * std::log(2 * pi * v[j]) - (q[j] - m[j]) * (q[j] - m[j]) / (2 * v[j]);
      return s;
    };
    const double m0[2] = {2.0, 3.5}, v0[2] = {1.0 + eps, 2.25 + eps};
    const double m1[2] = {2.0, 0.5}, v1[2] = {eps, eps};
    const double l0 = std::log(2.0 / 3.0) + ll(m0, v0), l1 = std::log(1.0 / 3.0) + ll(m1, v1);
    const double mx = std::max(l0, l1);
    const double p1 = std::exp(l1 - mx) / (std::exp(l0 - mx) + std::exp(l1 - mx));
    out.require(std::abs(gnb.posterior(std::vector<double>{q[0], q[1]})[1] - p1) <= 1e-12,
                "GNB posterior off");
  }
  {  // LR gradient vs central differences
    auto [x, y] = blobs(80, 1.0, 4);
    ml::Standardizer s;
    s.fit(x);
    const auto xs = s.transform(x);
    std::vector<double> wb{0.3, -0.7, 0.2, 1.1, -0.4};
    const auto g = ml::LogisticRegression::gradient(xs, y, wb, 1e-4);
    double worst = 0;
    for (std::size_t k = 0; k < wb.size(); ++k) {
      auto up = wb, dn = wb;
      up[k] += 1e-5;
      dn[k] -= 1e-5;
      const double fd = (ml::LogisticRegression::objective(xs, y, up, 1e-4) -
                         ml::LogisticRegression::objective(xs, y, dn, 1e-4)) / 2e-5;
      worst = std::max(worst, std::abs(fd - g[k]) / std::max(1e-8, std::abs(fd)));
    }
    out.require(worst < 1e-4, "LR gradient relative error " + std::to_string(worst));
  }
  {  // SVM KKT on a separable set, XOR-4
    auto [x, y] = blobs(40, 8.0, 2);
    ml::Svm svm;
    svm.fit(x, y);
    const double tol = svm.params().tol, c = svm.params().c;
    int violations = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double a = svm.training_alphas()[i];
      const double m = (y[i] ? 1.0 : -1.0) * svm.score_row(x.row(i));
      if (a <= 0 ? m < 1 - tol : a >= c ? m > 1 + tol : std::abs(m - 1) > tol) ++violations;
    }
    out.require(violations == 0, "SVM KKT violations " + std::to_string(violations));
    const auto xo = ml::FeatureMatrix::from_rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
    const std::vector<int> yo{0, 0, 1, 1};
    ml::Svm xsvm;
    xsvm.fit(xo, yo);
    out.require(xsvm.predict(xo) == yo, "SVM does not fit XOR-4");
  }
  {  // RF vote mode, GB loss
    auto [x, y] = blobs(300, 1.0, 4);
    auto [xt, yt] = blobs(200, 1.0, 4);
    ml::RandomForest rf;
    rf.fit(x, y);
    const auto pred = rf.predict(xt);
    int bad = 0;
    for (std::size_t i = 0; i < xt.rows(); ++i) {
      const auto v = rf.tree_votes(xt.row(i));
      bad += pred[i] != (2 * std::count(v.begin(), v.end(), 1) > static_cast<long>(v.size()));
    }
    out.require(bad == 0, "RF differs from vote mode on " + std::to_string(bad) + " rows");
    ml::GradientBoosting gb;
    gb.fit(x, y);
    out.require(gb.loss_history().back() < gb.loss_history().front(), "GB loss did not decrease");
  }
}

void determinism(Outcome& out, const fs::path& first, const fs::path& second) {
  run_pipeline(ScenarioConfig{}, second);
  for (const char* f : {"flows.csv", "dataset.csv", "report.json"}) {
    const auto a = slurp(first / f), b = slurp(second / f);
    out.require(!a.empty() && a == b, std::string(f) + " differs");
  }
}

void accounting(Outcome& out) {
  const ScenarioConfig cfg;
  std::size_t flows = 0, bad = 0;
  for (std::uint32_t i = 0; i < cfg.scenario_count; ++i) {
    const auto res = run_scenario(cfg, sample_scenario(cfg, i), true);
    const auto oracle = bhlab::testing::recompute(res.observations);
    for (const auto& r : res.records) {
      ++flows;
      auto it = oracle.find(r.key());
      if (it == oracle.end() || !bhlab::testing::compare(r, it->second).empty()) ++bad;
    }
  }
  out.require(bad == 0, std::to_string(bad) + " of " + std::to_string(flows) + " flows disagree");
  std::printf("  criterion 7 checked %zu flows over %u scenarios\n", flows, cfg.scenario_count);
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "bhlab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  report(1, "ROC legend values from single operating points", 1.0, legend);
  report(2, "metric identities on 1000 random confusion matrices", 5.0, identities);
  report(3, "default pipeline detection quality", 300.0,
         [&](Outcome& o) { end_to_end(o, root / "run1"); });
  report(4, "blackhole hand-trace on a 3-node chain", 1.0, hand_trace);
  report(5, "classifier oracle suite", 30.0, oracles);
  report(6, "pipeline determinism", 0.0,
         [&](Outcome& o) { determinism(o, root / "run1", root / "run2"); });
  report(7, "flow accounting on every scenario", 0.0, accounting);

  fs::remove_all(root);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

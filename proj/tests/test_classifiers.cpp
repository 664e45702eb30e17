#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "bhlab/classifiers.hpp"
#include "bhlab/error.hpp"
#include "bhlab/rng.hpp"

using namespace bhlab;
using namespace bhlab::ml;

namespace {

struct Data {
  FeatureMatrix x;
  std::vector<int> y;
};

// Two Gaussian blobs in `dims` dimensions, centres `gap` apart on every axis.
Data blobs(std::size_t n, double gap, std::uint64_t seed, std::size_t dims = 4) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Data d;
  d.x = FeatureMatrix(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 3 == 0 ? 1 : 0;
    d.y.push_back(label);
    for (std::size_t j = 0; j < dims; ++j) d.x(i, j) = noise(gen) + (label ? gap : 0.0) + 10.0 * j;
  }
  return d;
}

Data xor4() {
  return {FeatureMatrix::from_rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}}), {0, 0, 1, 1}};
}

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::OutOfRange;
}

}  // namespace

TEST(Knn, MatchesExhaustiveSearch) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0, 100);
  auto make = [&](std::size_t n) {
    Data d;
    d.x = FeatureMatrix(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 4; ++j) d.x(i, j) = u(gen) * (j + 1);
      d.y.push_back(d.x(i, 0) + d.x(i, 1) / 2 + u(gen) > 150 ? 1 : 0);
    }
    return d;
  };
  const Data train = make(200), test = make(200);
  Knn knn;
  knn.fit(train.x, train.y);
  const auto pred = knn.predict(test.x);

  // independent standardization with population std
  std::vector<double> mean(4, 0), sd(4, 0);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t i = 0; i < 200; ++i) mean[j] += train.x(i, j) / 200;
    for (std::size_t i = 0; i < 200; ++i) sd[j] += std::pow(train.x(i, j) - mean[j], 2) / 200;
    sd[j] = std::sqrt(sd[j]);
  }
  for (std::size_t t = 0; t < 200; ++t) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < 200; ++i) {
      double d2 = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        d2 += std::pow((test.x(t, j) - mean[j]) / sd[j] - (train.x(i, j) - mean[j]) / sd[j], 2);
      }
      all.emplace_back(d2, i);
    }
    std::sort(all.begin(), all.end());
    int ones = 0;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < 5; ++k) {
      ones += train.y[all[k].second];
      idx.push_back(all[k].second);
    }
    ASSERT_EQ(pred[t], ones >= 3 ? 1 : 0) << "row " << t;
    EXPECT_EQ(knn.neighbours(test.x.row(t)), idx);
  }
}

TEST(Gnb, PosteriorMatchesClosedForm) {
  const auto x = FeatureMatrix::from_rows({{1.0, 2.0}, {3.0, 5.0}, {2.0, 0.5}});
  const std::vector<int> y{0, 0, 1};
  GaussianNb gnb;
  gnb.fit(x, y);

  // overall variances: col0 {1,3,2} -> 2/3 ; col1 {2,5,0.5} -> 3.5
  const double eps = 1e-9 * 3.5;
  const double m0[2] = {2.0, 3.5}, v0[2] = {1.0 + eps, 2.25 + eps};
  const double m1[2] = {2.0, 0.5}, v1[2] = {eps, eps};
  auto loglik = [](const double* m, const double* v, double a, double b) {
    const double pi = std::acos(-1.0);
    return -0.5 * std::log(2 * pi * v[0]) - (a - m[0]) * (a - m[0]) / (2 * v[0]) -
           0.5 * std::log(2 * pi * v[1]) - (b - m[1]) * (b - m[1]) / (2 * v[1]);
  };
  for (const auto& q : std::vector<std::array<double, 2>>{{2.0, 0.5}, {1.0, 2.0}, {2.0, 0.50001}}) {
    const double l0 = std::log(2.0 / 3.0) + loglik(m0, v0, q[0], q[1]);
    const double l1 = std::log(1.0 / 3.0) + loglik(m1, v1, q[0], q[1]);
    const double mx = std::max(l0, l1);
    const double p1 = std::exp(l1 - mx) / (std::exp(l0 - mx) + std::exp(l1 - mx));
    const auto post = gnb.posterior(q);
    EXPECT_NEAR(post[1], p1, 1e-12);
    EXPECT_NEAR(post[0], 1.0 - p1, 1e-12);
  }
  EXPECT_NEAR(gnb.priors()[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(gnb.variances()[0][1], 2.25 + eps, 1e-15);
}

TEST(Lr, GradientMatchesCentralDifferences) {
  const Data d = blobs(60, 1.0, 5);
  Standardizer s;
  s.fit(d.x);
  const auto xs = s.transform(d.x);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> wb(5);
    for (auto& w : wb) w = n(gen);
    const auto g = LogisticRegression::gradient(xs, d.y, wb, 1e-2);
    for (std::size_t k = 0; k < wb.size(); ++k) {
      const double h = 1e-5;
      auto up = wb, dn = wb;
      up[k] += h;
      dn[k] -= h;
      const double fd = (LogisticRegression::objective(xs, d.y, up, 1e-2) -
                         LogisticRegression::objective(xs, d.y, dn, 1e-2)) / (2 * h);
      EXPECT_LT(std::abs(fd - g[k]) / std::max(1e-8, std::abs(fd)), 1e-4) << "coord " << k;
    }
  }
}

TEST(Lr, TrainingReducesObjective) {
  const Data d = blobs(200, 2.0, 8);
  LogisticRegression lr;
  lr.fit(d.x, d.y);
  ASSERT_EQ(lr.loss_history().size(), 501u);
  EXPECT_LT(lr.loss_history().back(), lr.loss_history().front());
  for (std::size_t i = 1; i < lr.loss_history().size(); ++i) {
    EXPECT_LE(lr.loss_history()[i], lr.loss_history()[i - 1] + 1e-12);
  }
}

TEST(Svm, KktConditionsOnSeparableSet) {
  const Data d = blobs(40, 8.0, 13, 2);
  Svm svm;
  svm.fit(d.x, d.y);
  EXPECT_TRUE(svm.converged());
  const auto& alpha = svm.training_alphas();
  const double c = svm.params().c, tol = svm.params().tol;
  double balance = 0;
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    const double yi = d.y[i] ? 1.0 : -1.0;
    const double margin = yi * svm.score_row(d.x.row(i));
    ASSERT_GE(alpha[i], 0.0);
    ASSERT_LE(alpha[i], c);
    balance += yi * alpha[i];
    if (alpha[i] <= 0.0) {
      EXPECT_GE(margin, 1.0 - tol) << i;
    } else if (alpha[i] >= c) {
      EXPECT_LE(margin, 1.0 + tol) << i;
    } else {
      EXPECT_NEAR(margin, 1.0, tol) << i;
    }
  }
  EXPECT_NEAR(balance, 0.0, 1e-10);
  EXPECT_EQ(svm.predict(d.x), d.y);
}

TEST(Svm, FitsXor) {
  const Data d = xor4();
  Svm svm;
  svm.fit(d.x, d.y);
  EXPECT_EQ(svm.predict(d.x), d.y);
  EXPECT_EQ(svm.support_count(), 4u);
}

TEST(Svm, KernelIsRbfOnStandardizedInputs) {
  Svm svm;
  const std::vector<double> a{0, 0}, b{1, 2};
  EXPECT_NEAR(svm.kernel(a, b), std::exp(-0.25 * 5.0), 1e-15);
}

TEST(Rf, PredictionIsTreeVoteMode) {
  const Data train = blobs(300, 1.2, 21), test = blobs(200, 1.2, 22);
  RandomForest rf;
  rf.fit(train.x, train.y);
  EXPECT_EQ(rf.trees().size(), 100u);
  const auto pred = rf.predict(test.x);
  for (std::size_t i = 0; i < test.y.size(); ++i) {
    const auto votes = rf.tree_votes(test.x.row(i));
    const auto ones = std::count(votes.begin(), votes.end(), 1);
    EXPECT_EQ(pred[i], 2 * ones > static_cast<long>(votes.size()) ? 1 : 0) << i;
  }
}

TEST(Rf, EvenSplitVotesNormal) {
  std::vector<DecisionTree> trees{DecisionTree({TreeNode{-1, 0, -1, -1, 0.0}}),
                                  DecisionTree({TreeNode{-1, 0, -1, -1, 1.0}})};
  auto rf = RandomForest::from_trees(trees, 1);
  const auto x = FeatureMatrix::from_rows({{0.0}});
  EXPECT_DOUBLE_EQ(rf.score(x)[0], 0.5);
  EXPECT_EQ(rf.predict(x)[0], 0);
}

TEST(Gb, TrainingLossDecreases) {
  const Data d = blobs(300, 1.0, 31);
  GradientBoosting gb;
  gb.fit(d.x, d.y);
  ASSERT_EQ(gb.loss_history().size(), 51u);
  EXPECT_LT(gb.loss_history().back(), gb.loss_history().front());
  EXPECT_NEAR(gb.initial_log_odds(), std::log(100.0 / 200.0), 1e-12);
}

TEST(Gb, FitsXor) {
  const Data d = xor4();
  GradientBoosting gb;
  gb.fit(d.x, d.y);
  EXPECT_EQ(gb.predict(d.x), d.y);
}

TEST(AllModels, SeparableDataAtLeast95Percent) {
  const Data train = blobs(400, 4.0, 41), test = blobs(400, 4.0, 42);
  for (ModelKind k : kAllKinds) {
    auto m = make_classifier(k);
    m->fit(train.x, train.y);
    EXPECT_GE(accuracy(m->predict(test.x), test.y), 0.95) << to_string(k);
  }
}

TEST(AllModels, LabelIsScoreAgainstThreshold) {
  const Data train = blobs(200, 1.0, 51), test = blobs(100, 1.0, 52);
  for (ModelKind k : kAllKinds) {
    auto m = make_classifier(k);
    m->fit(train.x, train.y);
    const auto s = m->score(test.x);
    const auto p = m->predict(test.x);
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(p[i], s[i] >= m->threshold() ? 1 : 0) << to_string(k);
    }
  }
}

TEST(AllModels, DeterministicRefit) {
  const Data train = blobs(150, 1.0, 61);
  for (ModelKind k : kAllKinds) {
    auto a = make_classifier(k), b = make_classifier(k);
    a->fit(train.x, train.y);
    b->fit(train.x, train.y);
    EXPECT_EQ(a->score(train.x), b->score(train.x)) << to_string(k);
  }
}

TEST(AllModels, PersistenceRoundTrip) {
  const Data train = blobs(150, 1.0, 71), test = blobs(80, 1.0, 72);
  for (ModelKind k : kAllKinds) {
    auto m = make_classifier(k);
    m->fit(train.x, train.y);
    std::stringstream ss;
    m->save(ss);
    auto back = load_model(ss);
    EXPECT_EQ(back->kind(), k);
    EXPECT_EQ(back->score(test.x), m->score(test.x)) << to_string(k);
    EXPECT_EQ(back->predict(test.x), m->predict(test.x)) << to_string(k);
  }
}

TEST(AllModels, ContractErrors) {
  const Data d = blobs(30, 1.0, 81);
  const auto narrow = FeatureMatrix::from_rows({{1.0, 2.0}});
  for (ModelKind k : kAllKinds) {
    auto m = make_classifier(k);
    EXPECT_EQ(code_of([&] { m->score(d.x); }), ErrorCode::UntrainedModel);
    EXPECT_EQ(code_of([&] { m->fit(d.x, std::vector<int>(3, 0)); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([&] { m->fit(FeatureMatrix(0, 4), std::vector<int>{}); }), ErrorCode::EmptyInput);
    if (k != ModelKind::KNN) {
      EXPECT_EQ(code_of([&] { m->fit(d.x, std::vector<int>(30, 1)); }), ErrorCode::SingleClassTraining);
    }
    m->fit(d.x, d.y);
    EXPECT_EQ(code_of([&] { m->score(narrow); }), ErrorCode::WidthMismatch);
  }
  EXPECT_EQ(code_of([] { FeatureMatrix::from_rows({{1.0, 2.0}, {3.0}}); }), ErrorCode::WidthMismatch);
  EXPECT_EQ(parse_kind("SVM"), ModelKind::SVM);
}

TEST(Standardizer, ZeroVarianceColumnsPassThroughCentred) {
  const auto x = FeatureMatrix::from_rows({{1.0, 5.0}, {3.0, 5.0}});
  Standardizer s;
  s.fit(x);
  const auto t = s.transform(x);
  EXPECT_DOUBLE_EQ(t(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(t(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(t(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(s.scale()[1], 1.0);
}

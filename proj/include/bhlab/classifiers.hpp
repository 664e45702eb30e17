#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "bhlab/dataset.hpp"
#include "bhlab/features.hpp"
#include "bhlab/tree.hpp"

namespace bhlab::ml {

enum class ModelKind { GB, RF, SVM, KNN, GNB, LR };

inline constexpr ModelKind kAllKinds[] = {ModelKind::GB,  ModelKind::RF,  ModelKind::SVM,
                                          ModelKind::KNN, ModelKind::GNB, ModelKind::LR};

std::string_view to_string(ModelKind kind);
ModelKind parse_kind(std::string_view name);

struct GbParams {
  std::size_t n_estimators = 50;
  double learning_rate = 0.1;
  int max_depth = 10;
  std::uint64_t seed = 0;
};

struct RfParams {
  std::size_t n_trees = 100;
  std::size_t max_features = 2;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct SvmParams {
  double c = 1.0;
  double gamma = 0.25;  // applied to standardized features
  double tol = 1e-3;
  std::size_t max_passes = 20;
};

struct KnnParams {
  std::size_t k = 5;
};

struct GnbParams {
  double var_smoothing = 1e-9;  // times the largest feature variance
};

struct LrParams {
  double step = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
  double threshold = 0.5;
};

struct ModelParams {
  GbParams gb;
  RfParams rf;
  SvmParams svm;
  KnnParams knn;
  GnbParams gnb;
  LrParams lr;
};

double sigmoid(double z);

FeatureMatrix features_of(const data::Dataset& ds);
std::vector<int> labels_of(const data::Dataset& ds);

/// Uniform contract over the six classifiers. Scores are oriented so that
/// larger means more likely malicious, and label == 1 iff score >= threshold().
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelKind kind() const = 0;
  /// Throws SingleClassTraining, LengthMismatch or EmptyInput.
  void fit(const FeatureMatrix& x, std::span<const int> y);
  bool trained() const { return width_ > 0; }
  std::size_t width() const { return width_; }
  virtual double threshold() const { return 0.5; }
  virtual bool needs_both_classes() const { return true; }

  /// Throw UntrainedModel or WidthMismatch.
  std::vector<double> score(const FeatureMatrix& x) const;
  std::vector<int> predict(const FeatureMatrix& x) const;
  double score_row(std::span<const double> x) const;

  void save(std::ostream& out) const;

 protected:
  virtual void do_fit(const FeatureMatrix& x, std::span<const int> y) = 0;
  virtual double do_score(std::span<const double> x) const = 0;
  virtual void save_params(std::ostream& out) const = 0;
  virtual void load_params(std::istream& in) = 0;

  std::size_t width_ = 0;

  friend std::unique_ptr<Classifier> load_model(std::istream& in);
};

/// F(x) = F0 + sum_t lr * h_t(x) with log-loss Newton leaves; score = sigmoid(F).
class GradientBoosting final : public Classifier {
 public:
  explicit GradientBoosting(GbParams params = {}) : params_(params) {}
  ModelKind kind() const override { return ModelKind::GB; }

  double raw(std::span<const double> x) const;
  double initial_log_odds() const { return f0_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  /// Mean training log-loss after each round; [0] is the loss at F0.
  const std::vector<double>& loss_history() const { return loss_history_; }

 protected:
  void do_fit(const FeatureMatrix& x, std::span<const int> y) override;
  double do_score(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  void load_params(std::istream& in) override;

 private:
  GbParams params_;
  double f0_ = 0.0;
  std::vector<DecisionTree> trees_;
  std::vector<double> loss_history_;
};

/// Bootstrap gini forest; score is the fraction of trees voting malicious and
/// the label is a strict majority (a 50/50 split votes normal).
class RandomForest final : public Classifier {
 public:
  explicit RandomForest(RfParams params = {}) : params_(params) {}
  ModelKind kind() const override { return ModelKind::RF; }
  double threshold() const override;

  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::vector<int> tree_votes(std::span<const double> x) const;
  /// Builds a forest from pre-made trees.
  static RandomForest from_trees(std::vector<DecisionTree> trees, std::size_t width);

 protected:
  void do_fit(const FeatureMatrix& x, std::span<const int> y) override;
  double do_score(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  void load_params(std::istream& in) override;

 private:
  RfParams params_;
  std::vector<DecisionTree> trees_;
};

/// Soft-margin RBF SVM trained by SMO with second-order working-set
/// selection. score = sum_i y_i alpha_i K(x_i, x) + b, threshold 0.
class Svm final : public Classifier {
 public:
  explicit Svm(SvmParams params = {}) : params_(params) {}
  ModelKind kind() const override { return ModelKind::SVM; }
  double threshold() const override { return 0.0; }

  double kernel(std::span<const double> a, std::span<const double> b) const;
  bool converged() const { return converged_; }
  std::size_t iterations() const { return iterations_; }
  /// Dual coefficients for every training row (0 for non-support vectors).
  const std::vector<double>& training_alphas() const { return train_alpha_; }
  double bias() const { return bias_; }
  std::size_t support_count() const { return support_.rows(); }
  const Standardizer& standardizer() const { return scaler_; }
  const SvmParams& params() const { return params_; }

 protected:
  void do_fit(const FeatureMatrix& x, std::span<const int> y) override;
  double do_score(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  void load_params(std::istream& in) override;

 private:
  SvmParams params_;
  Standardizer scaler_;
  FeatureMatrix support_;         // standardized support vectors
  std::vector<double> coef_;      // y_i * alpha_i per support vector
  std::vector<double> train_alpha_;
  double bias_ = 0.0;
  bool converged_ = false;
  std::size_t iterations_ = 0;
};

/// Euclidean k-nearest-neighbour majority vote on standardized features.
class Knn final : public Classifier {
 public:
  explicit Knn(KnnParams params = {}) : params_(params) {}
  ModelKind kind() const override { return ModelKind::KNN; }
  bool needs_both_classes() const override { return false; }

  /// Training-row indices of the k nearest neighbours, nearest first.
  std::vector<std::size_t> neighbours(std::span<const double> x) const;

 protected:
  void do_fit(const FeatureMatrix& x, std::span<const int> y) override;
  double do_score(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  void load_params(std::istream& in) override;

 private:
  KnnParams params_;
  Standardizer scaler_;
  FeatureMatrix train_;
  std::vector<int> labels_;
};

/// Gaussian naive Bayes in log space; score = posterior of the malicious class.
class GaussianNb final : public Classifier {
 public:
  explicit GaussianNb(GnbParams params = {}) : params_(params) {}
  ModelKind kind() const override { return ModelKind::GNB; }

  /// Normalized (P(normal | x), P(malicious | x)).
  std::array<double, 2> posterior(std::span<const double> x) const;
  const std::array<double, 2>& priors() const { return prior_; }
  const std::array<std::vector<double>, 2>& means() const { return mean_; }
  const std::array<std::vector<double>, 2>& variances() const { return var_; }

 protected:
  void do_fit(const FeatureMatrix& x, std::span<const int> y) override;
  double do_score(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  void load_params(std::istream& in) override;

 private:
  GnbParams params_;
  std::array<double, 2> prior_{};
  std::array<std::vector<double>, 2> mean_;
  std::array<std::vector<double>, 2> var_;
};

/// L2-regularized logistic regression by full-batch gradient descent on
/// standardized features.
class LogisticRegression final : public Classifier {
 public:
  explicit LogisticRegression(LrParams params = {}) : params_(params) {}
  ModelKind kind() const override { return ModelKind::LR; }
  double threshold() const override { return params_.threshold; }

  /// Mean log-loss plus (l2 / 2) * |w|^2 on standardized rows; the bias is
  /// the last element of `wb`.
  static double objective(const FeatureMatrix& xs, std::span<const int> y,
                          std::span<const double> wb, double l2);
  static std::vector<double> gradient(const FeatureMatrix& xs, std::span<const int> y,
                                      std::span<const double> wb, double l2);

  const std::vector<double>& weights() const { return wb_; }
  const std::vector<double>& loss_history() const { return loss_history_; }
  const Standardizer& standardizer() const { return scaler_; }

 protected:
  void do_fit(const FeatureMatrix& x, std::span<const int> y) override;
  double do_score(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  void load_params(std::istream& in) override;

 private:
  LrParams params_;
  Standardizer scaler_;
  std::vector<double> wb_;
  std::vector<double> loss_history_;
};

std::unique_ptr<Classifier> make_classifier(ModelKind kind, const ModelParams& params = {});

/// Reads a model written by Classifier::save.
std::unique_ptr<Classifier> load_model(std::istream& in);

}  // namespace bhlab::ml

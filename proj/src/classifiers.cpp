#include "bhlab/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "bhlab/error.hpp"
#include "bhlab/rng.hpp"

namespace bhlab::ml {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::GB: return "GB";
    case ModelKind::RF: return "RF";
    case ModelKind::SVM: return "SVM";
    case ModelKind::KNN: return "KNN";
    case ModelKind::GNB: return "GNB";
    case ModelKind::LR: return "LR";
  }
  return "?";
}

ModelKind parse_kind(std::string_view name) {
  for (ModelKind k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::SchemaError, "unknown model kind '" + std::string(name) + "'");
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw Error(ErrorCode::WidthMismatch, "ragged feature rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw Error(ErrorCode::WidthMismatch, "row width differs");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void Standardizer::fit(const FeatureMatrix& x) {
  const std::size_t d = x.cols();
  mean_.assign(d, 0.0);
  scale_.assign(d, 0.0);
  const double n = static_cast<double>(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) mean_[j] += x(i, j);
  }
  for (double& m : mean_) m /= n;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - mean_[j];
      scale_[j] += c * c;
    }
  }
  for (double& s : scale_) {
    s = std::sqrt(s / n);
    if (!(s > 0.0)) s = 1.0;
  }
}

void Standardizer::set(std::vector<double> mean, std::vector<double> scale) {
  mean_ = std::move(mean);
  scale_ = std::move(scale);
}

void Standardizer::transform_row(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean_[j]) / scale_[j];
}

FeatureMatrix Standardizer::transform(const FeatureMatrix& x) const {
  FeatureMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) transform_row(x.row(i), out.row(i));
  return out;
}

FeatureMatrix features_of(const data::Dataset& ds) {
  FeatureMatrix m(ds.rows.size(), kFeatureCount);
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const auto& r = ds.rows[i];
    m(i, 0) = r.src_addr;
    m(i, 1) = r.dst_addr;
    m(i, 2) = r.src_port;
    m(i, 3) = r.dst_port;
  }
  return m;
}

std::vector<int> labels_of(const data::Dataset& ds) {
  std::vector<int> y;
  y.reserve(ds.rows.size());
  for (const auto& r : ds.rows) y.push_back(r.label);
  return y;
}

// ---------------------------------------------------------------------------
// Classifier

void Classifier::fit(const FeatureMatrix& x, std::span<const int> y) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorCode::EmptyInput, "no training rows");
  if (y.size() != x.rows()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(x.rows()) + " rows but " +
                                               std::to_string(y.size()) + " labels");
  }
  std::size_t positives = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorCode::SchemaError, "labels must be 0 or 1");
    positives += v == 1;
  }
  if (needs_both_classes() && (positives == 0 || positives == y.size())) {
    throw Error(ErrorCode::SingleClassTraining,
                std::string(to_string(kind())) + " needs both classes in training data");
  }
  width_ = 0;
  do_fit(x, y);
  width_ = x.cols();
}

double Classifier::score_row(std::span<const double> x) const {
  if (!trained()) throw Error(ErrorCode::UntrainedModel, std::string(to_string(kind())));
  if (x.size() != width_) {
    throw Error(ErrorCode::WidthMismatch, "model expects " + std::to_string(width_) +
                                              " features, got " + std::to_string(x.size()));
  }
  return do_score(x);
}

std::vector<double> Classifier::score(const FeatureMatrix& x) const {
  if (!trained()) throw Error(ErrorCode::UntrainedModel, std::string(to_string(kind())));
  if (x.cols() != width_ && x.rows() > 0) {
    throw Error(ErrorCode::WidthMismatch, "model expects " + std::to_string(width_) +
                                              " features, got " + std::to_string(x.cols()));
  }
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = do_score(x.row(i));
  return out;
}

std::vector<int> Classifier::predict(const FeatureMatrix& x) const {
  const auto s = score(x);
  const double t = threshold();
  std::vector<int> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] >= t ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Gradient boosting

void GradientBoosting::do_fit(const FeatureMatrix& x, std::span<const int> y) {
  const std::size_t n = x.rows();
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double p = std::clamp(positives / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
  f0_ = std::log(p / (1.0 - p));

  std::vector<double> f(n, f0_), prob(n), residual(n);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);

  auto mean_loss = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += y[i] == 1 ? softplus(-f[i]) : softplus(f[i]);
    return s / static_cast<double>(n);
  };

  trees_.clear();
  loss_history_.assign(1, mean_loss());
  const RegressionTreeOptions options{params_.max_depth, 2};
  const LeafValueFn newton = [&](std::span<const std::size_t> leaf) {
    double num = 0.0, den = 0.0;
    for (std::size_t i : leaf) {
      num += residual[i];
      den += prob[i] * (1.0 - prob[i]);
    }
    return std::abs(den) < 1e-150 ? 0.0 : num / den;
  };

  for (std::size_t t = 0; t < params_.n_estimators; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(f[i]);
      residual[i] = y[i] - prob[i];
    }
    DecisionTree tree = fit_regression_tree(x, residual, rows, options, newton);
    for (std::size_t i = 0; i < n; ++i) f[i] += params_.learning_rate * tree.predict(x.row(i));
    trees_.push_back(std::move(tree));
    loss_history_.push_back(mean_loss());
  }
}

double GradientBoosting::raw(std::span<const double> x) const {
  double f = f0_;
  for (const auto& t : trees_) f += params_.learning_rate * t.predict(x);
  return f;
}

double GradientBoosting::do_score(std::span<const double> x) const { return sigmoid(raw(x)); }

// ---------------------------------------------------------------------------
// Random forest

double RandomForest::threshold() const { return std::nextafter(0.5, 1.0); }

void RandomForest::do_fit(const FeatureMatrix& x, std::span<const int> y) {
  const std::size_t n = x.rows();
  const Rng root(params_.seed);
  const GiniTreeOptions options{-1, std::min(params_.max_features, x.cols()), 2};
  trees_.clear();
  trees_.reserve(params_.n_trees);
  std::vector<std::size_t> rows(n);
  for (std::size_t t = 0; t < params_.n_trees; ++t) {
    Rng rng = root.substream(t);
    if (params_.bootstrap) {
      for (auto& r : rows) r = rng.uniform_index(n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees_.push_back(fit_gini_tree(x, y, rows, options, rng));
  }
}

std::vector<int> RandomForest::tree_votes(std::span<const double> x) const {
  std::vector<int> votes;
  votes.reserve(trees_.size());
  for (const auto& t : trees_) votes.push_back(t.predict(x) >= 0.5 ? 1 : 0);
  return votes;
}

double RandomForest::do_score(std::span<const double> x) const {
  std::size_t ones = 0;
  for (const auto& t : trees_) ones += t.predict(x) >= 0.5;
  return static_cast<double>(ones) / static_cast<double>(trees_.size());
}

RandomForest RandomForest::from_trees(std::vector<DecisionTree> trees, std::size_t width) {
  RandomForest rf;
  rf.params_.n_trees = trees.size();
  rf.trees_ = std::move(trees);
  rf.width_ = width;
  return rf;
}

// ---------------------------------------------------------------------------
// SVM

double Svm::kernel(std::span<const double> a, std::span<const double> b) const {
  return std::exp(-params_.gamma * squared_distance(a, b));
}

void Svm::do_fit(const FeatureMatrix& x, std::span<const int> labels) {
  scaler_.fit(x);
  const FeatureMatrix xs = scaler_.transform(x);
  const std::size_t n = xs.rows();
  const double c = params_.c;
  constexpr double kTau = 1e-12;

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == 1 ? 1.0 : -1.0;

  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      k[i * n + j] = k[j * n + i] = kernel(xs.row(i), xs.row(j));
    }
  }
  auto K = [&](std::size_t i, std::size_t j) { return k[i * n + j]; };

  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < c : alpha[t] > 0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0 : alpha[t] < c; };

  const std::size_t max_iter = std::max<std::size_t>(params_.max_passes * 50 * n, 1000);
  converged_ = false;
  iterations_ = 0;
  while (iterations_ < max_iter) {
    // Maximal violating i, then second-order choice of j.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] >= gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      gmax2 = std::max(gmax2, y[t] * grad[t]);
      const double diff = gmax + y[t] * grad[t];
      if (diff > 0 && i < n) {
        double quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (quad <= 0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax + gmax2 < params_.tol) {
      converged_ = true;
      break;
    }
    ++iterations_;

    const double old_ai = alpha[i], old_aj = alpha[j];
    const double qij = y[i] * y[j] * K(i, j);
    if (y[i] != y[j]) {
      double quad = K(i, i) + K(j, j) + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * K(t, i) * dai + y[j] * K(t, j) * daj);
    }
  }

  // Bias from free vectors, or the middle of the feasible interval.
  double sum_free = 0.0;
  std::size_t n_free = 0;
  double ub = std::numeric_limits<double>::infinity(), lb = -ub;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] > 0 && alpha[t] < c) {
      sum_free += yg;
      ++n_free;
    } else if ((alpha[t] >= c && y[t] < 0) || (alpha[t] <= 0 && y[t] > 0)) {
      ub = std::min(ub, yg);
    } else {
      lb = std::max(lb, yg);
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  bias_ = -rho;

  train_alpha_ = alpha;
  support_ = FeatureMatrix(0, xs.cols());
  coef_.clear();
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0) {
      support_.append_row(xs.row(t));
      coef_.push_back(y[t] * alpha[t]);
    }
  }
}

double Svm::do_score(std::span<const double> x) const {
  std::vector<double> xs(x.size());
  scaler_.transform_row(x, xs);
  double f = bias_;
  for (std::size_t s = 0; s < support_.rows(); ++s) f += coef_[s] * kernel(support_.row(s), xs);
  return f;
}

// ---------------------------------------------------------------------------
// k-nearest neighbours

void Knn::do_fit(const FeatureMatrix& x, std::span<const int> y) {
  scaler_.fit(x);
  train_ = scaler_.transform(x);
  labels_.assign(y.begin(), y.end());
}

std::vector<std::size_t> Knn::neighbours(std::span<const double> x) const {
  std::vector<double> xs(x.size());
  scaler_.transform_row(x, xs);
  std::vector<std::pair<double, std::size_t>> d(train_.rows());
  for (std::size_t i = 0; i < train_.rows(); ++i) d[i] = {squared_distance(train_.row(i), xs), i};
  const std::size_t k = std::min(params_.k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

double Knn::do_score(std::span<const double> x) const {
  std::vector<double> xs(x.size());
  scaler_.transform_row(x, xs);
  const auto nn = neighbours(x);
  std::size_t ones = 0;
  double dist[2] = {0.0, 0.0};
  for (std::size_t i : nn) {
    ones += labels_[i] == 1;
    dist[labels_[i]] += std::sqrt(squared_distance(train_.row(i), xs));
  }
  const double fraction = static_cast<double>(ones) / static_cast<double>(nn.size());
  if (2 * ones != nn.size()) return fraction;
  // Vote tie: the class whose neighbours are closer in total wins, else normal.
  return dist[1] < dist[0] ? 0.5 : std::nextafter(0.5, 0.0);
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

void GaussianNb::do_fit(const FeatureMatrix& x, std::span<const int> y) {
  const std::size_t n = x.rows(), d = x.cols();
  double max_var = 0.0;
  {
    Standardizer all;
    all.fit(x);
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += (x(i, j) - all.mean()[j]) * (x(i, j) - all.mean()[j]);
      max_var = std::max(max_var, v / static_cast<double>(n));
    }
  }
  const double epsilon = max_var > 0.0 ? params_.var_smoothing * max_var : params_.var_smoothing;

  for (int c = 0; c < 2; ++c) {
    mean_[c].assign(d, 0.0);
    var_[c].assign(d, 0.0);
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] != c) continue;
      count += 1.0;
      for (std::size_t j = 0; j < d; ++j) mean_[c][j] += x(i, j);
    }
    for (double& m : mean_[c]) m /= count;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] != c) continue;
      for (std::size_t j = 0; j < d; ++j) {
        const double dv = x(i, j) - mean_[c][j];
        var_[c][j] += dv * dv;
      }
    }
    for (double& v : var_[c]) v = v / count + epsilon;
    prior_[c] = count / static_cast<double>(n);
  }
}

std::array<double, 2> GaussianNb::posterior(std::span<const double> x) const {
  std::array<double, 2> log_joint{};
  for (int c = 0; c < 2; ++c) {
    double lj = std::log(prior_[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = x[j] - mean_[c][j];
      lj -= 0.5 * (std::log(2.0 * std::numbers::pi * var_[c][j]) + diff * diff / var_[c][j]);
    }
    log_joint[c] = lj;
  }
  const double m = std::max(log_joint[0], log_joint[1]);
  const double e0 = std::exp(log_joint[0] - m), e1 = std::exp(log_joint[1] - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double GaussianNb::do_score(std::span<const double> x) const { return posterior(x)[1]; }

// ---------------------------------------------------------------------------
// Logistic regression

double LogisticRegression::objective(const FeatureMatrix& xs, std::span<const int> y,
                                     std::span<const double> wb, double l2) {
  const std::size_t d = xs.cols();
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.rows(); ++i) {
    double z = wb[d];
    for (std::size_t j = 0; j < d; ++j) z += wb[j] * xs(i, j);
    loss += softplus(z) - y[i] * z;
  }
  loss /= static_cast<double>(xs.rows());
  double reg = 0.0;
  for (std::size_t j = 0; j < d; ++j) reg += wb[j] * wb[j];
  return loss + 0.5 * l2 * reg;
}

std::vector<double> LogisticRegression::gradient(const FeatureMatrix& xs, std::span<const int> y,
                                                 std::span<const double> wb, double l2) {
  const std::size_t d = xs.cols();
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t i = 0; i < xs.rows(); ++i) {
    double z = wb[d];
    for (std::size_t j = 0; j < d; ++j) z += wb[j] * xs(i, j);
    const double err = sigmoid(z) - y[i];
    for (std::size_t j = 0; j < d; ++j) g[j] += err * xs(i, j);
    g[d] += err;
  }
  const double n = static_cast<double>(xs.rows());
  for (double& v : g) v /= n;
  for (std::size_t j = 0; j < d; ++j) g[j] += l2 * wb[j];
  return g;
}

void LogisticRegression::do_fit(const FeatureMatrix& x, std::span<const int> y) {
  scaler_.fit(x);
  const FeatureMatrix xs = scaler_.transform(x);
  wb_.assign(xs.cols() + 1, 0.0);
  loss_history_.assign(1, objective(xs, y, wb_, params_.l2));
  for (std::size_t e = 0; e < params_.epochs; ++e) {
    const auto g = gradient(xs, y, wb_, params_.l2);
    for (std::size_t j = 0; j < wb_.size(); ++j) wb_[j] -= params_.step * g[j];
    loss_history_.push_back(objective(xs, y, wb_, params_.l2));
  }
}

double LogisticRegression::do_score(std::span<const double> x) const {
  std::vector<double> xs(x.size());
  scaler_.transform_row(x, xs);
  double z = wb_.back();
  for (std::size_t j = 0; j < xs.size(); ++j) z += wb_[j] * xs[j];
  return sigmoid(z);
}

std::unique_ptr<Classifier> make_classifier(ModelKind kind, const ModelParams& params) {
  switch (kind) {
    case ModelKind::GB: return std::make_unique<GradientBoosting>(params.gb);
    case ModelKind::RF: return std::make_unique<RandomForest>(params.rf);
    case ModelKind::SVM: return std::make_unique<Svm>(params.svm);
    case ModelKind::KNN: return std::make_unique<Knn>(params.knn);
    case ModelKind::GNB: return std::make_unique<GaussianNb>(params.gnb);
    case ModelKind::LR: return std::make_unique<LogisticRegression>(params.lr);
  }
  throw Error(ErrorCode::SchemaError, "unknown model kind");
}

}  // namespace bhlab::ml

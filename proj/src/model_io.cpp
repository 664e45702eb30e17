// Text model format:
//
//   bhlab-model 1
//   kind <GB|RF|SVM|KNN|GNB|LR>
//   width <features>
//   <kind-specific fields, one "name count values..." record per line>
//
// Doubles use the shortest round-trip decimal form, so a reloaded model
// reproduces predictions exactly.

#include <istream>
#include <ostream>
#include <string>

#include "bhlab/classifiers.hpp"
#include "bhlab/dataset.hpp"
#include "bhlab/error.hpp"

namespace bhlab::ml {

namespace {

void put_vector(std::ostream& out, std::string_view name, std::span<const double> v) {
  out << name << ' ' << v.size();
  for (double d : v) out << ' ' << data::format_double(d);
  out << '\n';
}

void put_scalar(std::ostream& out, std::string_view name, double v) {
  out << name << ' ' << data::format_double(v) << '\n';
}

void expect(std::istream& in, std::string_view name) {
  std::string tok;
  if (!(in >> tok) || tok != name) {
    throw Error(ErrorCode::SchemaError, "model file: expected '" + std::string(name) + "', got '" + tok + "'");
  }
}

double get_double(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw Error(ErrorCode::SchemaError, "model file truncated");
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::SchemaError, "model file: bad number '" + tok + "'");
  }
}

std::size_t get_count(std::istream& in) {
  long long v = 0;
  if (!(in >> v) || v < 0) throw Error(ErrorCode::SchemaError, "model file: bad count");
  return static_cast<std::size_t>(v);
}

double get_scalar(std::istream& in, std::string_view name) {
  expect(in, name);
  return get_double(in);
}

std::vector<double> get_vector(std::istream& in, std::string_view name) {
  expect(in, name);
  std::vector<double> v(get_count(in));
  for (double& d : v) d = get_double(in);
  return v;
}

void put_tree(std::ostream& out, const DecisionTree& tree) {
  out << "tree " << tree.nodes().size() << '\n';
  for (const auto& n : tree.nodes()) {
    out << n.feature << ' ' << data::format_double(n.threshold) << ' ' << n.left << ' ' << n.right
        << ' ' << data::format_double(n.value) << '\n';
  }
}

DecisionTree get_tree(std::istream& in) {
  expect(in, "tree");
  std::vector<TreeNode> nodes(get_count(in));
  for (auto& n : nodes) {
    if (!(in >> n.feature)) throw Error(ErrorCode::SchemaError, "model file: bad tree node");
    n.threshold = get_double(in);
    if (!(in >> n.left >> n.right)) throw Error(ErrorCode::SchemaError, "model file: bad tree node");
    n.value = get_double(in);
  }
  const auto count = static_cast<std::int32_t>(nodes.size());
  for (const auto& n : nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
      throw Error(ErrorCode::SchemaError, "model file: tree child out of range");
    }
  }
  if (nodes.empty()) throw Error(ErrorCode::SchemaError, "model file: empty tree");
  return DecisionTree(std::move(nodes));
}

void put_matrix(std::ostream& out, std::string_view name, const FeatureMatrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? " " : "") << data::format_double(m(i, j));
    out << '\n';
  }
}

FeatureMatrix get_matrix(std::istream& in, std::string_view name) {
  expect(in, name);
  const std::size_t rows = get_count(in), cols = get_count(in);
  FeatureMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = get_double(in);
  }
  return m;
}

}  // namespace

void Classifier::save(std::ostream& out) const {
  if (!trained()) throw Error(ErrorCode::UntrainedModel, std::string(to_string(kind())));
  out << "bhlab-model 1\nkind " << to_string(kind()) << "\nwidth " << width_ << '\n';
  save_params(out);
}

std::unique_ptr<Classifier> load_model(std::istream& in) {
  expect(in, "bhlab-model");
  if (get_count(in) != 1) throw Error(ErrorCode::SchemaError, "unsupported model version");
  expect(in, "kind");
  std::string kind;
  in >> kind;
  auto model = make_classifier(parse_kind(kind));
  expect(in, "width");
  const std::size_t width = get_count(in);
  model->load_params(in);
  model->width_ = width;
  return model;
}

void GradientBoosting::save_params(std::ostream& out) const {
  put_scalar(out, "learning_rate", params_.learning_rate);
  put_scalar(out, "f0", f0_);
  out << "trees " << trees_.size() << '\n';
  for (const auto& t : trees_) put_tree(out, t);
}

void GradientBoosting::load_params(std::istream& in) {
  params_.learning_rate = get_scalar(in, "learning_rate");
  f0_ = get_scalar(in, "f0");
  expect(in, "trees");
  trees_.resize(get_count(in));
  for (auto& t : trees_) t = get_tree(in);
  params_.n_estimators = trees_.size();
}

void RandomForest::save_params(std::ostream& out) const {
  out << "trees " << trees_.size() << '\n';
  for (const auto& t : trees_) put_tree(out, t);
}

void RandomForest::load_params(std::istream& in) {
  expect(in, "trees");
  trees_.resize(get_count(in));
  for (auto& t : trees_) t = get_tree(in);
  params_.n_trees = trees_.size();
}

void Svm::save_params(std::ostream& out) const {
  put_scalar(out, "gamma", params_.gamma);
  put_scalar(out, "bias", bias_);
  put_vector(out, "mean", scaler_.mean());
  put_vector(out, "scale", scaler_.scale());
  put_vector(out, "coef", coef_);
  put_matrix(out, "support", support_);
}

void Svm::load_params(std::istream& in) {
  params_.gamma = get_scalar(in, "gamma");
  bias_ = get_scalar(in, "bias");
  auto mean = get_vector(in, "mean");
  auto scale = get_vector(in, "scale");
  scaler_.set(std::move(mean), std::move(scale));
  coef_ = get_vector(in, "coef");
  support_ = get_matrix(in, "support");
  if (coef_.size() != support_.rows()) throw Error(ErrorCode::SchemaError, "svm coef/support mismatch");
  converged_ = true;
}

void Knn::save_params(std::ostream& out) const {
  out << "k " << params_.k << '\n';
  put_vector(out, "mean", scaler_.mean());
  put_vector(out, "scale", scaler_.scale());
  std::vector<double> labels(labels_.begin(), labels_.end());
  put_vector(out, "labels", labels);
  put_matrix(out, "train", train_);
}

void Knn::load_params(std::istream& in) {
  expect(in, "k");
  params_.k = get_count(in);
  auto mean = get_vector(in, "mean");
  auto scale = get_vector(in, "scale");
  scaler_.set(std::move(mean), std::move(scale));
  const auto labels = get_vector(in, "labels");
  labels_.assign(labels.begin(), labels.end());
  train_ = get_matrix(in, "train");
  if (labels_.size() != train_.rows()) throw Error(ErrorCode::SchemaError, "knn label/row mismatch");
}

void GaussianNb::save_params(std::ostream& out) const {
  put_vector(out, "prior", prior_);
  for (int c = 0; c < 2; ++c) {
    put_vector(out, "mean", mean_[c]);
    put_vector(out, "var", var_[c]);
  }
}

void GaussianNb::load_params(std::istream& in) {
  const auto prior = get_vector(in, "prior");
  if (prior.size() != 2) throw Error(ErrorCode::SchemaError, "gnb needs two priors");
  prior_ = {prior[0], prior[1]};
  for (int c = 0; c < 2; ++c) {
    mean_[c] = get_vector(in, "mean");
    var_[c] = get_vector(in, "var");
  }
}

void LogisticRegression::save_params(std::ostream& out) const {
  put_scalar(out, "threshold", params_.threshold);
  put_vector(out, "mean", scaler_.mean());
  put_vector(out, "scale", scaler_.scale());
  put_vector(out, "weights", wb_);
}

void LogisticRegression::load_params(std::istream& in) {
  params_.threshold = get_scalar(in, "threshold");
  auto mean = get_vector(in, "mean");
  auto scale = get_vector(in, "scale");
  scaler_.set(std::move(mean), std::move(scale));
  wb_ = get_vector(in, "weights");
}

}  // namespace bhlab::ml

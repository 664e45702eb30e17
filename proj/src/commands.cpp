#include "bhlab/commands.hpp"

#include <fstream>
#include <future>

#include "bhlab/error.hpp"

namespace bhlab {

using nlohmann::json;

namespace {

json counts_json(const metrics::ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

}  // namespace

json RunManifest::to_json() const {
  json scen = json::array();
  for (const auto& s : scenarios) scen.push_back(params_to_json(s));
  json outs = json::object();
  for (const auto& [role, path] : outputs) outs[role] = path;
  return {{"config_digest", config_digest},
          {"config", config_to_json(config)},
          {"scenarios", scen},
          {"outputs", outs},
          {"class_counts", {{"flows", flows}, {"malicious", malicious}, {"normal", normal}}}};
}

SimulationOutput simulate(const ScenarioConfig& config, unsigned threads) {
  SimulationOutput out;
  out.manifest.config = config;
  out.manifest.config_digest = config_digest(config);
  for (auto& result : run_sweep(config, threads)) {
    for (const auto& r : result.records) {
      (data::label_of(r) == data::kMalicious ? out.manifest.malicious : out.manifest.normal) += 1;
      out.records.push_back(r);
    }
    out.manifest.scenarios.push_back(std::move(result.params));
  }
  out.manifest.flows = out.records.size();
  return out;
}

RunManifest cmd_simulate(const std::string& config_path, const std::filesystem::path& out_flows) {
  const ScenarioConfig config = load_config(config_path);
  SimulationOutput sim = simulate(config);
  ensure_parent(out_flows);
  data::write_flows_csv(sim.records, out_flows);
  std::filesystem::path manifest_path = out_flows;
  manifest_path.replace_extension(".manifest.json");
  sim.manifest.outputs = {{"flows", out_flows.string()}, {"manifest", manifest_path.string()}};
  write_text(manifest_path, sim.manifest.to_json().dump(2) + "\n");
  return sim.manifest;
}

const ClassifierResult& Evaluation::at(ml::ModelKind kind) const {
  for (const auto& c : classifiers) {
    if (c.kind == kind) return c;
  }
  throw Error(ErrorCode::OutOfRange, "classifier missing from evaluation");
}

json Evaluation::to_json() const {
  json models = json::array();
  for (const auto& c : classifiers) {
    const auto& m = c.report;
    models.push_back({{"name", std::string(ml::to_string(c.kind))},
                      {"threshold", c.threshold},
                      {"confusion", counts_json(m.counts)},
                      {"confusion_normal_positive", counts_json(m.counts.flipped())},
                      {"accuracy", m.accuracy},
                      {"sensitivity", m.sensitivity},
                      {"ppv", m.ppv},
                      {"npv", m.npv},
                      {"f1", m.f1},
                      {"auc", m.auc},
                      {"single_point_auc", m.single_point_auc},
                      {"degenerate",
                       {{"accuracy", m.degenerate.accuracy},
                        {"sensitivity", m.degenerate.sensitivity},
                        {"ppv", m.degenerate.ppv},
                        {"npv", m.degenerate.npv},
                        {"f1", m.degenerate.f1}}}});
  }
  return {{"positive_class", "malicious"},
          {"dataset", {{"rows", rows}, {"malicious", malicious}, {"normal", normal}}},
          {"split",
           {{"train_fraction", split_fraction},
            {"seed", seed},
            {"train_rows", train_rows},
            {"test_rows", test_rows}}},
          {"classifiers", models}};
}

void Evaluation::write_roc_csv(std::ostream& out) const {
  out << "classifier,fpr,tpr\n";
  for (const auto& c : classifiers) {
    for (const auto& p : c.report.roc_points) {
      out << ml::to_string(c.kind) << ',' << data::format_double(p.fpr) << ','
          << data::format_double(p.tpr) << '\n';
    }
  }
}

Evaluation evaluate(const data::Dataset& input, const EvaluateOptions& options) {
  data::Dataset ds = input;
  if (options.balance) {
    ds = data::balance(ds, options.balance->malicious, options.balance->normal, options.seed);
  }
  const std::size_t pos = ds.positives();
  if (pos == 0 || pos == ds.rows.size()) {
    throw Error(ErrorCode::SingleClassDataset, "dataset holds a single class (" +
                                                   std::to_string(ds.rows.size()) + " rows)");
  }
  auto [train, test] =
      data::split(ds, data::SplitSpec{options.split_fraction, options.seed, options.stratified});

  Evaluation eval;
  eval.rows = ds.rows.size();
  eval.malicious = pos;
  eval.normal = ds.rows.size() - pos;
  eval.split_fraction = options.split_fraction;
  eval.seed = options.seed;
  eval.train_rows = train.rows.size();
  eval.test_rows = test.rows.size();

  const ml::FeatureMatrix x_train = ml::features_of(train);
  const std::vector<int> y_train = ml::labels_of(train);
  const ml::FeatureMatrix x_test = ml::features_of(test);
  const std::vector<int> y_test = ml::labels_of(test);

  auto run = [&](ml::ModelKind kind) {
    auto model = ml::make_classifier(kind, options.params);
    model->fit(x_train, y_train);
    const auto labels = model->predict(x_test);
    const auto scores = model->score(x_test);
    return ClassifierResult{kind, model->threshold(), metrics::evaluate(labels, scores, y_test)};
  };

  if (options.parallel) {
    std::vector<std::future<ClassifierResult>> jobs;
    for (ml::ModelKind k : ml::kAllKinds) jobs.push_back(std::async(std::launch::async, run, k));
    for (auto& j : jobs) eval.classifiers.push_back(j.get());
  } else {
    for (ml::ModelKind k : ml::kAllKinds) eval.classifiers.push_back(run(k));
  }
  return eval;
}

void write_report(const Evaluation& eval, const std::filesystem::path& report,
                  const std::filesystem::path& roc) {
  ensure_parent(report);
  ensure_parent(roc);
  write_text(report, eval.to_json().dump(2) + "\n");
  std::ofstream out(roc, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + roc.string() + " for writing");
  eval.write_roc_csv(out);
}

Evaluation cmd_evaluate(const std::filesystem::path& dataset_path, const EvaluateOptions& options,
                        const std::filesystem::path& out_report, const std::filesystem::path& out_roc) {
  const Evaluation eval = evaluate(data::load_any(dataset_path), options);
  write_report(eval, out_report, out_roc);
  return eval;
}

PipelineOutput run_pipeline(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto flows_path = out_dir / "flows.csv";
  const auto dataset_path = out_dir / "dataset.csv";
  const auto report_path = out_dir / "report.json";
  const auto roc_path = out_dir / "roc.csv";
  const auto manifest_path = out_dir / "manifest.json";

  SimulationOutput sim = simulate(config);
  data::write_flows_csv(sim.records, flows_path);

  data::Dataset ds = data::label_flows(sim.records);
  ds.provenance.seed = config.seed;
  for (const auto& s : sim.manifest.scenarios) ds.provenance.scenario_ids.push_back(s.index);
  if (config.balance) {
    ds = data::balance(ds, config.balance->malicious, config.balance->normal, config.seed);
  }
  data::write_csv(ds, dataset_path);

  EvaluateOptions options;
  options.split_fraction = config.split_fraction;
  options.seed = config.seed;
  options.stratified = config.stratified_split;
  Evaluation eval = evaluate(ds, options);
  write_report(eval, report_path, roc_path);

  sim.manifest.outputs = {{"flows", flows_path.string()},
                          {"dataset", dataset_path.string()},
                          {"report", report_path.string()},
                          {"roc", roc_path.string()},
                          {"manifest", manifest_path.string()}};
  write_text(manifest_path, sim.manifest.to_json().dump(2) + "\n");
  return {std::move(sim.manifest), std::move(eval)};
}

PipelineOutput cmd_pipeline(const std::string& config_path, const std::filesystem::path& out_dir) {
  return run_pipeline(load_config(config_path), out_dir);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
      return 2;
    case ErrorCode::SchemaError:
    case ErrorCode::IoError:
    case ErrorCode::SingleClassDataset:
    case ErrorCode::InsufficientClassCount:
    case ErrorCode::TooFewRows:
    case ErrorCode::SingleClassTraining:
    case ErrorCode::SingleClassTruth:
      return 3;
    default:
      return 4;
  }
}

}  // namespace bhlab

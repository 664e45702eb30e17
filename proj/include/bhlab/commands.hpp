#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhlab/classifiers.hpp"
#include "bhlab/dataset.hpp"
#include "bhlab/error.hpp"
#include "bhlab/metrics.hpp"
#include "bhlab/scenario.hpp"

namespace bhlab {

struct RunManifest {
  std::string config_digest;
  ScenarioConfig config;
  std::vector<ScenarioParams> scenarios;
  std::vector<std::pair<std::string, std::string>> outputs;  // role -> path
  std::size_t flows = 0;
  std::size_t malicious = 0;
  std::size_t normal = 0;

  nlohmann::json to_json() const;
};

struct SimulationOutput {
  RunManifest manifest;
  std::vector<flowmon::FlowRecord> records;
};

/// Runs the sweep and gathers flow records in scenario order.
SimulationOutput simulate(const ScenarioConfig& config, unsigned threads = 0);

/// Writes flows.csv to `out_flows` and the manifest next to it
/// (`<stem>.manifest.json`).
RunManifest cmd_simulate(const std::string& config_path, const std::filesystem::path& out_flows);

struct ClassifierResult {
  ml::ModelKind kind{};
  double threshold = 0.0;
  metrics::MetricsReport report;
};

struct Evaluation {
  std::size_t rows = 0;
  std::size_t malicious = 0;
  std::size_t normal = 0;
  double split_fraction = 0.6;
  std::uint64_t seed = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::vector<ClassifierResult> classifiers;  // GB, RF, SVM, KNN, GNB, LR

  const ClassifierResult& at(ml::ModelKind kind) const;
  nlohmann::json to_json() const;
  void write_roc_csv(std::ostream& out) const;
};

struct EvaluateOptions {
  double split_fraction = 0.6;
  std::uint64_t seed = 0;
  std::optional<BalanceTarget> balance;
  bool stratified = false;
  ml::ModelParams params;
  bool parallel = true;
};

/// Balance (optional), split, train all six classifiers on the training part
/// and score them on the rest. Throws SingleClassDataset when the input holds
/// one class only.
Evaluation evaluate(const data::Dataset& dataset, const EvaluateOptions& options);

void write_report(const Evaluation& eval, const std::filesystem::path& report,
                  const std::filesystem::path& roc);

Evaluation cmd_evaluate(const std::filesystem::path& dataset_path, const EvaluateOptions& options,
                        const std::filesystem::path& out_report, const std::filesystem::path& out_roc);

struct PipelineOutput {
  RunManifest manifest;
  Evaluation evaluation;
};

/// simulate -> label -> balance (if configured) -> evaluate, writing flows.csv,
/// dataset.csv, report.json, roc.csv and manifest.json under out_dir.
PipelineOutput cmd_pipeline(const std::string& config_path, const std::filesystem::path& out_dir);
PipelineOutput run_pipeline(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Process exit code for a library error.
int exit_code_for(ErrorCode code);

}  // namespace bhlab

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "bhlab/commands.hpp"
#include "bhlab/error.hpp"

namespace {

void setup_logging() {
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("BHLAB_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

std::optional<bhlab::BalanceTarget> parse_balance(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw bhlab::Error(bhlab::ErrorCode::ConfigError, "--balance expects MALICIOUS:NORMAL");
  }
  try {
    return bhlab::BalanceTarget{std::stoul(text.substr(0, colon)), std::stoul(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw bhlab::Error(bhlab::ErrorCode::ConfigError, "--balance expects MALICIOUS:NORMAL");
  }
}

void log_evaluation(const bhlab::Evaluation& eval) {
  spdlog::info("{} rows ({} malicious, {} normal); train {} / test {}", eval.rows, eval.malicious,
               eval.normal, eval.train_rows, eval.test_rows);
  for (const auto& c : eval.classifiers) {
    spdlog::info("{:>4}  acc {:.4f}  sens {:.4f}  ppv {:.4f}  f1 {:.4f}  auc {:.4f}",
                 bhlab::ml::to_string(c.kind), c.report.accuracy, c.report.sensitivity,
                 c.report.ppv, c.report.f1, c.report.auc);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"VANET blackhole flow simulator and detector benchmark"};
  app.require_subcommand(1);

  std::string config_path, out_path, dataset_path, report_path, roc_path, balance_text, out_dir;
  double split = 0.6;
  std::uint64_t seed = 0;

  auto* sim = app.add_subcommand("simulate", "run the scenario sweep and write flows.csv");
  sim->add_option("--config", config_path, "scenario config JSON")->required();
  sim->add_option("--out", out_path, "flows CSV output")->required();

  auto* eval = app.add_subcommand("evaluate", "train and score the six classifiers");
  eval->add_option("--dataset", dataset_path, "flows.csv or dataset.csv")->required();
  eval->add_option("--split", split, "training fraction")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--seed", seed, "split/balance seed");
  eval->add_option("--report", report_path, "report JSON output")->required();
  eval->add_option("--roc", roc_path, "ROC CSV output")->required();
  eval->add_option("--balance", balance_text, "MALICIOUS:NORMAL subsample before splitting");

  auto* pipe = app.add_subcommand("pipeline", "simulate, label, balance and evaluate");
  pipe->add_option("--config", config_path, "scenario config JSON")->required();
  pipe->add_option("--out-dir", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const auto manifest = bhlab::cmd_simulate(config_path, out_path);
      spdlog::info("{} flows ({} malicious, {} normal) -> {}", manifest.flows, manifest.malicious,
                   manifest.normal, out_path);
    } else if (*eval) {
      bhlab::EvaluateOptions options;
      options.split_fraction = split;
      options.seed = seed;
      options.balance = parse_balance(balance_text);
      log_evaluation(bhlab::cmd_evaluate(dataset_path, options, report_path, roc_path));
    } else if (*pipe) {
      const auto out = bhlab::cmd_pipeline(config_path, out_dir);
      spdlog::info("{} flows ({} malicious, {} normal)", out.manifest.flows, out.manifest.malicious,
                   out.manifest.normal);
      log_evaluation(out.evaluation);
    }
  } catch (const bhlab::Error& e) {
    spdlog::error("{}", e.what());
    return bhlab::exit_code_for(e.code());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 4;
  }
  return 0;
}

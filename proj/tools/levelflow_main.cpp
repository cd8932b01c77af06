#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levelflow/levelflow.hpp"

namespace {

using levelflow::ExperimentConfig;
using levelflow::pipeline::RunLayout;

struct GlobalArgs {
  std::string config_path;
  std::string experiment;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

ExperimentConfig resolve_config(const GlobalArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) {
    cfg = ExperimentConfig::load(args.config_path);
    if (!args.experiment.empty() && args.experiment != cfg.experiment) {
      throw levelflow::ConfigError("experiment name conflicts with the config file");
    }
  } else if (args.experiment == "circles2d") {
    cfg = ExperimentConfig::circles2d_default();
  } else if (args.experiment == "mueller_brown") {
    cfg = ExperimentConfig::mueller_brown_default();
  } else {
    throw levelflow::ConfigError("pass --config or an experiment name");
  }
  if (args.seed) cfg.seed = *args.seed;
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  cfg.validate();
  return cfg;
}

int dispatch(const std::string& command, const GlobalArgs& args, const std::string& variant,
             const std::vector<double>& z_values, const std::string& input_csv, bool project) {
  const ExperimentConfig cfg = resolve_config(args);
  const RunLayout run{cfg.output_dir};
  if (command == "make-dataset") {
    for (const auto& p : levelflow::pipeline::cmd_make_dataset(cfg, run, variant)) {
      std::cout << p.string() << "\n";
    }
  } else if (command == "train-cv") {
    std::cout << levelflow::pipeline::cmd_train_cv(cfg, run).string() << "\n";
  } else if (command == "train-flow") {
    std::cout << levelflow::pipeline::cmd_train_flow(cfg, run, variant).string() << "\n";
  } else if (command == "generate") {
    for (const auto& p :
         levelflow::pipeline::cmd_generate(cfg, run, variant, z_values, project)) {
      std::cout << p.string() << "\n";
    }
  } else if (command == "project") {
    if (z_values.size() != 1) {
      throw levelflow::ConfigError("project: exactly one --z value required");
    }
    for (const auto& p : levelflow::pipeline::cmd_project(cfg, run, input_csv, z_values[0])) {
      std::cout << p.string() << "\n";
    }
  } else if (command == "evaluate") {
    for (const auto& p : levelflow::pipeline::cmd_evaluate(cfg, run)) {
      std::cout << p.string() << "\n";
    }
  } else if (command == "reproduce") {
    levelflow::pipeline::cmd_reproduce(cfg, run);
    std::cout << cfg.output_dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CV-conditioned flow matching on level-sets"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "experiment config JSON file");
  app.add_option("--seed", args.seed, "override the config seed");
  app.add_option("--out", args.out_dir, "override the output directory");

  std::string variant;
  std::vector<double> z_values;
  std::string input_csv;
  bool project = false;

  auto* make_dataset = app.add_subcommand("make-dataset", "sample a training dataset");
  make_dataset->add_option("--variant", variant,
                           "unbiased (default), abf or constrained for mueller_brown");
  auto* train_cv = app.add_subcommand("train-cv", "train the autoencoder CV");
  auto* train_flow = app.add_subcommand("train-flow", "train the conditional flow model");
  train_flow->add_option("--variant", variant, "unbiased (default) or abf for mueller_brown");
  auto* generate = app.add_subcommand("generate", "generate samples for target CV values");
  generate->add_option("--variant", variant, "model variant: unbiased (default) or abf");
  generate->add_option("--z", z_values, "target CV values (defaults to config z_values)");
  std::string z_file;
  generate->add_option("--z-file", z_file, "CSV file with one target CV value per row");
  generate->add_flag("--project", project, "also project samples onto the level-set");
  auto* project_cmd = app.add_subcommand("project", "project a dataset CSV onto a level-set");
  project_cmd->add_option("--input", input_csv, "dataset CSV to project")->required();
  project_cmd->add_option("--z", z_values, "target CV value")->required();
  auto* evaluate = app.add_subcommand("evaluate", "write the metric CSVs");
  auto* reproduce = app.add_subcommand("reproduce", "run the full experiment pipeline");
  std::string experiment_arg;
  reproduce->add_option("experiment", experiment_arg, "circles2d or mueller_brown");

  CLI11_PARSE(app, argc, argv);

  if (!z_file.empty()) {
    std::ifstream in(z_file);
    if (!in) {
      std::cerr << "error: io: cannot open z file: " << z_file << "\n";
      return 3;
    }
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line == "z") continue;
      try {
        z_values.push_back(std::stod(line));
      } catch (const std::exception&) {
        std::cerr << "error: io: malformed z value '" << line << "' in " << z_file << "\n";
        return 3;
      }
    }
  }

  std::string command;
  for (auto* sub : {make_dataset, train_cv, train_flow, generate, project_cmd, evaluate,
                    reproduce}) {
    if (sub->parsed()) command = sub->get_name();
  }
  if (!experiment_arg.empty()) args.experiment = experiment_arg;

  try {
    return dispatch(command, args, variant, z_values, input_csv, project);
  } catch (const levelflow::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const levelflow::IoError& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 3;
  } catch (const levelflow::NumericalError& e) {
    std::cerr << "error: numerical: " << e.what() << "\n";
    return 4;
  } catch (const levelflow::ConvergenceError& e) {
    std::cerr << "error: convergence: " << e.what() << "\n";
    return 5;
  } catch (const levelflow::ShapeError& e) {
    std::cerr << "error: shape: " << e.what() << "\n";
    return 6;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}

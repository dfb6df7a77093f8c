#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absa/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Aspect/opinion extraction and aspect sentiment tagging"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, test_path, input_path;
  std::string report_path = "eval_report.json";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;

  auto* train = app.add_subcommand("train", "Train a model from a run config");
  train->add_option("--config", config_path, "key=value run config file")->required();
  auto* seed_opt = train->add_option("--seed", seed, "override the config seed");
  train->add_option("--set", overrides, "override a config entry (key=value, repeatable)");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a test file");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval->add_option("--test", test_path, "aspect-level test file")->required();
  eval->add_option("--report", report_path, "where to write the JSON report");

  auto* tag = app.add_subcommand("tag", "Tag raw text, one sentence per line");
  tag->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  tag->add_option("--input", input_path, "text file to tag")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : absa::kExitConfig;
  }

  if (train->parsed()) {
    std::optional<std::uint64_t> seed_override;
    if (seed_opt->count() > 0) seed_override = seed;
    return absa::cmd_train(config_path, overrides, seed_override);
  }
  if (eval->parsed()) return absa::cmd_eval(checkpoint_path, test_path, report_path);
  return absa::cmd_tag(checkpoint_path, input_path);
}

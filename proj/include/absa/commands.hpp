#pragma once

#include <optional>
#include <string>
#include <vector>

namespace absa {

// Exit codes shared by all commands: 0 success, 1 runtime failure,
// 2 configuration/validation failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Trains from a run config, writes <checkpoint_dir>/{model.ckpt.json,
// train_log.tsv, dev_report.json} and prints the final dev report.
// `overrides` are key=value pairs applied on top of the config file;
// `seed_override` wins over both.
int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              std::optional<std::uint64_t> seed_override);

// Evaluates a checkpoint on an aspect-level test file; report to stdout and
// to `report_path` as JSON.
int cmd_eval(const std::string& checkpoint_path, const std::string& test_path, const std::string& report_path);

// Tags raw text (one sentence per line, lowercased whitespace tokens): one
// block per input line listing aspect terms with sentiments and opinion
// terms, blocks separated by blank lines.
int cmd_tag(const std::string& checkpoint_path, const std::string& input_path);

}  // namespace absa

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "absa/model.hpp"
#include "absa/training.hpp"

namespace absa {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value run configuration ('#' starts a comment line). Unknown keys
// are rejected so typos surface immediately; CLI overrides reuse the same
// key names.
struct RunConfig {
  std::string aspect_train;
  std::string aspect_test;
  std::string ds_corpus;
  std::string dd_corpus;
  std::string general_embeddings;
  std::string domain_embeddings;
  std::string checkpoint_dir = "checkpoints";
  std::vector<std::string> domains{"restaurant", "electronics"};
  int min_count = 1;
  ModelConfig model;
  TrainConfig train;

  static RunConfig parse_file(const std::string& path);
  void apply(const std::string& key, const std::string& value);
  // Checks paths and numeric ranges; aspect_test is optional.
  void validate() const;
  std::map<std::string, std::string> to_entries() const;
};

}  // namespace absa

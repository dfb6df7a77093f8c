#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "absa/model.hpp"
#include "absa/training.hpp"
#include "absa/vocab.hpp"

namespace absa {

// Everything needed to evaluate or tag without the original config: model
// and train configs, domain names, vocabulary, and all state tensors.
// Serialized as versioned JSON (format documented in the README); writes go
// through a temp file + rename so a failed save leaves nothing behind.
void save_checkpoint(const std::string& path, const Model& model, const Vocabulary& vocab,
                     const TrainConfig& train_config, const std::vector<std::string>& domains,
                     const std::map<std::string, std::string>& run_entries);

struct LoadedCheckpoint {
  ModelConfig model_config;
  TrainConfig train_config;
  std::vector<std::string> domains;
  Vocabulary vocab;
  std::unique_ptr<Model> model;
  std::map<std::string, std::string> run_entries;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace absa

#include "absa/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace absa {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json model_config_to_json(const ModelConfig& c) {
  return json{{"general_dim", c.general_dim},
              {"domain_dim", c.domain_dim},
              {"shared_layers", c.shared_layers},
              {"layer0_filters_k3", c.layer0_filters_k3},
              {"layer0_filters_k5", c.layer0_filters_k5},
              {"filters", c.filters},
              {"ae_layers", c.ae_layers},
              {"as_layers", c.as_layers},
              {"ds_layers", c.ds_layers},
              {"dd_layers", c.dd_layers},
              {"num_domains", c.num_domains},
              {"dropout", c.dropout},
              {"train_embeddings", c.train_embeddings},
              {"dd_masked_pass", c.dd_masked_pass}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.general_dim = j.at("general_dim").get<int>();
  c.domain_dim = j.at("domain_dim").get<int>();
  c.shared_layers = j.at("shared_layers").get<int>();
  c.layer0_filters_k3 = j.at("layer0_filters_k3").get<int>();
  c.layer0_filters_k5 = j.at("layer0_filters_k5").get<int>();
  c.filters = j.at("filters").get<int>();
  c.ae_layers = j.at("ae_layers").get<int>();
  c.as_layers = j.at("as_layers").get<int>();
  c.ds_layers = j.at("ds_layers").get<int>();
  c.dd_layers = j.at("dd_layers").get<int>();
  c.num_domains = j.at("num_domains").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.train_embeddings = j.at("train_embeddings").get<bool>();
  c.dd_masked_pass = j.at("dd_masked_pass").get<bool>();
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  return json{{"iterations", c.iterations},
              {"doc_update_ratio", c.doc_update_ratio},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"max_pretrain_epochs", c.max_pretrain_epochs},
              {"max_epochs", c.max_epochs},
              {"dev_fraction", c.dev_fraction},
              {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.iterations = j.at("iterations").get<int>();
  c.doc_update_ratio = j.at("doc_update_ratio").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.max_pretrain_epochs = j.at("max_pretrain_epochs").get<int>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.dev_fraction = j.at("dev_fraction").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const Vocabulary& vocab,
                     const TrainConfig& train_config, const std::vector<std::string>& domains,
                     const std::map<std::string, std::string>& run_entries) {
  json root;
  root["format_version"] = kFormatVersion;
  root["model_config"] = model_config_to_json(model.config());
  root["train_config"] = train_config_to_json(train_config);
  root["domains"] = domains;
  root["run_config"] = run_entries;
  root["vocab"] = vocab.tokens();

  json params = json::object();
  for (const auto& [name, tensor] : model.named_state()) {
    params[name] = json{{"shape", tensor.shape()},
                        {"data", std::vector<double>(tensor.data().begin(), tensor.data().end())}};
  }
  root["params"] = std::move(params);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("save_checkpoint: cannot write " + tmp);
    out << root.dump();
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("save_checkpoint: cannot move checkpoint into place: " + ec.message());
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_checkpoint: " + path + " is not valid JSON: " + e.what());
  }
  if (root.at("format_version").get<int>() != kFormatVersion)
    throw std::runtime_error("load_checkpoint: unsupported format version in " + path);

  LoadedCheckpoint out;
  out.model_config = model_config_from_json(root.at("model_config"));
  out.train_config = train_config_from_json(root.at("train_config"));
  out.domains = root.at("domains").get<std::vector<std::string>>();
  out.run_entries = root.at("run_config").get<std::map<std::string, std::string>>();
  out.vocab = Vocabulary::from_tokens(root.at("vocab").get<std::vector<std::string>>());

  // Build with a throwaway generator, then overwrite every tensor.
  Rng init_rng(0);
  out.model = std::make_unique<Model>(out.model_config, out.vocab.size(), init_rng);
  const json& params = root.at("params");
  for (auto& [name, tensor] : out.model->named_state()) {
    if (!params.contains(name)) throw std::runtime_error("load_checkpoint: missing parameter '" + name + "'");
    const json& entry = params.at(name);
    const auto shape = entry.at("shape").get<Shape>();
    if (shape != tensor.shape())
      throw std::runtime_error("load_checkpoint: parameter '" + name + "' has shape " + shape_str(shape) +
                               ", expected " + shape_str(tensor.shape()));
    const auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != tensor.size())
      throw std::runtime_error("load_checkpoint: parameter '" + name + "' has wrong length");
    std::copy(data.begin(), data.end(), tensor.data().begin());
  }
  return out;
}

}  // namespace absa

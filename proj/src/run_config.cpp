#include "absa/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace absa {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int r = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long r = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return static_cast<std::uint64_t>(r);
  } catch (...) {
    throw ConfigError("config: key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::string> split_csv(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void require_file(const std::string& key, const std::string& path) {
  if (path.empty()) throw ConfigError("config: required path '" + key + "' is not set");
  if (!std::filesystem::exists(path)) throw ConfigError("config: " + key + " path does not exist: " + path);
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(line_no) + ": expected key=value");
    try {
      cfg.apply(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "aspect_train") aspect_train = value;
  else if (key == "aspect_test") aspect_test = value;
  else if (key == "ds_corpus") ds_corpus = value;
  else if (key == "dd_corpus") dd_corpus = value;
  else if (key == "general_embeddings") general_embeddings = value;
  else if (key == "domain_embeddings") domain_embeddings = value;
  else if (key == "checkpoint_dir") checkpoint_dir = value;
  else if (key == "domains") {
    domains = split_csv(value);
    model.num_domains = static_cast<int>(domains.size());
  }
  else if (key == "min_count") min_count = to_int(key, value);
  else if (key == "general_dim") model.general_dim = to_int(key, value);
  else if (key == "domain_dim") model.domain_dim = to_int(key, value);
  else if (key == "shared_layers") model.shared_layers = to_int(key, value);
  else if (key == "layer0_filters_k3") model.layer0_filters_k3 = to_int(key, value);
  else if (key == "layer0_filters_k5") model.layer0_filters_k5 = to_int(key, value);
  else if (key == "filters") model.filters = to_int(key, value);
  else if (key == "ae_layers") model.ae_layers = to_int(key, value);
  else if (key == "as_layers") model.as_layers = to_int(key, value);
  else if (key == "ds_layers") model.ds_layers = to_int(key, value);
  else if (key == "dd_layers") model.dd_layers = to_int(key, value);
  else if (key == "dropout") model.dropout = to_double(key, value);
  else if (key == "train_embeddings") model.train_embeddings = to_bool(key, value);
  else if (key == "dd_masked_pass") model.dd_masked_pass = to_bool(key, value);
  else if (key == "iterations") train.iterations = to_int(key, value);
  else if (key == "doc_update_ratio") train.doc_update_ratio = to_int(key, value);
  else if (key == "batch_size") train.batch_size = to_int(key, value);
  else if (key == "learning_rate") train.learning_rate = to_double(key, value);
  else if (key == "max_pretrain_epochs") train.max_pretrain_epochs = to_int(key, value);
  else if (key == "max_epochs") train.max_epochs = to_int(key, value);
  else if (key == "dev_fraction") train.dev_fraction = to_double(key, value);
  else if (key == "seed") train.seed = to_u64(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

void RunConfig::validate() const {
  require_file("aspect_train", aspect_train);
  require_file("ds_corpus", ds_corpus);
  require_file("dd_corpus", dd_corpus);
  require_file("general_embeddings", general_embeddings);
  require_file("domain_embeddings", domain_embeddings);
  if (!aspect_test.empty()) require_file("aspect_test", aspect_test);
  if (min_count < 1) throw ConfigError("config: min_count must be >= 1");
  if (domains.size() < 2) throw ConfigError("config: need at least two domains");
  if (static_cast<int>(domains.size()) != model.num_domains)
    throw ConfigError("config: domain list does not match num_domains");
  try {
    model.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::map<std::string, std::string> RunConfig::to_entries() const {
  std::map<std::string, std::string> out;
  out["aspect_train"] = aspect_train;
  out["aspect_test"] = aspect_test;
  out["ds_corpus"] = ds_corpus;
  out["dd_corpus"] = dd_corpus;
  out["general_embeddings"] = general_embeddings;
  out["domain_embeddings"] = domain_embeddings;
  out["checkpoint_dir"] = checkpoint_dir;
  std::string joined;
  for (std::size_t i = 0; i < domains.size(); ++i) joined += (i ? "," : "") + domains[i];
  out["domains"] = joined;
  out["min_count"] = std::to_string(min_count);
  return out;
}

}  // namespace absa

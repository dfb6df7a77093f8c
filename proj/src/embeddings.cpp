#include "absa/embeddings.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace absa {

EmbeddingTable EmbeddingTable::random(int vocab_size, int general_dim, int domain_dim, Rng& rng, bool trainable) {
  EmbeddingTable t;
  t.general = Tensor::uniform({vocab_size, general_dim}, -0.05, 0.05, rng, trainable);
  t.domain = Tensor::uniform({vocab_size, domain_dim}, -0.05, 0.05, rng, trainable);
  t.trainable = trainable;
  for (int j = 0; j < general_dim; ++j) t.general.data()[j] = 0.0;  // PAD row
  for (int j = 0; j < domain_dim; ++j) t.domain.data()[j] = 0.0;
  return t;
}

Tensor load_embedding_file(const std::string& path, const Vocabulary& vocab, int dim, Rng& rng, bool trainable) {
  if (dim < 1) throw std::invalid_argument("load_embedding_file: dim must be >= 1");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_embedding_file: cannot open " + path);

  std::unordered_map<std::string, std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token))
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed embedding line");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(dim));
    double v;
    while (ss >> v) values.push_back(v);
    if (!ss.eof())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": non-numeric embedding value");
    if (static_cast<int>(values.size()) != dim)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                               " values, found " + std::to_string(values.size()));
    rows[token] = std::move(values);
  }

  const int v_size = vocab.size();
  Tensor table = Tensor::zeros({v_size, dim}, trainable);
  auto data = table.data();
  for (int id = 0; id < v_size; ++id) {
    double* dst = data.data() + static_cast<std::size_t>(id) * dim;
    if (id == Vocabulary::kPad) continue;  // stays zero
    auto it = rows.find(vocab.token(id));
    if (it != rows.end()) {
      for (int j = 0; j < dim; ++j) dst[j] = it->second[static_cast<std::size_t>(j)];
    } else {
      for (int j = 0; j < dim; ++j) dst[j] = rng.uniform(-0.05, 0.05);
    }
  }
  return table;
}

Tensor embed(const EmbeddingTable& table, const std::vector<int>& ids, bool mask_domain) {
  Tensor general = embedding_rows(table.general, ids);
  if (mask_domain) {
    Tensor zeros = Tensor::zeros({static_cast<int>(ids.size()), table.domain_dim()});
    return concat_cols({general, zeros});
  }
  Tensor domain = embedding_rows(table.domain, ids);
  return concat_cols({general, domain});
}

}  // namespace absa

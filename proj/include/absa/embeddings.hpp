#pragma once

#include <string>
#include <vector>

#include "absa/rng.hpp"
#include "absa/tensor.hpp"
#include "absa/vocab.hpp"

namespace absa {

// Concatenated general-purpose + domain-specific lookup tables. The
// effective token representation is d_general + d_domain wide.
struct EmbeddingTable {
  Tensor general;  // [V, d_general]
  Tensor domain;   // [V, d_domain]
  bool trainable = true;

  int vocab_size() const { return general.rows(); }
  int general_dim() const { return general.cols(); }
  int domain_dim() const { return domain.cols(); }
  int dim() const { return general_dim() + domain_dim(); }

  static EmbeddingTable random(int vocab_size, int general_dim, int domain_dim, Rng& rng, bool trainable = true);
};

// Text format: one entry per line, `token v1 ... vdim` separated by spaces.
// Vocabulary tokens absent from the file are initialized uniform(-0.05, 0.05);
// the PAD row is zero regardless of file content. Malformed lines and
// dimension mismatches are reported with their line number.
Tensor load_embedding_file(const std::string& path, const Vocabulary& vocab, int dim, Rng& rng,
                           bool trainable = true);

// Rows are concat(general[id], domain[id]); with mask_domain the domain half
// is zero and receives no gradient.
Tensor embed(const EmbeddingTable& table, const std::vector<int>& ids, bool mask_domain);

}  // namespace absa

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absa/embeddings.hpp"
#include "absa/encoders.hpp"
#include "absa/heads.hpp"
#include "absa/tensor.hpp"

namespace absa {

struct ModelConfig {
  int general_dim = 300;
  int domain_dim = 100;
  int shared_layers = 2;       // m_s
  int layer0_filters_k3 = 128;
  int layer0_filters_k5 = 128;
  int filters = 256;           // later shared layers and task-specific layers
  int ae_layers = 2;           // m_ae
  int as_layers = 0;           // m_as
  int ds_layers = 0;           // m_ds
  int dd_layers = 0;           // m_dd
  int num_domains = 2;
  double dropout = 0.5;
  bool train_embeddings = true;
  // When set, the domain task reads a separate shared-encoder pass over
  // domain-masked embeddings; otherwise it reads the main shared sequence.
  bool dd_masked_pass = true;

  int emb_dim() const { return general_dim + domain_dim; }
  int shared_out_dim() const { return shared_layers == 1 ? layer0_filters_k3 + layer0_filters_k5 : filters; }
  void validate() const;
};

// Everything one task round produces for one input.
struct HeadSnapshot {
  Tensor y_ae;       // [n,5]
  Tensor y_as;       // [n,3]
  Tensor y_ds;       // [1,3]
  Tensor y_dd;       // [1,K]
  Tensor a_ds;       // [n]
  Tensor a_dd;       // [n]
  Tensor p_op;       // [n] opinion probabilities fed to the AS attention
  Tensor attention;  // [n,n]
};

// Full record of a forward pass: h_s[t] for t = 0..T and one head snapshot
// per round. h_s[0] is exactly the shared-encoder output; predictions are
// read from heads[T].
struct ForwardState {
  std::vector<Tensor> h_s;
  std::vector<HeadSnapshot> heads;
  Tensor embedded;  // [n, emb_dim]
  int iterations = 0;
};

// Named disjoint parameter sets matching the loss signatures: the aspect
// loss updates shared/ae/as/re, the document loss updates shared/ds/dd.
struct ParameterGroups {
  std::vector<Tensor> shared, ae, as, ds, dd, re;
  std::vector<Tensor> all() const;
};

class Model {
 public:
  Model(ModelConfig config, EmbeddingTable embeddings, Rng& rng);
  Model(ModelConfig config, int vocab_size, Rng& rng);

  // Runs the shared encoder once, then `iterations`+1 task rounds with a
  // re-encoding step between consecutive rounds. opinion_override, when
  // present, replaces the predicted opinion probabilities fed to the AS
  // attention (scheduled sampling).
  ForwardState forward(const std::vector<int>& token_ids, int iterations, bool train,
                       const std::vector<double>* opinion_override = nullptr);

  // Single-round document paths (no message passing).
  DocHeadResult sentiment_forward(const std::vector<int>& token_ids, bool train);
  DocHeadResult domain_forward(const std::vector<int>& token_ids, bool train);

  // Re-encoding step: ReLU(W . concat(h_s, y_ae, y_as, y_ds, a_ds, a_dd) + b)
  // applied tokenwise; parameters are shared across iterations.
  Tensor reencode(const Tensor& h_s, const Tensor& y_ae, const Tensor& y_as, const Tensor& y_ds,
                  const Tensor& a_ds, const Tensor& a_dd) const;

  ParameterGroups groups() const;
  // Every state tensor with a stable name, frozen embeddings included.
  std::vector<std::pair<std::string, Tensor>> named_state() const;

  const ModelConfig& config() const { return config_; }
  EmbeddingTable& embeddings() { return embeddings_; }
  const EmbeddingTable& embeddings() const { return embeddings_; }

  // Model components; public so tests and tools can probe them directly.
  SharedEncoder shared_encoder;
  ConvStack ae_encoder;
  ConvStack as_encoder;
  ConvStack ds_encoder;
  ConvStack dd_encoder;
  Tensor w_as;  // bilinear attention matrix
  LinearDecoder ae_decoder;
  LinearDecoder as_decoder;
  DocHead ds_head;
  DocHead dd_head;
  Tensor re_weight;  // [shared_out + 5 + 3 + 3 + 1 + 1, shared_out]
  Tensor re_bias;    // [shared_out]

 private:
  ForwardCtx make_ctx(bool train) const;
  ModelConfig config_;
  EmbeddingTable embeddings_;
};

}  // namespace absa

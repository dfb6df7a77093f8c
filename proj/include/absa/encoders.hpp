#pragma once

#include <vector>

#include "absa/rng.hpp"
#include "absa/tensor.hpp"

namespace absa {

// Per-forward execution context. rng may be null in eval mode.
struct ForwardCtx {
  bool train = false;
  double dropout_p = 0.5;
  Rng* rng = nullptr;
};

struct ConvLayer {
  Tensor weight;  // [kernel*in_dim, filters]
  Tensor bias;    // [filters]
  int kernel = 0;
  int in_dim = 0;
  int filters = 0;

  static ConvLayer make(int kernel, int in_dim, int filters, Rng& rng);
  Tensor apply(const Tensor& x) const { return conv1d(x, weight, bias, kernel); }
};

// Stack of k=5 CNN layers with ReLU and post-layer dropout; the identity
// when the layer count is zero.
class ConvStack {
 public:
  ConvStack() = default;
  ConvStack(int layers, int in_dim, int filters, int kernel, Rng& rng);

  Tensor encode(const Tensor& x, const ForwardCtx& ctx) const;
  int out_dim() const { return layers_.empty() ? in_dim_ : layers_.back().filters; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  std::vector<Tensor> params() const;

 private:
  std::vector<ConvLayer> layers_;
  int in_dim_ = 0;
};

// Shared feature extractor: dropout on the embedded input, a first layer of
// two filter groups (kernel 3 and kernel 5) concatenated, then k=5 layers.
// Every CNN layer is ReLU-activated and followed by dropout in train mode.
class SharedEncoder {
 public:
  SharedEncoder() = default;
  SharedEncoder(int emb_dim, int num_layers, int filters_k3, int filters_k5, int filters, Rng& rng);

  Tensor encode(const Tensor& embedded, const ForwardCtx& ctx) const;
  int out_dim() const;
  std::vector<Tensor> params() const;

 private:
  ConvLayer conv3_;
  ConvLayer conv5_;
  ConvStack deeper_;
};

struct SelfAttentionResult {
  Tensor weights;  // [n, n]; zero diagonal, rows sum to 1 for n > 1
  Tensor context;  // [n, dim]; zero for n == 1
};

// score_ij = (h_i W h_j^T) * 1/|i-j| * p_op[j] for i != j, row-softmaxed with
// the diagonal excluded; the context is the attention-weighted sum of h.
// p_op entries must lie in [0,1].
SelfAttentionResult opinion_gated_self_attention(const Tensor& h, const Tensor& p_op, const Tensor& bilinear);

struct DocAttentionResult {
  Tensor weights;  // [n], sums to 1
  Tensor pooled;   // [1, dim]
};

// a = softmax over h_i . w; pooled = sum_i a_i h_i.
DocAttentionResult doc_attention(const Tensor& h, const Tensor& attn_vec);

}  // namespace absa

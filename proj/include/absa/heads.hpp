#pragma once

#include <vector>

#include "absa/encoders.hpp"
#include "absa/labels.hpp"
#include "absa/tensor.hpp"

namespace absa {

// Fully-connected layer with a per-row softmax.
struct LinearDecoder {
  Tensor weight;  // [in_dim, classes]
  Tensor bias;    // [classes]

  static LinearDecoder make(int in_dim, int classes, Rng& rng);
  Tensor decode(const Tensor& features) const;  // [n, classes], rows sum to 1
  int in_dim() const { return weight.rows(); }
  int classes() const { return weight.cols(); }
};

// 5-way token decoder over concat(word embedding, h_s0, h_ae).
Tensor ae_decode(const LinearDecoder& dec, const Tensor& word_emb, const Tensor& h_s0, const Tensor& h_ae);

// 3-way token decoder over concat(h_s0, attended context).
Tensor as_decode(const LinearDecoder& dec, const Tensor& h_s0, const Tensor& h_prime_as);

// p(BP) + p(IP) per token; y_ae is [n,5].
Tensor opinion_prob(const Tensor& y_ae);

struct DocHeadResult {
  Tensor y;        // [1, classes]
  Tensor weights;  // [n] attention weights
};

// Attention pooling followed by a softmax decoder; used by both document
// tasks with their own parameters.
struct DocHead {
  Tensor attn_vec;  // [in_dim]
  LinearDecoder decoder;

  static DocHead make(int in_dim, int classes, Rng& rng);
  DocHeadResult apply(const Tensor& h) const;
};

}  // namespace absa

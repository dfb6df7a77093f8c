#include "absa/encoders.hpp"

#include <cmath>
#include <stdexcept>

namespace absa {

namespace {

Tensor apply_dropout(const Tensor& x, const ForwardCtx& ctx) {
  if (!ctx.train) return x;
  if (!ctx.rng) throw std::invalid_argument("train-mode forward requires an rng");
  return dropout(x, ctx.dropout_p, true, *ctx.rng);
}

}  // namespace

ConvLayer ConvLayer::make(int kernel, int in_dim, int filters, Rng& rng) {
  ConvLayer l;
  l.kernel = kernel;
  l.in_dim = in_dim;
  l.filters = filters;
  l.weight = Tensor::glorot({kernel * in_dim, filters}, kernel * in_dim, filters, rng);
  l.bias = Tensor::zeros({filters}, true);
  return l;
}

ConvStack::ConvStack(int layers, int in_dim, int filters, int kernel, Rng& rng) : in_dim_(in_dim) {
  if (layers < 0) throw std::invalid_argument("ConvStack: negative layer count");
  int d = in_dim;
  for (int i = 0; i < layers; ++i) {
    layers_.push_back(ConvLayer::make(kernel, d, filters, rng));
    d = filters;
  }
}

Tensor ConvStack::encode(const Tensor& x, const ForwardCtx& ctx) const {
  Tensor h = x;
  for (const auto& layer : layers_) h = apply_dropout(relu(layer.apply(h)), ctx);
  return h;
}

std::vector<Tensor> ConvStack::params() const {
  std::vector<Tensor> out;
  for (const auto& l : layers_) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

SharedEncoder::SharedEncoder(int emb_dim, int num_layers, int filters_k3, int filters_k5, int filters, Rng& rng) {
  if (num_layers < 1) throw std::invalid_argument("SharedEncoder: need at least one layer");
  conv3_ = ConvLayer::make(3, emb_dim, filters_k3, rng);
  conv5_ = ConvLayer::make(5, emb_dim, filters_k5, rng);
  deeper_ = ConvStack(num_layers - 1, filters_k3 + filters_k5, filters, 5, rng);
}

Tensor SharedEncoder::encode(const Tensor& embedded, const ForwardCtx& ctx) const {
  if (embedded.rows() < 1) throw std::invalid_argument("SharedEncoder: empty sequence");
  Tensor x = apply_dropout(embedded, ctx);
  Tensor l0 = apply_dropout(relu(concat_cols({conv3_.apply(x), conv5_.apply(x)})), ctx);
  return deeper_.encode(l0, ctx);
}

int SharedEncoder::out_dim() const {
  const int l0 = conv3_.filters + conv5_.filters;
  return deeper_.num_layers() == 0 ? l0 : deeper_.out_dim();
}

std::vector<Tensor> SharedEncoder::params() const {
  std::vector<Tensor> out{conv3_.weight, conv3_.bias, conv5_.weight, conv5_.bias};
  for (auto& t : deeper_.params()) out.push_back(t);
  return out;
}

SelfAttentionResult opinion_gated_self_attention(const Tensor& h, const Tensor& p_op, const Tensor& bilinear) {
  const int n = h.rows();
  const int dim = h.cols();
  if (p_op.shape().size() != 1 || p_op.shape()[0] != n)
    throw std::invalid_argument("self_attention: p_op shape " + shape_str(p_op.shape()) + " does not match " +
                                std::to_string(n) + " tokens");
  if (bilinear.shape() != Shape{dim, dim})
    throw std::invalid_argument("self_attention: bilinear matrix shape " + shape_str(bilinear.shape()) +
                                " does not match hidden dim " + std::to_string(dim));
  for (double v : p_op.data())
    if (v < -1e-9 || v > 1.0 + 1e-9)
      throw std::invalid_argument("self_attention: opinion probability " + std::to_string(v) + " outside [0,1]");

  if (n == 1) {
    // No context token exists; the attended representation is defined as zero.
    return {Tensor::zeros({1, 1}), Tensor::zeros({1, dim})};
  }

  // Distance factors are data-independent constants.
  Tensor dist = Tensor::zeros({n, n});
  auto dv = dist.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) dv[static_cast<std::size_t>(i) * n + j] = 1.0 / std::abs(i - j);

  Tensor semantic = matmul(matmul(h, bilinear), transpose(h));
  Tensor scores = mul_rowvec(mul(semantic, dist), p_op);
  Tensor a = offdiag_row_softmax(scores);
  return {a, matmul(a, h)};
}

DocAttentionResult doc_attention(const Tensor& h, const Tensor& attn_vec) {
  const int n = h.rows();
  const int dim = h.cols();
  if (n < 1) throw std::invalid_argument("doc_attention: empty sequence");
  if (attn_vec.shape() != Shape{dim})
    throw std::invalid_argument("doc_attention: attention vector shape " + shape_str(attn_vec.shape()) +
                                " does not match hidden dim " + std::to_string(dim));
  Tensor logits = reshape(matmul(h, reshape(attn_vec, {dim, 1})), {n});
  Tensor a = softmax(logits);
  Tensor pooled = matmul(reshape(a, {1, n}), h);
  return {a, pooled};
}

}  // namespace absa

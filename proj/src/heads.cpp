#include "absa/heads.hpp"

#include <stdexcept>

namespace absa {

LinearDecoder LinearDecoder::make(int in_dim, int classes, Rng& rng) {
  LinearDecoder d;
  d.weight = Tensor::glorot({in_dim, classes}, in_dim, classes, rng);
  d.bias = Tensor::zeros({classes}, true);
  return d;
}

Tensor LinearDecoder::decode(const Tensor& features) const {
  if (features.cols() != in_dim())
    throw std::invalid_argument("LinearDecoder: feature dim " + std::to_string(features.cols()) +
                                " does not match decoder input " + std::to_string(in_dim()));
  return row_softmax(add(matmul(features, weight), bias));
}

Tensor ae_decode(const LinearDecoder& dec, const Tensor& word_emb, const Tensor& h_s0, const Tensor& h_ae) {
  return dec.decode(concat_cols({word_emb, h_s0, h_ae}));
}

Tensor as_decode(const LinearDecoder& dec, const Tensor& h_s0, const Tensor& h_prime_as) {
  return dec.decode(concat_cols({h_s0, h_prime_as}));
}

Tensor opinion_prob(const Tensor& y_ae) {
  if (y_ae.cols() != kNumAeLabels)
    throw std::invalid_argument("opinion_prob: expected " + std::to_string(kNumAeLabels) + " classes, got " +
                                std::to_string(y_ae.cols()));
  const int bp = static_cast<int>(AeLabel::BP);
  const int ip = static_cast<int>(AeLabel::IP);
  Tensor summed = add(slice_cols(y_ae, bp, bp + 1), slice_cols(y_ae, ip, ip + 1));
  return reshape(summed, {y_ae.rows()});
}

DocHead DocHead::make(int in_dim, int classes, Rng& rng) {
  DocHead h;
  h.attn_vec = Tensor::glorot({in_dim}, in_dim, 1, rng);
  h.decoder = LinearDecoder::make(in_dim, classes, rng);
  return h;
}

DocHeadResult DocHead::apply(const Tensor& h) const {
  auto att = doc_attention(h, attn_vec);
  return {decoder.decode(att.pooled), att.weights};
}

}  // namespace absa

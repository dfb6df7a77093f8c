#include "absa/losses.hpp"

#include <stdexcept>

namespace absa {

Tensor aspect_loss_terms(const Tensor& y_ae, const Tensor& y_as, const std::vector<AeLabel>& gold_ae,
                         const std::vector<AsGold>& gold_as) {
  const int n = y_ae.rows();
  if (static_cast<int>(gold_ae.size()) != n || static_cast<int>(gold_as.size()) != n)
    throw std::invalid_argument("aspect_loss_terms: gold label length does not match " + std::to_string(n) +
                                " tokens");
  if (y_as.rows() != n) throw std::invalid_argument("aspect_loss_terms: y_ae/y_as row mismatch");

  std::vector<int> ae_gold(n), as_gold(n, 0);
  std::vector<std::uint8_t> all(n, 1), as_mask(n, 0);
  for (int i = 0; i < n; ++i) {
    ae_gold[i] = static_cast<int>(gold_ae[i]);
    const bool trainable_sentiment =
        is_aspect_token(gold_ae[i]) && gold_as[i] != AsGold::Conflict && gold_as[i] != AsGold::None;
    if (trainable_sentiment) {
      as_mask[i] = 1;
      as_gold[i] = static_cast<int>(gold_as[i]);
    }
  }
  Tensor total = add(nll_rows(y_ae, ae_gold, all), nll_rows(y_as, as_gold, as_mask));
  return scale(total, 1.0 / n);
}

std::vector<double> gold_opinion_indicator(const std::vector<AeLabel>& gold_ae) {
  std::vector<double> out(gold_ae.size(), 0.0);
  for (std::size_t i = 0; i < gold_ae.size(); ++i)
    if (is_opinion_token(gold_ae[i])) out[i] = 1.0;
  return out;
}

Tensor aspect_batch_loss(Model& model, const Vocabulary& vocab, std::span<const AspectInstance> batch,
                         int iterations, bool train, bool use_gold_opinion) {
  if (batch.empty()) throw std::invalid_argument("aspect_batch_loss: empty batch");
  std::vector<Tensor> losses;
  losses.reserve(batch.size());
  for (const auto& inst : batch) {
    const std::vector<int> ids = vocab.encode(inst.tokens);
    std::vector<double> override_p;
    const std::vector<double>* override_ptr = nullptr;
    if (use_gold_opinion) {
      override_p = gold_opinion_indicator(inst.ae_labels);
      override_ptr = &override_p;
    }
    ForwardState state = model.forward(ids, iterations, train, override_ptr);
    const HeadSnapshot& last = state.heads.back();
    losses.push_back(aspect_loss_terms(last.y_ae, last.y_as, inst.ae_labels, inst.as_labels));
  }
  return scale(add_n(losses), 1.0 / static_cast<double>(losses.size()));
}

Tensor doc_batch_loss(Model& model, const Vocabulary& vocab, std::span<const DocumentInstance> sentiment_batch,
                      std::span<const DocumentInstance> domain_batch, bool train) {
  if (sentiment_batch.empty() || domain_batch.empty())
    throw std::invalid_argument("doc_batch_loss: empty document batch");

  std::vector<Tensor> ds_losses, dd_losses;
  for (const auto& doc : sentiment_batch) {
    if (doc.kind != DocKind::Sentiment) throw std::invalid_argument("doc_batch_loss: wrong label kind in DS batch");
    auto run = model.sentiment_forward(vocab.encode(doc.tokens), train);
    ds_losses.push_back(cross_entropy(reshape(run.y, {run.y.cols()}), doc.label));
  }
  for (const auto& doc : domain_batch) {
    if (doc.kind != DocKind::Domain) throw std::invalid_argument("doc_batch_loss: wrong label kind in DD batch");
    auto run = model.domain_forward(vocab.encode(doc.tokens), train);
    dd_losses.push_back(cross_entropy(reshape(run.y, {run.y.cols()}), doc.label));
  }
  Tensor ds_mean = scale(add_n(ds_losses), 1.0 / static_cast<double>(ds_losses.size()));
  Tensor dd_mean = scale(add_n(dd_losses), 1.0 / static_cast<double>(dd_losses.size()));
  return add(ds_mean, dd_mean);
}

}  // namespace absa

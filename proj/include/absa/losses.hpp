#pragma once

#include <span>
#include <vector>

#include "absa/data.hpp"
#include "absa/model.hpp"
#include "absa/tensor.hpp"

namespace absa {

// Per-sentence aspect loss: (1/n) * sum_j [ CE(y_ae_j) + CE(y_as_j) * m_j ]
// where m_j is 1 iff the gold AE label is BA/IA and the gold sentiment is
// neither conflict nor none. Masked tokens contribute nothing to the
// accumulation, so permuting their AS predictions leaves the value bitwise
// unchanged.
Tensor aspect_loss_terms(const Tensor& y_ae, const Tensor& y_as, const std::vector<AeLabel>& gold_ae,
                         const std::vector<AsGold>& gold_as);

// Gold opinion indicator for scheduled sampling: 1 on BP/IP tokens, else 0.
std::vector<double> gold_opinion_indicator(const std::vector<AeLabel>& gold_ae);

// Batch aspect loss: runs a forward per sentence (predictions from round T)
// and averages the per-sentence losses. With use_gold_opinion the gold
// indicator replaces the predicted opinion probabilities in the attention.
Tensor aspect_batch_loss(Model& model, const Vocabulary& vocab, std::span<const AspectInstance> batch,
                         int iterations, bool train, bool use_gold_opinion);

// Document loss: mean sentiment cross-entropy plus mean domain
// cross-entropy; single-round forwards only.
Tensor doc_batch_loss(Model& model, const Vocabulary& vocab, std::span<const DocumentInstance> sentiment_batch,
                      std::span<const DocumentInstance> domain_batch, bool train);

}  // namespace absa

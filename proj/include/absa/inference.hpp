#pragma once

#include <string>
#include <vector>

#include "absa/metrics.hpp"
#include "absa/model.hpp"
#include "absa/vocab.hpp"

namespace absa {

// Eval-mode forward with the configured iteration count; hard AE labels by
// per-token argmax plus the sentiment distributions from the final round.
SentencePrediction predict_sentence(Model& model, const Vocabulary& vocab, const std::vector<std::string>& tokens,
                                    int iterations);

// One extracted term for operator-facing output.
struct TaggedTerm {
  std::string text;     // the span's tokens joined by spaces
  SpanKind kind = SpanKind::Aspect;
  int sentiment = -1;   // 0..2 for aspect spans, -1 for opinion spans
};

std::vector<TaggedTerm> tag_sentence(Model& model, const Vocabulary& vocab, const std::vector<std::string>& tokens,
                                     int iterations);

}  // namespace absa

#include "absa/inference.hpp"

namespace absa {

SentencePrediction predict_sentence(Model& model, const Vocabulary& vocab, const std::vector<std::string>& tokens,
                                    int iterations) {
  const std::vector<int> ids = vocab.encode(tokens);
  ForwardState state = model.forward(ids, iterations, /*train=*/false);
  const HeadSnapshot& last = state.heads.back();

  SentencePrediction pred;
  const int n = static_cast<int>(tokens.size());
  pred.ae.reserve(static_cast<std::size_t>(n));
  pred.as.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int c = 1; c < kNumAeLabels; ++c)
      if (last.y_ae.at(i, c) > last.y_ae.at(i, best)) best = c;
    pred.ae.push_back(static_cast<AeLabel>(best));
    pred.as.push_back({last.y_as.at(i, 0), last.y_as.at(i, 1), last.y_as.at(i, 2)});
  }
  return pred;
}

std::vector<TaggedTerm> tag_sentence(Model& model, const Vocabulary& vocab, const std::vector<std::string>& tokens,
                                     int iterations) {
  const SentencePrediction pred = predict_sentence(model, vocab, tokens, iterations);
  auto spans = extract_spans(pred.ae);
  assign_sentiments(spans, pred.as);

  std::vector<TaggedTerm> out;
  for (const auto& span : spans) {
    TaggedTerm term;
    term.kind = span.kind;
    term.sentiment = span.kind == SpanKind::Aspect ? span.sentiment : -1;
    for (int i = span.start; i <= span.end; ++i) {
      if (i > span.start) term.text += " ";
      term.text += tokens[static_cast<std::size_t>(i)];
    }
    out.push_back(std::move(term));
  }
  return out;
}

}  // namespace absa

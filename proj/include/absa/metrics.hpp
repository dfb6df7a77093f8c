#pragma once

#include <array>
#include <string>
#include <vector>

#include "absa/data.hpp"
#include "absa/labels.hpp"

namespace absa {

enum class SpanKind { Aspect, Opinion };

// Inclusive token range. sentiment is -1 when unset, 0..2 for pos/neg/neu,
// and 3 (conflict) only on gold spans.
struct Span {
  int start = 0;
  int end = 0;
  SpanKind kind = SpanKind::Aspect;
  int sentiment = -1;

  friend bool operator==(const Span&, const Span&) = default;
};

// Lenient BIO decoding over any (possibly ill-formed) label sequence:
// maximal BA(IA)* / BP(IP)* runs become spans, and an orphan inside tag
// starts a new span of its kind.
std::vector<Span> extract_spans(const std::vector<AeLabel>& labels);

// First-token rule: each aspect span takes the argmax sentiment of its first
// token, ties broken in class order pos, neg, neu.
void assign_sentiments(std::vector<Span>& aspect_spans, const std::vector<std::array<double, 3>>& y_as);

struct PrCounts {
  long tp = 0, fp = 0, fn = 0;
  double precision() const;
  double recall() const;
  double f1() const;
};

struct EvalReport {
  double f1_a = 0, f1_o = 0, acc_s = 0, f1_s = 0, f1_i = 0;
  PrCounts aspect, opinion, integrated;
  // gold x predicted over matched non-conflict aspect spans
  std::array<std::array<long, 3>, 3> sentiment_confusion{};
  long matched_non_conflict = 0;
  bool no_matched_spans = false;  // acc-s / F1-s reported as 0 with this flag

  std::string to_text() const;  // metrics as percentages to 2 decimals, plus counts
  std::string to_json() const;
};

// Model output for one sentence: hard AE labels plus the 3-way sentiment
// distribution per token.
struct SentencePrediction {
  std::vector<AeLabel> ae;
  std::vector<std::array<double, 3>> as;
};

// Span-exact evaluation per the five-metric protocol:
//  - F1-a over all gold aspect spans (conflict included), F1-o over opinion spans;
//  - acc-s and macro F1-s over correctly extracted non-conflict aspect spans
//    (macro mean includes zero-support classes);
//  - F1-I counts a span as true positive iff span and sentiment both match,
//    with conflict gold spans (and predictions matching them) excluded.
EvalReport compute_metrics(const std::vector<SentencePrediction>& predictions,
                           const std::vector<AspectInstance>& gold);

}  // namespace absa

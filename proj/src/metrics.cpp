#include "absa/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace absa {

std::vector<Span> extract_spans(const std::vector<AeLabel>& labels) {
  std::vector<Span> spans;
  const int n = static_cast<int>(labels.size());
  int i = 0;
  while (i < n) {
    const AeLabel l = labels[i];
    if (l == AeLabel::O) {
      ++i;
      continue;
    }
    const SpanKind kind = (l == AeLabel::BA || l == AeLabel::IA) ? SpanKind::Aspect : SpanKind::Opinion;
    const AeLabel inside = kind == SpanKind::Aspect ? AeLabel::IA : AeLabel::IP;
    int j = i + 1;
    while (j < n && labels[j] == inside) ++j;
    spans.push_back({i, j - 1, kind, -1});
    i = j;
  }
  return spans;
}

void assign_sentiments(std::vector<Span>& aspect_spans, const std::vector<std::array<double, 3>>& y_as) {
  for (auto& span : aspect_spans) {
    if (span.kind != SpanKind::Aspect) continue;
    if (span.start < 0 || span.start >= static_cast<int>(y_as.size()))
      throw std::invalid_argument("assign_sentiments: span start out of range");
    const auto& dist = y_as[static_cast<std::size_t>(span.start)];
    int best = 0;
    for (int c = 1; c < 3; ++c)
      if (dist[static_cast<std::size_t>(c)] > dist[static_cast<std::size_t>(best)]) best = c;
    span.sentiment = best;
  }
}

double PrCounts::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp); }
double PrCounts::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }
double PrCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

namespace {

std::vector<Span> gold_spans_with_sentiment(const AspectInstance& inst) {
  auto spans = extract_spans(inst.ae_labels);
  for (auto& s : spans) {
    if (s.kind != SpanKind::Aspect) continue;
    const AsGold g = inst.as_labels[static_cast<std::size_t>(s.start)];
    if (g == AsGold::None)
      throw std::invalid_argument("compute_metrics: gold aspect span without a sentiment marker");
    s.sentiment = static_cast<int>(g);
  }
  return spans;
}

bool same_place(const Span& a, const Span& b) { return a.start == b.start && a.end == b.end; }

}  // namespace

EvalReport compute_metrics(const std::vector<SentencePrediction>& predictions,
                           const std::vector<AspectInstance>& gold) {
  if (predictions.size() != gold.size())
    throw std::invalid_argument("compute_metrics: " + std::to_string(predictions.size()) + " predictions vs " +
                                std::to_string(gold.size()) + " gold sentences");

  EvalReport rep;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (predictions[s].ae.size() != gold[s].tokens.size() || predictions[s].as.size() != gold[s].tokens.size())
      throw std::invalid_argument("compute_metrics: prediction length mismatch at sentence " + std::to_string(s));

    auto pred_spans = extract_spans(predictions[s].ae);
    assign_sentiments(pred_spans, predictions[s].as);
    const auto gold_spans = gold_spans_with_sentiment(gold[s]);

    for (SpanKind kind : {SpanKind::Aspect, SpanKind::Opinion}) {
      PrCounts& counts = kind == SpanKind::Aspect ? rep.aspect : rep.opinion;
      for (const auto& p : pred_spans) {
        if (p.kind != kind) continue;
        const bool hit = std::any_of(gold_spans.begin(), gold_spans.end(),
                                     [&](const Span& g) { return g.kind == kind && same_place(g, p); });
        (hit ? counts.tp : counts.fp) += 1;
      }
      for (const auto& g : gold_spans) {
        if (g.kind != kind) continue;
        const bool hit = std::any_of(pred_spans.begin(), pred_spans.end(),
                                     [&](const Span& p) { return p.kind == kind && same_place(g, p); });
        if (!hit) counts.fn += 1;
      }
    }

    // Integrated task and sentiment metrics with conflict gold spans (and
    // predictions landing exactly on them) left out of the counts.
    for (const auto& p : pred_spans) {
      if (p.kind != SpanKind::Aspect) continue;
      const Span* match = nullptr;
      for (const auto& g : gold_spans)
        if (g.kind == SpanKind::Aspect && same_place(g, p)) {
          match = &g;
          break;
        }
      if (match && match->sentiment == static_cast<int>(AsGold::Conflict)) continue;
      if (match) {
        rep.matched_non_conflict += 1;
        rep.sentiment_confusion[static_cast<std::size_t>(match->sentiment)][static_cast<std::size_t>(p.sentiment)] +=
            1;
        (match->sentiment == p.sentiment ? rep.integrated.tp : rep.integrated.fp) += 1;
      } else {
        rep.integrated.fp += 1;
      }
    }
    for (const auto& g : gold_spans) {
      if (g.kind != SpanKind::Aspect || g.sentiment == static_cast<int>(AsGold::Conflict)) continue;
      const bool hit = std::any_of(pred_spans.begin(), pred_spans.end(), [&](const Span& p) {
        return p.kind == SpanKind::Aspect && same_place(g, p) && p.sentiment == g.sentiment;
      });
      if (!hit) rep.integrated.fn += 1;
    }
  }

  rep.f1_a = rep.aspect.f1();
  rep.f1_o = rep.opinion.f1();
  rep.f1_i = rep.integrated.f1();

  if (rep.matched_non_conflict == 0) {
    rep.no_matched_spans = true;
    rep.acc_s = 0.0;
    rep.f1_s = 0.0;
  } else {
    long correct = 0;
    for (std::size_t c = 0; c < 3; ++c) correct += rep.sentiment_confusion[c][c];
    rep.acc_s = static_cast<double>(correct) / rep.matched_non_conflict;
    double macro = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      long pred_c = 0, gold_c = 0;
      for (std::size_t o = 0; o < 3; ++o) {
        pred_c += rep.sentiment_confusion[o][c];
        gold_c += rep.sentiment_confusion[c][o];
      }
      const long tp = rep.sentiment_confusion[c][c];
      const double p = pred_c == 0 ? 0.0 : static_cast<double>(tp) / pred_c;
      const double r = gold_c == 0 ? 0.0 : static_cast<double>(tp) / gold_c;
      macro += (p + r == 0.0) ? 0.0 : 2.0 * p * r / (p + r);
    }
    rep.f1_s = macro / 3.0;
  }
  return rep;
}

std::string EvalReport::to_text() const {
  char buf[256];
  std::ostringstream os;
  std::snprintf(buf, sizeof(buf), "F1-a: %.2f\nF1-o: %.2f\nacc-s: %.2f\nF1-s: %.2f\nF1-I: %.2f\n", f1_a * 100.0,
                f1_o * 100.0, acc_s * 100.0, f1_s * 100.0, f1_i * 100.0);
  os << buf;
  os << "aspect spans: tp=" << aspect.tp << " fp=" << aspect.fp << " fn=" << aspect.fn << "\n";
  os << "opinion spans: tp=" << opinion.tp << " fp=" << opinion.fp << " fn=" << opinion.fn << "\n";
  os << "integrated: tp=" << integrated.tp << " fp=" << integrated.fp << " fn=" << integrated.fn << "\n";
  os << "matched non-conflict spans: " << matched_non_conflict;
  if (no_matched_spans) os << " (no matched spans; acc-s/F1-s reported as 0)";
  os << "\n";
  return os.str();
}

std::string EvalReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\n";
  os << "  \"f1_a\": " << f1_a << ",\n  \"f1_o\": " << f1_o << ",\n  \"acc_s\": " << acc_s << ",\n  \"f1_s\": "
     << f1_s << ",\n  \"f1_i\": " << f1_i << ",\n";
  auto counts = [&os](const char* name, const PrCounts& c, bool comma = true) {
    os << "  \"" << name << "\": {\"tp\": " << c.tp << ", \"fp\": " << c.fp << ", \"fn\": " << c.fn << "}"
       << (comma ? ",\n" : "\n");
  };
  counts("aspect", aspect);
  counts("opinion", opinion);
  counts("integrated", integrated);
  os << "  \"sentiment_confusion\": [";
  for (std::size_t i = 0; i < 3; ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < 3; ++j) os << (j ? ", " : "") << sentiment_confusion[i][j];
    os << "]";
  }
  os << "],\n";
  os << "  \"matched_non_conflict\": " << matched_non_conflict << ",\n";
  os << "  \"no_matched_spans\": " << (no_matched_spans ? "true" : "false") << "\n";
  os << "}\n";
  return os.str();
}

}  // namespace absa

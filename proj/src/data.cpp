#include "absa/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

namespace absa {

namespace {

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void fail(const std::string& path, long line, const std::string& msg) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

void AspectInstance::validate(const std::string& where) const {
  const std::string at = where.empty() ? "aspect instance" : where;
  if (tokens.empty()) throw ParseError(at + ": empty sentence");
  if (tokens.size() != ae_labels.size() || tokens.size() != as_labels.size())
    throw ParseError(at + ": token/label sequences differ in length");
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const AeLabel ae = ae_labels[i];
    const AsGold as = as_labels[i];
    if (ae == AeLabel::IA && (i == 0 || !is_aspect_token(ae_labels[i - 1])))
      throw ParseError(at + ": IA at token " + std::to_string(i) + " does not continue an aspect span");
    if (ae == AeLabel::IP && (i == 0 || !is_opinion_token(ae_labels[i - 1])))
      throw ParseError(at + ": IP at token " + std::to_string(i) + " does not continue an opinion span");
    if (is_aspect_token(ae)) {
      if (as == AsGold::None)
        throw ParseError(at + ": aspect token " + std::to_string(i) + " is missing a sentiment marker");
      if (ae == AeLabel::IA && as != as_labels[i - 1])
        throw ParseError(at + ": token " + std::to_string(i) + " disagrees with its span's sentiment");
    } else if (as != AsGold::None) {
      throw ParseError(at + ": non-aspect token " + std::to_string(i) + " carries a sentiment marker");
    }
  }
}

std::vector<AspectInstance> parse_aspect_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::vector<AspectInstance> out;
  AspectInstance cur;
  long line_no = 0;
  long sentence_start = 1;
  std::string line;

  auto flush = [&](long blank_line) {
    if (cur.tokens.empty()) fail(path, blank_line, "length-zero sentence");
    cur.validate(path + ":" + std::to_string(sentence_start));
    out.push_back(std::move(cur));
    cur = AspectInstance{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush(line_no);
      sentence_start = line_no + 1;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) fail(path, line_no, "expected token<TAB>ae_label<TAB>as_label");
    if (fields[0].empty()) fail(path, line_no, "empty token");
    AeLabel ae;
    if (!parse_ae_label(fields[1], ae)) fail(path, line_no, "unknown AE label '" + fields[1] + "'");
    AsGold as;
    if (!parse_as_gold(fields[2], as)) fail(path, line_no, "unknown AS label '" + fields[2] + "'");
    cur.tokens.push_back(lowercase(fields[0]));
    cur.ae_labels.push_back(ae);
    cur.as_labels.push_back(as);
  }
  if (!cur.tokens.empty()) flush(line_no + 1);
  return out;
}

void write_aspect_file(const std::string& path, const std::vector<AspectInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t s = 0; s < instances.size(); ++s) {
    if (s) out << "\n";
    const auto& inst = instances[s];
    for (std::size_t i = 0; i < inst.tokens.size(); ++i)
      out << inst.tokens[i] << "\t" << ae_label_name(inst.ae_labels[i]) << "\t" << as_gold_name(inst.as_labels[i])
          << "\n";
  }
}

std::vector<DocumentInstance> parse_doc_file(const std::string& path, DocKind kind,
                                             const std::vector<std::string>& domains) {
  if (kind == DocKind::Domain && domains.empty())
    throw std::invalid_argument("parse_doc_file: domain list is empty");
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::vector<DocumentInstance> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) fail(path, line_no, "expected label<TAB>text");
    const std::string label = line.substr(0, tab);
    DocumentInstance doc;
    doc.kind = kind;
    if (kind == DocKind::Sentiment) {
      AsGold g;
      if (!parse_as_gold(label, g) || g == AsGold::Conflict || g == AsGold::None)
        fail(path, line_no, "unknown sentiment label '" + label + "'");
      doc.label = static_cast<int>(g);
    } else {
      auto it = std::find(domains.begin(), domains.end(), label);
      if (it == domains.end()) fail(path, line_no, "unknown domain label '" + label + "'");
      doc.label = static_cast<int>(it - domains.begin());
    }
    doc.tokens = split_ws(lowercase(line.substr(tab + 1)));
    if (doc.tokens.empty()) fail(path, line_no, "document has no tokens");
    out.push_back(std::move(doc));
  }
  return out;
}

void write_doc_file(const std::string& path, const std::vector<DocumentInstance>& docs,
                    const std::vector<std::string>& domains) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& doc : docs) {
    if (doc.kind == DocKind::Sentiment) {
      out << sentiment_name(doc.label);
    } else {
      out << domains.at(static_cast<std::size_t>(doc.label));
    }
    out << "\t";
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) out << (i ? " " : "") << doc.tokens[i];
    out << "\n";
  }
}

std::vector<Batch> make_batches(const std::vector<std::vector<int>>& encoded, int batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Batch> out;
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    Batch b;
    std::size_t max_len = 0;
    for (std::size_t i = start; i < end; ++i) {
      b.indices.push_back(order[i]);
      max_len = std::max(max_len, encoded[order[i]].size());
    }
    for (std::size_t idx : b.indices) {
      const auto& ids = encoded[idx];
      std::vector<int> padded(max_len, Vocabulary::kPad);
      std::vector<std::uint8_t> mask(max_len, 0);
      for (std::size_t j = 0; j < ids.size(); ++j) {
        padded[j] = ids[j];
        mask[j] = 1;
      }
      b.token_ids.push_back(std::move(padded));
      b.pad_mask.push_back(std::move(mask));
    }
    out.push_back(std::move(b));
  }
  return out;
}

BatchCycler::BatchCycler(std::vector<std::vector<int>> encoded, int batch_size, Rng& rng)
    : encoded_(std::move(encoded)), batch_size_(batch_size), rng_(&rng) {
  if (encoded_.empty()) throw std::invalid_argument("BatchCycler: empty dataset");
  batches_ = make_batches(encoded_, batch_size_, rng_->next_u64());
}

const Batch& BatchCycler::next() {
  if (pos_ >= batches_.size()) {
    batches_ = make_batches(encoded_, batch_size_, rng_->next_u64());
    pos_ = 0;
  }
  return batches_[pos_++];
}

}  // namespace absa

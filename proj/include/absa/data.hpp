#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "absa/labels.hpp"
#include "absa/rng.hpp"
#include "absa/vocab.hpp"

namespace absa {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One tagged sentence. Gold invariants (enforced by parse_aspect_file and
// validate()): the three sequences have equal length, IA/IP only continue a
// span of their kind, aspect tokens carry a sentiment marker and nothing
// else does, and every token of a multi-token aspect carries the span's
// sentiment.
struct AspectInstance {
  std::vector<std::string> tokens;
  std::vector<AeLabel> ae_labels;
  std::vector<AsGold> as_labels;

  void validate(const std::string& where = "") const;
};

enum class DocKind { Sentiment, Domain };

struct DocumentInstance {
  std::vector<std::string> tokens;
  DocKind kind = DocKind::Sentiment;
  int label = 0;
};

// Aspect file grammar: UTF-8 text, sentences separated by one blank line,
// one token per line as `token<TAB>ae_label<TAB>as_label` with `-` for no
// sentiment. Tokens are lowercased on read.
std::vector<AspectInstance> parse_aspect_file(const std::string& path);
void write_aspect_file(const std::string& path, const std::vector<AspectInstance>& instances);

// Document file grammar: one document per line, `label<TAB>token token ...`.
// Sentiment labels are pos/neg/neu; domain labels are matched against the
// configured domain list (id = declaration order).
std::vector<DocumentInstance> parse_doc_file(const std::string& path, DocKind kind,
                                             const std::vector<std::string>& domains);
void write_doc_file(const std::string& path, const std::vector<DocumentInstance>& docs,
                    const std::vector<std::string>& domains);

// A shuffled slice of a dataset, padded to the batch's longest sentence.
// pad_mask marks exactly the real (non-PAD) positions; indices point back
// into the source instance vector for the gold structures.
struct Batch {
  std::vector<std::size_t> indices;
  std::vector<std::vector<int>> token_ids;
  std::vector<std::vector<std::uint8_t>> pad_mask;
};

std::vector<Batch> make_batches(const std::vector<std::vector<int>>& encoded, int batch_size, std::uint64_t seed);

// Endless deterministic stream of batches; reshuffles with a fresh seed from
// the generator each time the dataset is exhausted.
class BatchCycler {
 public:
  BatchCycler(std::vector<std::vector<int>> encoded, int batch_size, Rng& rng);
  const Batch& next();

 private:
  std::vector<std::vector<int>> encoded_;
  int batch_size_;
  Rng* rng_;
  std::vector<Batch> batches_;
  std::size_t pos_ = 0;
};

}  // namespace absa

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "absa/data.hpp"

using namespace absa;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content) {
    path = std::string("data_test_") + name;
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

// Table-style sentence: "The fish is fresh but the variety of fish is
// nothing out of ordinary ."
const char* kReviewSentence =
    "The\tO\t-\n"
    "fish\tBA\tpos\n"
    "is\tO\t-\n"
    "fresh\tBP\t-\n"
    "but\tO\t-\n"
    "the\tO\t-\n"
    "variety\tBA\tneg\n"
    "of\tIA\tneg\n"
    "fish\tIA\tneg\n"
    "is\tO\t-\n"
    "nothing\tO\t-\n"
    "out\tO\t-\n"
    "of\tO\t-\n"
    "ordinary\tBP\t-\n"
    ".\tO\t-\n";

}  // namespace

TEST_CASE("aspect file round-trips the review sentence") {
  TempFile f("aspect.tsv", kReviewSentence);
  auto parsed = parse_aspect_file(f.path);
  REQUIRE(parsed.size() == 1);
  const auto& inst = parsed[0];
  REQUIRE(inst.tokens.size() == 15);
  CHECK(inst.tokens[0] == "the");  // lowercased on read
  CHECK(inst.ae_labels[1] == AeLabel::BA);
  CHECK(inst.as_labels[1] == AsGold::Pos);
  CHECK(inst.ae_labels[3] == AeLabel::BP);
  CHECK(inst.as_labels[3] == AsGold::None);
  CHECK(inst.ae_labels[6] == AeLabel::BA);
  CHECK(inst.ae_labels[7] == AeLabel::IA);
  CHECK(inst.ae_labels[8] == AeLabel::IA);
  for (int i = 6; i <= 8; ++i) CHECK(inst.as_labels[static_cast<std::size_t>(i)] == AsGold::Neg);
  CHECK(inst.ae_labels[13] == AeLabel::BP);

  // parse -> serialize -> parse is the identity
  TempFile copy("aspect_copy.tsv", "");
  write_aspect_file(copy.path, parsed);
  auto again = parse_aspect_file(copy.path);
  REQUIRE(again.size() == 1);
  CHECK(again[0].tokens == inst.tokens);
  CHECK(again[0].ae_labels == inst.ae_labels);
  CHECK(again[0].as_labels == inst.as_labels);
}

TEST_CASE("single-token sentence with O label") {
  TempFile f("single.tsv", "hello\tO\t-\n");
  auto parsed = parse_aspect_file(f.path);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].tokens.size() == 1);
  CHECK(parsed[0].as_labels[0] == AsGold::None);
}

TEST_CASE("gold well-formedness is enforced") {
  TempFile orphan("orphan.tsv", "a\tO\t-\nb\tIA\tpos\n");
  CHECK_THROWS_AS(parse_aspect_file(orphan.path), ParseError);

  TempFile missing("missing.tsv", "a\tBA\t-\n");
  CHECK_THROWS_AS(parse_aspect_file(missing.path), ParseError);

  TempFile stray("stray.tsv", "a\tO\tpos\n");
  CHECK_THROWS_AS(parse_aspect_file(stray.path), ParseError);

  TempFile inconsistent("inconsistent.tsv", "a\tBA\tpos\nb\tIA\tneg\n");
  CHECK_THROWS_AS(parse_aspect_file(inconsistent.path), ParseError);

  TempFile empty_sentence("empty.tsv", "a\tO\t-\n\n\nb\tO\t-\n");
  CHECK_THROWS_AS(parse_aspect_file(empty_sentence.path), ParseError);

  TempFile bad_label("bad_label.tsv", "a\tXX\t-\n");
  CHECK_THROWS_WITH_AS(parse_aspect_file(bad_label.path), doctest::Contains(":1:"), ParseError);

  TempFile malformed("malformed.tsv", "a\tO\n");
  CHECK_THROWS_AS(parse_aspect_file(malformed.path), ParseError);
}

TEST_CASE("document files parse labels by kind") {
  const std::vector<std::string> domains{"restaurant", "electronics"};

  TempFile ds("ds.tsv", "pos\tgreat phone\nneu\tIt exists\n");
  auto sentiment = parse_doc_file(ds.path, DocKind::Sentiment, domains);
  REQUIRE(sentiment.size() == 2);
  CHECK(sentiment[0].label == static_cast<int>(AsGold::Pos));
  CHECK(sentiment[0].tokens == std::vector<std::string>{"great", "phone"});
  CHECK(sentiment[1].tokens[0] == "it");

  TempFile dd("dd.tsv", "restaurant\ttasty soup\nelectronics\tbad battery\n");
  auto domain = parse_doc_file(dd.path, DocKind::Domain, domains);
  REQUIRE(domain.size() == 2);
  CHECK(domain[0].label == 0);  // first-declared domain
  CHECK(domain[1].label == 1);

  TempFile bad("bad.tsv", "spaceship\tzoom\n");
  CHECK_THROWS_AS(parse_doc_file(bad.path, DocKind::Domain, domains), ParseError);
  TempFile conflict("conflict.tsv", "conflict\tmixed feelings\n");
  CHECK_THROWS_AS(parse_doc_file(conflict.path, DocKind::Sentiment, domains), ParseError);
  TempFile empty_text("empty_text.tsv", "pos\t\n");
  CHECK_THROWS_AS(parse_doc_file(empty_text.path, DocKind::Sentiment, domains), ParseError);

  // round trip
  TempFile copy("dd_copy.tsv", "");
  write_doc_file(copy.path, domain, domains);
  auto again = parse_doc_file(copy.path, DocKind::Domain, domains);
  REQUIRE(again.size() == domain.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].label == domain[i].label);
    CHECK(again[i].tokens == domain[i].tokens);
  }
}

TEST_CASE("batching covers every instance once with deterministic shuffles") {
  std::vector<std::vector<int>> encoded;
  for (int i = 0; i < 33; ++i) encoded.push_back(std::vector<int>(static_cast<std::size_t>(1 + i % 5), i));

  auto small = make_batches({encoded.begin(), encoded.begin() + 10}, 32, 7);
  REQUIRE(small.size() == 1);
  CHECK(small[0].indices.size() == 10);

  auto batches = make_batches(encoded, 32, 7);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0].indices.size() == 32);
  CHECK(batches[1].indices.size() == 1);

  std::vector<int> seen(33, 0);
  for (const auto& b : batches)
    for (auto idx : b.indices) seen[idx] += 1;
  for (int c : seen) CHECK(c == 1);

  auto batches2 = make_batches(encoded, 32, 7);
  for (std::size_t b = 0; b < batches.size(); ++b) CHECK(batches[b].indices == batches2[b].indices);
  auto batches3 = make_batches(encoded, 32, 8);
  CHECK(batches3[0].indices != batches[0].indices);
}

TEST_CASE("pad mask marks exactly the real positions") {
  std::vector<std::vector<int>> encoded{{5, 6, 7}, {8}};
  auto batches = make_batches(encoded, 2, 1);
  REQUIRE(batches.size() == 1);
  const Batch& b = batches[0];
  for (std::size_t r = 0; r < b.indices.size(); ++r) {
    const auto& original = encoded[b.indices[r]];
    REQUIRE(b.token_ids[r].size() == 3);  // padded to batch max
    for (std::size_t j = 0; j < 3; ++j) {
      if (j < original.size()) {
        CHECK(b.pad_mask[r][j] == 1);
        CHECK(b.token_ids[r][j] == original[j]);
      } else {
        CHECK(b.pad_mask[r][j] == 0);
        CHECK(b.token_ids[r][j] == Vocabulary::kPad);
      }
    }
  }
}

TEST_CASE("batch cycler walks epochs deterministically") {
  std::vector<std::vector<int>> encoded{{1}, {2}, {3}};
  Rng r1(5), r2(5);
  BatchCycler c1(encoded, 2, r1), c2(encoded, 2, r2);
  for (int i = 0; i < 7; ++i) CHECK(c1.next().indices == c2.next().indices);
}

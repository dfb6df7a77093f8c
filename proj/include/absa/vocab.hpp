#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace absa {

// Token ids with two reserved slots. Corpus occurrences of the reserved
// surface forms are not given ids of their own; they resolve to UNK.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";

  Vocabulary();
  // Rebuild from a serialized id->token list (must start with the reserved pair).
  static Vocabulary from_tokens(const std::vector<std::string>& id_to_token);

  int add(const std::string& token);  // existing id if already present
  int id(const std::string& token) const;  // kUnk for unknown tokens
  bool contains(const std::string& token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(id_to_token_.size()); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// Ids are assigned in first-seen order to tokens whose total frequency over
// all streams reaches min_count; everything else maps to UNK at lookup time.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& token_streams, int min_count);

}  // namespace absa

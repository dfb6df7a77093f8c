#include "absa/vocab.hpp"

#include <stdexcept>

namespace absa {

Vocabulary::Vocabulary() {
  id_to_token_ = {kPadToken, kUnkToken};
  token_to_id_ = {{kPadToken, kPad}, {kUnkToken, kUnk}};
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& id_to_token) {
  if (id_to_token.size() < 2 || id_to_token[0] != kPadToken || id_to_token[1] != kUnkToken)
    throw std::invalid_argument("Vocabulary::from_tokens: list must start with the reserved pad/unk tokens");
  Vocabulary v;
  for (std::size_t i = 2; i < id_to_token.size(); ++i) v.add(id_to_token[i]);
  if (v.size() != static_cast<int>(id_to_token.size()))
    throw std::invalid_argument("Vocabulary::from_tokens: duplicate tokens in list");
  return v;
}

int Vocabulary::add(const std::string& token) {
  auto it = token_to_id_.find(token);
  if (it != token_to_id_.end()) return it->second;
  const int id = static_cast<int>(id_to_token_.size());
  token_to_id_.emplace(token, id);
  id_to_token_.push_back(token);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("Vocabulary::token: id " + std::to_string(id) + " out of range");
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& token_streams, int min_count) {
  if (token_streams.empty()) throw std::invalid_argument("build_vocab: no token streams given");
  if (min_count < 1) throw std::invalid_argument("build_vocab: min_count must be >= 1");

  std::unordered_map<std::string, int> counts;
  for (const auto& stream : token_streams)
    for (const auto& tok : stream) ++counts[tok];

  Vocabulary vocab;
  for (const auto& stream : token_streams) {
    for (const auto& tok : stream) {
      if (tok == Vocabulary::kPadToken || tok == Vocabulary::kUnkToken) continue;
      if (counts[tok] >= min_count) vocab.add(tok);
    }
  }
  return vocab;
}

}  // namespace absa

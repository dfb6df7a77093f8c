#pragma once

#include <string>

namespace absa {

// Tag order is frozen: checkpoints and the re-encoding concatenation depend
// on these indices.
enum class AeLabel : int { BA = 0, IA = 1, BP = 2, IP = 3, O = 4 };
inline constexpr int kNumAeLabels = 5;

// Model predictions are always a 3-way distribution over pos/neg/neu.
// Conflict and None appear only on the gold side.
enum class AsGold : int { Pos = 0, Neg = 1, Neu = 2, Conflict = 3, None = 4 };
inline constexpr int kNumSentiments = 3;

const char* ae_label_name(AeLabel l);
const char* as_gold_name(AsGold l);
const char* sentiment_name(int cls);  // 0..2

bool parse_ae_label(const std::string& s, AeLabel& out);
bool parse_as_gold(const std::string& s, AsGold& out);

inline bool is_aspect_token(AeLabel l) { return l == AeLabel::BA || l == AeLabel::IA; }
inline bool is_opinion_token(AeLabel l) { return l == AeLabel::BP || l == AeLabel::IP; }

}  // namespace absa

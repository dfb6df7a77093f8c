#include "absa/labels.hpp"

namespace absa {

const char* ae_label_name(AeLabel l) {
  switch (l) {
    case AeLabel::BA: return "BA";
    case AeLabel::IA: return "IA";
    case AeLabel::BP: return "BP";
    case AeLabel::IP: return "IP";
    case AeLabel::O: return "O";
  }
  return "?";
}

const char* as_gold_name(AsGold l) {
  switch (l) {
    case AsGold::Pos: return "pos";
    case AsGold::Neg: return "neg";
    case AsGold::Neu: return "neu";
    case AsGold::Conflict: return "conflict";
    case AsGold::None: return "-";
  }
  return "?";
}

const char* sentiment_name(int cls) {
  switch (cls) {
    case 0: return "pos";
    case 1: return "neg";
    case 2: return "neu";
  }
  return "?";
}

bool parse_ae_label(const std::string& s, AeLabel& out) {
  if (s == "BA") out = AeLabel::BA;
  else if (s == "IA") out = AeLabel::IA;
  else if (s == "BP") out = AeLabel::BP;
  else if (s == "IP") out = AeLabel::IP;
  else if (s == "O") out = AeLabel::O;
  else return false;
  return true;
}

bool parse_as_gold(const std::string& s, AsGold& out) {
  if (s == "pos") out = AsGold::Pos;
  else if (s == "neg") out = AsGold::Neg;
  else if (s == "neu") out = AsGold::Neu;
  else if (s == "conflict") out = AsGold::Conflict;
  else if (s == "-") out = AsGold::None;
  else return false;
  return true;
}

}  // namespace absa

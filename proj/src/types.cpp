#include "turntake/types.hpp"

#include <string>

#include "turntake/error.hpp"

namespace turntake {

Speaker speaker_from_int(int id) {
  if (id == 1) return Speaker::kOne;
  if (id == 2) return Speaker::kTwo;
  throw ValidationError("speaker id must be 1 or 2, got " + std::to_string(id));
}

std::string_view label_name(Label l) {
  switch (l) {
    case Label::kNA: return "NA";
    case Label::kBC: return "BC";
    case Label::kI: return "I";
    case Label::kT: return "T";
    case Label::kC: return "C";
  }
  return "?";
}

Label label_from_name(std::string_view name) {
  for (Label l : kAllLabels) {
    if (label_name(l) == name) return l;
  }
  throw ValidationError("unknown label '" + std::string(name) + "'");
}

std::string owner_name(const Owner& o) {
  if (!o) return "none";
  return std::to_string(to_int(*o));
}

Owner owner_from_name(std::string_view name) {
  if (name == "none") return std::nullopt;
  if (name == "1") return Speaker::kOne;
  if (name == "2") return Speaker::kTwo;
  throw ValidationError("unknown owner '" + std::string(name) + "'");
}

}  // namespace turntake

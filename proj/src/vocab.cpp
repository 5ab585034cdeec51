#include "tacticrl/vocab.hpp"

#include <algorithm>

#include "tacticrl/errors.hpp"

namespace tacticrl {

Vocabulary::Vocabulary(std::string chars) : chars_(std::move(chars)) {
  std::sort(chars_.begin(), chars_.end());
  chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
  index_.fill(-1);
  for (std::size_t i = 0; i < chars_.size(); ++i) index_[static_cast<unsigned char>(chars_[i])] = static_cast<int>(i) + 1;
}

const Vocabulary& Vocabulary::standard() {
  static const Vocabulary v(
      "\n &()-0123456789:>ABCDEFGHIT_abcdefghijklmnopqrstuvwxyz|");
  return v;
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  ids.reserve(text.size() + 1);
  for (char c : text) {
    int id = index_[static_cast<unsigned char>(c)];
    if (id < 0) {
      throw TokenizationError("character with code " + std::to_string(static_cast<unsigned char>(c)) +
                              " is outside the vocabulary");
    }
    ids.push_back(id);
  }
  return ids;
}

std::vector<int> Vocabulary::encode_tactic(std::string_view text) const {
  auto ids = encode(text);
  ids.push_back(eos());
  return ids;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
  std::string s;
  for (int id : ids) {
    if (id == eos()) break;
    if (id > 0 && id < output_size()) s += chars_[static_cast<std::size_t>(id - 1)];
  }
  return s;
}

}  // namespace tacticrl

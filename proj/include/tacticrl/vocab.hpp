#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tacticrl {

/// Character-level alphabet. Output ids: EOS = 0, then characters in ASCII
/// order, so lexicographic order on ids matches order on surface strings.
/// BOS is the extra input-only id `output_size()`.
class Vocabulary {
 public:
  explicit Vocabulary(std::string chars);

  /// Every character prompt rendering and the tactic grammar can produce.
  static const Vocabulary& standard();

  static constexpr int eos() { return 0; }
  int bos() const { return output_size(); }
  int output_size() const { return static_cast<int>(chars_.size()) + 1; }
  int input_size() const { return output_size() + 1; }
  const std::string& chars() const { return chars_; }

  /// Throws TokenizationError on characters outside the alphabet.
  std::vector<int> encode(std::string_view text) const;
  /// encode(text) followed by EOS.
  std::vector<int> encode_tactic(std::string_view text) const;
  /// Concatenates characters; EOS ends the string.
  std::string decode(std::span<const int> ids) const;

 private:
  std::string chars_;
  std::array<int, 256> index_;
};

}  // namespace tacticrl

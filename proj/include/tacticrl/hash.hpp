#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace tacticrl {

/// 64-bit FNV-1a. Used for content ids (checkpoints, configs, files); not a
/// cryptographic hash.
class Fnv1a {
 public:
  void update(std::string_view bytes);
  void update(std::span<const double> values);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hash_hex(std::string_view bytes);
std::string hash_file(const std::string& path);

}  // namespace tacticrl

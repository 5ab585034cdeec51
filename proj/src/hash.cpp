#include "tacticrl/hash.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tacticrl/errors.hpp"
#include "tacticrl/rng.hpp"

namespace tacticrl {

void Fnv1a::update(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
}

void Fnv1a::update(std::span<const double> values) {
  for (double v : values) {
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof v);
    update(std::string_view(buf, sizeof buf));
  }
}

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string hash_hex(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.hex();
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot read input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hash_hex(ss.str());
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  Fnv1a h;
  h.update(label);
  return derive_seed(seed, h.digest());
}

}  // namespace tacticrl

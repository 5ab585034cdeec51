#pragma once

#include <map>
#include <string>
#include <vector>

#include "tacticrl/jsonl.hpp"
#include "tacticrl/policy.hpp"

namespace tacticrl {

inline constexpr int kCheckpointVersion = 1;

/// Single JSON record: format_version, seed, dims, vocabulary, tensors in
/// fixed order (matrices as nested row arrays), and the content hash.
void save_checkpoint(const std::string& path, const PolicyParams& params);

/// Throws MissingInput if absent and CorruptCheckpoint on parse errors,
/// version mismatch, shape inconsistency or hash mismatch.
PolicyParams load_checkpoint(const std::string& path);

/// Reproducibility record written next to every run's artifacts.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;       // path -> content hash
  std::map<std::string, std::string> outputs;      // path -> content hash
  std::map<std::string, std::string> checkpoints;  // path -> parameter hash

  Json to_json() const;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace tacticrl

#include "tacticrl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "tacticrl/errors.hpp"

namespace tacticrl {

void save_checkpoint(const std::string& path, const PolicyParams& params) {
  const auto& L = params.layout();
  Json tensors = Json::object();
  for (Tensor t : kAllTensors) {
    const auto v = params.tensor(t);
    const std::size_t rows = L.rows(t), cols = L.cols(t);
    Json arr = Json::array();
    if (cols == 1) {
      for (double x : v) arr.push_back(x);
    } else {
      for (std::size_t r = 0; r < rows; ++r) arr.push_back(std::vector<double>(v.begin() + r * cols, v.begin() + (r + 1) * cols));
    }
    tensors[std::string(tensor_name(t))] = std::move(arr);
  }
  Json j{{"format_version", kCheckpointVersion},
         {"seed", params.seed},
         {"dims", {{"embed", L.dims().embed}, {"hidden", L.dims().hidden}}},
         {"vocabulary", Vocabulary::standard().chars()},
         {"tensors", std::move(tensors)},
         {"hash", params.content_hash()}};
  write_text(path, j.dump() + "\n");
}

PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot read checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  auto corrupt = [&](const std::string& why) { return CorruptCheckpoint(path + ": " + why); };
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw corrupt(std::string("unreadable: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointVersion)
      throw corrupt("unsupported format_version " + std::to_string(version) + " (expected " +
                    std::to_string(kCheckpointVersion) + ")");
    if (j.at("vocabulary").get<std::string>() != Vocabulary::standard().chars())
      throw corrupt("vocabulary differs from this build");
    PolicyDims dims{j.at("dims").at("embed").get<int>(), j.at("dims").at("hidden").get<int>()};
    if (dims.embed < 1 || dims.hidden < 1) throw corrupt("non-positive dims");
    PolicyParams params(dims, Vocabulary::standard());
    params.seed = j.at("seed").get<std::uint64_t>();
    const Json& tensors = j.at("tensors");
    if (tensors.size() != kAllTensors.size()) throw corrupt("unexpected tensor set");
    const auto& L = params.layout();
    for (Tensor t : kAllTensors) {
      const std::string name(tensor_name(t));
      const Json& arr = tensors.at(name);
      auto dst = params.tensor(t);
      const std::size_t rows = L.rows(t), cols = L.cols(t);
      if (!arr.is_array() || arr.size() != rows) throw corrupt("tensor " + name + " has the wrong shape");
      for (std::size_t r = 0; r < rows; ++r) {
        if (cols == 1) {
          dst[r] = arr[r].get<double>();
          continue;
        }
        const Json& row = arr[r];
        if (!row.is_array() || row.size() != cols) throw corrupt("tensor " + name + " has the wrong shape");
        for (std::size_t c = 0; c < cols; ++c) dst[r * cols + c] = row[c].get<double>();
      }
    }
    const std::string stored = j.at("hash").get<std::string>();
    if (stored != params.content_hash()) throw corrupt("content hash mismatch");
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw corrupt(e.what());
  }
}

Json RunManifest::to_json() const {
  return Json{{"command", command},
              {"tool_version", tool_version},
              {"config_hash", config_hash},
              {"seed", seed},
              {"inputs", inputs},
              {"outputs", outputs},
              {"checkpoints", checkpoints}};
}

void write_manifest(const std::string& path, const RunManifest& manifest) { write_json(path, manifest.to_json()); }

}  // namespace tacticrl

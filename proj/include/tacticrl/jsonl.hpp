#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace tacticrl {

using Json = nlohmann::ordered_json;

/// Reads one JSON value per non-empty line. Throws MissingInput when the file
/// cannot be opened and ParseError (with path:line) on a malformed line.
std::vector<Json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<Json>& records);

Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& value);
void write_text(const std::string& path, const std::string& text);

}  // namespace tacticrl

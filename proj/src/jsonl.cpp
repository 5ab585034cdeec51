#include "tacticrl/jsonl.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tacticrl/errors.hpp"

namespace tacticrl {

namespace {

std::ofstream open_for_write(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  return out;
}

}  // namespace

std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot read input file: " + path);
  std::vector<Json> records;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    try {
      records.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

void write_jsonl(const std::string& path, const std::vector<Json>& records) {
  auto out = open_for_write(path);
  for (const auto& r : records) out << r.dump() << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot read input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& value) { write_text(path, value.dump(1) + "\n"); }

void write_text(const std::string& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
}

}  // namespace tacticrl

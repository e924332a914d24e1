#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "avexpr/error.hpp"

namespace avexpr {

// One line of a JSON-lines dataset manifest: {"id", "path", "fps", "n_frames"}.
// Image manifests (augment, crop) reuse the format with extra keys, which are
// kept verbatim in `fields`.
struct ManifestEntry {
  std::string id;
  std::filesystem::path path;  // resolved against the manifest's directory
  double fps = 0.0;
  std::uint64_t n_frames = 0;
  nlohmann::json fields = nlohmann::json::object();
};

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  const auto base = manifest.parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(manifest.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("path") || !j["id"].is_string() || !j["path"].is_string()) {
      throw FormatError(manifest.string() + ":" + std::to_string(line_no) + ": entry needs string 'id' and 'path'");
    }
    ManifestEntry e;
    e.id = j["id"].get<std::string>();
    std::filesystem::path p = j["path"].get<std::string>();
    e.path = p.is_absolute() ? p : base / p;
    if (j.contains("fps")) e.fps = j["fps"].get<double>();
    if (j.contains("n_frames")) e.n_frames = j["n_frames"].get<std::uint64_t>();
    e.fields = std::move(j);
    out.push_back(std::move(e));
  }
  return out;
}

// Writes entries with paths relative to the manifest's directory when possible.
inline void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& manifest) {
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + manifest.string());
  const auto base = manifest.parent_path().empty() ? std::filesystem::path(".") : manifest.parent_path();
  for (const auto& e : entries) {
    nlohmann::json j = e.fields.is_object() ? e.fields : nlohmann::json::object();
    j["id"] = e.id;
    auto rel = e.path.lexically_relative(base);
    j["path"] = (rel.empty() || rel.native().starts_with("..")) ? e.path.generic_string() : rel.generic_string();
    j["fps"] = e.fps;
    j["n_frames"] = e.n_frames;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + manifest.string());
}

}  // namespace avexpr

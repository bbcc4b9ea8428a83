#pragma once

// Run manifests: what a command was asked to do and what it produced, enough
// to re-run it (`flowmap replay`).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace flowmap::cli {

struct Artifact {
  std::string path;
  std::uintmax_t bytes = 0;
  std::string fnv1a64;  // hex digest of the file contents
};

struct RunManifest {
  std::string tool = "flowmap";
  std::string version;
  std::string command;
  std::vector<std::string> argv;  // without the program name
  std::string config;             // every option with its resolved value (TOML)
  std::vector<Artifact> artifacts;
  std::string started;            // UTC, ISO 8601
  std::string finished;
  int workers = 1;
};

std::string fnv1a64_file(const std::filesystem::path& path);
Artifact describe_artifact(const std::filesystem::path& path);
std::string utc_now();

void write_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace flowmap::cli

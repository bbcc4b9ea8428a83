#include "flowmap/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <json.hpp>

#include "flowmap/error.hpp"
#include "flowmap/npy.hpp"

namespace flowmap::cli {

using nlohmann::json;

std::string fnv1a64_file(const std::filesystem::path& path) {
  const std::string bytes = npy::slurp(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Artifact describe_artifact(const std::filesystem::path& path) {
  return {path.string(), std::filesystem::file_size(path), fnv1a64_file(path)};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  json arts = json::array();
  for (const auto& a : m.artifacts) arts.push_back({{"path", a.path}, {"bytes", a.bytes}, {"fnv1a64", a.fnv1a64}});
  const json j = {{"tool", m.tool},       {"version", m.version}, {"command", m.command},
                  {"argv", m.argv},       {"config", m.config},   {"artifacts", arts},
                  {"started", m.started}, {"finished", m.finished}, {"workers", m.workers}};
  npy::dump(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  RunManifest m;
  try {
    const json j = json::parse(npy::slurp(path));
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config = j.value("config", "");
    for (const auto& a : j.at("artifacts"))
      m.artifacts.push_back({a.at("path").get<std::string>(), a.at("bytes").get<std::uintmax_t>(),
                             a.at("fnv1a64").get<std::string>()});
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    m.workers = j.value("workers", 1);
  } catch (const json::exception& e) {
    throw ParseError("bad manifest " + path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace flowmap::cli

#include "wcond/harness/output.hpp"

#include <atomic>
#include <ctime>
#include <fstream>
#include <set>

#include <json.hpp>
#include <unistd.h>

#include "wcond/errors.hpp"
#include "wcond/harness/csv.hpp"
#include "wcond/rng.hpp"

#ifndef WCOND_VERSION
#define WCOND_VERSION "unknown"
#endif

namespace wcond::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<unsigned> g_counter{0};

// Unique per process and call, so concurrent writers never share a temp name.
std::string unique_suffix() {
  return std::to_string(::getpid()) + "-" + std::to_string(g_counter.fetch_add(1));
}

void check_artifact_name(const std::string& name, std::set<std::string>& seen) {
  if (name.empty() || name.find('/') != std::string::npos || name.front() == '.' ||
      name == kManifestName || name == kConfigName) {
    throw InvalidArgument("write_run: bad artifact name '" + name + "'");
  }
  if (!seen.insert(name).second) throw InvalidArgument("write_run: duplicate artifact '" + name + "'");
}

json file_entry(const std::string& name, std::string_view content) {
  return {{"path", name}, {"bytes", content.size()}, {"fnv1a64", format_hex(fnv1a64(content))}};
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.parent_path() / ("." + path.filename().string() + ".tmp-" + unique_suffix());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

fs::path run_directory(const fs::path& base, ExperimentKind kind, std::uint64_t hash) {
  return base / (std::string(to_string(kind)) + "-" + format_hex(hash));
}

std::string iso8601_utc(std::chrono::system_clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char frac[8];
  std::snprintf(frac, sizeof frac, ".%03dZ", static_cast<int>(ms % 1000));
  return std::string(buf, n) + frac;
}

fs::path write_run(const ExperimentConfig& cfg, std::uint64_t hash, const Artifacts& artifacts,
                   const RunTiming& timing) {
  const fs::path base = cfg.output_dir;
  fs::create_directories(base);
  const fs::path dir = run_directory(base, cfg.kind, hash);
  const fs::path staging = base / ("." + dir.filename().string() + ".staging-" + unique_suffix());
  fs::remove_all(staging);
  fs::create_directories(staging);

  try {
    json files = json::array();
    std::set<std::string> seen;
    for (const auto& a : artifacts.files) {
      check_artifact_name(a.name, seen);
      write_file_atomic(staging / a.name, a.content);
      files.push_back(file_entry(a.name, a.content));
    }
    const std::string config_text = canonical_json(cfg) + "\n";
    write_file_atomic(staging / kConfigName, config_text);
    files.push_back(file_entry(std::string(kConfigName), config_text));
    // The manifest cannot hash itself; it is listed by name only.
    files.push_back({{"path", std::string(kManifestName)}});

    json arms = json::array();
    for (const auto& arm : artifacts.arms) {
      arms.push_back({{"name", arm.name},
                      {"diverged", arm.diverged},
                      {"files", arm.files},
                      {"wall_time_s", arm.wall_time_s},
                      {"wall_time_per_step_s", arm.wall_time_per_step_s}});
    }
    const double wall =
        std::chrono::duration<double>(timing.finished - timing.started).count();
    json manifest = {{"tool", "wcond"},
                     {"version", WCOND_VERSION},
                     {"experiment", std::string(to_string(cfg.kind))},
                     {"seed", cfg.seed},
                     {"config_hash", format_hex(hash)},
                     {"started_at", iso8601_utc(timing.started)},
                     {"finished_at", iso8601_utc(timing.finished)},
                     {"wall_time_s", wall},
                     {"files", files},
                     {"arms", arms},
                     {"summary", json::parse(artifacts.summary_json)}};
    write_file_atomic(staging / kManifestName, manifest.dump(2) + "\n");

    // Swap the finished staging directory into place.
    if (fs::exists(dir)) {
      const fs::path old = base / ("." + dir.filename().string() + ".old-" + unique_suffix());
      fs::rename(dir, old);
      fs::rename(staging, dir);
      fs::remove_all(old);
    } else {
      fs::rename(staging, dir);
    }
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  return dir;
}

}  // namespace wcond::harness

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wcond/harness/config.hpp"

namespace wcond::harness {

struct Artifact {
  std::string name;  // file name inside the run directory
  std::string content;
};

struct ArmRecord {
  std::string name;
  bool diverged = false;
  std::vector<std::string> files;
  double wall_time_s = 0.0;
  double wall_time_per_step_s = 0.0;  // median over epochs
};

/// Everything a run emits. `files` and `summary_json` are deterministic in
/// (config, seed); timings live only in the arms and the manifest.
struct Artifacts {
  std::vector<Artifact> files;
  std::string summary_json = "{}";
  std::vector<ArmRecord> arms;
};

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// `<base>/<kind>-<16 hex digits of hash>`.
std::filesystem::path run_directory(const std::filesystem::path& base, ExperimentKind kind,
                                    std::uint64_t hash);

struct RunTiming {
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
};

inline constexpr std::string_view kManifestName = "manifest.json";
inline constexpr std::string_view kConfigName = "config.json";

/// Materializes a run: every artifact, the canonical config and manifest.json
/// are written into a staging directory which then replaces the run directory
/// in one rename, so readers never see a partial run and the directory holds
/// exactly the files the manifest lists. Returns the run directory.
std::filesystem::path write_run(const ExperimentConfig& cfg, std::uint64_t hash,
                                const Artifacts& artifacts, const RunTiming& timing);

/// ISO 8601 UTC with milliseconds, e.g. 2024-01-02T03:04:05.678Z.
std::string iso8601_utc(std::chrono::system_clock::time_point t);

}  // namespace wcond::harness

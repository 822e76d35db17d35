#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "phasetrap/io.hpp"

// Config-driven orchestration of the pipeline stages. Each stage writes a
// content-addressed artifact into the run directory and is a no-op when the
// artifact already matches the config hash.

namespace phasetrap {

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  int threads = 0;
  bool force = false;
};

// Parses, schema-validates (unknown keys rejected, required keys enforced)
// and normalizes a config document.
json load_config(const std::filesystem::path& path, const RunOptions& options);
void validate_config(const json& config);

std::filesystem::path run_directory(const json& config);

// Stage entry points; each returns the path of its primary artifact.
std::filesystem::path cmd_optimize(const json& config, const RunOptions& options);
std::filesystem::path cmd_features(const json& config, const RunOptions& options);
std::filesystem::path cmd_detect(const json& config, const RunOptions& options);
std::filesystem::path cmd_extrapolate(const json& config, const RunOptions& options);
std::filesystem::path cmd_report(const json& config, const RunOptions& options);

// Exit codes used by the CLI: 0 success, 2 config error, 3 numerical
// failure, 4 missing artifact.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitMissingArtifact = 4;

}  // namespace phasetrap

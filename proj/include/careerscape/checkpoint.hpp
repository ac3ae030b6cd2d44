#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "careerscape/model.hpp"

namespace careerscape {

inline constexpr int kCheckpointVersion = 1;

/// Provenance stored next to the parameters.
struct ArtifactStamp {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version;

  nlohmann::json to_json() const;
  static ArtifactStamp from_json(const nlohmann::json& doc);
};

/// Fills tool_version.
ArtifactStamp make_stamp(std::string config_hash, std::uint64_t seed);

nlohmann::json checkpoint_to_json(const ModelParams& params, const ArtifactStamp& stamp);
ModelParams checkpoint_from_json(const nlohmann::json& doc, ArtifactStamp* stamp = nullptr);

/// Writes parameters as JSON; doubles are printed round-trip exact.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ArtifactStamp& stamp);
ModelParams load_checkpoint(const std::filesystem::path& path, ArtifactStamp* stamp = nullptr);

}  // namespace careerscape

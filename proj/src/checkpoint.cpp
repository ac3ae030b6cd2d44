#include "careerscape/checkpoint.hpp"

#include <fstream>

#include "careerscape/error.hpp"
#include "careerscape/version.hpp"

namespace careerscape {

using nlohmann::json;

json ArtifactStamp::to_json() const {
  return {{"config_hash", config_hash}, {"seed", seed}, {"tool_version", tool_version}};
}

ArtifactStamp ArtifactStamp::from_json(const json& doc) {
  try {
    return {doc.at("config_hash").get<std::string>(), doc.at("seed").get<std::uint64_t>(),
            doc.at("tool_version").get<std::string>()};
  } catch (const json::exception& e) {
    throw DataError(std::string("artifact stamp: ") + e.what());
  }
}

ArtifactStamp make_stamp(std::string config_hash, std::uint64_t seed) {
  return {std::move(config_hash), seed, kToolVersion};
}

json checkpoint_to_json(const ModelParams& params, const ArtifactStamp& stamp) {
  json doc = params.to_json();
  doc["format"] = "careerscape-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["stamp"] = stamp.to_json();
  return doc;
}

ModelParams checkpoint_from_json(const json& doc, ArtifactStamp* stamp) {
  if (!doc.is_object() || doc.value("format", "") != "careerscape-checkpoint")
    throw DataError("not a careerscape checkpoint");
  if (doc.value("version", 0) != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + doc.value("version", json()).dump());
  if (stamp) *stamp = ArtifactStamp::from_json(doc.at("stamp"));
  return ModelParams::from_json(doc);
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ArtifactStamp& stamp) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(params, stamp).dump() << '\n';
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path, ArtifactStamp* stamp) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc, stamp);
}

}  // namespace careerscape

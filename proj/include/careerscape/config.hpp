#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "careerscape/augment.hpp"
#include "careerscape/eval.hpp"
#include "careerscape/generators.hpp"
#include "careerscape/model.hpp"

namespace careerscape {

struct CorpusSettings {
  std::string real;                          // genuine resumes (label 0)
  std::map<std::string, std::string> fakes;  // source name -> resume file (label forced to 1)
  std::string desc_map;                      // title -> description mapping; identity when empty
  std::string embeddings;                    // optional description vectors
  std::string schema;                        // optional career schema supplying descriptions
  int fallback_dim = kDefaultFallbackDim;
  std::int64_t min_company_occurrences = 1;  // 1 keeps everything
  std::string initial_embeddings;            // title/company rows for the global-emb cell
};

struct ExperimentSettings {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  bool combined = true;  // add the Combined run when there are several fake sources
};

/// One document holding every setting of a pipeline run. Unknown keys are rejected at
/// every level; absent keys take their defaults.
struct RunConfig {
  CorpusSettings corpus;
  GeneratorConfig generator;
  double tau = 0.9;
  std::string layers = "All";
  AugmentConfig augment;
  ModelConfig model;
  SplitSpec split;
  ExperimentSettings experiment;
  std::string output_dir = "out";

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig load(const std::filesystem::path& path);

  /// Stable 16-hex-digit hash of the canonical JSON form, output_dir excluded.
  std::string hash() const;
  PipelineConfig pipeline() const;
};

}  // namespace careerscape

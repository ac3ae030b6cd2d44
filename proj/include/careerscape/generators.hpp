#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "careerscape/corpus.hpp"

namespace careerscape {

enum class GeneratorMethod { random, popular, swapping, replacing, markov_real };

std::string_view to_string(GeneratorMethod method);
GeneratorMethod generator_method_from_string(std::string_view name);

struct GeneratorConfig {
  GeneratorMethod method = GeneratorMethod::random;
  std::int64_t count = 1;
  std::uint64_t seed = 0;
  double popular_top_fraction = 0.10;
  // Log-months. Fitted from the real corpus when unset.
  std::optional<double> lognormal_mu;
  std::optional<double> lognormal_sigma;
  // Company exchanges per resume (swapping).
  int n_swaps = 1;
  // Prefix for generated ids; defaults to the method name.
  std::string id_prefix;

  void validate() const;
};

/// Side information reported by the generators.
struct GeneratorReport {
  // Swapping: resumes emitted unchanged because every drawn pair had equal companies.
  std::int64_t swap_fallbacks = 0;
};

std::vector<Resume> gen_random(std::span<const Resume> real, const GeneratorConfig& cfg);
std::vector<Resume> gen_popular(std::span<const Resume> real, const GeneratorConfig& cfg);
std::vector<Resume> gen_swapping(std::span<const Resume> real, const GeneratorConfig& cfg,
                                 GeneratorReport* report = nullptr);
std::vector<Resume> gen_replacing(std::span<const Resume> real, const GeneratorConfig& cfg);

// ---------------------------------------------------------------------------
// Oracle "real" corpus: a first-order Markov career process.

struct CareerTrack {
  std::string name;
  std::string industry;
  std::vector<std::string> titles;  // ladder, lowest rung first
  // Row i: probabilities of moving from rung i to rung j (columns 0..n-1), last column = stop.
  std::vector<std::vector<double>> transitions;
  std::vector<double> start;  // distribution over the first rung
  std::vector<double> duration_log_mu;
  std::vector<double> duration_log_sigma;
};

struct SchemaCompany {
  std::string name;
  std::string industry;
  int tier = 0;
};

struct CareerSchema {
  std::vector<CareerTrack> tracks;
  std::vector<SchemaCompany> companies;
  double company_move_prob = 0.5;   // chance of changing employer between entries
  double same_industry_prob = 0.85; // chance a move stays in the track's industry
  double tier_affinity = 1.5;       // sharpness of the rung/tier match when picking employers
  double tier_up_bias = 1.0;        // preference for moves to higher-tier employers
  int min_entries = 1;  // stopping is suppressed until a career has this many entries
  int max_entries = 10;

  void validate() const;
  nlohmann::json to_json() const;
  static CareerSchema from_json(const nlohmann::json& doc);
  static CareerSchema load(const std::filesystem::path& path);

  /// Title -> description mapping records derived from the track structure.
  DescriptionMapping description_mapping() const;
};

/// Built-in schema used by the desk-scale experiments.
CareerSchema default_career_schema();

std::vector<Resume> gen_markov_real(const GeneratorConfig& cfg, const CareerSchema& schema,
                                    Vocabularies& vocab);

/// Loads pre-generated resumes with label forced to 1 and source set to `source_tag`.
std::vector<Resume> ingest_external(const std::filesystem::path& path, std::string_view source_tag,
                                    Vocabularies& vocab);

/// Dispatches rule-based methods; markov_real requires a schema and vocabulary.
std::vector<Resume> generate(std::span<const Resume> real, const GeneratorConfig& cfg,
                             GeneratorReport* report = nullptr);

// ---------------------------------------------------------------------------

struct CorpusStats {
  std::size_t resume_count = 0;
  double job_density = 0.0;
  double duration_mean = 0.0;
  double duration_std = 0.0;
  double title_diversity = 0.0;
  double company_diversity = 0.0;
  double transition_count = 0.0;

  nlohmann::json to_json() const;
};

CorpusStats corpus_stats(std::span<const Resume> resumes);

}  // namespace careerscape

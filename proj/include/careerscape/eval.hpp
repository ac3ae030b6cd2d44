#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "careerscape/augment.hpp"
#include "careerscape/corpus.hpp"
#include "careerscape/graph.hpp"
#include "careerscape/model.hpp"

namespace careerscape {

struct SplitSpec {
  double test_fraction = 0.20;
  double val_fraction_of_train = 0.20;
  std::uint64_t seed = 1;
  bool stratify_by_label = true;

  void validate() const;
  nlohmann::json to_json() const;
  static SplitSpec from_json(const nlohmann::json& doc);
};

/// Indices into the dataset, each list ascending.
struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

/// Seeded split. With stratification every (label, source) group is split separately, so
/// labels and fake sources keep their proportions in every part.
SplitIndices split_indices(std::span<const Resume> dataset, const SplitSpec& spec);

struct Metrics {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1_positive = 0.0;  // fake class
  double f1_micro = 0.0;     // (tp + tn) / N
  double threshold = 0.5;

  nlohmann::json to_json() const;
};

Metrics compute_metrics(std::span<const double> probabilities, std::span<const double> labels,
                        double threshold = 0.5);

/// Everything a run needs besides the resumes: entity vocabularies and description vectors.
struct DatasetContext {
  Vocabularies vocab;
  DescriptionTable desc;
};

/// Settings of one training/evaluation pipeline.
struct PipelineConfig {
  ModelConfig model;
  AugmentConfig augment;
  double tau = 0.9;
  LayerSet layers = LayerSet::all();
  // Title/company rows loaded before training (the global-emb ablation cell).
  std::optional<InitialEmbeddings> initial_embeddings;

  nlohmann::json to_json() const;
  /// Reads what to_json writes; initial embedding rows are not restored.
  static PipelineConfig from_json(const nlohmann::json& doc);
};

struct RunResult {
  Metrics metrics;
  TrainResult training;
  ModelParams params;
  std::set<std::string> graph_contributors;  // resume ids behind the global graph(s)
  std::set<std::string> test_ids;
  std::vector<double> test_probabilities;
  std::size_t train_count = 0, val_count = 0, test_count = 0;
  PipelineConfig effective;                   // cfg with the run's seeds filled in
  std::shared_ptr<const HeteroGraph> global;  // graph the inputs were augmented from
};

/// Throws DataError when any test id contributed to a global graph.
void assert_no_leakage(const std::set<std::string>& graph_contributors, const std::set<std::string>& test_ids);

/// Split, build the global graph from the training part's genuine resumes (plus its
/// synthetic ones in mixed mode), train, and score the test part. `seed` drives the split,
/// the model and augmentation.
RunResult run_pipeline(std::span<const Resume> dataset, const DatasetContext& ctx, const PipelineConfig& cfg,
                       const SplitSpec& split, std::uint64_t seed);

/// Compiles resumes into model inputs against a global graph.
std::vector<ModelInput> prepare_inputs(std::span<const Resume> resumes, const DatasetContext& ctx,
                                       const HeteroGraph& global, const PipelineConfig& cfg,
                                       const ModelParams& params);

/// Combined dataset: all genuine resumes plus an equal number of fakes drawn evenly from
/// each source (remainder to the earliest sources).
std::vector<Resume> assemble_combined(std::span<const Resume> real,
                                      const std::vector<std::vector<Resume>>& fake_sources, std::uint64_t seed);

/// Metrics JSON document.
nlohmann::json metrics_document(const std::string& run_id, const std::string& spec_hash, std::uint64_t seed,
                                const Metrics& m);

struct SeedSummary {
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (0 for one value)
  double median = 0.0;
};

SeedSummary summarize(std::vector<double> values);

struct SignTest {
  int wins = 0, losses = 0, ties = 0;
  double p_value = 1.0;  // two-sided, ties dropped
};

/// Paired sign test of a against b.
SignTest sign_test(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------

enum class AblationFamily { embedding_size, hops, layers, augmentation };

std::string_view to_string(AblationFamily family);
AblationFamily ablation_family_from_string(std::string_view name);

struct AblationCell {
  std::string label;
  PipelineConfig config;
  bool approximate = false;
  bool skipped = false;  // prerequisites missing (global-emb without initial embeddings)
};

/// Cells of a family derived from `base`, in table order.
std::vector<AblationCell> ablation_cells(AblationFamily family, const PipelineConfig& base,
                                         const std::optional<InitialEmbeddings>& initial = std::nullopt);

struct AblationRow {
  AblationCell cell;
  std::vector<Metrics> per_seed;
  SeedSummary f1_positive;
  SeedSummary f1_micro;
  std::optional<SignTest> vs_reference;  // f1_positive against the reference row, paired by seed
};

struct AblationTable {
  AblationFamily family{};
  std::vector<std::uint64_t> seeds;
  std::vector<AblationRow> rows;
  std::optional<std::size_t> reference;  // row matching the base configuration

  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

/// Runs every (cell, seed) pair; up to `jobs` pairs at once. Results do not depend on `jobs`.
AblationTable run_ablation(AblationFamily family, std::span<const Resume> dataset, const DatasetContext& ctx,
                           const PipelineConfig& base, const SplitSpec& split, std::span<const std::uint64_t> seeds,
                           int jobs = 1, const std::optional<InitialEmbeddings>& initial = std::nullopt);

}  // namespace careerscape

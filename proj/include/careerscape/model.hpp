#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "careerscape/augment.hpp"
#include "careerscape/autodiff.hpp"
#include "careerscape/corpus.hpp"
#include "careerscape/graph.hpp"

namespace careerscape {

struct ModelConfig {
  int dim = 128;
  int duration_dim = 16;
  int layers = 2;          // message-passing layers
  int encoder_blocks = 1;
  int heads = 4;
  int ff_multiplier = 2;   // feed-forward width = ff_multiplier * dim
  double dropout = 0.1;
  int epochs = 100;
  int patience = 10;
  int batch_size = 32;
  double lr = 0.005;
  double lr_decay = 0.5;
  int lr_patience = 5;
  double lr_floor = 1e-5;
  double embedding_init_std = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& doc);  // unknown keys rejected
};

/// Optional file-supplied initial rows for the title/company tables, keyed "title:<name>"
/// or "company:<name>".
using InitialEmbeddings = std::map<std::string, std::vector<double>>;

/// The full trainable state.
class ModelParams {
 public:
  ModelParams() = default;
  /// Tables get one row per key plus the UNK row 0.
  ModelParams(const ModelConfig& cfg, std::vector<std::string> title_keys, std::vector<std::string> company_keys,
              int description_dim);

  const ModelConfig& config() const noexcept { return cfg_; }
  int description_dim() const noexcept { return description_dim_; }

  /// Row for an entity key; 0 (UNK) when unseen.
  std::int32_t title_row(const std::string& key) const;
  std::int32_t company_row(const std::string& key) const;
  const std::vector<std::string>& title_keys() const noexcept { return title_keys_; }
  const std::vector<std::string>& company_keys() const noexcept { return company_keys_; }

  /// Overwrites table rows present in `initial`; returns the number of rows set.
  std::size_t apply_initial_embeddings(const InitialEmbeddings& initial);

  std::vector<ad::Parameter*> all();
  std::vector<const ad::Parameter*> all() const;
  ad::Parameter* find(const std::string& name);
  void zero_grad();

  struct EncoderBlock {
    ad::Parameter ln1_gain, ln1_bias, wq, bq, wk, wv, bv, wo, bo;
    ad::Parameter ln2_gain, ln2_bias, ff1, ff1_bias, ff2, ff2_bias;
  };

  ad::Parameter title_table;
  ad::Parameter company_table;
  ad::Parameter desc_projection;
  ad::Parameter desc_projection_bias;
  ad::Parameter duration_weight;
  ad::Parameter duration_bias;
  std::vector<std::array<ad::Parameter, kRelationCount>> relation;  // [layer][relation]
  ad::Parameter type_table;                                         // one row per node kind
  std::vector<EncoderBlock> encoder;
  ad::Parameter head_weight;  // dim x 1
  ad::Parameter head_bias;    // 1 x 1

  nlohmann::json to_json() const;
  static ModelParams from_json(const nlohmann::json& doc);

 private:
  void index_keys();

  ModelConfig cfg_;
  int description_dim_ = 0;
  std::vector<std::string> title_keys_;    // row i + 1
  std::vector<std::string> company_keys_;  // row i + 1
  std::unordered_map<std::string, std::int32_t> title_rows_;
  std::unordered_map<std::string, std::int32_t> company_rows_;
};

/// Random initialization (deterministic in cfg.seed). The head starts at zero.
void initialize_parameters(ModelParams& params);

// ---------------------------------------------------------------------------

/// A subgraph compiled into the index/sparse structures the forward pass consumes.
struct ModelInput {
  std::string id;
  double label = 0.0;
  int node_count = 0;
  std::vector<std::int32_t> kind_rows;  // node -> EntityKind as type-table row

  // Initial embeddings: rows gathered per kind and placed into node order.
  std::vector<std::int32_t> title_rows, company_rows;
  std::shared_ptr<const kernels::CsrMatrix> place_titles, place_companies, place_descriptions;
  ad::Matrix description_vectors;  // one row per description node

  struct RelationPlan {
    RelationKind kind{};
    std::vector<std::int32_t> edge_src;  // duration relations: source node per edge
    ad::Matrix log_duration;             // duration relations: E x 1
    // Rows = destination nodes with at least one neighbor; columns = nodes (plain) or edges
    // (duration relations). Weights 1/|N_r(v)|.
    std::shared_ptr<const kernels::CsrMatrix> aggregate;
    // N x (destination rows) placement of the aggregated messages.
    std::shared_ptr<const kernels::CsrMatrix> place;
  };
  std::vector<RelationPlan> relations;
};

/// Compiles a subgraph. Title/company nodes resolve to table rows by key (UNK when unseen);
/// description nodes take their stored vectors.
ModelInput prepare_input(const Subgraph& sub, const Vocabularies& vocab, const DescriptionTable& desc,
                         const ModelParams& params, std::string id = {}, double label = 0.0);

struct ForwardOptions {
  bool train = false;  // dropout on
  std::uint64_t dropout_seed = 0;
  // Custom node order for the encoder (a permutation of node indices); identity when empty.
  std::vector<std::int32_t> encoder_order;
};

struct ForwardResult {
  std::vector<ad::Var> layer_states;  // h^(0) .. h^(L), N x dim
  ad::Var encoded;                    // encoder output rows
  ad::Var pooled;                     // z_u, 1 x dim
  ad::Var logit;
  ad::Var probability;                // y_hat
};

ad::Var init_embeddings(ad::Tape& tape, const ModelInput& in, const ModelParams& params);
ad::Var duration_embed(ad::Tape& tape, ad::Var log_duration, const ModelParams& params);
ad::Var message_passing_layer(ad::Tape& tape, const ModelInput& in, ad::Var h, const ModelParams& params, int layer);
/// Type embeddings, self-attention encoder, mean pooling and the sigmoid head.
void encode_and_classify(ad::Tape& tape, const ModelInput& in, ad::Var h, const ModelParams& params,
                         const ForwardOptions& opt, ForwardResult& out);
ForwardResult forward(ad::Tape& tape, const ModelInput& in, const ModelParams& params, const ForwardOptions& opt = {});

/// Mean binary cross-entropy of a batch on one tape.
ad::Var batch_loss(ad::Tape& tape, std::span<const ModelInput> batch, const ModelParams& params,
                   const ForwardOptions& opt = {});

/// Probability for each input with dropout off (parallel over inputs).
std::vector<double> predict_probabilities(std::span<const ModelInput> inputs, const ModelParams& params);

/// Plain BCE on probabilities (clamped), used for reporting.
double bce_value(std::span<const double> probabilities, std::span<const double> labels);

// ---------------------------------------------------------------------------

/// Tracks the best monitored loss; stops after `patience` non-improving observations.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}
  /// Returns true when `loss` is a new best.
  bool observe(double loss);
  bool should_stop() const noexcept { return bad_ >= patience_; }
  double best() const noexcept { return best_; }

 private:
  int patience_;
  int bad_ = 0;
  double best_ = 0.0;
  bool seen_ = false;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_f1 = 0.0;
  double lr = 0.0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  bool early_stopped = false;
};

/// Optional hook replacing the measured validation loss (tests of the stopping rule).
using ValidationOverride = std::function<double(int epoch, double measured)>;

/// Mini-batch Adam with plateau LR decay and early stopping on validation loss. `params`
/// ends holding the best-validation state.
TrainResult train(std::span<const ModelInput> train_set, std::span<const ModelInput> val_set, ModelParams& params,
                  const ValidationOverride& override_val = {});

}  // namespace careerscape

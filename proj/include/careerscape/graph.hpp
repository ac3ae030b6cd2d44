#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "careerscape/corpus.hpp"

namespace careerscape {

/// Edge relations. Each asymmetric forward kind is followed by its generated inverse.
enum class RelationKind : std::uint8_t {
  title_transition = 0,
  title_transition_inv,
  company_transition,
  company_transition_inv,
  desc_similar,  // symmetric, no inverse kind
  worked_at,
  worked_at_inv,
  has_description,
  has_description_inv,
};

inline constexpr int kRelationCount = 9;

inline constexpr std::array<RelationKind, kRelationCount> kAllRelations = {
    RelationKind::title_transition, RelationKind::title_transition_inv,
    RelationKind::company_transition, RelationKind::company_transition_inv,
    RelationKind::desc_similar, RelationKind::worked_at, RelationKind::worked_at_inv,
    RelationKind::has_description, RelationKind::has_description_inv};

inline constexpr int index_of(RelationKind r) { return static_cast<int>(r); }

std::string_view to_string(RelationKind r);
RelationKind relation_from_string(std::string_view name);

bool is_inverse(RelationKind r);
RelationKind inverse_of(RelationKind r);  // identity for desc_similar
EntityKind source_kind(RelationKind r);
EntityKind target_kind(RelationKind r);
/// worked_at and its inverse carry durations.
bool carries_duration(RelationKind r);

/// Which graph layers take part in construction and message passing.
struct LayerSet {
  bool title = true;        // JT: title transitions
  bool company = true;      // C: company transitions
  bool description = true;  // JD: description similarity
  bool cross = true;        // worked_at and has_description

  static LayerSet all() { return {}; }
  static LayerSet parse(std::string_view spec);  // e.g. "JT+C", "All"
  std::string name() const;
  bool allows(RelationKind r) const;
  bool allows(EntityKind k) const;

  friend bool operator==(const LayerSet&, const LayerSet&) = default;
};

/// The seven layer configurations of the layer ablation, in table order.
std::vector<LayerSet> layer_ablation_rows();

struct NodeKey {
  EntityKind kind = EntityKind::title;
  std::int32_t index = 0;

  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
};

struct Edge {
  std::int32_t src = 0;
  std::int32_t dst = 0;
  double duration = 0.0;  // months; worked_at kinds only
  std::int32_t multiplicity = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

using EdgeLists = std::array<std::vector<Edge>, kRelationCount>;

/// Typed node store plus per-relation edge lists. Nodes are ordered by (kind, vocab index).
class HeteroGraph {
 public:
  struct Meta {
    double tau = 0.9;
    std::string built_from;
    std::size_t resume_count = 0;
    LayerSet layers;
    std::vector<std::string> resume_ids;  // every resume that contributed an edge or node
  };

  HeteroGraph() = default;
  HeteroGraph(std::vector<NodeKey> nodes, EdgeLists edges, Meta meta);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const;
  const NodeKey& node(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const std::vector<NodeKey>& nodes() const noexcept { return nodes_; }
  std::optional<std::int32_t> find(const NodeKey& key) const;

  const std::vector<Edge>& edges(RelationKind r) const { return edges_[index_of(r)]; }
  const EdgeLists& edge_lists() const noexcept { return edges_; }
  /// Neighbors over the undirected union of all relations, sorted, deduplicated.
  const std::vector<std::int32_t>& undirected_neighbors(std::int32_t id) const {
    return adjacency_[static_cast<std::size_t>(id)];
  }
  /// Forward edge lookup; nullptr when absent.
  const Edge* find_edge(RelationKind r, std::int32_t src, std::int32_t dst) const;

  const Meta& meta() const noexcept { return meta_; }

  nlohmann::json to_json(const Vocabularies& vocab) const;
  static HeteroGraph from_json(const nlohmann::json& doc, Vocabularies& vocab);

 private:
  std::vector<NodeKey> nodes_;
  std::map<NodeKey, std::int32_t> ids_;
  EdgeLists edges_;
  std::vector<std::vector<std::int32_t>> adjacency_;
  Meta meta_;
};

/// Accumulates nodes and forward edges keyed by NodeKey; merges parallel edges.
class GraphAccumulator {
 public:
  explicit GraphAccumulator(LayerSet layers = LayerSet::all()) : layers_(layers) {}

  void add_node(NodeKey key);
  /// Adds one occurrence of a forward (or desc_similar) edge.
  void add_edge(RelationKind r, NodeKey src, NodeKey dst, double duration = 0.0);
  /// Adds the nodes and intra-resume edges of one resume.
  void add_resume(const Resume& resume, const DescriptionTable& desc);

  /// Node keys in (kind, index) order, and edges with inverses materialized.
  std::pair<std::vector<NodeKey>, EdgeLists> finish() const;

  const std::set<NodeKey>& nodes() const noexcept { return nodes_; }
  LayerSet layers() const noexcept { return layers_; }

 private:
  struct Accum {
    double duration_sum = 0.0;
    std::int32_t count = 0;
  };
  LayerSet layers_;
  std::set<NodeKey> nodes_;
  std::array<std::map<std::pair<NodeKey, NodeKey>, Accum>, kRelationCount> edges_;
};

/// Unordered description-id pairs (a < b) with cosine similarity >= tau.
std::vector<std::pair<std::int32_t, std::int32_t>> description_edges(
    const DescriptionTable& desc, std::span<const std::int32_t> description_ids, double tau);

struct GraphBuildOptions {
  double tau = 0.9;
  LayerSet layers = LayerSet::all();
  // Permits label-1 resumes; only the mixed-graph ablation sets this.
  bool allow_synthetic = false;
  std::string built_from = "training-split genuine resumes";
};

/// Global graph from (by default genuine-only) training resumes.
HeteroGraph build_global_graph(std::span<const Resume> resumes, const DescriptionTable& desc,
                               const GraphBuildOptions& options = {});

// ---------------------------------------------------------------------------

enum class NodeOrigin : std::uint8_t { original, augmented };

struct SubgraphNode {
  NodeKey key;
  NodeOrigin origin = NodeOrigin::original;
  int hop = 0;  // BFS distance from the original nodes in the global graph
};

/// A node/edge subset with local indices. Node order is the encoder input order.
class Subgraph {
 public:
  const HeteroGraph* parent = nullptr;
  std::vector<SubgraphNode> nodes;
  EdgeLists edges;  // local node indices

  std::optional<std::int32_t> find(const NodeKey& key) const;
  std::int32_t add_node(SubgraphNode node);
  std::size_t edge_count() const;
  std::size_t original_count() const;

 private:
  std::map<NodeKey, std::int32_t> index_;
};

/// User subgraph: the resume's own titles, companies and mapped descriptions, with
/// intra-resume transitions, worked_at (entry durations) and has_description edges.
Subgraph build_user_subgraph(const Resume& resume, const DescriptionTable& desc,
                             LayerSet layers = LayerSet::all());

}  // namespace careerscape

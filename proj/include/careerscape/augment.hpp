#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string_view>

#include "careerscape/graph.hpp"

namespace careerscape {

enum class AugmentMode { structural, none, random, mixed };

std::string_view to_string(AugmentMode mode);
AugmentMode augment_mode_from_string(std::string_view name);

struct AugmentConfig {
  AugmentMode mode = AugmentMode::structural;
  int hop_threshold = 2;
  int max_added_nodes = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Multi-source BFS over the undirected view of every relation. Nodes farther than
/// `max_hops` (when non-negative) or unreachable are absent.
std::map<std::int32_t, int> hop_distances(const HeteroGraph& graph, std::span<const std::int32_t> sources,
                                          int max_hops = -1);

/// Expands `sub` with hop-bounded context from `global`. In mixed mode the caller passes a
/// graph built from genuine and synthetic training resumes; the procedure is structural.
Subgraph augment_subgraph(const Subgraph& sub, const HeteroGraph& global, const AugmentConfig& cfg);

}  // namespace careerscape

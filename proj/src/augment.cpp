#include "careerscape/augment.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <random>
#include <set>

#include "careerscape/error.hpp"
#include "careerscape/hashing.hpp"

namespace careerscape {

std::string_view to_string(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::structural: return "structural";
    case AugmentMode::none: return "none";
    case AugmentMode::random: return "random";
    case AugmentMode::mixed: return "mixed";
  }
  return "?";
}

AugmentMode augment_mode_from_string(std::string_view name) {
  for (auto m : {AugmentMode::structural, AugmentMode::none, AugmentMode::random, AugmentMode::mixed})
    if (to_string(m) == name) return m;
  throw UsageError("unknown augmentation mode '" + std::string(name) + "'");
}

void AugmentConfig::validate() const {
  if (hop_threshold < 0) throw UsageError("hop_threshold must be >= 0");
  if (max_added_nodes < 0) throw UsageError("max_added_nodes must be >= 0");
}

std::map<std::int32_t, int> hop_distances(const HeteroGraph& graph, std::span<const std::int32_t> sources,
                                          int max_hops) {
  std::map<std::int32_t, int> dist;
  std::deque<std::int32_t> queue;
  for (auto s : sources)
    if (dist.emplace(s, 0).second) queue.push_back(s);
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    const int d = dist[v];
    if (max_hops >= 0 && d >= max_hops) continue;
    for (auto u : graph.undirected_neighbors(v))
      if (dist.emplace(u, d + 1).second) queue.push_back(u);
  }
  return dist;
}

namespace {

/// Adds the induced global edges among the subgraph's nodes, keeping the subgraph's own
/// edge when both exist.
void add_induced_edges(Subgraph& out, const HeteroGraph& global) {
  std::vector<std::int32_t> local_of(global.node_count(), -1);
  for (std::size_t i = 0; i < out.nodes.size(); ++i)
    if (auto g = global.find(out.nodes[i].key)) local_of[*g] = static_cast<std::int32_t>(i);

  for (auto r : kAllRelations) {
    auto& list = out.edges[index_of(r)];
    std::set<std::pair<std::int32_t, std::int32_t>> present;
    for (const auto& e : list) present.emplace(e.src, e.dst);
    for (const auto& e : global.edges(r)) {
      const auto s = local_of[e.src];
      const auto d = local_of[e.dst];
      if (s < 0 || d < 0 || present.contains({s, d})) continue;
      list.push_back({s, d, e.duration, e.multiplicity});
    }
  }
}

std::vector<std::int32_t> original_global_ids(const Subgraph& sub, const HeteroGraph& global) {
  std::vector<std::int32_t> ids;
  for (const auto& n : sub.nodes)
    if (auto g = global.find(n.key)) ids.push_back(*g);
  return ids;
}

/// Structural candidates, ordered by (hop, kind, vocab index) and capped.
std::vector<std::pair<std::int32_t, int>> structural_additions(const Subgraph& sub, const HeteroGraph& global,
                                                               const AugmentConfig& cfg) {
  const auto sources = original_global_ids(sub, global);
  std::vector<std::pair<std::int32_t, int>> added;
  if (sources.empty()) return added;
  for (auto [node, hop] : hop_distances(global, sources, cfg.hop_threshold))
    if (!sub.find(global.node(node))) added.emplace_back(node, hop);
  std::sort(added.begin(), added.end(), [&](const auto& a, const auto& b) {
    return std::tie(a.second, global.node(a.first)) < std::tie(b.second, global.node(b.first));
  });
  if (added.size() > static_cast<std::size_t>(cfg.max_added_nodes)) added.resize(cfg.max_added_nodes);
  return added;
}

}  // namespace

Subgraph augment_subgraph(const Subgraph& sub, const HeteroGraph& global, const AugmentConfig& cfg) {
  cfg.validate();
  if (cfg.mode == AugmentMode::none) return sub;

  Subgraph out = sub;
  out.parent = &global;
  const auto structural = structural_additions(sub, global, cfg);

  if (cfg.mode == AugmentMode::structural || cfg.mode == AugmentMode::mixed) {
    for (auto [node, hop] : structural) out.add_node({global.node(node), NodeOrigin::augmented, hop});
  } else {
    // Matched-size control: as many nodes as structural would add, drawn uniformly from
    // global nodes absent from the subgraph.
    std::vector<std::int32_t> pool;
    for (std::int32_t g = 0; g < static_cast<std::int32_t>(global.node_count()); ++g)
      if (!sub.find(global.node(g))) pool.push_back(g);
    std::uint64_t key = cfg.seed;
    for (const auto& n : sub.nodes)
      key = derive_seed(key, (static_cast<std::uint64_t>(n.key.kind) << 32) ^ static_cast<std::uint32_t>(n.key.index));
    std::mt19937_64 rng(key);
    const auto take = std::min(structural.size(), pool.size());
    std::vector<std::int32_t> chosen;
    std::sample(pool.begin(), pool.end(), std::back_inserter(chosen), static_cast<std::ptrdiff_t>(take), rng);
    const auto dist = hop_distances(global, original_global_ids(sub, global));
    std::vector<std::pair<int, std::int32_t>> ordered;
    for (auto g : chosen) {
      auto it = dist.find(g);
      ordered.emplace_back(it == dist.end() ? std::numeric_limits<int>::max() : it->second, g);
    }
    std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
      return std::tie(a.first, global.node(a.second)) < std::tie(b.first, global.node(b.second));
    });
    for (auto [hop, g] : ordered) out.add_node({global.node(g), NodeOrigin::augmented, hop});
  }
  add_induced_edges(out, global);
  return out;
}

}  // namespace careerscape

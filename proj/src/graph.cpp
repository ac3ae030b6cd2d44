#include "careerscape/graph.hpp"

#include <algorithm>
#include <cmath>

#include "careerscape/error.hpp"
#include "careerscape/kernels.hpp"

namespace careerscape {

using nlohmann::json;

std::string_view to_string(RelationKind r) {
  switch (r) {
    case RelationKind::title_transition: return "title_transition";
    case RelationKind::title_transition_inv: return "title_transition_inv";
    case RelationKind::company_transition: return "company_transition";
    case RelationKind::company_transition_inv: return "company_transition_inv";
    case RelationKind::desc_similar: return "desc_similar";
    case RelationKind::worked_at: return "worked_at";
    case RelationKind::worked_at_inv: return "worked_at_inv";
    case RelationKind::has_description: return "has_description";
    case RelationKind::has_description_inv: return "has_description_inv";
  }
  return "?";
}

RelationKind relation_from_string(std::string_view name) {
  for (auto r : kAllRelations)
    if (to_string(r) == name) return r;
  throw DataError("unknown relation kind '" + std::string(name) + "'");
}

bool is_inverse(RelationKind r) {
  switch (r) {
    case RelationKind::title_transition_inv:
    case RelationKind::company_transition_inv:
    case RelationKind::worked_at_inv:
    case RelationKind::has_description_inv: return true;
    default: return false;
  }
}

RelationKind inverse_of(RelationKind r) {
  switch (r) {
    case RelationKind::title_transition: return RelationKind::title_transition_inv;
    case RelationKind::title_transition_inv: return RelationKind::title_transition;
    case RelationKind::company_transition: return RelationKind::company_transition_inv;
    case RelationKind::company_transition_inv: return RelationKind::company_transition;
    case RelationKind::desc_similar: return RelationKind::desc_similar;
    case RelationKind::worked_at: return RelationKind::worked_at_inv;
    case RelationKind::worked_at_inv: return RelationKind::worked_at;
    case RelationKind::has_description: return RelationKind::has_description_inv;
    case RelationKind::has_description_inv: return RelationKind::has_description;
  }
  return r;
}

EntityKind source_kind(RelationKind r) {
  switch (r) {
    case RelationKind::title_transition:
    case RelationKind::title_transition_inv:
    case RelationKind::worked_at:
    case RelationKind::has_description: return EntityKind::title;
    case RelationKind::company_transition:
    case RelationKind::company_transition_inv:
    case RelationKind::worked_at_inv: return EntityKind::company;
    case RelationKind::desc_similar:
    case RelationKind::has_description_inv: return EntityKind::description;
  }
  return EntityKind::title;
}

EntityKind target_kind(RelationKind r) {
  return r == RelationKind::desc_similar ? EntityKind::description : source_kind(inverse_of(r));
}

bool carries_duration(RelationKind r) {
  return r == RelationKind::worked_at || r == RelationKind::worked_at_inv;
}

// ---------------------------------------------------------------------------

LayerSet LayerSet::parse(std::string_view spec) {
  if (spec == "All" || spec == "all") return all();
  LayerSet s{false, false, false, false};
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto next = spec.find('+', pos);
    const auto token = spec.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    if (token == "JT") s.title = true;
    else if (token == "C") s.company = true;
    else if (token == "JD") s.description = true;
    else if (token == "X" || token == "Cross") s.cross = true;
    else throw UsageError("unknown graph layer '" + std::string(token) + "'");
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return s;
}

std::string LayerSet::name() const {
  if (title && company && description && cross) return "All";
  std::string out;
  auto add = [&](bool on, const char* n) {
    if (!on) return;
    if (!out.empty()) out += "+";
    out += n;
  };
  add(title, "JT");
  add(company, "C");
  add(description, "JD");
  add(cross, "X");
  return out.empty() ? "none" : out;
}

bool LayerSet::allows(RelationKind r) const {
  switch (r) {
    case RelationKind::title_transition:
    case RelationKind::title_transition_inv: return title;
    case RelationKind::company_transition:
    case RelationKind::company_transition_inv: return company;
    case RelationKind::desc_similar: return description;
    default: return cross;
  }
}

bool LayerSet::allows(EntityKind k) const {
  switch (k) {
    case EntityKind::title: return title || cross;
    case EntityKind::company: return company || cross;
    case EntityKind::description: return description || cross;
  }
  return false;
}

std::vector<LayerSet> layer_ablation_rows() {
  return {
      {true, false, false, false},  // JT
      {false, true, false, false},  // C
      {false, false, true, false},  // JD
      {true, true, false, false},   // JT + C
      {true, false, true, false},   // JT + JD
      {true, true, true, false},    // JT + C + JD
      LayerSet::all(),              // All (intra + cross layers)
  };
}

// ---------------------------------------------------------------------------

HeteroGraph::HeteroGraph(std::vector<NodeKey> nodes, EdgeLists edges, Meta meta)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), meta_(std::move(meta)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (i > 0 && !(nodes_[i - 1] < nodes_[i])) throw DataError("graph nodes must be sorted and unique");
    ids_.emplace(nodes_[i], static_cast<std::int32_t>(i));
  }
  adjacency_.assign(nodes_.size(), {});
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (auto r : kAllRelations) {
    auto& list = edges_[index_of(r)];
    std::sort(list.begin(), list.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
    for (const auto& e : list) {
      if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) throw DataError("edge endpoint out of range");
      if (nodes_[e.src].kind != source_kind(r) || nodes_[e.dst].kind != target_kind(r))
        throw DataError(std::string("edge kind mismatch on ") + std::string(to_string(r)));
      adjacency_[e.src].push_back(e.dst);
      adjacency_[e.dst].push_back(e.src);
    }
  }
  for (auto& a : adjacency_) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
}

std::size_t HeteroGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& l : edges_) n += l.size();
  return n;
}

std::optional<std::int32_t> HeteroGraph::find(const NodeKey& key) const {
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  return std::nullopt;
}

const Edge* HeteroGraph::find_edge(RelationKind r, std::int32_t src, std::int32_t dst) const {
  const auto& list = edges_[index_of(r)];
  auto it = std::lower_bound(list.begin(), list.end(), std::pair{src, dst}, [](const Edge& e, const auto& k) {
    return std::tie(e.src, e.dst) < std::tie(k.first, k.second);
  });
  if (it != list.end() && it->src == src && it->dst == dst) return &*it;
  return nullptr;
}

json HeteroGraph::to_json(const Vocabularies& vocab) const {
  json jn = json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    jn.push_back({{"id", i}, {"kind", to_string(nodes_[i].kind)},
                  {"key", vocab.of(nodes_[i].kind).key(nodes_[i].index)}});
  json je = json::array();
  for (auto r : kAllRelations) {
    if (is_inverse(r)) continue;
    for (const auto& e : edges_[index_of(r)]) {
      if (r == RelationKind::desc_similar && e.src > e.dst) continue;
      json rec = {{"kind", to_string(r)}, {"src", e.src}, {"dst", e.dst}, {"multiplicity", e.multiplicity}};
      if (carries_duration(r)) rec["duration"] = e.duration;
      je.push_back(std::move(rec));
    }
  }
  return {{"nodes", jn},
          {"edges", je},
          {"meta",
           {{"tau", meta_.tau},
            {"built_from", meta_.built_from},
            {"resume_count", meta_.resume_count},
            {"layers", meta_.layers.name()},
            {"resume_ids", meta_.resume_ids}}}};
}

HeteroGraph HeteroGraph::from_json(const json& doc, Vocabularies& vocab) {
  try {
    std::vector<NodeKey> nodes;
    for (const auto& jn : doc.at("nodes")) {
      const auto kind = entity_kind_from_string(jn.at("kind").get<std::string>());
      const auto key = jn.at("key").get<std::string>();
      const auto index = key == Vocabulary::unk_key ? Vocabulary::unk : vocab.of(kind).intern(key);
      if (jn.at("id").get<std::size_t>() != nodes.size()) throw DataError("graph node ids must be dense and ordered");
      nodes.push_back({kind, index});
    }
    // Interning may assign indices in a different order than the writer's vocabulary.
    std::vector<std::int32_t> order(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int32_t>(i);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return nodes[a] < nodes[b]; });
    std::vector<std::int32_t> remap(nodes.size());
    std::vector<NodeKey> sorted(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      remap[order[i]] = static_cast<std::int32_t>(i);
      sorted[i] = nodes[order[i]];
    }

    EdgeLists edges;
    for (const auto& je : doc.at("edges")) {
      const auto r = relation_from_string(je.at("kind").get<std::string>());
      if (is_inverse(r)) throw DataError("serialized graphs hold forward edges only");
      Edge e;
      e.src = remap.at(je.at("src").get<std::size_t>());
      e.dst = remap.at(je.at("dst").get<std::size_t>());
      e.multiplicity = je.value("multiplicity", 1);
      e.duration = je.value("duration", 0.0);
      edges[index_of(r)].push_back(e);
      edges[index_of(inverse_of(r))].push_back({e.dst, e.src, e.duration, e.multiplicity});
    }
    const auto& jm = doc.at("meta");
    Meta meta;
    meta.tau = jm.at("tau").get<double>();
    meta.built_from = jm.value("built_from", std::string());
    meta.resume_count = jm.value("resume_count", std::size_t{0});
    meta.layers = LayerSet::parse(jm.value("layers", std::string("All")));
    meta.resume_ids = jm.value("resume_ids", std::vector<std::string>{});
    return HeteroGraph(std::move(sorted), std::move(edges), std::move(meta));
  } catch (const json::exception& e) {
    throw DataError(std::string("graph document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

void GraphAccumulator::add_node(NodeKey key) {
  if (layers_.allows(key.kind)) nodes_.insert(key);
}

void GraphAccumulator::add_edge(RelationKind r, NodeKey src, NodeKey dst, double duration) {
  if (is_inverse(r)) throw DataError("inverse edges are generated, not added");
  if (!layers_.allows(r)) return;
  if (src.kind != source_kind(r) || dst.kind != target_kind(r))
    throw DataError(std::string("node kinds do not match relation ") + std::string(to_string(r)));
  if (src == dst) return;  // no self-loops
  if (carries_duration(r) && !(std::isfinite(duration) && duration >= 1.0))
    throw DataError("worked_at duration must be finite and >= 1");
  nodes_.insert(src);
  nodes_.insert(dst);
  auto& acc = edges_[index_of(r)][{src, dst}];
  acc.duration_sum += duration;
  ++acc.count;
}

void GraphAccumulator::add_resume(const Resume& resume, const DescriptionTable& desc) {
  for (std::size_t i = 0; i < resume.entries.size(); ++i) {
    const auto& e = resume.entries[i];
    const NodeKey title{EntityKind::title, e.title_id};
    const NodeKey company{EntityKind::company, e.company_id};
    add_node(title);
    add_node(company);
    const auto d = desc.description_of(e.title_id);
    if (d >= 0) {
      const NodeKey dnode{EntityKind::description, d};
      add_node(dnode);
      if (layers_.cross && !edges_[index_of(RelationKind::has_description)].contains({title, dnode}))
        add_edge(RelationKind::has_description, title, dnode);
    }
    add_edge(RelationKind::worked_at, title, company, static_cast<double>(e.duration_months));
    if (i > 0) {
      const auto& p = resume.entries[i - 1];
      add_edge(RelationKind::title_transition, {EntityKind::title, p.title_id}, title);
      add_edge(RelationKind::company_transition, {EntityKind::company, p.company_id}, company);
    }
  }
}

std::pair<std::vector<NodeKey>, EdgeLists> GraphAccumulator::finish() const {
  std::vector<NodeKey> nodes(nodes_.begin(), nodes_.end());
  std::map<NodeKey, std::int32_t> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) ids.emplace(nodes[i], static_cast<std::int32_t>(i));
  EdgeLists edges;
  for (auto r : kAllRelations) {
    for (const auto& [ends, acc] : edges_[index_of(r)]) {
      Edge e{ids.at(ends.first), ids.at(ends.second), 0.0, acc.count};
      if (carries_duration(r)) e.duration = acc.duration_sum / acc.count;
      edges[index_of(r)].push_back(e);
      if (r != RelationKind::desc_similar)
        edges[index_of(inverse_of(r))].push_back({e.dst, e.src, e.duration, e.multiplicity});
    }
  }
  return {std::move(nodes), std::move(edges)};
}

std::vector<std::pair<std::int32_t, std::int32_t>> description_edges(
    const DescriptionTable& desc, std::span<const std::int32_t> description_ids, double tau) {
  const int dim = desc.dim();
  std::vector<double> rows;
  rows.reserve(description_ids.size() * static_cast<std::size_t>(dim));
  for (auto id : description_ids) {
    const auto& v = desc.vector(id);
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (!(norm2 > 0.0)) throw DataError("description '" + desc.text(id) + "' has a zero vector");
    rows.insert(rows.end(), v.begin(), v.end());
  }
  auto pairs = kernels::cosine_pairs(rows, dim, tau);
  for (auto& [a, b] : pairs) {
    a = description_ids[a];
    b = description_ids[b];
    if (a > b) std::swap(a, b);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

HeteroGraph build_global_graph(std::span<const Resume> resumes, const DescriptionTable& desc,
                               const GraphBuildOptions& options) {
  GraphAccumulator acc(options.layers);
  HeteroGraph::Meta meta;
  meta.tau = options.tau;
  meta.built_from = options.built_from;
  meta.layers = options.layers;
  for (const auto& r : resumes) {
    if (r.label != 0 && !options.allow_synthetic)
      throw DataError("synthetic resume '" + r.id + "' passed to the trusted global graph builder");
    acc.add_resume(r, desc);
    meta.resume_ids.push_back(r.id);
  }
  meta.resume_count = resumes.size();

  if (options.layers.description) {
    std::vector<std::int32_t> dids;
    for (const auto& k : acc.nodes())
      if (k.kind == EntityKind::description) dids.push_back(k.index);
    for (auto [a, b] : description_edges(desc, dids, options.tau)) {
      acc.add_edge(RelationKind::desc_similar, {EntityKind::description, a}, {EntityKind::description, b});
      acc.add_edge(RelationKind::desc_similar, {EntityKind::description, b}, {EntityKind::description, a});
    }
  }
  auto [nodes, edges] = acc.finish();
  return HeteroGraph(std::move(nodes), std::move(edges), std::move(meta));
}

// ---------------------------------------------------------------------------

std::optional<std::int32_t> Subgraph::find(const NodeKey& key) const {
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  return std::nullopt;
}

std::int32_t Subgraph::add_node(SubgraphNode node) {
  if (auto it = index_.find(node.key); it != index_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(nodes.size());
  index_.emplace(node.key, id);
  nodes.push_back(node);
  return id;
}

std::size_t Subgraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& l : edges) n += l.size();
  return n;
}

std::size_t Subgraph::original_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const SubgraphNode& n) {
    return n.origin == NodeOrigin::original;
  }));
}

Subgraph build_user_subgraph(const Resume& resume, const DescriptionTable& desc, LayerSet layers) {
  if (resume.entries.empty()) throw DataError("resume '" + resume.id + "' has no entries");
  Subgraph sub;
  for (const auto& e : resume.entries) {
    if (layers.allows(EntityKind::title)) sub.add_node({{EntityKind::title, e.title_id}});
    if (layers.allows(EntityKind::company)) sub.add_node({{EntityKind::company, e.company_id}});
    if (const auto d = desc.description_of(e.title_id); d >= 0 && layers.allows(EntityKind::description))
      sub.add_node({{EntityKind::description, d}});
  }
  // Edges via the same accumulator as the global graph, then mapped to local indices.
  GraphAccumulator acc(layers);
  acc.add_resume(resume, desc);
  auto [keys, edges] = acc.finish();
  for (auto r : kAllRelations) {
    for (const auto& e : edges[index_of(r)]) {
      const auto src = sub.find(keys[e.src]);
      const auto dst = sub.find(keys[e.dst]);
      if (!src || !dst) throw DataError("subgraph edge endpoint missing");
      sub.edges[index_of(r)].push_back({*src, *dst, e.duration, e.multiplicity});
    }
  }
  return sub;
}

}  // namespace careerscape

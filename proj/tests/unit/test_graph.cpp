#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "careerscape/error.hpp"
#include "careerscape/graph.hpp"
#include "unit/oracles.hpp"

using namespace careerscape;
using oracle::make_resume;

namespace {

/// Mapping where every title gets its own description and a fallback vector.
DescriptionTable describe(Vocabularies& v, int dim = 16) {
  DescriptionMapping m;
  m.records.emplace_back(std::string(kDefaultMappingKey), "Role of {title}");
  return attach_descriptions(v, m, nullptr, dim);
}

std::vector<Resume> random_corpus(Vocabularies& v, std::mt19937_64& rng, int resumes, int titles, int companies) {
  std::vector<Resume> rs;
  for (int i = 0; i < resumes; ++i) {
    std::vector<oracle::EntrySpec> es;
    const int k = 1 + static_cast<int>(rng() % 4);
    for (int j = 0; j < k; ++j)
      es.push_back({"t" + std::to_string(rng() % titles), "c" + std::to_string(rng() % companies),
                    1 + static_cast<int>(rng() % 60)});
    rs.push_back(make_resume(v, "r" + std::to_string(i), 0, es));
  }
  return rs;
}

bool has_edge(const HeteroGraph& g, RelationKind r, NodeKey a, NodeKey b) {
  const auto s = g.find(a), d = g.find(b);
  return s && d && g.find_edge(r, *s, *d) != nullptr;
}

NodeKey title(Vocabularies& v, const std::string& s) { return {EntityKind::title, *v.titles.find(s)}; }
NodeKey company(Vocabularies& v, const std::string& s) { return {EntityKind::company, *v.companies.find(s)}; }

}  // namespace

TEST_CASE("relation kinds and layer sets") {
  for (auto r : kAllRelations) {
    CHECK(relation_from_string(to_string(r)) == r);
    CHECK(inverse_of(inverse_of(r)) == r);
    CHECK(source_kind(inverse_of(r)) == target_kind(r));
    if (r != RelationKind::desc_similar) CHECK(is_inverse(r) != is_inverse(inverse_of(r)));
  }
  CHECK(LayerSet::parse("All") == LayerSet::all());
  CHECK(LayerSet::parse("JT+C").name() == "JT+C");
  CHECK(LayerSet::parse("JT+C+JD") == LayerSet{true, true, true, false});
  CHECK(layer_ablation_rows().size() == 7);
  CHECK(layer_ablation_rows().back() == LayerSet::all());
  CHECK_THROWS(LayerSet::parse("XY"));
}

TEST_CASE("one two-job resume gives the hand-built edge set") {
  Vocabularies v;
  std::vector<Resume> rs = {make_resume(v, "u", 0, {{"A", "X", 12}, {"B", "Y", 24}})};
  const auto desc = describe(v);
  const auto g = build_global_graph(rs, desc);
  const auto A = title(v, "A"), B = title(v, "B"), X = company(v, "X"), Y = company(v, "Y");
  CHECK(g.node_count() == 6);
  CHECK(has_edge(g, RelationKind::title_transition, A, B));
  CHECK(has_edge(g, RelationKind::title_transition_inv, B, A));
  CHECK(has_edge(g, RelationKind::company_transition, X, Y));
  CHECK(has_edge(g, RelationKind::company_transition_inv, Y, X));
  CHECK(g.find_edge(RelationKind::worked_at, *g.find(A), *g.find(X))->duration == 12.0);
  CHECK(g.find_edge(RelationKind::worked_at_inv, *g.find(Y), *g.find(B))->duration == 24.0);
  CHECK(g.edges(RelationKind::has_description).size() == 2);
  CHECK(g.edges(RelationKind::has_description_inv).size() == 2);
  CHECK(g.edges(RelationKind::worked_at).size() == 2);
  CHECK_FALSE(has_edge(g, RelationKind::title_transition, B, A));
}

TEST_CASE("shared titles union their employers and parallel edges merge") {
  Vocabularies v;
  std::vector<Resume> rs = {make_resume(v, "1", 0, {{"A", "X", 10}}), make_resume(v, "2", 0, {{"A", "Y", 20}}),
                            make_resume(v, "3", 0, {{"A", "X", 30}})};
  const auto desc = describe(v);
  const auto g = build_global_graph(rs, desc);
  const auto A = *g.find(title(v, "A"));
  int employers = 0;
  for (const auto& e : g.edges(RelationKind::worked_at))
    if (e.src == A) ++employers;
  CHECK(employers == 2);
  const auto* ax = g.find_edge(RelationKind::worked_at, A, *g.find(company(v, "X")));
  REQUIRE(ax);
  CHECK(ax->multiplicity == 2);
  CHECK(ax->duration == 20.0);
}

TEST_CASE("synthetic resumes are refused unless allowed") {
  Vocabularies v;
  std::vector<Resume> rs = {make_resume(v, "g", 0, {{"A", "X"}}), make_resume(v, "f", 1, {{"B", "Y"}})};
  const auto desc = describe(v);
  CHECK_THROWS_AS(build_global_graph(rs, desc), DataError);
  GraphBuildOptions o;
  o.allow_synthetic = true;
  CHECK(build_global_graph(rs, desc, o).meta().resume_ids.size() == 2);
}

TEST_CASE("consecutive repeats are not self-loops") {
  Vocabularies v;
  std::vector<Resume> rs = {make_resume(v, "1", 0, {{"A", "X"}, {"A", "X"}, {"B", "X"}})};
  const auto desc = describe(v);
  const auto g = build_global_graph(rs, desc);
  for (auto r : kAllRelations)
    for (const auto& e : g.edges(r)) CHECK(e.src != e.dst);
  CHECK(g.edges(RelationKind::title_transition).size() == 1);
  CHECK(g.edges(RelationKind::company_transition).empty());
}

TEST_CASE("toy corpora match the brute-force enumerator") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    Vocabularies v;
    const auto rs = random_corpus(v, rng, 5, 6, 5);
    const auto desc = describe(v, 3);  // low dimension so some descriptions clear tau
    for (const auto& layers : layer_ablation_rows()) {
      GraphBuildOptions o;
      o.tau = 0.5;
      o.layers = layers;
      const auto got = oracle::graph_sets(build_global_graph(rs, desc, o));
      const auto want = oracle::brute_force_graph(rs, desc, o.tau, layers);
      CHECK(got.nodes == want.nodes);
      REQUIRE(got.edges.size() == want.edges.size());
      auto a = got.edges.begin();
      for (const auto& e : want.edges) {
        CHECK(a->relation == e.relation);
        CHECK(a->src == e.src);
        CHECK(a->dst == e.dst);
        CHECK(a->multiplicity == e.multiplicity);
        CHECK(a->duration == doctest::Approx(e.duration));
        ++a;
      }
    }
  }
}

TEST_CASE("graph invariants hold on random corpora") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Vocabularies v;
    const auto rs = random_corpus(v, rng, 30, 12, 10);
    const auto desc = describe(v, 3);
    GraphBuildOptions o;
    o.tau = 0.6;
    const auto g = build_global_graph(rs, desc, o);
    for (auto r : kAllRelations)
      for (const auto& e : g.edges(r)) {
        CHECK(g.node(e.src).kind == source_kind(r));
        CHECK(g.node(e.dst).kind == target_kind(r));
        if (carries_duration(r)) CHECK(e.duration >= 1.0);
        if (r == RelationKind::desc_similar) CHECK(g.find_edge(r, e.dst, e.src) != nullptr);
      }
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(g.node_count()); ++i) {
      if (g.node(i).kind != EntityKind::title) continue;
      int n = 0;
      for (const auto& e : g.edges(RelationKind::has_description)) n += e.src == i;
      CHECK(n == 1);
    }
    // Node order is (kind, vocab index).
    for (std::size_t i = 1; i < g.node_count(); ++i) CHECK(g.nodes()[i - 1] < g.nodes()[i]);
  }
}

TEST_CASE("graph content depends only on the resumes, not on their order") {
  std::mt19937_64 rng(3);
  Vocabularies v;
  auto rs = random_corpus(v, rng, 20, 8, 8);
  const auto desc = describe(v);
  const auto a = build_global_graph(rs, desc).to_json(v);
  std::shuffle(rs.begin(), rs.end(), rng);
  auto b = build_global_graph(rs, desc).to_json(v);
  b["meta"]["resume_ids"] = a["meta"]["resume_ids"];
  CHECK(a == b);
}

TEST_CASE("description edges follow cosine similarity") {
  Vocabularies v;
  v.titles.intern("P");
  v.titles.intern("Q");
  v.titles.intern("R");
  DescriptionMapping m;
  m.records = {{"P", "p"}, {"Q", "q"}, {"R", "r"}};
  std::map<std::string, std::vector<double>> vec = {{"P", {1, 0}}, {"Q", {1, 0}}, {"R", {0, 1}}};
  const auto desc = attach_descriptions(v, m, &vec);
  const auto ids = desc.description_ids();
  const auto edges = description_edges(desc, ids, 0.9);
  REQUIRE(edges.size() == 1);
  CHECK(desc.text(edges[0].first) == "p");
  CHECK(desc.text(edges[0].second) == "q");

  std::map<std::string, std::vector<double>> zero = {{"P", {0, 0}}, {"Q", {1, 0}}, {"R", {0, 1}}};
  Vocabularies v2 = v;
  const auto bad = attach_descriptions(v2, m, &zero);
  CHECK_THROWS_AS(description_edges(bad, bad.description_ids(), 0.9), Error);
}

TEST_CASE("description edges on random unit vectors match the pairwise oracle") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    Vocabularies v;
    DescriptionMapping m;
    std::map<std::string, std::vector<double>> vec;
    for (int i = 0; i < 20; ++i) {
      const auto t = "t" + std::to_string(i);
      v.titles.intern(t);
      m.records.emplace_back(t, "d" + std::to_string(i));
      std::vector<double> x(3);
      double n = 0.0;
      for (auto& c : x) {
        c = nd(rng);
        n += c * c;
      }
      for (auto& c : x) c /= std::sqrt(n);
      vec[t] = x;
    }
    const auto desc = attach_descriptions(v, m, &vec);
    const auto ids = desc.description_ids();
    std::set<std::pair<std::int32_t, std::int32_t>> want;
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j)
        if (oracle::cosine(desc.vector(ids[i]), desc.vector(ids[j])) >= 0.9) want.emplace(ids[i], ids[j]);
    const auto got = description_edges(desc, ids, 0.9);
    CHECK(std::set<std::pair<std::int32_t, std::int32_t>>(got.begin(), got.end()) == want);
  }
}

TEST_CASE("user subgraphs") {
  Vocabularies v;
  SUBCASE("one entry") {
    const auto r = make_resume(v, "u", 0, {{"A", "X", 3}});
    const auto desc = describe(v);
    const auto s = build_user_subgraph(r, desc);
    CHECK(s.nodes.size() == 3);
    CHECK(s.original_count() == 3);
    CHECK(s.edges[index_of(RelationKind::worked_at)].size() == 1);
    CHECK(s.edges[index_of(RelationKind::has_description)].size() == 1);
    CHECK(s.edge_count() == 4);
    CHECK(s.edges[index_of(RelationKind::title_transition)].empty());
  }
  SUBCASE("a chain of distinct entities") {
    const auto r = make_resume(v, "u", 0, {{"A", "X"}, {"B", "Y"}, {"C", "Z"}, {"D", "W"}});
    const auto desc = describe(v);
    const auto s = build_user_subgraph(r, desc);
    CHECK(s.edges[index_of(RelationKind::title_transition)].size() == 3);
    CHECK(s.edges[index_of(RelationKind::company_transition)].size() == 3);
    CHECK(s.edges[index_of(RelationKind::desc_similar)].empty());
  }
  SUBCASE("a returning company") {
    const auto r = make_resume(v, "u", 0, {{"A", "X"}, {"B", "Y"}, {"C", "X"}});
    const auto desc = describe(v);
    const auto s = build_user_subgraph(r, desc);
    const auto& ct = s.edges[index_of(RelationKind::company_transition)];
    REQUIRE(ct.size() == 2);
    const auto x = *s.find(company(v, "X")), y = *s.find(company(v, "Y"));
    CHECK(((ct[0].src == x && ct[0].dst == y) || (ct[1].src == x && ct[1].dst == y)));
    CHECK(((ct[0].src == y && ct[0].dst == x) || (ct[1].src == y && ct[1].dst == x)));
  }
  SUBCASE("edge endpoints stay inside the node set") {
    std::mt19937_64 rng(2);
    const auto rs = random_corpus(v, rng, 20, 5, 5);
    const auto desc = describe(v);
    for (const auto& r : rs) {
      const auto s = build_user_subgraph(r, desc);
      for (const auto& list : s.edges)
        for (const auto& e : list) {
          CHECK(e.src < static_cast<std::int32_t>(s.nodes.size()));
          CHECK(e.dst < static_cast<std::int32_t>(s.nodes.size()));
        }
      for (const auto& n : s.nodes) CHECK(n.origin == NodeOrigin::original);
    }
  }
  SUBCASE("empty resume") {
    Resume r;
    r.id = "e";
    const auto desc = describe(v);
    CHECK_THROWS_AS(build_user_subgraph(r, desc), DataError);
  }
}

TEST_CASE("graph JSON round trip") {
  std::mt19937_64 rng(9);
  Vocabularies v;
  const auto rs = random_corpus(v, rng, 15, 6, 6);
  const auto desc = describe(v);
  const auto g = build_global_graph(rs, desc);
  const auto doc = g.to_json(v);
  CHECK(doc["meta"]["tau"] == 0.9);
  CHECK(doc["meta"]["resume_count"] == 15);
  Vocabularies fresh;
  const auto back = HeteroGraph::from_json(doc, fresh);
  CHECK(oracle::graph_sets(back).edges.size() == oracle::graph_sets(g).edges.size());
  CHECK(back.to_json(fresh) == doc);
}

TEST_CASE("an exported embedding file loads as unit vectors and yields the dot-product edge set") {
  // Written the way the exporter writes it: one {"key", "vector"} record per title.
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  constexpr int dim = 8, titles = 12;
  std::vector<std::vector<double>> centers(3, std::vector<double>(dim));
  for (auto& c : centers)
    for (auto& x : c) x = nd(rng);
  const auto path = std::filesystem::temp_directory_path() / "careerscape_export_roundtrip.jsonl";
  {
    std::ofstream out(path);
    for (int t = 0; t < titles; ++t) {
      std::vector<double> v(dim);
      double n = 0.0;
      for (int k = 0; k < dim; ++k) n += (v[k] = centers[t % 3][k] + 0.15 * nd(rng)) * v[k];
      for (auto& x : v) x /= std::sqrt(n);
      out << nlohmann::json{{"key", "t" + std::to_string(t)}, {"vector", v}}.dump() << "\n";
    }
  }
  const auto loaded = load_embedding_file(path);
  std::filesystem::remove(path);
  REQUIRE(loaded.size() == titles);

  Vocabularies v;
  std::vector<Resume> rs;
  for (int t = 0; t < titles; ++t) rs.push_back(make_resume(v, "r" + std::to_string(t), 0, {{"t" + std::to_string(t), "c"}}));
  DescriptionMapping m;
  m.records.emplace_back(std::string(kDefaultMappingKey), "About {title}");
  const auto desc = attach_descriptions(v, m, &loaded);
  CHECK(desc.dim() == dim);
  for (auto id : desc.description_ids()) {
    double n = 0.0;
    for (double x : desc.vector(id)) n += x * x;
    CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-6);
  }

  GraphBuildOptions o;
  o.tau = 0.9;
  o.layers = {false, false, true, false};
  const auto g = build_global_graph(rs, desc, o);
  std::set<std::pair<NodeKey, NodeKey>> got, want;
  for (const auto& e : g.edges(RelationKind::desc_similar)) got.emplace(g.node(e.src), g.node(e.dst));
  const auto ids = desc.description_ids();
  for (auto a : ids)
    for (auto b : ids) {
      if (a == b) continue;
      double dot = 0.0;
      for (int k = 0; k < dim; ++k) dot += desc.vector(a)[k] * desc.vector(b)[k];
      REQUIRE(std::abs(dot - o.tau) > 1e-6);  // no pair sits on the threshold
      if (dot >= o.tau) want.emplace(NodeKey{EntityKind::description, a}, NodeKey{EntityKind::description, b});
    }
  CHECK_FALSE(want.empty());
  CHECK(got == want);
}

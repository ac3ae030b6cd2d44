#include "careerscape/config.hpp"

#include <cstdio>
#include <fstream>

#include "careerscape/error.hpp"
#include "careerscape/hashing.hpp"

namespace careerscape {

using nlohmann::json;

namespace {

void reject_unknown(const json& doc, const json& known, const std::string& where) {
  if (!doc.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!known.contains(key)) throw UsageError("unknown key '" + key + "' in " + where);
}

json generator_to_json(const GeneratorConfig& g) {
  json j = {{"method", to_string(g.method)},
            {"count", g.count},
            {"seed", g.seed},
            {"popular_top_fraction", g.popular_top_fraction},
            {"n_swaps", g.n_swaps},
            {"id_prefix", g.id_prefix},
            {"lognormal_mu", nullptr},
            {"lognormal_sigma", nullptr}};
  if (g.lognormal_mu) j["lognormal_mu"] = *g.lognormal_mu;
  if (g.lognormal_sigma) j["lognormal_sigma"] = *g.lognormal_sigma;
  return j;
}

GeneratorConfig generator_from_json(const json& doc) {
  GeneratorConfig g;
  reject_unknown(doc, generator_to_json(g), "generator");
  g.method = generator_method_from_string(doc.value("method", std::string(to_string(g.method))));
  g.count = doc.value("count", g.count);
  g.seed = doc.value("seed", g.seed);
  g.popular_top_fraction = doc.value("popular_top_fraction", g.popular_top_fraction);
  g.n_swaps = doc.value("n_swaps", g.n_swaps);
  g.id_prefix = doc.value("id_prefix", g.id_prefix);
  if (doc.contains("lognormal_mu") && !doc["lognormal_mu"].is_null()) g.lognormal_mu = doc["lognormal_mu"].get<double>();
  if (doc.contains("lognormal_sigma") && !doc["lognormal_sigma"].is_null())
    g.lognormal_sigma = doc["lognormal_sigma"].get<double>();
  return g;
}

json augment_to_json(const AugmentConfig& a) {
  return {{"mode", to_string(a.mode)},
          {"hop_threshold", a.hop_threshold},
          {"max_added_nodes", a.max_added_nodes},
          {"seed", a.seed}};
}

AugmentConfig augment_from_json(const json& doc) {
  AugmentConfig a;
  reject_unknown(doc, augment_to_json(a), "augment");
  a.mode = augment_mode_from_string(doc.value("mode", std::string(to_string(a.mode))));
  a.hop_threshold = doc.value("hop_threshold", a.hop_threshold);
  a.max_added_nodes = doc.value("max_added_nodes", a.max_added_nodes);
  a.seed = doc.value("seed", a.seed);
  return a;
}

json corpus_to_json(const CorpusSettings& c) {
  return {{"real", c.real},
          {"fakes", c.fakes},
          {"desc_map", c.desc_map},
          {"embeddings", c.embeddings},
          {"schema", c.schema},
          {"fallback_dim", c.fallback_dim},
          {"min_company_occurrences", c.min_company_occurrences},
          {"initial_embeddings", c.initial_embeddings}};
}

CorpusSettings corpus_from_json(const json& doc) {
  CorpusSettings c;
  reject_unknown(doc, corpus_to_json(c), "corpus");
  c.real = doc.value("real", c.real);
  c.fakes = doc.value("fakes", c.fakes);
  c.desc_map = doc.value("desc_map", c.desc_map);
  c.embeddings = doc.value("embeddings", c.embeddings);
  c.schema = doc.value("schema", c.schema);
  c.fallback_dim = doc.value("fallback_dim", c.fallback_dim);
  c.min_company_occurrences = doc.value("min_company_occurrences", c.min_company_occurrences);
  c.initial_embeddings = doc.value("initial_embeddings", c.initial_embeddings);
  return c;
}

json experiment_to_json(const ExperimentSettings& e) { return {{"seeds", e.seeds}, {"combined", e.combined}}; }

ExperimentSettings experiment_from_json(const json& doc) {
  ExperimentSettings e;
  reject_unknown(doc, experiment_to_json(e), "experiment");
  e.seeds = doc.value("seeds", e.seeds);
  e.combined = doc.value("combined", e.combined);
  return e;
}

}  // namespace

void RunConfig::validate() const {
  if (!(tau >= -1.0 && tau <= 1.0)) throw UsageError("tau must be in [-1, 1]");
  LayerSet::parse(layers);
  augment.validate();
  model.validate();
  split.validate();
  if (corpus.fallback_dim < 2) throw UsageError("fallback_dim must be >= 2");
  if (corpus.min_company_occurrences < 1) throw UsageError("min_company_occurrences must be >= 1");
  if (experiment.seeds.empty()) throw UsageError("experiment needs at least one seed");
}

json RunConfig::to_json() const {
  return {{"corpus", corpus_to_json(corpus)},
          {"generator", generator_to_json(generator)},
          {"tau", tau},
          {"layers", layers},
          {"augment", augment_to_json(augment)},
          {"model", model.to_json()},
          {"split", split.to_json()},
          {"experiment", experiment_to_json(experiment)},
          {"output_dir", output_dir}};
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig c;
  reject_unknown(doc, c.to_json(), "run config");
  try {
    if (doc.contains("corpus")) c.corpus = corpus_from_json(doc["corpus"]);
    if (doc.contains("generator")) c.generator = generator_from_json(doc["generator"]);
    c.tau = doc.value("tau", c.tau);
    c.layers = doc.value("layers", c.layers);
    if (doc.contains("augment")) c.augment = augment_from_json(doc["augment"]);
    if (doc.contains("model")) c.model = ModelConfig::from_json(doc["model"]);
    if (doc.contains("split")) c.split = SplitSpec::from_json(doc["split"]);
    if (doc.contains("experiment")) c.experiment = experiment_from_json(doc["experiment"]);
    c.output_dir = doc.value("output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw UsageError(std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

std::string RunConfig::hash() const {
  // The output location does not change results, so it stays out of the hash.
  auto doc = to_json();
  doc.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(doc.dump())));
  return buf;
}

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.model = model;
  p.augment = augment;
  p.tau = tau;
  p.layers = LayerSet::parse(layers);
  return p;
}

}  // namespace careerscape

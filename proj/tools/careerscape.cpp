#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "careerscape/checkpoint.hpp"
#include "careerscape/config.hpp"
#include "careerscape/error.hpp"
#include "careerscape/eval.hpp"
#include "careerscape/generators.hpp"
#include "careerscape/graph.hpp"
#include "careerscape/runtime.hpp"
#include "careerscape/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace careerscape;

namespace {

constexpr std::string_view kIdentityTemplate = "Role: {title}";

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<Resume> load_genuine(const std::string& path, Vocabularies& vocab) {
  auto resumes = load_resumes(path, vocab);
  for (const auto& r : resumes)
    if (r.label != 0) throw DataError(path + ": resume '" + r.id + "' is labeled synthetic; genuine corpus expected");
  return resumes;
}

DescriptionMapping mapping_for(const CorpusSettings& c) {
  if (!c.desc_map.empty()) return load_description_mapping(c.desc_map);
  DescriptionMapping m;
  if (!c.schema.empty()) m = CareerSchema::load(c.schema).description_mapping();
  m.records.emplace_back(std::string(kDefaultMappingKey), std::string(kIdentityTemplate));
  return m;
}

/// Every input a pipeline run needs, loaded once.
struct LoadedData {
  DatasetContext ctx;
  std::vector<Resume> real;
  std::vector<std::pair<std::string, std::vector<Resume>>> fakes;
  DescriptionMapping mapping;
  std::optional<std::map<std::string, std::vector<double>>> vectors;
  std::optional<InitialEmbeddings> initial;
};

LoadedData load_data(const RunConfig& cfg) {
  if (cfg.corpus.real.empty()) throw UsageError("no genuine corpus: set corpus.real or --real");
  LoadedData d;
  d.real = load_genuine(cfg.corpus.real, d.ctx.vocab);
  if (cfg.corpus.min_company_occurrences > 1)
    d.real = filter_by_company_frequency(d.real, cfg.corpus.min_company_occurrences);
  if (d.real.empty()) throw DataError("genuine corpus is empty after filtering");
  for (const auto& [name, path] : cfg.corpus.fakes) d.fakes.emplace_back(name, ingest_external(path, name, d.ctx.vocab));

  std::set<std::string> ids;
  auto check_ids = [&](const std::vector<Resume>& rs) {
    for (const auto& r : rs)
      if (!ids.insert(r.id).second) throw DataError("duplicate resume id '" + r.id + "' across input files");
  };
  check_ids(d.real);
  for (const auto& [name, rs] : d.fakes) check_ids(rs);

  d.mapping = mapping_for(cfg.corpus);
  if (!cfg.corpus.embeddings.empty()) d.vectors = load_embedding_file(cfg.corpus.embeddings);
  d.ctx.desc = attach_descriptions(d.ctx.vocab, d.mapping, d.vectors ? &*d.vectors : nullptr, cfg.corpus.fallback_dim);
  if (!cfg.corpus.initial_embeddings.empty()) d.initial = load_embedding_file(cfg.corpus.initial_embeddings);
  return d;
}

std::vector<Resume> concat(const std::vector<Resume>& a, const std::vector<Resume>& b) {
  std::vector<Resume> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

/// Run-config flags shared by train, ablate and experiment. Unset flags leave the file value.
struct Overrides {
  std::string config;
  std::optional<std::string> real, desc_map, embeddings, schema, initial_embeddings, out_dir, mode, layers;
  std::vector<std::string> fakes;  // name=path
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<int> epochs, dim, hops, cap;
  std::optional<double> tau, dropout, lr;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Run config JSON")->check(CLI::ExistingFile);
    app->add_option("--real", real, "Genuine resume file");
    app->add_option("--fake", fakes, "Synthetic source as NAME=PATH (repeatable)");
    app->add_option("--desc-map", desc_map, "Title -> description mapping file");
    app->add_option("--embeddings", embeddings, "Description embedding file");
    app->add_option("--schema", schema, "Career schema supplying descriptions");
    app->add_option("--initial-embeddings", initial_embeddings, "Title/company rows for the global-emb cell");
    app->add_option("--out-dir", out_dir, "Output directory");
    app->add_option("--seed", seed, "Single seed (replaces the seed list)");
    app->add_option("--seeds", seeds, "Seed list")->delimiter(',');
    app->add_option("--epochs", epochs, "Maximum epochs");
    app->add_option("--dim", dim, "Embedding size");
    app->add_option("--dropout", dropout, "Dropout rate");
    app->add_option("--lr", lr, "Learning rate");
    app->add_option("--mode", mode, "Augmentation mode: structural|none|random|mixed");
    app->add_option("--hops", hops, "Augmentation hop threshold");
    app->add_option("--max-added-nodes", cap, "Augmentation node cap");
    app->add_option("--layers", layers, "Layer set, e.g. All or JT+C");
    app->add_option("--tau", tau, "Description similarity threshold");
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : RunConfig::load(config);
    if (real) c.corpus.real = *real;
    if (!fakes.empty()) {
      c.corpus.fakes.clear();
      for (const auto& f : fakes) {
        const auto eq = f.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == f.size())
          throw UsageError("--fake expects NAME=PATH, got '" + f + "'");
        c.corpus.fakes[f.substr(0, eq)] = f.substr(eq + 1);
      }
    }
    if (desc_map) c.corpus.desc_map = *desc_map;
    if (embeddings) c.corpus.embeddings = *embeddings;
    if (schema) c.corpus.schema = *schema;
    if (initial_embeddings) c.corpus.initial_embeddings = *initial_embeddings;
    if (out_dir) c.output_dir = *out_dir;
    if (!seeds.empty()) c.experiment.seeds = seeds;
    if (seed) c.experiment.seeds = {*seed};
    if (epochs) c.model.epochs = *epochs;
    if (dim) c.model.dim = *dim;
    if (dropout) c.model.dropout = *dropout;
    if (lr) c.model.lr = *lr;
    if (mode) c.augment.mode = augment_mode_from_string(*mode);
    if (hops) c.augment.hop_threshold = *hops;
    if (cap) c.augment.max_added_nodes = *cap;
    if (layers) c.layers = *layers;
    if (tau) c.tau = *tau;
    c.validate();
    return c;
  }
};

json stamp_json(const std::string& hash, std::uint64_t seed) { return make_stamp(hash, seed).to_json(); }

std::string lines(const std::vector<json>& docs) {
  std::string out;
  for (const auto& d : docs) out += d.dump() + "\n";
  return out;
}

std::string run_id(std::string_view kind, const std::string& hash, const std::string& source, std::uint64_t seed) {
  std::string id = std::string(kind) + "-" + hash;
  if (!source.empty()) id += "-" + source;
  return id + "-s" + std::to_string(seed);
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string method;
  std::int64_t count = 0;
  std::uint64_t seed = 0;
  std::string corpus, schema, out = "-", id_prefix;
  double top_fraction = 0.10;
  int n_swaps = 1;
  std::optional<double> mu, sigma;
};

int cmd_generate(const GenerateArgs& a) {
  RunConfig c;
  c.generator.method = generator_method_from_string(a.method);
  c.generator.count = a.count;
  c.generator.seed = a.seed;
  c.generator.popular_top_fraction = a.top_fraction;
  c.generator.n_swaps = a.n_swaps;
  c.generator.lognormal_mu = a.mu;
  c.generator.lognormal_sigma = a.sigma;
  c.generator.id_prefix = a.id_prefix;
  c.corpus.real = a.corpus;
  c.corpus.schema = a.schema;
  c.generator.validate();

  Vocabularies vocab;
  std::vector<Resume> out;
  GeneratorReport report;
  if (c.generator.method == GeneratorMethod::markov_real) {
    const auto schema = a.schema.empty() ? default_career_schema() : CareerSchema::load(a.schema);
    out = gen_markov_real(c.generator, schema, vocab);
  } else {
    if (a.corpus.empty()) throw UsageError("--corpus is required for method '" + a.method + "'");
    const auto real = load_genuine(a.corpus, vocab);
    out = generate(real, c.generator, &report);
  }
  if (report.swap_fallbacks > 0)
    std::cerr << "generate: " << report.swap_fallbacks << " resumes kept unchanged (no distinct companies to swap)\n";

  const auto stamp = stamp_json(c.hash(), a.seed);
  std::string text;
  for (const auto& r : out) {
    auto rec = resume_to_json(r, vocab);
    rec["stamp"] = stamp;
    text += rec.dump() + "\n";
  }
  write_text(a.out, text);
  return 0;
}

struct SchemaArgs {
  std::string out = "-", desc_map_out;
};

int cmd_schema(const SchemaArgs& a) {
  const auto schema = default_career_schema();
  write_text(a.out, schema.to_json().dump(2) + "\n");
  if (!a.desc_map_out.empty()) {
    std::string text;
    for (const auto& [title, desc] : schema.description_mapping().records)
      text += json{{"title", title}, {"description", desc}}.dump() + "\n";
    write_text(a.desc_map_out, text);
  }
  return 0;
}

struct BuildGraphArgs {
  std::string real, desc_map, embeddings, schema, layers = "All", out = "-";
  double tau = 0.9;
  int fallback_dim = kDefaultFallbackDim;
};

int cmd_build_graph(const BuildGraphArgs& a) {
  RunConfig c;
  c.corpus.real = a.real;
  c.corpus.desc_map = a.desc_map;
  c.corpus.embeddings = a.embeddings;
  c.corpus.schema = a.schema;
  c.corpus.fallback_dim = a.fallback_dim;
  c.tau = a.tau;
  c.layers = a.layers;
  c.validate();

  Vocabularies vocab;
  const auto real = load_genuine(a.real, vocab);
  const auto mapping = mapping_for(c.corpus);
  std::optional<std::map<std::string, std::vector<double>>> vectors;
  if (!a.embeddings.empty()) vectors = load_embedding_file(a.embeddings);
  const auto desc = attach_descriptions(vocab, mapping, vectors ? &*vectors : nullptr, a.fallback_dim);

  GraphBuildOptions options;
  options.tau = a.tau;
  options.layers = LayerSet::parse(a.layers);
  options.built_from = "genuine resumes from " + a.real;
  const auto graph = build_global_graph(real, desc, options);
  auto doc = graph.to_json(vocab);
  doc["stamp"] = stamp_json(c.hash(), 0);
  write_text(a.out, doc.dump() + "\n");
  std::cerr << "build-graph: " << graph.node_count() << " nodes, " << graph.edge_count() << " edges\n";
  return 0;
}

json pipeline_block(const LoadedData& d, const RunResult& res) {
  json records = json::array();
  for (const auto& [title, desc] : d.mapping.records) records.push_back({{"title", title}, {"description", desc}});
  json vectors = nullptr;
  if (d.vectors) vectors = *d.vectors;
  return {{"config", res.effective.to_json()},
          {"description_mapping", records},
          {"description_vectors", vectors},
          {"fallback_dim", d.ctx.desc.dim()},
          {"graph", res.global->to_json(d.ctx.vocab)}};
}

int cmd_train(const Overrides& o) {
  const auto cfg = o.resolve();
  const auto hash = cfg.hash();
  const auto seed = cfg.experiment.seeds.front();
  const auto data = load_data(cfg);
  if (data.fakes.empty()) throw UsageError("training needs at least one synthetic source (corpus.fakes or --fake)");
  std::vector<Resume> dataset = data.real;
  for (const auto& [name, rs] : data.fakes) dataset = concat(dataset, rs);

  const auto res = run_pipeline(dataset, data.ctx, cfg.pipeline(), cfg.split, seed);
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);

  auto ckpt = checkpoint_to_json(res.params, make_stamp(hash, seed));
  ckpt["pipeline"] = pipeline_block(data, res);
  write_text((dir / "model.ckpt").string(), ckpt.dump() + "\n");

  std::vector<json> log;
  for (const auto& e : res.training.log) {
    auto rec = e.to_json();
    rec["stamp"] = stamp_json(hash, seed);
    log.push_back(std::move(rec));
  }
  write_text((dir / "train_log.jsonl").string(), lines(log));
  write_text((dir / "config.json").string(), cfg.to_json().dump(2) + "\n");

  auto metrics = metrics_document(run_id("train", hash, "", seed), hash, seed, res.metrics);
  write_text((dir / "metrics.json").string(), metrics.dump(2) + "\n");
  std::cout << metrics.dump(2) << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string checkpoint, test, out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto doc = read_json(a.checkpoint);
  ArtifactStamp stamp;
  const auto params = checkpoint_from_json(doc, &stamp);
  if (!doc.contains("pipeline")) throw DataError(a.checkpoint + ": checkpoint has no pipeline block");
  const auto& p = doc.at("pipeline");

  DatasetContext ctx;
  HeteroGraph graph;
  PipelineConfig cfg;
  DescriptionMapping mapping;
  std::optional<std::map<std::string, std::vector<double>>> vectors;
  int fallback_dim = kDefaultFallbackDim;
  try {
    cfg = PipelineConfig::from_json(p.at("config"));
    graph = HeteroGraph::from_json(p.at("graph"), ctx.vocab);
    for (const auto& r : p.at("description_mapping"))
      mapping.records.emplace_back(r.at("title").get<std::string>(), r.at("description").get<std::string>());
    if (!p.at("description_vectors").is_null())
      vectors = p.at("description_vectors").get<std::map<std::string, std::vector<double>>>();
    fallback_dim = p.at("fallback_dim").get<int>();
  } catch (const json::exception& e) {
    throw DataError(a.checkpoint + ": " + e.what());
  }

  const auto test = load_resumes(a.test, ctx.vocab);
  if (test.empty()) throw DataError(a.test + ": no resumes");
  std::set<std::string> test_ids;
  for (const auto& r : test) test_ids.insert(r.id);
  const auto& ids = graph.meta().resume_ids;
  assert_no_leakage({ids.begin(), ids.end()}, test_ids);

  // Titles first seen in the test file need descriptions too; interning order keeps known ids.
  ctx.desc = attach_descriptions(ctx.vocab, mapping, vectors ? &*vectors : nullptr, fallback_dim);
  const auto inputs = prepare_inputs(test, ctx, graph, cfg, params);
  const auto probs = predict_probabilities(inputs, params);
  std::vector<double> labels;
  for (const auto& r : test) labels.push_back(r.label);
  const auto m = compute_metrics(probs, labels);
  const auto metrics = metrics_document(run_id("evaluate", stamp.config_hash, "", stamp.seed), stamp.config_hash,
                                        stamp.seed, m);
  if (!a.out.empty()) write_text(a.out, metrics.dump(2) + "\n");
  std::cout << metrics.dump(2) << "\n";
  return 0;
}

struct AblateArgs {
  std::string family;
  int jobs = 1;
};

int cmd_ablate(const Overrides& o, const AblateArgs& a) {
  const auto family = ablation_family_from_string(a.family);
  const auto cfg = o.resolve();
  const auto hash = cfg.hash();
  const auto data = load_data(cfg);
  if (data.fakes.empty()) throw UsageError("ablation needs at least one synthetic source (corpus.fakes or --fake)");
  std::vector<Resume> dataset = data.real;
  for (const auto& [name, rs] : data.fakes) dataset = concat(dataset, rs);

  const auto table = run_ablation(family, dataset, data.ctx, cfg.pipeline(), cfg.split, cfg.experiment.seeds, a.jobs,
                                  data.initial);
  std::ostringstream csv;
  table.write_csv(csv);
  auto doc = table.to_json();
  doc["stamp"] = stamp_json(hash, cfg.experiment.seeds.front());
  const fs::path dir = cfg.output_dir;
  const auto stem = "ablation_" + std::string(to_string(family));
  write_text((dir / (stem + ".csv")).string(), csv.str());
  write_text((dir / (stem + ".json")).string(), doc.dump(2) + "\n");
  std::cout << csv.str();
  return 0;
}

int cmd_experiment(const Overrides& o) {
  const auto cfg = o.resolve();
  const auto hash = cfg.hash();
  const auto data = load_data(cfg);
  if (data.fakes.empty()) throw UsageError("experiment needs at least one synthetic source (corpus.fakes or --fake)");
  const fs::path dir = fs::path(cfg.output_dir) / "experiment";

  std::vector<std::string> names;
  for (const auto& [name, rs] : data.fakes) names.push_back(name);
  const bool combined = cfg.experiment.combined && data.fakes.size() > 1;
  if (combined) names.push_back("Combined");

  std::ostringstream csv;
  csv << "source,seeds,f1_positive_mean,f1_positive_std,f1_positive_median,f1_micro_mean,f1_micro_std,"
         "f1_micro_median\n";
  csv << std::setprecision(6);
  json summary = json::array();
  for (std::size_t s = 0; s < names.size(); ++s) {
    std::vector<double> pos, micro;
    json runs = json::array();
    for (auto seed : cfg.experiment.seeds) {
      std::vector<Resume> dataset;
      if (s < data.fakes.size()) {
        dataset = concat(data.real, data.fakes[s].second);
      } else {
        std::vector<std::vector<Resume>> sources;
        for (const auto& [name, rs] : data.fakes) sources.push_back(rs);
        dataset = assemble_combined(data.real, sources, seed);
      }
      const auto res = run_pipeline(dataset, data.ctx, cfg.pipeline(), cfg.split, seed);
      const auto doc = metrics_document(run_id("experiment", hash, names[s], seed), hash, seed, res.metrics);
      write_text((dir / names[s] / ("seed" + std::to_string(seed) + ".metrics.json")).string(), doc.dump(2) + "\n");
      runs.push_back(doc);
      pos.push_back(res.metrics.f1_positive);
      micro.push_back(res.metrics.f1_micro);
      std::cerr << "experiment: " << names[s] << " seed " << seed << " f1_positive " << res.metrics.f1_positive << "\n";
    }
    const auto p = summarize(pos), m = summarize(micro);
    csv << names[s] << ',' << pos.size() << ',' << p.mean << ',' << p.stddev << ',' << p.median << ',' << m.mean
        << ',' << m.stddev << ',' << m.median << '\n';
    summary.push_back({{"source", names[s]},
                       {"f1_positive", {{"mean", p.mean}, {"std", p.stddev}, {"median", p.median}, {"values", pos}}},
                       {"f1_micro", {{"mean", m.mean}, {"std", m.stddev}, {"median", m.median}, {"values", micro}}},
                       {"runs", runs}});
  }
  json doc = {{"sources", summary}, {"stamp", stamp_json(hash, cfg.experiment.seeds.front())}};
  write_text((dir / "summary.csv").string(), csv.str());
  write_text((dir / "summary.json").string(), doc.dump(2) + "\n");
  std::cout << csv.str();
  return 0;
}

struct StatsArgs {
  std::string corpus, out;
};

int cmd_stats(const StatsArgs& a) {
  Vocabularies vocab;
  const auto resumes = load_resumes(a.corpus, vocab);
  auto doc = corpus_stats(resumes).to_json();
  const auto text = doc.dump(2) + "\n";
  if (!a.out.empty()) write_text(a.out, text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Career-graph detector for synthetic resumes"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate synthetic or oracle-real resumes");
  g->add_option("--method", gen.method, "random|popular|swapping|replacing|markov_real")->required();
  g->add_option("--count", gen.count, "Number of resumes")->required();
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--corpus", gen.corpus, "Genuine corpus the rule-based methods draw from");
  g->add_option("--schema", gen.schema, "Career schema for markov_real (built-in when omitted)");
  g->add_option("--out", gen.out, "Output file (stdout when omitted)");
  g->add_option("--top-fraction", gen.top_fraction, "Popular pool fraction");
  g->add_option("--n-swaps", gen.n_swaps, "Company exchanges per resume (swapping)");
  g->add_option("--lognormal-mu", gen.mu, "Duration log-mean (popular)");
  g->add_option("--lognormal-sigma", gen.sigma, "Duration log-std (popular)");
  g->add_option("--id-prefix", gen.id_prefix, "Prefix of generated ids");

  SchemaArgs sch;
  auto* s = app.add_subcommand("schema", "Print the built-in career schema");
  s->add_option("--out", sch.out, "Output file (stdout when omitted)");
  s->add_option("--desc-map-out", sch.desc_map_out, "Also write its title -> description mapping");

  BuildGraphArgs bg;
  auto* b = app.add_subcommand("build-graph", "Build the global career graph from genuine resumes");
  b->add_option("--real", bg.real, "Genuine resume file")->required();
  b->add_option("--desc-map", bg.desc_map, "Title -> description mapping file");
  b->add_option("--embeddings", bg.embeddings, "Description embedding file");
  b->add_option("--schema", bg.schema, "Career schema supplying descriptions");
  b->add_option("--tau", bg.tau, "Description similarity threshold");
  b->add_option("--layers", bg.layers, "Layer set");
  b->add_option("--fallback-dim", bg.fallback_dim, "Dimension of fallback description vectors");
  b->add_option("--out", bg.out, "Output file (stdout when omitted)");

  Overrides train_o, ablate_o, exp_o;
  auto* t = app.add_subcommand("train", "Train on one split and score its test part");
  train_o.attach(t);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score a labeled resume file with a trained checkpoint");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint written by train")->required();
  e->add_option("--test", ev.test, "Labeled resume file")->required();
  e->add_option("--out", ev.out, "Also write the metrics here");

  AblateArgs ab;
  auto* a = app.add_subcommand("ablate", "Run an ablation family over the seed list");
  a->add_option("--family", ab.family, "embedding_size|hops|layers|augmentation")->required();
  a->add_option("--jobs", ab.jobs, "Concurrent (cell, seed) runs");
  ablate_o.attach(a);

  auto* x = app.add_subcommand("experiment", "Per-source runs plus the Combined run");
  exp_o.attach(x);

  StatsArgs st;
  auto* c = app.add_subcommand("stats", "Corpus statistics as JSON");
  c->add_option("--corpus", st.corpus, "Resume file")->required();
  c->add_option("--out", st.out, "Also write the statistics here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*s) return cmd_schema(sch);
    if (*b) return cmd_build_graph(bg);
    if (*t) return cmd_train(train_o);
    if (*e) return cmd_evaluate(ev);
    if (*a) return cmd_ablate(ablate_o, ab);
    if (*x) return cmd_experiment(exp_o);
    if (*c) return cmd_stats(st);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return static_cast<int>(err.code());
  } catch (const json::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return static_cast<int>(ExitCode::data);
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return static_cast<int>(ExitCode::data);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return static_cast<int>(ExitCode::data);
  }
  return static_cast<int>(ExitCode::usage);
}

#include "careerscape/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>

#include "careerscape/error.hpp"
#include "careerscape/hashing.hpp"
#include "careerscape/version.hpp"

namespace careerscape {

using nlohmann::json;

void SplitSpec::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw UsageError("test_fraction must be in (0, 1)");
  if (!(val_fraction_of_train > 0.0 && val_fraction_of_train < 1.0))
    throw UsageError("val_fraction_of_train must be in (0, 1)");
}

json SplitSpec::to_json() const {
  return {{"test_fraction", test_fraction},
          {"val_fraction_of_train", val_fraction_of_train},
          {"seed", seed},
          {"stratify_by_label", stratify_by_label}};
}

SplitSpec SplitSpec::from_json(const json& doc) {
  SplitSpec s;
  const json known = s.to_json();
  for (const auto& [key, _] : doc.items())
    if (!known.contains(key)) throw UsageError("unknown split key '" + key + "'");
  try {
    s.test_fraction = doc.value("test_fraction", s.test_fraction);
    s.val_fraction_of_train = doc.value("val_fraction_of_train", s.val_fraction_of_train);
    s.seed = doc.value("seed", s.seed);
    s.stratify_by_label = doc.value("stratify_by_label", s.stratify_by_label);
  } catch (const json::exception& e) {
    throw UsageError(std::string("split: ") + e.what());
  }
  s.validate();
  return s;
}

SplitIndices split_indices(std::span<const Resume> dataset, const SplitSpec& spec) {
  spec.validate();
  if (dataset.empty()) throw DataError("split: empty dataset");
  std::map<std::pair<int, std::string>, std::vector<std::size_t>> groups;
  bool has_real = false, has_fake = false;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset[i];
    has_real |= r.label == 0;
    has_fake |= r.label == 1;
    if (spec.stratify_by_label)
      groups[{r.label, r.label == 1 ? r.source : std::string()}].push_back(i);
    else
      groups[{0, {}}].push_back(i);
  }
  if (spec.stratify_by_label && !(has_real && has_fake))
    throw DataError("split: stratification needs both genuine and synthetic resumes");

  SplitIndices out;
  std::uint64_t group_no = 0;
  for (auto& [key, members] : groups) {
    std::mt19937_64 rng(derive_seed(spec.seed, fnv1a64(key.second) + static_cast<std::uint64_t>(key.first) + group_no++));
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = members.size();
    const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(spec.val_fraction_of_train * static_cast<double>(n - n_test)));
    out.test.insert(out.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.val.insert(out.val.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test),
                   members.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
    out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

// ---------------------------------------------------------------------------

json Metrics::to_json() const {
  return {{"precision", precision},
          {"recall", recall},
          {"f1_positive", f1_positive},
          {"f1_micro", f1_micro},
          {"threshold", threshold},
          {"confusion", {{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}}}};
}

Metrics compute_metrics(std::span<const double> probabilities, std::span<const double> labels, double threshold) {
  if (probabilities.size() != labels.size()) throw DataError("metrics: prediction/label length mismatch");
  if (labels.empty()) throw DataError("metrics: empty input");
  Metrics m;
  m.threshold = threshold;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    const bool actual = labels[i] >= 0.5;
    if (predicted && actual) ++m.tp;
    else if (predicted) ++m.fp;
    else if (actual) ++m.fn;
    else ++m.tn;
  }
  auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  m.precision = ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fp));
  m.recall = ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fn));
  m.f1_positive = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  m.f1_micro = static_cast<double>(m.tp + m.tn) / static_cast<double>(labels.size());
  return m;
}

json PipelineConfig::to_json() const {
  return {{"model", model.to_json()},
          {"augment",
           {{"mode", to_string(augment.mode)},
            {"hop_threshold", augment.hop_threshold},
            {"max_added_nodes", augment.max_added_nodes},
            {"seed", augment.seed}}},
          {"tau", tau},
          {"layers", layers.name()},
          {"initial_embeddings", initial_embeddings.has_value()}};
}

PipelineConfig PipelineConfig::from_json(const json& doc) {
  try {
    PipelineConfig p;
    p.model = ModelConfig::from_json(doc.at("model"));
    const auto& a = doc.at("augment");
    p.augment.mode = augment_mode_from_string(a.at("mode").get<std::string>());
    p.augment.hop_threshold = a.at("hop_threshold").get<int>();
    p.augment.max_added_nodes = a.at("max_added_nodes").get<int>();
    p.augment.seed = a.at("seed").get<std::uint64_t>();
    p.augment.validate();
    p.tau = doc.at("tau").get<double>();
    p.layers = LayerSet::parse(doc.at("layers").get<std::string>());
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("pipeline config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

void assert_no_leakage(const std::set<std::string>& graph_contributors, const std::set<std::string>& test_ids) {
  for (const auto& id : test_ids)
    if (graph_contributors.count(id)) throw DataError("leakage: test resume '" + id + "' contributed to a global graph");
}

std::vector<ModelInput> prepare_inputs(std::span<const Resume> resumes, const DatasetContext& ctx,
                                       const HeteroGraph& global, const PipelineConfig& cfg,
                                       const ModelParams& params) {
  std::vector<ModelInput> out(resumes.size());
  std::vector<std::string> errors(resumes.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < resumes.size(); ++i) {
    try {
      const auto sub = build_user_subgraph(resumes[i], ctx.desc, cfg.layers);
      const auto augmented = augment_subgraph(sub, global, cfg.augment);
      out[i] = prepare_input(augmented, ctx.vocab, ctx.desc, params, resumes[i].id, resumes[i].label);
    } catch (const std::exception& e) {
      errors[i] = resumes[i].id + ": " + e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw DataError(e);
  return out;
}

namespace {

std::vector<Resume> pick(std::span<const Resume> dataset, const std::vector<std::size_t>& idx) {
  std::vector<Resume> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(dataset[i]);
  return out;
}

std::vector<double> labels_of(std::span<const ModelInput> inputs) {
  std::vector<double> out;
  for (const auto& in : inputs) out.push_back(in.label);
  return out;
}

}  // namespace

RunResult run_pipeline(std::span<const Resume> dataset, const DatasetContext& ctx, const PipelineConfig& cfg,
                       const SplitSpec& split, std::uint64_t seed) {
  SplitSpec seeded = split;
  seeded.seed = seed;
  const auto idx = split_indices(dataset, seeded);
  const auto train_part = pick(dataset, idx.train);
  const auto val_part = pick(dataset, idx.val);
  const auto test_part = pick(dataset, idx.test);
  if (train_part.empty() || val_part.empty() || test_part.empty()) throw DataError("run: a split part is empty");

  RunResult result;
  result.train_count = train_part.size();
  result.val_count = val_part.size();
  result.test_count = test_part.size();
  for (const auto& r : test_part) result.test_ids.insert(r.id);

  std::vector<Resume> genuine;
  for (const auto& r : train_part)
    if (r.label == 0) genuine.push_back(r);
  GraphBuildOptions options;
  options.tau = cfg.tau;
  options.layers = cfg.layers;
  HeteroGraph global = build_global_graph(genuine, ctx.desc, options);
  if (cfg.augment.mode == AugmentMode::mixed) {
    options.allow_synthetic = true;
    options.built_from = "training-split genuine and synthetic resumes";
    global = build_global_graph(train_part, ctx.desc, options);
  }
  const auto& contributors = global.meta().resume_ids;
  result.graph_contributors.insert(contributors.begin(), contributors.end());
  assert_no_leakage(result.graph_contributors, result.test_ids);

  PipelineConfig run_cfg = cfg;
  run_cfg.model.seed = seed;
  run_cfg.augment.seed = derive_seed(seed, 0xa06);

  std::set<std::int32_t> titles, companies;
  for (const auto& r : train_part)
    for (const auto& e : r.entries) {
      titles.insert(e.title_id);
      companies.insert(e.company_id);
    }
  std::vector<std::string> title_keys, company_keys;
  for (auto t : titles) title_keys.push_back(ctx.vocab.titles.key(t));
  for (auto c : companies) company_keys.push_back(ctx.vocab.companies.key(c));
  ModelParams params(run_cfg.model, std::move(title_keys), std::move(company_keys), ctx.desc.dim());
  initialize_parameters(params);
  if (run_cfg.initial_embeddings) params.apply_initial_embeddings(*run_cfg.initial_embeddings);

  const auto train_in = prepare_inputs(train_part, ctx, global, run_cfg, params);
  const auto val_in = prepare_inputs(val_part, ctx, global, run_cfg, params);
  const auto test_in = prepare_inputs(test_part, ctx, global, run_cfg, params);

  result.training = train(train_in, val_in, params);
  result.test_probabilities = predict_probabilities(test_in, params);
  result.metrics = compute_metrics(result.test_probabilities, labels_of(test_in));
  result.params = std::move(params);
  result.effective = std::move(run_cfg);
  result.global = std::make_shared<const HeteroGraph>(std::move(global));
  return result;
}

std::vector<Resume> assemble_combined(std::span<const Resume> real, const std::vector<std::vector<Resume>>& fake_sources,
                                      std::uint64_t seed) {
  if (fake_sources.empty()) throw UsageError("combined run needs at least one fake source");
  std::vector<Resume> out(real.begin(), real.end());
  const std::size_t k = fake_sources.size();
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t want = real.size() / k + (s < real.size() % k ? 1 : 0);
    if (fake_sources[s].size() < want)
      throw DataError("combined run: fake source " + std::to_string(s) + " has " +
                      std::to_string(fake_sources[s].size()) + " resumes, needs " + std::to_string(want));
    std::vector<Resume> chosen;
    std::mt19937_64 rng(derive_seed(seed, 0xc0b0 + s));
    std::sample(fake_sources[s].begin(), fake_sources[s].end(), std::back_inserter(chosen), want, rng);
    out.insert(out.end(), chosen.begin(), chosen.end());
  }
  return out;
}

json metrics_document(const std::string& run_id, const std::string& spec_hash, std::uint64_t seed, const Metrics& m) {
  return {{"run_id", run_id},
          {"spec_hash", spec_hash},
          {"seed", seed},
          {"tool_version", kToolVersion},
          {"f1_positive", m.f1_positive},
          {"f1_micro", m.f1_micro},
          {"precision", m.precision},
          {"recall", m.recall},
          {"threshold", m.threshold},
          {"confusion", {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}}}};
}

SeedSummary summarize(std::vector<double> values) {
  SeedSummary s;
  s.values = values;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  std::sort(values.begin(), values.end());
  const auto mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

SignTest sign_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("sign test: unpaired samples");
  SignTest t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) ++t.wins;
    else if (a[i] < b[i]) ++t.losses;
    else ++t.ties;
  }
  const int n = t.wins + t.losses;
  if (n == 0) return t;
  const int k = std::min(t.wins, t.losses);
  double tail = 0.0;
  for (int i = 0; i <= k; ++i)
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  t.p_value = std::min(1.0, 2.0 * tail);
  return t;
}

// ---------------------------------------------------------------------------

std::string_view to_string(AblationFamily family) {
  switch (family) {
    case AblationFamily::embedding_size: return "embedding_size";
    case AblationFamily::hops: return "hops";
    case AblationFamily::layers: return "layers";
    case AblationFamily::augmentation: return "augmentation";
  }
  return "?";
}

AblationFamily ablation_family_from_string(std::string_view name) {
  for (auto f : {AblationFamily::embedding_size, AblationFamily::hops, AblationFamily::layers,
                 AblationFamily::augmentation})
    if (to_string(f) == name) return f;
  throw UsageError("unknown ablation family '" + std::string(name) + "'");
}

std::vector<AblationCell> ablation_cells(AblationFamily family, const PipelineConfig& base,
                                         const std::optional<InitialEmbeddings>& initial) {
  std::vector<AblationCell> cells;
  switch (family) {
    case AblationFamily::embedding_size:
      for (int d : {32, 64, 128, 256}) {
        AblationCell c{"d=" + std::to_string(d), base};
        c.config.model.dim = d;
        cells.push_back(std::move(c));
      }
      break;
    case AblationFamily::hops:
      for (int h : {0, 1, 2, 3}) {
        AblationCell c{"hops=" + std::to_string(h), base};
        c.config.augment.hop_threshold = h;
        // Zero radius is the unaugmented pipeline.
        c.config.augment.mode = h == 0 ? AugmentMode::none : AugmentMode::structural;
        cells.push_back(std::move(c));
      }
      break;
    case AblationFamily::layers:
      for (const auto& layers : layer_ablation_rows()) {
        AblationCell c{layers.name(), base};
        c.config.layers = layers;
        cells.push_back(std::move(c));
      }
      break;
    case AblationFamily::augmentation: {
      for (auto mode : {AugmentMode::structural, AugmentMode::none, AugmentMode::random, AugmentMode::mixed}) {
        AblationCell c{std::string(to_string(mode)), base};
        c.config.augment.mode = mode;
        cells.push_back(std::move(c));
      }
      AblationCell g{"global-emb", base};
      g.config.augment.mode = AugmentMode::none;
      g.config.initial_embeddings = initial;
      g.approximate = true;
      g.skipped = !initial.has_value();
      cells.push_back(std::move(g));
      break;
    }
  }
  return cells;
}

AblationTable run_ablation(AblationFamily family, std::span<const Resume> dataset, const DatasetContext& ctx,
                           const PipelineConfig& base, const SplitSpec& split, std::span<const std::uint64_t> seeds,
                           int jobs, const std::optional<InitialEmbeddings>& initial) {
  if (seeds.empty()) throw UsageError("ablation needs at least one seed");
  if (jobs < 1) throw UsageError("--jobs must be >= 1");
  AblationTable table;
  table.family = family;
  table.seeds.assign(seeds.begin(), seeds.end());
  for (auto& cell : ablation_cells(family, base, initial)) table.rows.push_back({std::move(cell), {}, {}, {}, {}});

  struct Job {
    std::size_t row, seed;
  };
  std::vector<Job> work;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].cell.skipped) continue;
    table.rows[r].per_seed.resize(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) work.push_back({r, s});
  }
  std::vector<std::string> errors(work.size());
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 1)
  for (std::size_t w = 0; w < work.size(); ++w) {
    auto& row = table.rows[work[w].row];
    try {
      row.per_seed[work[w].seed] = run_pipeline(dataset, ctx, row.cell.config, split, seeds[work[w].seed]).metrics;
    } catch (const std::exception& e) {
      errors[w] = row.cell.label + ": " + e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw DataError("ablation cell failed: " + e);

  for (auto& row : table.rows) {
    std::vector<double> pos, micro;
    for (const auto& m : row.per_seed) {
      pos.push_back(m.f1_positive);
      micro.push_back(m.f1_micro);
    }
    row.f1_positive = summarize(pos);
    row.f1_micro = summarize(micro);
  }

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& c = table.rows[r].cell;
    if (c.skipped || c.approximate) continue;
    bool match = false;
    switch (family) {
      case AblationFamily::embedding_size: match = c.config.model.dim == base.model.dim; break;
      case AblationFamily::hops:
        match = c.config.augment.hop_threshold == base.augment.hop_threshold &&
                c.config.augment.mode == base.augment.mode;
        break;
      case AblationFamily::layers: match = c.config.layers == base.layers; break;
      case AblationFamily::augmentation: match = c.config.augment.mode == base.augment.mode; break;
    }
    if (match) {
      table.reference = r;
      break;
    }
  }
  if (table.reference) {
    const auto& ref = table.rows[*table.reference].f1_positive.values;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
      if (r != *table.reference && !table.rows[r].cell.skipped)
        table.rows[r].vs_reference = sign_test(table.rows[r].f1_positive.values, ref);
  }
  return table;
}

void AblationTable::write_csv(std::ostream& out) const {
  out << "family,cell,approximate,skipped,seeds,f1_positive_mean,f1_positive_std,f1_positive_median,f1_micro_mean,"
         "f1_micro_std,f1_micro_median,sign_wins,sign_losses,sign_ties,sign_p\n";
  out << std::setprecision(6);
  for (const auto& row : rows) {
    out << to_string(family) << ',' << row.cell.label << ',' << (row.cell.approximate ? 1 : 0) << ','
        << (row.cell.skipped ? 1 : 0) << ',' << row.per_seed.size();
    if (row.cell.skipped) {
      out << ",,,,,,,,,,\n";
      continue;
    }
    out << ',' << row.f1_positive.mean << ',' << row.f1_positive.stddev << ',' << row.f1_positive.median << ','
        << row.f1_micro.mean << ',' << row.f1_micro.stddev << ',' << row.f1_micro.median;
    if (row.vs_reference)
      out << ',' << row.vs_reference->wins << ',' << row.vs_reference->losses << ',' << row.vs_reference->ties << ','
          << row.vs_reference->p_value << '\n';
    else
      out << ",,,,\n";
  }
}

json AblationTable::to_json() const {
  json rows_json = json::array();
  for (const auto& row : rows) {
    json per_seed = json::array();
    for (const auto& m : row.per_seed) per_seed.push_back(m.to_json());
    rows_json.push_back({{"cell", row.cell.label},
                         {"approximate", row.cell.approximate},
                         {"skipped", row.cell.skipped},
                         {"f1_positive", {{"mean", row.f1_positive.mean}, {"std", row.f1_positive.stddev}, {"median", row.f1_positive.median}, {"values", row.f1_positive.values}}},
                         {"f1_micro", {{"mean", row.f1_micro.mean}, {"std", row.f1_micro.stddev}, {"median", row.f1_micro.median}, {"values", row.f1_micro.values}}},
                         {"per_seed", per_seed}});
    if (row.vs_reference)
      rows_json.back()["sign_test"] = {{"wins", row.vs_reference->wins},
                                       {"losses", row.vs_reference->losses},
                                       {"ties", row.vs_reference->ties},
                                       {"p_value", row.vs_reference->p_value}};
  }
  json doc = {{"family", to_string(family)}, {"seeds", seeds}, {"rows", rows_json}};
  doc["reference"] = reference ? json(rows[*reference].cell.label) : json(nullptr);
  return doc;
}

}  // namespace careerscape

#include "careerscape/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "careerscape/error.hpp"
#include "careerscape/hashing.hpp"
#include "careerscape/optim.hpp"

namespace careerscape {

using nlohmann::json;

void ModelConfig::validate() const {
  if (dim < 1 || duration_dim < 1) throw UsageError("model dims must be positive");
  if (layers < 1) throw UsageError("model needs at least one message-passing layer");
  if (encoder_blocks < 0) throw UsageError("encoder_blocks must be >= 0");
  if (heads < 1 || dim % heads != 0) throw UsageError("dim must be divisible by the head count");
  if (ff_multiplier < 1) throw UsageError("ff_multiplier must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("dropout must be in [0, 1)");
  if (epochs < 1 || patience < 1 || batch_size < 1) throw UsageError("epochs, patience and batch size must be >= 1");
  if (!(lr > 0.0)) throw UsageError("learning rate must be positive");
}

json ModelConfig::to_json() const {
  return {{"dim", dim},
          {"duration_dim", duration_dim},
          {"layers", layers},
          {"encoder_blocks", encoder_blocks},
          {"heads", heads},
          {"ff_multiplier", ff_multiplier},
          {"dropout", dropout},
          {"epochs", epochs},
          {"patience", patience},
          {"batch_size", batch_size},
          {"lr", lr},
          {"lr_decay", lr_decay},
          {"lr_patience", lr_patience},
          {"lr_floor", lr_floor},
          {"embedding_init_std", embedding_init_std},
          {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const json& doc) {
  ModelConfig c;
  const json defaults = c.to_json();
  for (const auto& [key, _] : doc.items())
    if (!defaults.contains(key)) throw UsageError("unknown model config key '" + key + "'");
  try {
    c.dim = doc.value("dim", c.dim);
    c.duration_dim = doc.value("duration_dim", c.duration_dim);
    c.layers = doc.value("layers", c.layers);
    c.encoder_blocks = doc.value("encoder_blocks", c.encoder_blocks);
    c.heads = doc.value("heads", c.heads);
    c.ff_multiplier = doc.value("ff_multiplier", c.ff_multiplier);
    c.dropout = doc.value("dropout", c.dropout);
    c.epochs = doc.value("epochs", c.epochs);
    c.patience = doc.value("patience", c.patience);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.lr = doc.value("lr", c.lr);
    c.lr_decay = doc.value("lr_decay", c.lr_decay);
    c.lr_patience = doc.value("lr_patience", c.lr_patience);
    c.lr_floor = doc.value("lr_floor", c.lr_floor);
    c.embedding_init_std = doc.value("embedding_init_std", c.embedding_init_std);
    c.seed = doc.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw UsageError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

ModelParams::ModelParams(const ModelConfig& cfg, std::vector<std::string> title_keys,
                         std::vector<std::string> company_keys, int description_dim)
    : cfg_(cfg),
      description_dim_(description_dim),
      title_keys_(std::move(title_keys)),
      company_keys_(std::move(company_keys)) {
  cfg.validate();
  if (description_dim < 1) throw UsageError("description dimension must be positive");
  const int d = cfg.dim;
  const int dd = cfg.duration_dim;
  title_table = {"title_table", ad::Matrix(static_cast<int>(title_keys_.size()) + 1, d)};
  company_table = {"company_table", ad::Matrix(static_cast<int>(company_keys_.size()) + 1, d)};
  desc_projection = {"desc_projection", ad::Matrix(description_dim, d)};
  desc_projection_bias = {"desc_projection_bias", ad::Matrix(1, d)};
  duration_weight = {"duration_weight", ad::Matrix(1, dd)};
  duration_bias = {"duration_bias", ad::Matrix(1, dd)};
  relation.resize(static_cast<std::size_t>(cfg.layers));
  for (int l = 0; l < cfg.layers; ++l)
    for (auto r : kAllRelations)
      relation[l][index_of(r)] = {"relation." + std::to_string(l) + "." + std::string(to_string(r)),
                                  ad::Matrix(carries_duration(r) ? d + dd : d, d)};
  type_table = {"type_table", ad::Matrix(kEntityKindCount, d)};
  const int ff = cfg.ff_multiplier * d;
  for (int b = 0; b < cfg.encoder_blocks; ++b) {
    const std::string p = "encoder." + std::to_string(b) + ".";
    EncoderBlock blk{{p + "ln1_gain", ad::Matrix(1, d, 1.0)}, {p + "ln1_bias", ad::Matrix(1, d)},
                     {p + "wq", ad::Matrix(d, d)},            {p + "bq", ad::Matrix(1, d)},
                     {p + "wk", ad::Matrix(d, d)},            {p + "wv", ad::Matrix(d, d)},
                     {p + "bv", ad::Matrix(1, d)},            {p + "wo", ad::Matrix(d, d)},
                     {p + "bo", ad::Matrix(1, d)},
                     {p + "ln2_gain", ad::Matrix(1, d, 1.0)}, {p + "ln2_bias", ad::Matrix(1, d)},
                     {p + "ff1", ad::Matrix(d, ff)},          {p + "ff1_bias", ad::Matrix(1, ff)},
                     {p + "ff2", ad::Matrix(ff, d)},          {p + "ff2_bias", ad::Matrix(1, d)}};
    encoder.push_back(std::move(blk));
  }
  head_weight = {"head_weight", ad::Matrix(d, 1)};
  head_bias = {"head_bias", ad::Matrix(1, 1)};
  index_keys();
}

void ModelParams::index_keys() {
  title_rows_.clear();
  company_rows_.clear();
  for (std::size_t i = 0; i < title_keys_.size(); ++i) title_rows_.emplace(title_keys_[i], static_cast<std::int32_t>(i + 1));
  for (std::size_t i = 0; i < company_keys_.size(); ++i)
    company_rows_.emplace(company_keys_[i], static_cast<std::int32_t>(i + 1));
}

std::int32_t ModelParams::title_row(const std::string& key) const {
  auto it = title_rows_.find(key);
  return it == title_rows_.end() ? 0 : it->second;
}

std::int32_t ModelParams::company_row(const std::string& key) const {
  auto it = company_rows_.find(key);
  return it == company_rows_.end() ? 0 : it->second;
}

std::size_t ModelParams::apply_initial_embeddings(const InitialEmbeddings& initial) {
  std::size_t applied = 0;
  auto apply = [&](ad::Parameter& table, const std::vector<std::string>& keys, const std::string& prefix) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      auto it = initial.find(prefix + keys[i]);
      if (it == initial.end()) continue;
      if (static_cast<int>(it->second.size()) != table.value.cols)
        throw DataError("initial embedding '" + it->first + "' has dimension " + std::to_string(it->second.size()) +
                        ", model uses " + std::to_string(table.value.cols));
      std::copy(it->second.begin(), it->second.end(), table.value.row(static_cast<int>(i + 1)));
      ++applied;
    }
  };
  apply(title_table, title_keys_, "title:");
  apply(company_table, company_keys_, "company:");
  return applied;
}

std::vector<ad::Parameter*> ModelParams::all() {
  std::vector<ad::Parameter*> out = {&title_table,     &company_table, &desc_projection, &desc_projection_bias,
                                     &duration_weight, &duration_bias};
  for (auto& layer : relation)
    for (auto& w : layer) out.push_back(&w);
  out.push_back(&type_table);
  for (auto& b : encoder)
    for (auto* p : {&b.ln1_gain, &b.ln1_bias, &b.wq, &b.bq, &b.wk, &b.wv, &b.bv, &b.wo, &b.bo, &b.ln2_gain,
                    &b.ln2_bias, &b.ff1, &b.ff1_bias, &b.ff2, &b.ff2_bias})
      out.push_back(p);
  out.push_back(&head_weight);
  out.push_back(&head_bias);
  return out;
}

std::vector<const ad::Parameter*> ModelParams::all() const {
  auto mut = const_cast<ModelParams*>(this)->all();
  return {mut.begin(), mut.end()};
}

ad::Parameter* ModelParams::find(const std::string& name) {
  for (auto* p : all())
    if (p->name == name) return p;
  return nullptr;
}

void ModelParams::zero_grad() {
  for (auto* p : all()) p->zero_grad();
}

json ModelParams::to_json() const {
  json params = json::object();
  for (const auto* p : all())
    params[p->name] = {{"shape", {p->value.rows, p->value.cols}}, {"values", p->value.data}};
  return {{"config", cfg_.to_json()},
          {"description_dim", description_dim_},
          {"title_keys", title_keys_},
          {"company_keys", company_keys_},
          {"parameters", std::move(params)}};
}

ModelParams ModelParams::from_json(const json& doc) {
  try {
    ModelParams p(ModelConfig::from_json(doc.at("config")), doc.at("title_keys").get<std::vector<std::string>>(),
                  doc.at("company_keys").get<std::vector<std::string>>(), doc.at("description_dim").get<int>());
    const auto& stored = doc.at("parameters");
    for (auto* param : p.all()) {
      const auto& rec = stored.at(param->name);
      const auto shape = rec.at("shape").get<std::vector<int>>();
      if (shape.size() != 2 || shape[0] != param->value.rows || shape[1] != param->value.cols)
        throw DataError("checkpoint shape mismatch for " + param->name);
      param->value.data = rec.at("values").get<std::vector<double>>();
      if (param->value.data.size() != param->value.size() ||
          param->value.data.size() != static_cast<std::size_t>(shape[0]) * shape[1])
        throw DataError("checkpoint value count mismatch for " + param->name);
      ad::check_finite(param->value, param->name.c_str());
    }
    if (stored.size() != p.all().size()) throw DataError("checkpoint holds unexpected parameters");
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void initialize_parameters(ModelParams& params) {
  const auto& cfg = params.config();
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x1417));
  auto normal = [&](ad::Parameter& p, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& x : p.value.data) x = dist(rng);
  };
  auto xavier = [&](ad::Parameter& p) {
    const double bound = std::sqrt(6.0 / (p.value.rows + p.value.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& x : p.value.data) x = dist(rng);
  };
  normal(params.title_table, cfg.embedding_init_std);
  normal(params.company_table, cfg.embedding_init_std);
  xavier(params.desc_projection);
  xavier(params.duration_weight);
  for (auto& layer : params.relation)
    for (auto& w : layer) xavier(w);
  normal(params.type_table, cfg.embedding_init_std);
  for (auto& b : params.encoder)
    for (auto* w : {&b.wq, &b.wk, &b.wv, &b.wo, &b.ff1, &b.ff2}) xavier(*w);
  std::fill(params.head_weight.value.data.begin(), params.head_weight.value.data.end(), 0.0);
  params.head_bias.value.data[0] = 0.0;
}

// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<kernels::CsrMatrix> placement(int node_count, const std::vector<std::int32_t>& nodes) {
  // Row v holds a single 1 at the position of v in `nodes`.
  std::vector<std::int32_t> slot(static_cast<std::size_t>(node_count), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) slot[nodes[k]] = static_cast<std::int32_t>(k);
  auto m = std::make_shared<kernels::CsrMatrix>();
  m->cols = static_cast<std::int32_t>(nodes.size());
  for (int v = 0; v < node_count; ++v) {
    if (slot[v] >= 0) m->push(slot[v], 1.0);
    m->end_row();
  }
  return m;
}

}  // namespace

ModelInput prepare_input(const Subgraph& sub, const Vocabularies& vocab, const DescriptionTable& desc,
                         const ModelParams& params, std::string id, double label) {
  if (sub.nodes.empty()) throw DataError("cannot encode an empty subgraph");
  ModelInput in;
  in.id = std::move(id);
  in.label = label;
  in.node_count = static_cast<int>(sub.nodes.size());

  std::vector<std::int32_t> title_nodes, company_nodes, desc_nodes;
  std::vector<double> desc_rows;
  for (std::int32_t v = 0; v < in.node_count; ++v) {
    const auto& key = sub.nodes[v].key;
    in.kind_rows.push_back(static_cast<std::int32_t>(key.kind));
    switch (key.kind) {
      case EntityKind::title:
        title_nodes.push_back(v);
        in.title_rows.push_back(params.title_row(vocab.titles.key(key.index)));
        break;
      case EntityKind::company:
        company_nodes.push_back(v);
        in.company_rows.push_back(params.company_row(vocab.companies.key(key.index)));
        break;
      case EntityKind::description: {
        const auto& vec = desc.vector(key.index);
        if (static_cast<int>(vec.size()) != params.description_dim())
          throw DataError("description vector dimension " + std::to_string(vec.size()) + " does not match the model's " +
                          std::to_string(params.description_dim()));
        desc_nodes.push_back(v);
        desc_rows.insert(desc_rows.end(), vec.begin(), vec.end());
        break;
      }
    }
  }
  in.place_titles = placement(in.node_count, title_nodes);
  in.place_companies = placement(in.node_count, company_nodes);
  in.place_descriptions = placement(in.node_count, desc_nodes);
  in.description_vectors = ad::Matrix(static_cast<int>(desc_nodes.size()), params.description_dim());
  in.description_vectors.data = std::move(desc_rows);

  for (auto r : kAllRelations) {
    const auto& edges = sub.edges[index_of(r)];
    if (edges.empty()) continue;
    ModelInput::RelationPlan plan;
    plan.kind = r;
    // incoming[v] = edge indices ending at v
    std::vector<std::vector<std::int32_t>> incoming(static_cast<std::size_t>(in.node_count));
    for (std::size_t e = 0; e < edges.size(); ++e) incoming[edges[e].dst].push_back(static_cast<std::int32_t>(e));
    std::vector<std::int32_t> destinations;
    auto agg = std::make_shared<kernels::CsrMatrix>();
    const bool with_duration = carries_duration(r);
    agg->cols = with_duration ? static_cast<std::int32_t>(edges.size()) : in.node_count;
    for (std::int32_t v = 0; v < in.node_count; ++v) {
      auto& list = incoming[v];
      if (list.empty()) continue;
      // Neighbor sets: one contribution per distinct source.
      std::set<std::int32_t> seen;
      std::vector<std::int32_t> unique_edges;
      for (auto e : list)
        if (seen.insert(edges[e].src).second) unique_edges.push_back(e);
      const double w = 1.0 / static_cast<double>(unique_edges.size());
      for (auto e : unique_edges) agg->push(with_duration ? e : edges[e].src, w);
      agg->end_row();
      destinations.push_back(v);
    }
    if (with_duration) {
      plan.log_duration = ad::Matrix(static_cast<int>(edges.size()), 1);
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (!(edges[e].duration >= 1.0)) throw DataError("duration must be >= 1 month");
        plan.edge_src.push_back(edges[e].src);
        plan.log_duration.data[e] = std::log(edges[e].duration);
      }
    }
    plan.aggregate = std::move(agg);
    plan.place = placement(in.node_count, destinations);
    in.relations.push_back(std::move(plan));
  }
  return in;
}

// ---------------------------------------------------------------------------

ad::Var init_embeddings(ad::Tape& tape, const ModelInput& in, const ModelParams& params) {
  std::optional<ad::Var> h;
  auto add_term = [&](ad::Var term) { h = h ? ad::add(*h, term) : term; };
  if (!in.title_rows.empty())
    add_term(ad::spmm(in.place_titles, ad::gather_rows(tape.parameter(params.title_table), in.title_rows)));
  if (!in.company_rows.empty())
    add_term(ad::spmm(in.place_companies, ad::gather_rows(tape.parameter(params.company_table), in.company_rows)));
  if (in.description_vectors.rows > 0) {
    auto projected = ad::add_row(ad::matmul(tape.constant(in.description_vectors), tape.parameter(params.desc_projection)),
                                 tape.parameter(params.desc_projection_bias));
    add_term(ad::spmm(in.place_descriptions, projected));
  }
  if (!h) throw DataError("subgraph has no embeddable nodes");
  return *h;
}

ad::Var duration_embed(ad::Tape& tape, ad::Var log_duration, const ModelParams& params) {
  return ad::add_row(ad::matmul(log_duration, tape.parameter(params.duration_weight)),
                     tape.parameter(params.duration_bias));
}

ad::Var message_passing_layer(ad::Tape& tape, const ModelInput& in, ad::Var h, const ModelParams& params, int layer) {
  if (layer < 0 || layer >= static_cast<int>(params.relation.size()))
    throw DataError("missing relation weights for layer " + std::to_string(layer));
  std::optional<ad::Var> sum;
  for (const auto& plan : in.relations) {
    const auto& weight = params.relation[layer][index_of(plan.kind)];
    ad::Var aggregated;
    if (carries_duration(plan.kind)) {
      auto features = ad::concat_cols(ad::gather_rows(h, plan.edge_src),
                                      duration_embed(tape, tape.constant(plan.log_duration), params));
      aggregated = ad::spmm(plan.aggregate, features);
    } else {
      aggregated = ad::spmm(plan.aggregate, h);
    }
    auto placed = ad::spmm(plan.place, ad::matmul(aggregated, tape.parameter(weight)));
    sum = sum ? ad::add(*sum, placed) : placed;
  }
  if (!sum) return tape.constant(ad::Matrix(in.node_count, params.config().dim));
  return ad::relu(*sum);
}

void encode_and_classify(ad::Tape& tape, const ModelInput& in, ad::Var h, const ModelParams& params,
                         const ForwardOptions& opt, ForwardResult& out) {
  const auto& cfg = params.config();
  auto x = ad::add(h, ad::gather_rows(tape.parameter(params.type_table), in.kind_rows));
  if (!opt.encoder_order.empty()) {
    if (static_cast<int>(opt.encoder_order.size()) != in.node_count) throw DataError("encoder order must cover every node");
    x = ad::gather_rows(x, opt.encoder_order);
  }
  const int head_dim = cfg.dim / cfg.heads;
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (std::size_t b = 0; b < params.encoder.size(); ++b) {
    const auto& blk = params.encoder[b];
    auto p = [&](const ad::Parameter& w) { return tape.parameter(w); };
    auto a = ad::add_row(ad::mul_row(ad::layer_norm_rows(x), p(blk.ln1_gain)), p(blk.ln1_bias));
    auto q = ad::add_row(ad::matmul(a, p(blk.wq)), p(blk.bq));
    // No key bias: it shifts every score of a query equally and cancels in the softmax.
    auto k = ad::matmul(a, p(blk.wk));
    auto v = ad::add_row(ad::matmul(a, p(blk.wv)), p(blk.bv));
    std::optional<ad::Var> context;
    for (int hd = 0; hd < cfg.heads; ++hd) {
      auto qh = ad::slice_cols(q, hd * head_dim, head_dim);
      auto kh = ad::slice_cols(k, hd * head_dim, head_dim);
      auto vh = ad::slice_cols(v, hd * head_dim, head_dim);
      auto weights = ad::softmax_rows(ad::scale(ad::matmul_nt(qh, kh), score_scale));
      auto ctx = ad::matmul(weights, vh);
      context = context ? ad::concat_cols(*context, ctx) : ctx;
    }
    auto attended = ad::add_row(ad::matmul(*context, p(blk.wo)), p(blk.bo));
    attended = ad::dropout(attended, cfg.dropout, opt.train, derive_seed(opt.dropout_seed, 1000 + b));
    x = ad::add(x, attended);
    auto f = ad::add_row(ad::mul_row(ad::layer_norm_rows(x), p(blk.ln2_gain)), p(blk.ln2_bias));
    f = ad::relu(ad::add_row(ad::matmul(f, p(blk.ff1)), p(blk.ff1_bias)));
    f = ad::add_row(ad::matmul(f, p(blk.ff2)), p(blk.ff2_bias));
    x = ad::add(x, f);
  }
  out.encoded = x;
  out.pooled = ad::mean_rows(x);
  out.logit = ad::add(ad::matmul(out.pooled, tape.parameter(params.head_weight)), tape.parameter(params.head_bias));
  out.probability = ad::sigmoid(out.logit);
}

ForwardResult forward(ad::Tape& tape, const ModelInput& in, const ModelParams& params, const ForwardOptions& opt) {
  ForwardResult out;
  auto h = init_embeddings(tape, in, params);
  out.layer_states.push_back(h);
  for (int l = 0; l < params.config().layers; ++l) {
    auto dropped = ad::dropout(h, params.config().dropout, opt.train, derive_seed(opt.dropout_seed, static_cast<std::uint64_t>(l)));
    h = message_passing_layer(tape, in, dropped, params, l);
    out.layer_states.push_back(h);
  }
  encode_and_classify(tape, in, h, params, opt, out);
  return out;
}

ad::Var batch_loss(ad::Tape& tape, std::span<const ModelInput> batch, const ModelParams& params,
                   const ForwardOptions& opt) {
  if (batch.empty()) throw DataError("batch_loss: empty batch");
  std::optional<ad::Var> total;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ForwardOptions o = opt;
    o.dropout_seed = derive_seed(opt.dropout_seed, i);
    auto fr = forward(tape, batch[i], params, o);
    const double y[] = {batch[i].label};
    auto term = ad::scale(ad::bce(fr.probability, y), 1.0 / static_cast<double>(batch.size()));
    total = total ? ad::add(*total, term) : term;
  }
  return *total;
}

std::vector<double> predict_probabilities(std::span<const ModelInput> inputs, const ModelParams& params) {
  std::vector<double> out(inputs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    ad::Tape tape;
    out[i] = forward(tape, inputs[i], params).probability.scalar();
  }
  return out;
}

double bce_value(std::span<const double> probabilities, std::span<const double> labels) {
  if (probabilities.size() != labels.size()) throw DataError("bce: prediction/label length mismatch");
  if (labels.empty()) throw DataError("bce: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probabilities[i], ad::kProbabilityClamp, 1.0 - ad::kProbabilityClamp);
    s -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
  }
  return s / static_cast<double>(labels.size());
}

// ---------------------------------------------------------------------------

bool EarlyStopping::observe(double loss) {
  if (!seen_ || loss < best_) {
    seen_ = true;
    best_ = loss;
    bad_ = 0;
    return true;
  }
  ++bad_;
  return false;
}

json EpochRecord::to_json() const {
  return {{"epoch", epoch}, {"train_loss", train_loss}, {"val_loss", val_loss}, {"val_f1", val_f1}, {"lr", lr}};
}

namespace {

double positive_f1(std::span<const double> probabilities, std::span<const ModelInput> inputs) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const bool predicted = probabilities[i] >= 0.5;
    const bool actual = inputs[i].label >= 0.5;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

}  // namespace

TrainResult train(std::span<const ModelInput> train_set, std::span<const ModelInput> val_set, ModelParams& params,
                  const ValidationOverride& override_val) {
  if (train_set.empty()) throw DataError("train: empty training split");
  if (val_set.empty()) throw DataError("train: empty validation split");
  const auto& cfg = params.config();
  auto param_list = params.all();
  ad::AdamState adam;
  adam.lr = cfg.lr;
  ad::PlateauScheduler schedule(cfg.lr_decay, cfg.lr_patience, cfg.lr_floor);
  EarlyStopping stopper(cfg.patience);
  ModelParams best = params;
  TrainResult result;

  std::vector<std::size_t> order(train_set.size());
  std::vector<double> val_labels;
  for (const auto& v : val_set) val_labels.push_back(v.label);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 0x5eed0000ULL + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double inv = 1.0 / static_cast<double>(end - start);
      params.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const auto& sample = train_set[order[i]];
        ad::Tape tape;
        ForwardOptions opt;
        opt.train = true;
        opt.dropout_seed = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)), i);
        auto fr = forward(tape, sample, params, opt);
        const double y[] = {sample.label};
        auto loss = ad::scale(ad::bce(fr.probability, y), inv);
        train_loss += loss.scalar() * static_cast<double>(end - start);
        tape.backward(loss);
        ad::accumulate_gradients(tape, param_list);
      }
      ad::adam_step(param_list, adam);
    }
    train_loss /= static_cast<double>(order.size());
    if (!std::isfinite(train_loss))
      throw NumericError("train: non-finite training loss at epoch " + std::to_string(epoch));

    const auto val_prob = predict_probabilities(val_set, params);
    double val_loss = bce_value(val_prob, val_labels);
    if (override_val) val_loss = override_val(epoch, val_loss);
    if (!std::isfinite(val_loss)) throw NumericError("train: non-finite validation loss at epoch " + std::to_string(epoch));

    EpochRecord rec{epoch, train_loss, val_loss, positive_f1(val_prob, val_set), adam.lr};
    result.log.push_back(rec);
    if (stopper.observe(val_loss)) {
      best = params;
      result.best_epoch = epoch;
    }
    schedule.observe(val_loss, adam);
    if (stopper.should_stop()) {
      result.early_stopped = true;
      break;
    }
  }
  params = std::move(best);
  return result;
}

}  // namespace careerscape

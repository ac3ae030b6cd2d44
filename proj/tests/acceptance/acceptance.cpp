// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 when any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "careerscape/augment.hpp"
#include "careerscape/error.hpp"
#include "careerscape/eval.hpp"
#include "careerscape/generators.hpp"
#include "careerscape/optim.hpp"
#include "careerscape/runtime.hpp"
#include "unit/oracles.hpp"

using namespace careerscape;
namespace fs = std::filesystem;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradBudgetSeconds = 60;
constexpr double kOverfitBudgetSeconds = 120;
constexpr double kEasyTarget = 0.95;
constexpr double kEasyBudgetSeconds = 300;
constexpr double kHardFloor = 0.60;
constexpr int kOracleTrials = 100;
const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string fmt(double x, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string list(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + fmt(xs[i], 3);
  return s + "]";
}

/// Model and augmentation settings shared by the separation tasks.
PipelineConfig desk_config() {
  PipelineConfig p;
  p.model.dim = 32;
  p.model.dropout = 0.3;
  p.augment.max_added_nodes = 32;
  return p;
}

struct Task {
  DatasetContext ctx;
  std::vector<Resume> data;
};

/// 400 oracle-real resumes against 400 fakes of `method`; generation seeds are fixed.
Task make_task(GeneratorMethod method, std::int64_t count = 400) {
  Task t;
  const auto schema = default_career_schema();
  GeneratorConfig g;
  g.method = GeneratorMethod::markov_real;
  g.count = count;
  g.seed = 101;
  auto real = gen_markov_real(g, schema, t.ctx.vocab);
  g.method = method;
  g.seed = 201;
  auto fake = generate(real, g);
  t.data = real;
  t.data.insert(t.data.end(), fake.begin(), fake.end());
  t.ctx.desc = attach_descriptions(t.ctx.vocab, schema.description_mapping(), nullptr);
  return t;
}

// Every pipeline run made by the suite is checked for leakage here.
std::size_t leakage_checks = 0;
std::vector<std::string> leakage_errors;

RunResult checked_run(std::span<const Resume> data, const DatasetContext& ctx, const PipelineConfig& cfg,
                      std::uint64_t seed, const std::string& label) {
  auto r = run_pipeline(data, ctx, cfg, SplitSpec{}, seed);
  ++leakage_checks;
  try {
    assert_no_leakage(r.graph_contributors, r.test_ids);
  } catch (const DataError& e) {
    leakage_errors.push_back(label + ": " + e.what());
  }
  return r;
}

double median(std::vector<double> xs) { return summarize(std::move(xs)).median; }

// ---------------------------------------------------------------------------

void gradient_check() {
  const auto t0 = Clock::now();
  auto task = make_task(GeneratorMethod::random, 40);
  auto cfg = desk_config();
  cfg.model.dropout = 0.0;
  std::vector<Resume> genuine;
  for (const auto& r : task.data)
    if (r.label == 0) genuine.push_back(r);
  GraphBuildOptions o;
  o.tau = cfg.tau;
  const auto global = build_global_graph(genuine, task.ctx.desc, o);

  std::vector<std::string> titles, companies;
  for (std::size_t i = 0; i < task.ctx.vocab.titles.size(); ++i)
    titles.push_back(task.ctx.vocab.titles.key(static_cast<std::int32_t>(i)));
  for (std::size_t i = 0; i < task.ctx.vocab.companies.size(); ++i)
    companies.push_back(task.ctx.vocab.companies.key(static_cast<std::int32_t>(i)));
  ModelParams params(cfg.model, titles, companies, task.ctx.desc.dim());
  initialize_parameters(params);
  // A zero head would leave every upstream gradient at zero.
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd(0.0, 0.3);
  for (auto& x : params.head_weight.value.data) x = nd(rng);

  const std::vector<Resume> batch_resumes = {task.data[0], task.data[1], task.data.back()};
  const auto batch = prepare_inputs(batch_resumes, task.ctx, global, cfg, params);
  auto plist = params.all();
  const auto res = ad::grad_check([&](ad::Tape& tape) { return batch_loss(tape, batch, params); }, plist, 1e-5, 24);
  const double secs = seconds_since(t0);
  report("gradient correctness", res.max_relative_error < kGradTolerance && secs < kGradBudgetSeconds,
         "max relative error " + std::to_string(res.max_relative_error) + " (" + res.worst_parameter + ") over " +
             std::to_string(res.checked) + " coordinates, limit " + std::to_string(kGradTolerance) + "; " +
             fmt(secs, 1) + " s, limit " + fmt(kGradBudgetSeconds, 0) + " s");
}

void overfit_sanity() {
  const auto t0 = Clock::now();
  auto task = make_task(GeneratorMethod::random, 16);
  auto cfg = desk_config();
  cfg.model.epochs = 200;
  cfg.model.patience = 200;
  cfg.model.lr_patience = 200;
  std::vector<Resume> genuine;
  for (const auto& r : task.data)
    if (r.label == 0) genuine.push_back(r);
  GraphBuildOptions o;
  o.tau = cfg.tau;
  const auto global = build_global_graph(genuine, task.ctx.desc, o);

  std::vector<std::string> titles, companies;
  for (std::size_t i = 0; i < task.ctx.vocab.titles.size(); ++i)
    titles.push_back(task.ctx.vocab.titles.key(static_cast<std::int32_t>(i)));
  for (std::size_t i = 0; i < task.ctx.vocab.companies.size(); ++i)
    companies.push_back(task.ctx.vocab.companies.key(static_cast<std::int32_t>(i)));
  ModelParams params(cfg.model, titles, companies, task.ctx.desc.dim());
  initialize_parameters(params);
  const auto inputs = prepare_inputs(task.data, task.ctx, global, cfg, params);
  const auto tr = train(inputs, inputs, params);
  const auto prob = predict_probabilities(inputs, params);
  std::vector<double> labels;
  for (const auto& in : inputs) labels.push_back(in.label);
  const auto m = compute_metrics(prob, labels);
  const double secs = seconds_since(t0);
  report("overfit sanity", m.f1_positive == 1.0 && secs < kOverfitBudgetSeconds,
         "training-set f1_positive " + fmt(m.f1_positive) + " after " + std::to_string(tr.log.size()) +
             " epochs on 16+16 resumes, target 1.0; " + fmt(secs, 1) + " s, limit " +
             fmt(kOverfitBudgetSeconds, 0) + " s");
}

void easy_separation() {
  auto task = make_task(GeneratorMethod::random);
  std::vector<double> f1;
  double slowest = 0.0;
  for (auto seed : kSeeds) {
    const auto t0 = Clock::now();
    f1.push_back(checked_run(task.data, task.ctx, desk_config(), seed, "easy").metrics.f1_positive);
    slowest = std::max(slowest, seconds_since(t0));
  }
  const double med = median(f1);
  report("easy-fake separation", med >= kEasyTarget && slowest < kEasyBudgetSeconds,
         "median test f1_positive " + fmt(med) + " " + list(f1) + ", target >= " + fmt(kEasyTarget, 2) +
             "; slowest seed " + fmt(slowest, 1) + " s, limit " + fmt(kEasyBudgetSeconds, 0) + " s");
}

void swapping_tasks() {
  auto task = make_task(GeneratorMethod::swapping);
  std::map<std::string, std::vector<double>> f1;
  auto run_cell = [&](const std::string& name, const PipelineConfig& cfg) {
    for (auto seed : kSeeds) f1[name].push_back(checked_run(task.data, task.ctx, cfg, seed, "swapping " + name).metrics.f1_positive);
  };
  for (auto mode : {AugmentMode::structural, AugmentMode::none, AugmentMode::mixed}) {
    auto cfg = desk_config();
    cfg.augment.mode = mode;
    run_cell(std::string(to_string(mode)), cfg);
  }
  const double s = median(f1["structural"]), n = median(f1["none"]), x = median(f1["mixed"]);
  report("hard-fake directionality", s >= n && s >= x && s >= kHardFloor,
         "median f1_positive structural " + fmt(s) + " " + list(f1["structural"]) + ", none " + fmt(n) + " " +
             list(f1["none"]) + ", mixed " + fmt(x) + " " + list(f1["mixed"]) + "; need structural >= both and >= " +
             fmt(kHardFloor, 2));

  // The full layer set is the structural cell above.
  const auto rows = layer_ablation_rows();
  bool ok = true;
  std::string detail = "median f1_positive All " + fmt(s);
  for (const auto& layers : rows) {
    const int active = layers.title + layers.company + layers.description + layers.cross;
    if (active != 1) continue;
    auto cfg = desk_config();
    cfg.layers = layers;
    run_cell(layers.name(), cfg);
    const double m = median(f1[layers.name()]);
    ok = ok && s >= m;
    detail += ", " + layers.name() + " " + fmt(m) + " " + list(f1[layers.name()]);
  }
  report("layer-ablation directionality", ok, detail + "; need All >= each single layer");
}

void graph_oracle() {
  std::mt19937_64 rng(20240601);
  int graph_mismatch = 0, augment_mismatch = 0;
  for (int trial = 0; trial < kOracleTrials; ++trial) {
    Vocabularies v;
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<Resume> rs, users;
    auto random_resume = [&](const std::string& id, int titles, int companies) {
      std::vector<oracle::EntrySpec> es;
      const int k = 1 + static_cast<int>(rng() % 4);
      for (int j = 0; j < k; ++j)
        es.push_back({"t" + std::to_string(rng() % titles), "c" + std::to_string(rng() % companies),
                      1 + static_cast<int>(rng() % 60)});
      return oracle::make_resume(v, id, 0, es);
    };
    for (int i = 0; i < n; ++i) rs.push_back(random_resume("g" + std::to_string(i), 8, 6));
    for (int i = 0; i < 3; ++i) users.push_back(random_resume("u" + std::to_string(i), 10, 8));
    DescriptionMapping m;
    m.records.emplace_back(std::string(kDefaultMappingKey), "About {title}");
    const auto desc = attach_descriptions(v, m, nullptr, 3);

    for (const auto& layers : layer_ablation_rows()) {
      GraphBuildOptions o;
      o.tau = 0.5;
      o.layers = layers;
      const auto g = build_global_graph(rs, desc, o);
      const auto got = oracle::graph_sets(g);
      const auto want = oracle::brute_force_graph(rs, desc, o.tau, layers);
      bool same = got.nodes == want.nodes && got.edges.size() == want.edges.size();
      if (same) {
        auto a = got.edges.begin();
        for (const auto& e : want.edges) {
          same = same && !(*a < e) && !(e < *a) && a->multiplicity == e.multiplicity &&
                 std::abs(a->duration - e.duration) < 1e-9;
          ++a;
        }
      }
      graph_mismatch += !same;

      for (const auto& u : users) {
        const auto sub = build_user_subgraph(u, desc, layers);
        std::vector<NodeKey> original;
        for (const auto& node : sub.nodes) original.push_back(node.key);
        for (int hops : {1, 2, 3}) {
          AugmentConfig c;
          c.hop_threshold = hops;
          c.max_added_nodes = 1 + static_cast<int>(rng() % 12);
          const auto out = augment_subgraph(sub, g, c);
          std::set<NodeKey> keys;
          for (const auto& node : out.nodes) keys.insert(node.key);
          augment_mismatch += keys != oracle::augmented_nodes(original, g, hops, c.max_added_nodes);
        }
      }
    }
  }
  report("graph oracle equivalence", graph_mismatch == 0 && augment_mismatch == 0,
         std::to_string(kOracleTrials) + " random corpora x 7 layer sets: " + std::to_string(graph_mismatch) +
             " graph mismatches, " + std::to_string(augment_mismatch) + " augmentation mismatches");
}

void leakage_guard() {
  // Cheap runs over every augmentation mode, per source and combined.
  auto cfg = desk_config();
  cfg.model.dim = 8;
  cfg.model.epochs = 1;
  auto random_task = make_task(GeneratorMethod::random, 60);
  auto swap_task = make_task(GeneratorMethod::swapping, 60);
  std::vector<Resume> real, random_fakes, swap_fakes;
  for (const auto& r : random_task.data) (r.label == 0 ? real : random_fakes).push_back(r);
  for (const auto& r : swap_task.data)
    if (r.label == 1) swap_fakes.push_back(r);
  // Both tasks intern the same oracle corpus, so the swapped resumes are re-read in the
  // random task's vocabulary through their names.
  for (auto& r : swap_fakes)
    for (auto& e : r.entries) {
      e.title_id = random_task.ctx.vocab.titles.intern(swap_task.ctx.vocab.titles.key(e.title_id));
      e.company_id = random_task.ctx.vocab.companies.intern(swap_task.ctx.vocab.companies.key(e.company_id));
    }
  const auto combined = assemble_combined(real, {random_fakes, swap_fakes}, 7);
  for (auto mode : {AugmentMode::structural, AugmentMode::none, AugmentMode::random, AugmentMode::mixed}) {
    cfg.augment.mode = mode;
    for (auto seed : kSeeds) {
      checked_run(random_task.data, random_task.ctx, cfg, seed, "random");
      checked_run(swap_task.data, swap_task.ctx, cfg, seed, "swapping");
      checked_run(combined, random_task.ctx, cfg, seed, "combined");
    }
  }
  bool caught = false;
  try {
    assert_no_leakage({"a", "b"}, {"b"});
  } catch (const DataError&) {
    caught = true;
  }
  report("leakage guard", leakage_errors.empty() && caught,
         std::to_string(leakage_checks) + " pipeline runs checked, " + std::to_string(leakage_errors.size()) +
             " leaks" + (leakage_errors.empty() ? "" : " (first: " + leakage_errors.front() + ")") +
             "; injected leak " + (caught ? "rejected" : "NOT rejected"));
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(CAREERSCAPE_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism() {
  const auto dir = fs::temp_directory_path() / ("careerscape_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto real = (dir / "real.jsonl").string(), fake = (dir / "fake.jsonl").string();
  const std::string data = " --real " + real + " --fake random=" + fake;
  const std::string model = " --dim 16 --epochs 5 --seed 7";
  struct Command {
    std::string name;
    std::function<std::string(int)> args;  // run index -> arguments
    std::function<fs::path(int)> product;   // run index -> compared file
  };
  auto run_dir = [&](int k) { return dir / ("run" + std::to_string(k)); };
  const std::vector<Command> commands = {
      {"generate markov_real",
       [&](int k) { return "generate --method markov_real --count 120 --seed 5 --out " + (run_dir(k) / "real.jsonl").string(); },
       [&](int k) { return run_dir(k) / "real.jsonl"; }},
      {"stats", [&](int k) { return "stats --corpus " + real + " --out " + (run_dir(k) / "stats.json").string(); },
       [&](int k) { return run_dir(k) / "stats.json"; }},
      {"build-graph", [&](int k) { return "build-graph --real " + real + " --out " + (run_dir(k) / "graph.json").string(); },
       [&](int k) { return run_dir(k) / "graph.json"; }},
      {"train", [&](int k) { return "train" + data + model + " --out-dir " + run_dir(k).string(); },
       [&](int k) { return run_dir(k) / "metrics.json"; }},
      {"evaluate",
       [&](int k) {
         return "evaluate --checkpoint " + (run_dir(0) / "model.ckpt").string() + " --test " + fake + " --out " +
                (run_dir(k) / "eval.json").string();
       },
       [&](int k) { return run_dir(k) / "eval.json"; }},
      {"ablate hops",
       [&](int k) { return "ablate --family hops" + data + " --dim 8 --epochs 2 --seeds 1,2 --out-dir " + run_dir(k).string(); },
       [&](int k) { return run_dir(k) / "ablation_hops.json"; }},
  };

  std::string detail;
  bool ok = cli("generate --method markov_real --count 120 --seed 5 --out " + real, dir / "log.txt") == 0 &&
            cli("generate --method random --count 120 --seed 6 --corpus " + real + " --out " + fake, dir / "log.txt") == 0;
  if (!ok) detail = "could not prepare inputs: " + slurp(dir / "log.txt");
  for (const auto& c : commands) {
    if (!ok) break;
    std::string bytes[2];
    for (int k = 0; k < 2; ++k) {
      fs::create_directories(run_dir(k));
      if (cli(c.args(k), dir / "log.txt") != 0) {
        ok = false;
        detail += c.name + " failed: " + slurp(dir / "log.txt") + "; ";
        break;
      }
      bytes[k] = slurp(c.product(k));
    }
    if (!ok) break;
    const bool same = !bytes[0].empty() && bytes[0] == bytes[1];
    ok = ok && same;
    detail += c.name + (same ? " identical" : " DIFFERS") + ", ";
  }
  fs::remove_all(dir);
  report("determinism", ok, detail + "two runs each with identical config and seed");
}

}  // namespace

int main() {
  tune_allocator();
  std::cout << "acceptance suite (criteria run in order; long tasks print when done)" << std::endl;
  const auto t0 = Clock::now();
  try {
    gradient_check();
    overfit_sanity();
    graph_oracle();
    determinism();
    easy_separation();
    swapping_tasks();
    leakage_guard();
  } catch (const std::exception& e) {
    std::cout << "FAIL suite aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << "total " << fmt(seconds_since(t0), 1) << " s, " << failures << " failing criteria" << std::endl;
  return failures == 0 ? 0 : 1;
}

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

class Workdir {
 public:
  Workdir() : path_(fs::temp_directory_path() / ("careerscape_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~Workdir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs the command-line tool with stdout and stderr captured together.
Outcome run(const Workdir& w, const std::string& args) {
  const auto log = w / "cli_output.txt";
  const std::string cmd = std::string(CAREERSCAPE_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.output = slurp(log);
  return o;
}

const std::string kSmallModel = " --dim 8 --epochs 2 --hops 1 --max-added-nodes 16 --seed 3";

}  // namespace

TEST_CASE("command-line tool") {
  Workdir w;
  const auto real = w / "real.jsonl", fake = w / "fake.jsonl";

  SUBCASE("usage errors") {
    CHECK(run(w, "--version").code == 0);
    CHECK(run(w, "--help").code == 0);
    CHECK(run(w, "").code == 1);
    CHECK(run(w, "frobnicate").code == 1);
    CHECK(run(w, "generate --method random").code == 1);
    CHECK(run(w, "generate --method nonsense --count 3").code == 1);
    CHECK(run(w, "generate --method random --count 3").code == 1);  // needs --corpus
    CHECK(run(w, "train --dim 8").code == 1);                      // no corpus configured
  }

  SUBCASE("data errors") {
    { std::ofstream(real) << "{\"id\": \"x\", \"entries\": [{\"title\": \"A\", \"company\": \"B\", \"duration_months\": 0}]}\n"; }
    const auto o = run(w, "stats --corpus " + real);
    CHECK(o.code == 2);
    CHECK(o.output.find("x") != std::string::npos);
    CHECK(run(w, "stats --corpus " + w / "missing.jsonl").code == 2);
    { std::ofstream(real) << "not json\n"; }
    CHECK(run(w, "build-graph --real " + real).code == 2);
  }

  SUBCASE("generate, build, train, evaluate") {
    REQUIRE(run(w, "generate --method markov_real --count 60 --seed 11 --out " + real).code == 0);
    REQUIRE(run(w, "generate --method random --count 60 --seed 12 --corpus " + real + " --out " + fake).code == 0);
    std::ifstream in(real);
    std::string first;
    std::getline(in, first);
    const auto rec = nlohmann::json::parse(first);
    CHECK(rec.at("label") == 0);
    CHECK(rec.contains("stamp"));

    const auto again = w / "real2.jsonl";
    REQUIRE(run(w, "generate --method markov_real --count 60 --seed 11 --out " + again).code == 0);
    CHECK(slurp(real) == slurp(again));

    const auto stats = run(w, "stats --corpus " + real);
    CHECK(stats.code == 0);
    CHECK(nlohmann::json::parse(stats.output).contains("resume_count"));

    const auto graph = w / "graph.json";
    REQUIRE(run(w, "build-graph --real " + real + " --out " + graph).code == 0);
    const auto gdoc = nlohmann::json::parse(slurp(graph));
    CHECK(gdoc.contains("stamp"));
    CHECK(run(w, "build-graph --real " + fake).code == 2);  // synthetic resumes are refused

    const std::string data = " --real " + real + " --fake random=" + fake;
    REQUIRE(run(w, "train" + data + kSmallModel + " --out-dir " + (w / "a")).code == 0);
    REQUIRE(run(w, "train" + data + kSmallModel + " --out-dir " + (w / "b")).code == 0);
    const auto ma = slurp(w.path() / "a" / "metrics.json");
    CHECK_FALSE(ma.empty());
    CHECK(ma == slurp(w.path() / "b" / "metrics.json"));
    CHECK(fs::exists(w.path() / "a" / "model.ckpt"));
    CHECK(fs::exists(w.path() / "a" / "train_log.jsonl"));
    CHECK(fs::exists(w.path() / "a" / "config.json"));
    const auto metrics = nlohmann::json::parse(ma);
    for (const char* key : {"run_id", "spec_hash", "seed", "tool_version", "f1_positive", "f1_micro", "confusion"})
      CHECK(metrics.contains(key));

    // Re-running from the saved config reproduces the metrics.
    REQUIRE(run(w, "train --config " + (w / "a/config.json") + " --out-dir " + (w / "c")).code == 0);
    CHECK(slurp(w.path() / "c" / "metrics.json") == ma);

    const auto ev1 = run(w, "evaluate --checkpoint " + (w / "a/model.ckpt") + " --test " + fake);
    const auto ev2 = run(w, "evaluate --checkpoint " + (w / "a/model.ckpt") + " --test " + fake);
    CHECK(ev1.code == 0);
    CHECK(ev1.output == ev2.output);
    const auto edoc = nlohmann::json::parse(ev1.output);
    CHECK(edoc.at("confusion").at("tp").get<int>() + edoc.at("confusion").at("fn").get<int>() == 60);

    // A checkpoint cannot be evaluated on resumes that built its global graph.
    CHECK(run(w, "evaluate --checkpoint " + (w / "a/model.ckpt") + " --test " + real).code == 2);
  }
}

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "careerscape/error.hpp"
#include "careerscape/generators.hpp"
#include "unit/oracles.hpp"

using namespace careerscape;
using oracle::make_resume;

namespace {

// Mean distinct company transitions of the seed-fixed corpora below, computed once and frozen.
constexpr double kPinnedRealTransitions = 2.0725;
constexpr double kPinnedRandomTransitions = 4.07;

GeneratorConfig config(GeneratorMethod m, std::int64_t count, std::uint64_t seed = 42) {
  GeneratorConfig c;
  c.method = m;
  c.count = count;
  c.seed = seed;
  return c;
}

std::string dump(const std::vector<Resume>& rs, const Vocabularies& v) {
  std::ostringstream out;
  write_resumes(out, rs, v);
  return out.str();
}

/// 50 resumes over skewed title/company/duration marginals.
std::vector<Resume> toy_corpus(Vocabularies& v) {
  std::vector<Resume> rs;
  for (int i = 0; i < 50; ++i) {
    std::vector<oracle::EntrySpec> es;
    const int k = 1 + i % 3;
    for (int j = 0; j < k; ++j)
      es.push_back({"t" + std::to_string((i + j) % 5 == 0 ? 0 : (i * 7 + j) % 6),
                    "c" + std::to_string((i * 3 + j) % 4 == 0 ? 0 : (i + 2 * j) % 8), 1 + (i * 5 + j) % 30});
    rs.push_back(make_resume(v, "r" + std::to_string(i), 0, es));
  }
  return rs;
}

/// Pearson chi-square of observed counts against expected proportions.
double chi_square(const std::map<std::int32_t, double>& observed, const std::map<std::int32_t, double>& expected_p,
                  double n) {
  double chi = 0.0;
  for (const auto& [k, p] : expected_p) {
    const double e = p * n;
    const double o = observed.contains(k) ? observed.at(k) : 0.0;
    chi += (o - e) * (o - e) / e;
  }
  return chi;
}

CareerSchema ladder_schema(double promote) {
  CareerSchema s;
  CareerTrack t;
  t.name = "ladder";
  t.industry = "x";
  t.titles = {"L1", "L2", "L3"};
  t.transitions = {{0, promote, 0, 1 - promote}, {0, 0, promote, 1 - promote}, {0, 0, 0, 1}};
  t.start = {1, 0, 0};
  t.duration_log_mu = {std::log(12.0), std::log(24.0), std::log(36.0)};
  t.duration_log_sigma = {0.3, 0.3, 0.3};
  s.tracks = {t};
  s.companies = {{"A", "x", 0}, {"B", "x", 1}};
  return s;
}

}  // namespace

TEST_CASE("generator config validation") {
  auto c = config(GeneratorMethod::random, 1);
  CHECK_NOTHROW(c.validate());
  c.count = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.count = 1;
  c.popular_top_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.popular_top_fraction = 1.0;
  c.lognormal_sigma = 0.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  CHECK(generator_method_from_string("swapping") == GeneratorMethod::swapping);
  CHECK_THROWS_AS(generator_method_from_string("llm"), UsageError);
}

TEST_CASE("random generator with degenerate support repeats the single triple") {
  Vocabularies v;
  std::vector<Resume> real = {make_resume(v, "r", 0, {{"T", "C", 7}, {"T", "C", 7}})};
  const auto fakes = gen_random(real, config(GeneratorMethod::random, 20));
  for (const auto& f : fakes) {
    CHECK(f.label == 1);
    CHECK(f.source == "random");
    REQUIRE(f.entries.size() == 2);
    for (const auto& e : f.entries) CHECK(e == real[0].entries[0]);
  }
  CHECK_THROWS_AS(gen_random(std::vector<Resume>{}, config(GeneratorMethod::random, 1)), DataError);
}

TEST_CASE("every generator is deterministic under its seed") {
  Vocabularies v;
  const auto real = toy_corpus(v);
  for (auto m : {GeneratorMethod::random, GeneratorMethod::popular, GeneratorMethod::swapping,
                 GeneratorMethod::replacing}) {
    const auto a = generate(real, config(m, 40));
    const auto b = generate(real, config(m, 40));
    const auto c = generate(real, config(m, 40, 43));
    CHECK(dump(a, v) == dump(b, v));
    CHECK(dump(a, v) != dump(c, v));
    for (const auto& r : a) CHECK(r.label == 1);
  }
  const auto schema = default_career_schema();
  Vocabularies v1, v2;
  CHECK(dump(gen_markov_real(config(GeneratorMethod::markov_real, 30), schema, v1), v1) ==
        dump(gen_markov_real(config(GeneratorMethod::markov_real, 30), schema, v2), v2));
}

TEST_CASE("random generator marginals match the corpus within a chi-square bound") {
  Vocabularies v;
  const auto real = toy_corpus(v);
  const auto fakes = gen_random(real, config(GeneratorMethod::random, 1000, 9));
  std::map<std::int32_t, double> pt, pc, ot, oc, pl, ol;
  double total = 0.0;
  for (const auto& r : real) {
    pl[static_cast<std::int32_t>(r.entries.size())] += 1.0 / static_cast<double>(real.size());
    for (const auto& e : r.entries) {
      pt[e.title_id] += 1.0;
      pc[e.company_id] += 1.0;
      total += 1.0;
    }
  }
  for (auto& [k, x] : pt) x /= total;
  for (auto& [k, x] : pc) x /= total;
  double n = 0.0;
  for (const auto& r : fakes) {
    ol[static_cast<std::int32_t>(r.entries.size())] += 1.0;
    for (const auto& e : r.entries) {
      ot[e.title_id] += 1.0;
      oc[e.company_id] += 1.0;
      n += 1.0;
    }
  }
  // 99.9% chi-square quantiles: df 5 -> 20.5, df 7 -> 24.3, df 2 -> 13.8.
  CHECK(pt.size() == 6);
  CHECK(pc.size() == 8);
  CHECK(chi_square(ot, pt, n) < 20.5);
  CHECK(chi_square(oc, pc, n) < 24.3);
  CHECK(chi_square(ol, pl, 1000.0) < 13.8);
}

TEST_CASE("popular generator draws only from the top pool") {
  Vocabularies v;
  std::vector<Resume> real;
  // One company holds 90% of the entries; ten companies, so the 10% pool is {Big}.
  for (int i = 0; i < 90; ++i) real.push_back(make_resume(v, "b" + std::to_string(i), 0, {{"T", "Big", 10}}));
  for (int i = 0; i < 9; ++i)
    real.push_back(make_resume(v, "s" + std::to_string(i), 0, {{"T" + std::to_string(i), "Small" + std::to_string(i), 10}}));
  auto c = config(GeneratorMethod::popular, 200);
  c.popular_top_fraction = 0.1;
  const auto big = *v.companies.find("Big");
  for (const auto& r : gen_popular(real, c))
    for (const auto& e : r.entries) CHECK(e.company_id == big);

  c.popular_top_fraction = 1.0;
  std::set<std::int32_t> seen;
  c.count = 3000;
  for (const auto& r : gen_popular(real, c))
    for (const auto& e : r.entries) seen.insert(e.company_id);
  CHECK(seen.size() == 10);
}

TEST_CASE("popular ranking breaks ties by vocabulary index") {
  Vocabularies v;
  std::vector<Resume> real = {make_resume(v, "a", 0, {{"T", "Z", 3}, {"T", "Y", 3}}),
                              make_resume(v, "b", 0, {{"T", "Z", 3}, {"T", "Y", 3}})};
  auto c = config(GeneratorMethod::popular, 50);
  c.popular_top_fraction = 0.5;
  const auto z = *v.companies.find("Z");  // interned first
  for (const auto& r : gen_popular(real, c))
    for (const auto& e : r.entries) CHECK(e.company_id == z);
}

TEST_CASE("popular durations follow the log-normal") {
  Vocabularies v;
  const auto real = toy_corpus(v);
  auto c = config(GeneratorMethod::popular, 10000, 5);
  c.lognormal_mu = 3.0;
  c.lognormal_sigma = 0.5;
  double sum = 0.0, n = 0.0;
  for (const auto& r : gen_popular(real, c))
    for (const auto& e : r.entries) {
      CHECK(e.duration_months >= 1);
      sum += std::log(static_cast<double>(e.duration_months));
      n += 1.0;
    }
  CHECK(std::abs(sum / n - 3.0) < 0.05);
}

TEST_CASE("swapping exchanges two companies and nothing else") {
  Vocabularies v;
  SUBCASE("the only possible swap") {
    std::vector<Resume> real = {make_resume(v, "r", 0, {{"A", "X", 5}, {"B", "Y", 6}})};
    for (const auto& f : gen_swapping(real, config(GeneratorMethod::swapping, 10))) {
      CHECK(v.companies.key(f.entries[0].company_id) == "Y");
      CHECK(v.companies.key(f.entries[1].company_id) == "X");
      CHECK(v.titles.key(f.entries[0].title_id) == "A");
      CHECK(f.entries[1].duration_months == 6);
    }
  }
  SUBCASE("titles, durations and the company multiset are preserved") {
    const auto real = toy_corpus(v);
    std::map<std::string, const Resume*> by_entries;
    for (const auto& f : gen_swapping(real, config(GeneratorMethod::swapping, 300))) {
      bool found = false;
      for (const auto& r : real) {
        if (r.entries.size() != f.entries.size()) continue;
        bool same = true;
        std::multiset<std::int32_t> a, b;
        for (std::size_t i = 0; i < r.entries.size(); ++i) {
          same = same && r.entries[i].title_id == f.entries[i].title_id &&
                 r.entries[i].duration_months == f.entries[i].duration_months;
          a.insert(r.entries[i].company_id);
          b.insert(f.entries[i].company_id);
        }
        if (same && a == b) found = true;
      }
      CHECK(found);
      CHECK(f.entries.size() >= 2);
    }
  }
  SUBCASE("equal companies fall back after ten attempts and are counted") {
    std::vector<Resume> real = {make_resume(v, "r", 0, {{"A", "X", 5}, {"B", "X", 6}})};
    GeneratorReport report;
    const auto out = gen_swapping(real, config(GeneratorMethod::swapping, 4), &report);
    CHECK(report.swap_fallbacks == 4);
    CHECK(out[0].entries == real[0].entries);
  }
  SUBCASE("no eligible resume") {
    std::vector<Resume> real = {make_resume(v, "r", 0, {{"A", "X", 5}})};
    CHECK_THROWS_AS(gen_swapping(real, config(GeneratorMethod::swapping, 1)), DataError);
  }
}

TEST_CASE("swapping chooses position pairs uniformly") {
  Vocabularies v;
  std::vector<Resume> real = {make_resume(v, "r", 0, {{"A", "X", 1}, {"B", "Y", 1}, {"C", "Z", 1}})};
  std::map<std::string, int> pairs;
  const int n = 1000;
  for (const auto& f : gen_swapping(real, config(GeneratorMethod::swapping, n, 17))) {
    std::string moved;
    for (std::size_t i = 0; i < 3; ++i)
      if (f.entries[i].company_id != real[0].entries[i].company_id) moved += std::to_string(i);
    ++pairs[moved];
  }
  REQUIRE(pairs.size() == 3);
  const double p = 1.0 / 3.0, sd = std::sqrt(n * p * (1 - p));
  for (const auto& [k, c] : pairs) CHECK(std::abs(c - n * p) < 3 * sd);
}

TEST_CASE("replacing changes exactly one company to an alternative") {
  Vocabularies v;
  SUBCASE("single alternative") {
    std::vector<Resume> real = {make_resume(v, "a", 0, {{"A", "X", 5}}), make_resume(v, "b", 0, {{"B", "Y", 5}})};
    for (const auto& f : gen_replacing(real, config(GeneratorMethod::replacing, 30))) {
      REQUIRE(f.entries.size() == 1);
      const auto t = v.titles.key(f.entries[0].title_id);
      CHECK(v.companies.key(f.entries[0].company_id) == (t == "A" ? "Y" : "X"));
    }
  }
  SUBCASE("one field differs from the source") {
    const auto real = toy_corpus(v);
    for (const auto& f : gen_replacing(real, config(GeneratorMethod::replacing, 200))) {
      // Some source resume lies at distance exactly one; another resume may coincide.
      bool found = false;
      for (const auto& r : real) {
        if (r.entries.size() != f.entries.size()) continue;
        int diff = 0;
        bool titles_same = true;
        for (std::size_t i = 0; i < r.entries.size(); ++i) {
          diff += r.entries[i].company_id != f.entries[i].company_id;
          titles_same = titles_same && r.entries[i].title_id == f.entries[i].title_id &&
                        r.entries[i].duration_months == f.entries[i].duration_months;
        }
        found = found || (titles_same && diff == 1);
      }
      CHECK(found);
    }
  }
  SUBCASE("replacement is uniform over alternatives") {
    std::vector<Resume> real = {make_resume(v, "a", 0, {{"A", "W", 5}}),
                                make_resume(v, "b", 0, {{"B", "X", 5}, {"B", "X", 5}, {"B", "Y", 5}}),
                                make_resume(v, "c", 0, {{"C", "Z", 5}})};
    // Enumerate: for resume a the alternatives are {X, Y, Z}, each 1/3.
    std::map<std::string, int> counts;
    int n = 0;
    for (const auto& f : gen_replacing(real, config(GeneratorMethod::replacing, 3000, 3))) {
      if (v.titles.key(f.entries[0].title_id) != "A") continue;
      ++counts[v.companies.key(f.entries[0].company_id)];
      ++n;
    }
    REQUIRE(counts.size() == 3);
    const double p = 1.0 / 3.0, sd = std::sqrt(n * p * (1 - p));
    for (const auto& [k, c] : counts) CHECK(std::abs(c - n * p) < 3 * sd);
  }
  SUBCASE("no alternative") {
    std::vector<Resume> real = {make_resume(v, "a", 0, {{"A", "X", 5}}), make_resume(v, "b", 0, {{"B", "X", 5}})};
    CHECK_THROWS_AS(gen_replacing(real, config(GeneratorMethod::replacing, 1)), DataError);
    CHECK_THROWS_AS(gen_replacing(std::vector<Resume>(real.begin(), real.begin() + 1),
                                  config(GeneratorMethod::replacing, 1)),
                    DataError);
  }
}

TEST_CASE("markov real with certain promotion walks the whole ladder") {
  Vocabularies v;
  const auto rs = gen_markov_real(config(GeneratorMethod::markov_real, 50), ladder_schema(1.0), v);
  for (const auto& r : rs) {
    CHECK(r.label == 0);
    REQUIRE(r.entries.size() == 3);
    CHECK(v.titles.key(r.entries[0].title_id) == "L1");
    CHECK(v.titles.key(r.entries[1].title_id) == "L2");
    CHECK(v.titles.key(r.entries[2].title_id) == "L3");
  }
}

TEST_CASE("markov real level transitions match the schema") {
  Vocabularies v;
  const auto schema = ladder_schema(0.6);
  const auto rs = gen_markov_real(config(GeneratorMethod::markov_real, 10000, 77), schema, v);
  // Counts of (rung -> rung or stop).
  std::map<std::pair<int, int>, double> counts;
  std::map<int, double> from;
  auto rung = [&](std::int32_t t) { return v.titles.key(t)[1] - '1'; };
  for (const auto& r : rs) {
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      const int a = rung(r.entries[i].title_id);
      const int b = i + 1 < r.entries.size() ? rung(r.entries[i + 1].title_id) : 3;
      counts[{a, b}] += 1.0;
      from[a] += 1.0;
    }
  }
  const auto& t = schema.tracks[0].transitions;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 4; ++b) CHECK(std::abs(counts[{a, b}] / from[a] - t[a][b]) < 0.02);
}

TEST_CASE("schema validation rejects absorbing rows") {
  auto s = ladder_schema(0.5);
  s.tracks[0].transitions[1] = {0, 0, 0, 0};
  CHECK_THROWS_AS(s.validate(), DataError);
  CHECK_NOTHROW(default_career_schema().validate());
  const auto d = default_career_schema();
  CHECK(CareerSchema::from_json(d.to_json()).to_json() == d.to_json());
}

TEST_CASE("markov real respects the minimum career length") {
  Vocabularies v;
  auto s = ladder_schema(0.5);
  s.min_entries = 2;
  for (const auto& r : gen_markov_real(config(GeneratorMethod::markov_real, 500), s, v))
    CHECK(r.entries.size() >= 2);
}

TEST_CASE("ingested resumes are forced synthetic and tagged") {
  const auto dir = std::filesystem::temp_directory_path() / "careerscape_gen_tests";
  std::filesystem::create_directories(dir);
  const auto p = dir / "llm.jsonl";
  std::ofstream(p) << R"({"id":"g1","label":0,"source":"x","entries":[{"title":"T","company":"C","duration_months":3}]})"
                   << "\n"
                   << R"({"id":"g2","label":1,"source":"x","entries":[{"title":"T","company":"D","duration_months":4}]})"
                   << "\n";
  Vocabularies v;
  const auto a = ingest_external(p, "gpt", v);
  const auto b = ingest_external(p, "agent", v);
  REQUIRE(a.size() == 2);
  for (const auto& r : a) {
    CHECK(r.label == 1);
    CHECK(r.source == "gpt");
  }
  CHECK(b[0].source == "agent");
}

TEST_CASE("corpus statistics") {
  Vocabularies v;
  SUBCASE("single one-job resume") {
    const auto s = corpus_stats(std::vector<Resume>{make_resume(v, "a", 0, {{"T", "C", 12}})});
    CHECK(s.job_density == 1.0);
    CHECK(s.duration_mean == 12.0);
    CHECK(s.duration_std == 0.0);
    CHECK(s.title_diversity == 1.0);
    CHECK(s.company_diversity == 1.0);
    CHECK(s.transition_count == 0.0);
  }
  SUBCASE("two identical resumes") {
    const auto r = make_resume(v, "a", 0, {{"T", "C", 10}, {"U", "D", 20}, {"T", "C", 30}});
    const auto s = corpus_stats(std::vector<Resume>{r, r});
    // Six entries, two distinct titles and companies; C->D and D->C are distinct transitions.
    CHECK(s.job_density == 3.0);
    CHECK(s.title_diversity == doctest::Approx(2.0 / 6.0));
    CHECK(s.company_diversity == doctest::Approx(2.0 / 6.0));
    CHECK(s.duration_mean == doctest::Approx(20.0));
    CHECK(s.duration_std == doctest::Approx(std::sqrt(200.0 / 3.0)));
    CHECK(s.transition_count == 2.0);
  }
  CHECK_THROWS_AS(corpus_stats(std::vector<Resume>{}), DataError);
}

TEST_CASE("random fakes have more company transitions than the oracle corpus") {
  Vocabularies v;
  const auto real = gen_markov_real(config(GeneratorMethod::markov_real, 400, 101), default_career_schema(), v);
  const auto fake = gen_random(real, config(GeneratorMethod::random, 400, 201));
  const auto sr = corpus_stats(real), sf = corpus_stats(fake);
  CHECK(sf.transition_count > sr.transition_count);
  CHECK(sr.transition_count == doctest::Approx(kPinnedRealTransitions).epsilon(1e-12));
  CHECK(sf.transition_count == doctest::Approx(kPinnedRandomTransitions).epsilon(1e-12));
}

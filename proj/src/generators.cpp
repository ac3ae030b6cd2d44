#include "careerscape/generators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "careerscape/error.hpp"
#include "careerscape/hashing.hpp"

namespace careerscape {

using nlohmann::json;

std::string_view to_string(GeneratorMethod method) {
  switch (method) {
    case GeneratorMethod::random: return "random";
    case GeneratorMethod::popular: return "popular";
    case GeneratorMethod::swapping: return "swapping";
    case GeneratorMethod::replacing: return "replacing";
    case GeneratorMethod::markov_real: return "markov_real";
  }
  return "?";
}

GeneratorMethod generator_method_from_string(std::string_view name) {
  for (auto m : {GeneratorMethod::random, GeneratorMethod::popular, GeneratorMethod::swapping,
                 GeneratorMethod::replacing, GeneratorMethod::markov_real})
    if (to_string(m) == name) return m;
  throw UsageError("unknown generator method '" + std::string(name) + "'");
}

void GeneratorConfig::validate() const {
  if (count < 1) throw UsageError("generator count must be >= 1");
  if (!(popular_top_fraction > 0.0 && popular_top_fraction <= 1.0))
    throw UsageError("popular_top_fraction must be in (0, 1]");
  if (lognormal_sigma && !(*lognormal_sigma > 0.0))
    throw UsageError("lognormal_sigma must be > 0");
  if (n_swaps < 1) throw UsageError("n_swaps must be >= 1");
}

namespace {

using Engine = std::mt19937_64;

std::size_t uniform_index(Engine& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::string output_id(const GeneratorConfig& cfg, std::int64_t i) {
  const std::string prefix = cfg.id_prefix.empty() ? std::string(to_string(cfg.method)) : cfg.id_prefix;
  return prefix + "-" + std::to_string(i);
}

/// Runs `make(i, rng)` for every output index with an independent substream per index.
template <typename Make>
std::vector<Resume> generate_indexed(const GeneratorConfig& cfg, Make make) {
  std::vector<Resume> out(static_cast<std::size_t>(cfg.count));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < cfg.count; ++i) {
    Engine rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    Resume r = make(i, rng);
    r.id = output_id(cfg, i);
    r.label = 1;
    r.source = std::string(to_string(cfg.method));
    out[static_cast<std::size_t>(i)] = std::move(r);
  }
  return out;
}

void require_nonempty(std::span<const Resume> real, const char* who) {
  if (real.empty()) throw DataError(std::string(who) + ": real corpus is empty");
}

struct EntityPools {
  std::vector<std::size_t> lengths;
  std::vector<std::int32_t> titles;
  std::vector<std::int32_t> companies;
  std::vector<std::int32_t> durations;
};

EntityPools collect_pools(std::span<const Resume> real) {
  EntityPools p;
  for (const auto& r : real) {
    p.lengths.push_back(r.entries.size());
    for (const auto& e : r.entries) {
      p.titles.push_back(e.title_id);
      p.companies.push_back(e.company_id);
      p.durations.push_back(e.duration_months);
    }
  }
  return p;
}

/// Ids ranked by (count desc, id asc), truncated to ceil(fraction * distinct).
std::vector<std::int32_t> popular_pool(const std::vector<std::int32_t>& occurrences, double fraction) {
  std::map<std::int32_t, std::int64_t> counts;
  for (auto id : occurrences) ++counts[id];
  std::vector<std::pair<std::int32_t, std::int64_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ranked.size()) - 1e-12));
  if (keep == 0) throw DataError("popular: top fraction yields an empty entity pool");
  std::vector<std::int32_t> pool;
  for (std::size_t i = 0; i < keep && i < ranked.size(); ++i) pool.push_back(ranked[i].first);
  return pool;
}

}  // namespace

std::vector<Resume> gen_random(std::span<const Resume> real, const GeneratorConfig& cfg) {
  cfg.validate();
  require_nonempty(real, "random");
  const auto pools = collect_pools(real);
  return generate_indexed(cfg, [&](std::int64_t, Engine& rng) {
    Resume r;
    const auto k = pools.lengths[uniform_index(rng, pools.lengths.size())];
    for (std::size_t j = 0; j < k; ++j) {
      JobEntry e;
      e.title_id = pools.titles[uniform_index(rng, pools.titles.size())];
      e.company_id = pools.companies[uniform_index(rng, pools.companies.size())];
      e.duration_months = pools.durations[uniform_index(rng, pools.durations.size())];
      r.entries.push_back(e);
    }
    return r;
  });
}

std::vector<Resume> gen_popular(std::span<const Resume> real, const GeneratorConfig& cfg) {
  cfg.validate();
  require_nonempty(real, "popular");
  const auto pools = collect_pools(real);
  const auto titles = popular_pool(pools.titles, cfg.popular_top_fraction);
  const auto companies = popular_pool(pools.companies, cfg.popular_top_fraction);

  double mu = 0.0, sigma = 0.0;
  {
    double sum = 0.0, sum2 = 0.0;
    for (auto d : pools.durations) {
      const double l = std::log(static_cast<double>(d));
      sum += l;
      sum2 += l * l;
    }
    const double n = static_cast<double>(pools.durations.size());
    mu = sum / n;
    sigma = std::sqrt(std::max(0.0, sum2 / n - mu * mu));
  }
  if (cfg.lognormal_mu) mu = *cfg.lognormal_mu;
  if (cfg.lognormal_sigma) sigma = *cfg.lognormal_sigma;
  sigma = std::max(sigma, 1e-9);

  return generate_indexed(cfg, [&](std::int64_t, Engine& rng) {
    Resume r;
    std::normal_distribution<double> log_duration(mu, sigma);
    const auto k = pools.lengths[uniform_index(rng, pools.lengths.size())];
    for (std::size_t j = 0; j < k; ++j) {
      JobEntry e;
      e.title_id = titles[uniform_index(rng, titles.size())];
      e.company_id = companies[uniform_index(rng, companies.size())];
      const double months = std::round(std::exp(log_duration(rng)));
      e.duration_months = static_cast<std::int32_t>(std::clamp(months, 1.0, 1.0e6));
      r.entries.push_back(e);
    }
    return r;
  });
}

std::vector<Resume> gen_swapping(std::span<const Resume> real, const GeneratorConfig& cfg,
                                 GeneratorReport* report) {
  cfg.validate();
  std::vector<const Resume*> eligible;
  for (const auto& r : real)
    if (r.entries.size() >= 2) eligible.push_back(&r);
  if (eligible.empty()) throw DataError("swapping: no resume with at least two entries");

  constexpr int kAttempts = 10;
  std::vector<std::int64_t> fallbacks(static_cast<std::size_t>(cfg.count), 0);
  auto out = generate_indexed(cfg, [&](std::int64_t i, Engine& rng) {
    Resume r = *eligible[uniform_index(rng, eligible.size())];
    const std::size_t n = r.entries.size();
    for (int s = 0; s < cfg.n_swaps; ++s) {
      bool swapped = false;
      for (int attempt = 0; attempt < kAttempts && !swapped; ++attempt) {
        // Uniform over unordered position pairs.
        const std::size_t a = uniform_index(rng, n);
        std::size_t b = uniform_index(rng, n - 1);
        if (b >= a) ++b;
        auto& ca = r.entries[a].company_id;
        auto& cb = r.entries[b].company_id;
        if (ca == cb) continue;
        std::swap(ca, cb);
        swapped = true;
      }
      if (!swapped) ++fallbacks[static_cast<std::size_t>(i)];
    }
    return r;
  });
  if (report) report->swap_fallbacks += std::accumulate(fallbacks.begin(), fallbacks.end(), std::int64_t{0});
  return out;
}

std::vector<Resume> gen_replacing(std::span<const Resume> real, const GeneratorConfig& cfg) {
  cfg.validate();
  if (real.size() < 2) throw DataError("replacing: corpus needs at least two resumes");

  // resumes_with[c] = number of resumes containing company c.
  std::map<std::int32_t, std::int64_t> resumes_with;
  std::vector<std::set<std::int32_t>> own(real.size());
  for (std::size_t i = 0; i < real.size(); ++i) {
    for (const auto& e : real[i].entries) own[i].insert(e.company_id);
    for (auto c : own[i]) ++resumes_with[c];
  }
  auto alternatives = [&](std::size_t resume, std::int32_t original) {
    std::vector<std::int32_t> alt;
    for (const auto& [c, n] : resumes_with) {
      if (c == original) continue;
      if (n - (own[resume].contains(c) ? 1 : 0) > 0) alt.push_back(c);
    }
    return alt;
  };
  bool any = false;
  for (std::size_t i = 0; i < real.size() && !any; ++i)
    for (auto c : own[i])
      if (!alternatives(i, c).empty()) {
        any = true;
        break;
      }
  if (!any) throw DataError("replacing: no alternative company exists in the rest of the corpus");

  return generate_indexed(cfg, [&](std::int64_t, Engine& rng) {
    for (;;) {
      const std::size_t src = uniform_index(rng, real.size());
      Resume r = real[src];
      const std::size_t pos = uniform_index(rng, r.entries.size());
      const auto alt = alternatives(src, r.entries[pos].company_id);
      if (alt.empty()) continue;
      r.entries[pos].company_id = alt[uniform_index(rng, alt.size())];
      return r;
    }
  });
}

// ---------------------------------------------------------------------------

void CareerSchema::validate() const {
  if (tracks.empty()) throw DataError("schema: no career tracks");
  if (companies.empty()) throw DataError("schema: no companies");
  if (max_entries < 1) throw DataError("schema: max_entries must be >= 1");
  if (min_entries < 1 || min_entries > max_entries)
    throw DataError("schema: min_entries must be in [1, max_entries]");
  for (double p : {company_move_prob, same_industry_prob})
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("schema: probabilities must be in [0, 1]");
  for (const auto& t : tracks) {
    const auto n = t.titles.size();
    if (n == 0) throw DataError("schema: track '" + t.name + "' has no titles");
    if (t.transitions.size() != n) throw DataError("schema: track '" + t.name + "' needs one transition row per rung");
    if (t.start.size() != n) throw DataError("schema: track '" + t.name + "' start distribution size mismatch");
    if (t.duration_log_mu.size() != n || t.duration_log_sigma.size() != n)
      throw DataError("schema: track '" + t.name + "' needs per-rung duration parameters");
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = t.transitions[i];
      if (row.size() != n + 1)
        throw DataError("schema: track '" + t.name + "' row " + std::to_string(i) + " must have n+1 columns");
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw DataError("schema: negative transition probability");
        sum += p;
      }
      if (sum <= 0.0)
        throw DataError("schema: track '" + t.name + "' rung " + std::to_string(i) +
                        " is absorbing (all-zero transition row)");
      if (!(t.duration_log_sigma[i] >= 0.0)) throw DataError("schema: negative duration sigma");
    }
    double s = 0.0;
    for (double p : t.start) s += p;
    if (s <= 0.0) throw DataError("schema: track '" + t.name + "' has an all-zero start distribution");
  }
}

json CareerSchema::to_json() const {
  json jt = json::array();
  for (const auto& t : tracks)
    jt.push_back({{"name", t.name}, {"industry", t.industry}, {"titles", t.titles},
                  {"transitions", t.transitions}, {"start", t.start},
                  {"duration_log_mu", t.duration_log_mu}, {"duration_log_sigma", t.duration_log_sigma}});
  json jc = json::array();
  for (const auto& c : companies) jc.push_back({{"name", c.name}, {"industry", c.industry}, {"tier", c.tier}});
  return {{"tracks", jt}, {"companies", jc}, {"company_move_prob", company_move_prob},
          {"same_industry_prob", same_industry_prob}, {"tier_affinity", tier_affinity},
          {"tier_up_bias", tier_up_bias}, {"min_entries", min_entries}, {"max_entries", max_entries}};
}

CareerSchema CareerSchema::from_json(const json& doc) {
  CareerSchema s;
  try {
    for (const auto& jt : doc.at("tracks")) {
      CareerTrack t;
      t.name = jt.at("name").get<std::string>();
      t.industry = jt.value("industry", std::string());
      t.titles = jt.at("titles").get<std::vector<std::string>>();
      t.transitions = jt.at("transitions").get<std::vector<std::vector<double>>>();
      const auto n = t.titles.size();
      t.start = jt.value("start", std::vector<double>{});
      if (t.start.empty() && n > 0) {
        t.start.assign(n, 0.0);
        t.start[0] = 1.0;
      }
      t.duration_log_mu = jt.value("duration_log_mu", std::vector<double>(n, std::log(24.0)));
      t.duration_log_sigma = jt.value("duration_log_sigma", std::vector<double>(n, 0.5));
      s.tracks.push_back(std::move(t));
    }
    for (const auto& jc : doc.at("companies"))
      s.companies.push_back({jc.at("name").get<std::string>(), jc.value("industry", std::string()),
                             jc.value("tier", 0)});
    s.company_move_prob = doc.value("company_move_prob", s.company_move_prob);
    s.same_industry_prob = doc.value("same_industry_prob", s.same_industry_prob);
    s.tier_affinity = doc.value("tier_affinity", s.tier_affinity);
    s.tier_up_bias = doc.value("tier_up_bias", s.tier_up_bias);
    s.min_entries = doc.value("min_entries", s.min_entries);
    s.max_entries = doc.value("max_entries", s.max_entries);
  } catch (const json::exception& e) {
    throw DataError(std::string("schema: ") + e.what());
  }
  s.validate();
  return s;
}

CareerSchema CareerSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

DescriptionMapping CareerSchema::description_mapping() const {
  DescriptionMapping m;
  for (const auto& t : tracks)
    for (std::size_t i = 0; i < t.titles.size(); ++i)
      m.records.emplace_back(t.titles[i], t.titles[i] + ": rung " + std::to_string(i + 1) + " of the " +
                                              t.name + " track in " + t.industry);
  return m;
}

CareerSchema default_career_schema() {
  CareerSchema s;
  s.same_industry_prob = 0.95;
  s.min_entries = 2;
  struct Ladder {
    const char* name;
    const char* industry;
    std::vector<std::string> titles;
  };
  const std::vector<Ladder> ladders = {
      {"software", "technology",
       {"Junior Software Engineer", "Software Engineer", "Senior Software Engineer", "Staff Engineer",
        "Engineering Manager"}},
      {"data", "technology",
       {"Data Analyst", "Data Scientist", "Senior Data Scientist", "Lead Data Scientist", "Head of Data"}},
      {"finance", "finance",
       {"Financial Analyst", "Senior Financial Analyst", "Finance Manager", "Finance Director",
        "Chief Financial Officer"}},
      {"accounting", "finance",
       {"Accounting Clerk", "Staff Accountant", "Senior Accountant", "Accounting Manager", "Controller"}},
      {"nursing", "healthcare",
       {"Nursing Assistant", "Registered Nurse", "Charge Nurse", "Nurse Manager", "Director of Nursing"}},
      {"pharmacy", "healthcare",
       {"Pharmacy Technician", "Staff Pharmacist", "Clinical Pharmacist", "Pharmacy Manager",
        "Director of Pharmacy"}},
      {"store", "retail",
       {"Sales Associate", "Shift Supervisor", "Assistant Store Manager", "Store Manager", "District Manager"}},
      {"merchandising", "retail",
       {"Merchandising Assistant", "Merchandiser", "Senior Merchandiser", "Merchandising Manager",
        "VP of Merchandising"}},
      {"teaching", "education",
       {"Teaching Assistant", "Teacher", "Senior Teacher", "Department Head", "School Principal"}},
      {"admissions", "education",
       {"Admissions Assistant", "Admissions Officer", "Registrar", "Dean of Students", "Provost"}},
      {"production", "manufacturing",
       {"Production Worker", "Machine Operator", "Production Supervisor", "Plant Manager",
        "VP of Operations"}},
      {"quality", "manufacturing",
       {"Quality Inspector", "Quality Technician", "Quality Engineer", "Quality Manager",
        "Director of Quality"}},
      {"warehouse", "logistics",
       {"Warehouse Associate", "Forklift Operator", "Warehouse Supervisor", "Warehouse Manager",
        "Distribution Director"}},
      {"transport", "logistics",
       {"Dispatcher", "Logistics Coordinator", "Logistics Analyst", "Logistics Manager",
        "Supply Chain Director"}},
      {"kitchen", "hospitality",
       {"Line Cook", "Sous Chef", "Head Chef", "Executive Chef", "Culinary Director"}},
      {"hotel", "hospitality",
       {"Front Desk Agent", "Guest Services Supervisor", "Front Office Manager", "Hotel Manager",
        "General Manager"}},
  };
  for (const auto& ladder : ladders) {
    CareerTrack t;
    t.name = ladder.name;
    t.industry = ladder.industry;
    t.titles = ladder.titles;
    const std::size_t n = t.titles.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(n + 1, 0.0);
      // stay, promote, skip a rung, step down, stop
      row[i] = 0.20;
      if (i + 1 < n) row[i + 1] += 0.50; else row[i] += 0.25;
      if (i + 2 < n) row[i + 2] += 0.05; else row[n] += 0.05;
      if (i >= 1) row[i - 1] += 0.05; else row[i] += 0.05;
      row[n] += 0.15;
      if (i + 1 == n) row[n] += 0.25;
      t.transitions.push_back(std::move(row));
      t.duration_log_mu.push_back(std::log(14.0 + 8.0 * static_cast<double>(i)));
      t.duration_log_sigma.push_back(0.45);
    }
    t.start.assign(n, 0.0);
    t.start[0] = 0.6;
    t.start[1] = 0.3;
    t.start[2] = 0.1;
    s.tracks.push_back(std::move(t));
  }
  const std::vector<std::pair<std::string, std::vector<std::string>>> employers = {
      {"technology", {"Bytecraft", "Cloudpeak", "Nimbus Labs", "Quantix", "Stackwise", "Vertex Systems",
                      "Orbital Software", "Helix Digital", "Pixelgrid", "Datanest", "Codeforge", "Brightbyte"}},
      {"finance", {"Granite Capital", "Northbridge Bank", "Ledgerline", "Summit Trust", "Crescent Partners",
                   "Harbor Financial", "Ironwood Advisors", "Keystone Credit", "Silverleaf Bank", "Beacon Wealth",
                   "Meridian Securities", "Oakmont Capital"}},
      {"healthcare", {"Mercy General", "Riverside Clinic", "St. Anne Hospital", "Lakeside Health",
                      "Cedar Medical Center", "Valley Care", "Northside Pharmacy", "Evergreen Health",
                      "Bayview Hospital", "Pinecrest Clinic", "Hillcrest Medical", "Unity Health"}},
      {"retail", {"Corner Market", "Urban Outfit Co", "Freshway Grocers", "Megamart", "Brightline Stores",
                  "Oakstreet Retail", "Sunny Mart", "Trendhaus", "Homeward Goods", "Bargain Barn",
                  "Parkside Outlet", "Golden Aisle"}},
      {"education", {"Maple Grove School", "Westfield Academy", "Lincoln High", "Riverbend College",
                     "Eastview University", "Hawthorne Institute", "Cedar Ridge School", "Northgate College",
                     "Summit Prep", "Lakeshore Academy", "Bradford University", "Fairview School"}},
      {"manufacturing", {"Ironclad Industries", "Precision Parts Co", "Steelbridge Manufacturing", "Allied Fabrication",
                         "Apex Components", "Titan Assembly", "Forgeworks", "Delta Machining", "Sterling Plastics",
                         "Redline Motors", "Cobalt Tooling", "Union Castings"}},
      {"logistics", {"Swift Freight", "Harborline Shipping", "Crossdock Logistics", "Roadrunner Transport",
                     "Packwell Distribution", "Nexus Supply", "Bluewater Cargo", "Interstate Haulers",
                     "Prime Routes", "Gateway Warehousing", "Polar Express Freight", "Summit Logistics"}},
      {"hospitality", {"Grand Plaza Hotel", "Seaside Resort", "Olive Table", "Copper Kettle", "Riverside Inn",
                       "Skyline Suites", "The Rustic Fork", "Harbor View Hotel", "Bistro Lumiere",
                       "Mountain Lodge", "Cityline Hotels", "Saffron House"}},
  };
  for (const auto& [industry, names] : employers)
    for (std::size_t i = 0; i < names.size(); ++i)
      s.companies.push_back({names[i], industry, static_cast<int>(i * 4 / names.size())});
  return s;
}

namespace {

std::size_t draw_weighted(std::mt19937_64& rng, const std::vector<double>& weights) {
  return std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng);
}

}  // namespace

std::vector<Resume> gen_markov_real(const GeneratorConfig& cfg, const CareerSchema& schema,
                                    Vocabularies& vocab) {
  if (cfg.count < 1) throw UsageError("generator count must be >= 1");
  schema.validate();

  // Interned up front so parallel generation never touches the vocabulary.
  std::vector<std::vector<std::int32_t>> title_ids;
  for (const auto& t : schema.tracks) {
    auto& ids = title_ids.emplace_back();
    for (const auto& title : t.titles) ids.push_back(vocab.titles.intern(title));
  }
  std::vector<std::int32_t> company_ids;
  int max_tier = 0;
  for (const auto& c : schema.companies) {
    company_ids.push_back(vocab.companies.intern(c.name));
    max_tier = std::max(max_tier, c.tier);
  }

  auto employer_weights = [&](const CareerTrack& track, std::size_t rung, bool same_industry,
                              std::optional<std::size_t> current) {
    const double position = track.titles.size() > 1
                                ? static_cast<double>(rung) / static_cast<double>(track.titles.size() - 1)
                                : 0.0;
    const double target = position * max_tier;
    std::vector<double> w(schema.companies.size(), 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < schema.companies.size(); ++c) {
      const auto& co = schema.companies[c];
      if (current && c == *current) continue;
      if ((co.industry == track.industry) != same_industry) continue;
      double weight = std::exp(-schema.tier_affinity * std::abs(co.tier - target));
      if (current) {
        const int step = co.tier - schema.companies[*current].tier;
        if (step < 0) weight *= std::exp(schema.tier_up_bias * step);
      }
      w[c] = weight;
      total += weight;
    }
    return std::pair{w, total};
  };

  auto pick_employer = [&](std::mt19937_64& rng, const CareerTrack& track, std::size_t rung,
                           std::optional<std::size_t> current) {
    const bool same = std::bernoulli_distribution(schema.same_industry_prob)(rng);
    auto [w, total] = employer_weights(track, rung, same, current);
    if (total <= 0.0) std::tie(w, total) = employer_weights(track, rung, !same, current);
    if (total <= 0.0) return current.value_or(0);
    return draw_weighted(rng, w);
  };

  std::vector<double> track_weights(schema.tracks.size(), 1.0);
  std::vector<Resume> out(static_cast<std::size_t>(cfg.count));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < cfg.count; ++i) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const std::size_t ti = draw_weighted(rng, track_weights);
    const auto& track = schema.tracks[ti];
    const std::size_t n = track.titles.size();

    Resume r;
    r.id = (cfg.id_prefix.empty() ? std::string("real") : cfg.id_prefix) + "-" + std::to_string(i);
    r.label = 0;
    r.source = "markov_real";
    std::size_t rung = draw_weighted(rng, track.start);
    std::size_t employer = pick_employer(rng, track, rung, std::nullopt);
    for (;;) {
      JobEntry e;
      e.title_id = title_ids[ti][rung];
      e.company_id = company_ids[employer];
      std::normal_distribution<double> dur(track.duration_log_mu[rung], track.duration_log_sigma[rung]);
      e.duration_months = static_cast<std::int32_t>(std::clamp(std::round(std::exp(dur(rng))), 1.0, 600.0));
      r.entries.push_back(e);
      if (static_cast<int>(r.entries.size()) >= schema.max_entries) break;
      std::size_t next;
      if (static_cast<int>(r.entries.size()) < schema.min_entries) {
        auto row = track.transitions[rung];
        row[n] = 0.0;
        // A row that can only stop ends the career early rather than looping forever.
        if (std::all_of(row.begin(), row.end(), [](double p) { return p <= 0.0; })) break;
        next = draw_weighted(rng, row);
      } else {
        next = draw_weighted(rng, track.transitions[rung]);
      }
      if (next == n) break;
      rung = next;
      if (std::bernoulli_distribution(schema.company_move_prob)(rng))
        employer = pick_employer(rng, track, rung, employer);
    }
    out[static_cast<std::size_t>(i)] = std::move(r);
  }
  return out;
}

std::vector<Resume> ingest_external(const std::filesystem::path& path, std::string_view source_tag,
                                    Vocabularies& vocab) {
  auto resumes = load_resumes(path, vocab, 1);
  for (auto& r : resumes) r.source = std::string(source_tag);
  return resumes;
}

std::vector<Resume> generate(std::span<const Resume> real, const GeneratorConfig& cfg,
                             GeneratorReport* report) {
  switch (cfg.method) {
    case GeneratorMethod::random: return gen_random(real, cfg);
    case GeneratorMethod::popular: return gen_popular(real, cfg);
    case GeneratorMethod::swapping: return gen_swapping(real, cfg, report);
    case GeneratorMethod::replacing: return gen_replacing(real, cfg);
    case GeneratorMethod::markov_real:
      throw UsageError("markov_real needs a schema; call gen_markov_real");
  }
  throw UsageError("unknown generator method");
}

// ---------------------------------------------------------------------------

json CorpusStats::to_json() const {
  return {{"resume_count", resume_count},       {"job_density", job_density},
          {"duration_mean", duration_mean},     {"duration_std", duration_std},
          {"title_diversity", title_diversity}, {"company_diversity", company_diversity},
          {"transition_count", transition_count}};
}

CorpusStats corpus_stats(std::span<const Resume> resumes) {
  if (resumes.empty()) throw DataError("corpus_stats: empty corpus");
  CorpusStats s;
  s.resume_count = resumes.size();
  std::set<std::int32_t> titles, companies;
  double total = 0.0, sum = 0.0, sum2 = 0.0, transitions = 0.0;
  for (const auto& r : resumes) {
    std::set<std::pair<std::int32_t, std::int32_t>> distinct;
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      const auto& e = r.entries[i];
      titles.insert(e.title_id);
      companies.insert(e.company_id);
      sum += e.duration_months;
      sum2 += static_cast<double>(e.duration_months) * e.duration_months;
      total += 1.0;
      if (i > 0 && r.entries[i - 1].company_id != e.company_id)
        distinct.emplace(r.entries[i - 1].company_id, e.company_id);
    }
    transitions += static_cast<double>(distinct.size());
  }
  const double n = static_cast<double>(resumes.size());
  s.job_density = total / n;
  s.duration_mean = sum / total;
  s.duration_std = std::sqrt(std::max(0.0, sum2 / total - s.duration_mean * s.duration_mean));
  s.title_diversity = static_cast<double>(titles.size()) / total;
  s.company_diversity = static_cast<double>(companies.size()) / total;
  s.transition_count = transitions / n;
  return s;
}

}  // namespace careerscape

#include "careerscape/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "careerscape/error.hpp"
#include "careerscape/hashing.hpp"

namespace careerscape {

using nlohmann::json;

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::title: return "title";
    case EntityKind::company: return "company";
    case EntityKind::description: return "description";
  }
  return "?";
}

EntityKind entity_kind_from_string(std::string_view name) {
  if (name == "title") return EntityKind::title;
  if (name == "company") return EntityKind::company;
  if (name == "description") return EntityKind::description;
  throw DataError("unknown node kind '" + std::string(name) + "'");
}

Vocabulary::Vocabulary() {
  keys_.emplace_back(unk_key);
  index_.emplace(std::string(unk_key), unk);
}

std::int32_t Vocabulary::intern(std::string_view key) {
  if (auto it = index_.find(std::string(key)); it != index_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(keys_.size());
  keys_.emplace_back(key);
  index_.emplace(std::string(key), id);
  return id;
}

std::optional<std::int32_t> Vocabulary::find(std::string_view key) const {
  if (auto it = index_.find(std::string(key)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::int32_t Vocabulary::lookup_or_unk(std::string_view key) const {
  return find(key).value_or(unk);
}

const std::string& Vocabulary::key(std::int32_t index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= keys_.size())
    throw DataError("vocabulary index " + std::to_string(index) + " out of range");
  return keys_[static_cast<std::size_t>(index)];
}

const Vocabulary& Vocabularies::of(EntityKind kind) const {
  switch (kind) {
    case EntityKind::title: return titles;
    case EntityKind::company: return companies;
    case EntityKind::description: return descriptions;
  }
  return titles;
}

Vocabulary& Vocabularies::of(EntityKind kind) {
  return const_cast<Vocabulary&>(std::as_const(*this).of(kind));
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void record_error(std::string_view origin, std::size_t line, const std::string& id,
                               const std::string& what) {
  std::ostringstream msg;
  msg << origin << ":" << line;
  if (!id.empty()) msg << " (record '" << id << "')";
  msg << ": " << what;
  throw DataError(msg.str());
}

std::string require_string(const json& obj, const char* field, std::string_view origin,
                           std::size_t line, const std::string& id) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string())
    record_error(origin, line, id, std::string("missing or non-string field '") + field + "'");
  return it->get<std::string>();
}

}  // namespace

std::vector<Resume> parse_resumes(std::istream& in, Vocabularies& vocab,
                                  std::optional<int> expected_label, std::string_view origin) {
  std::vector<Resume> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      record_error(origin, line, "", std::string("malformed JSON: ") + e.what());
    }
    if (!rec.is_object()) record_error(origin, line, "", "record is not a JSON object");

    Resume r;
    r.id = require_string(rec, "id", origin, line, "");
    r.source = rec.contains("source") && rec["source"].is_string() ? rec["source"].get<std::string>()
                                                                   : std::string();
    auto label = rec.find("label");
    if (label == rec.end() || !label->is_number_integer())
      record_error(origin, line, r.id, "missing or non-integer 'label'");
    r.label = label->get<int>();
    if (r.label != 0 && r.label != 1) record_error(origin, line, r.id, "label must be 0 or 1");
    if (expected_label) r.label = *expected_label;

    auto entries = rec.find("entries");
    if (entries == rec.end() || !entries->is_array())
      record_error(origin, line, r.id, "missing 'entries' array");
    if (entries->empty()) record_error(origin, line, r.id, "empty entry list");

    for (const auto& e : *entries) {
      if (!e.is_object()) record_error(origin, line, r.id, "entry is not an object");
      const auto title = require_string(e, "title", origin, line, r.id);
      const auto company = require_string(e, "company", origin, line, r.id);
      auto dur = e.find("duration_months");
      if (dur == e.end() || !dur->is_number_integer())
        record_error(origin, line, r.id, "missing or non-integer 'duration_months'");
      const auto months = dur->get<std::int64_t>();
      if (months < 1)
        record_error(origin, line, r.id,
                     "duration_months must be >= 1 (got " + std::to_string(months) + ")");
      if (title.empty() || company.empty())
        record_error(origin, line, r.id, "empty title or company");
      JobEntry je;
      je.title_id = vocab.titles.intern(title);
      je.company_id = vocab.companies.intern(company);
      je.duration_months = static_cast<std::int32_t>(months);
      if (auto s = e.find("start"); s != e.end() && s->is_string()) je.start = s->get<std::string>();
      if (auto s = e.find("end"); s != e.end() && s->is_string()) je.end = s->get<std::string>();
      r.entries.push_back(std::move(je));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Resume> load_resumes(const std::filesystem::path& path, Vocabularies& vocab,
                                 std::optional<int> expected_label) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open resume file " + path.string());
  return parse_resumes(in, vocab, expected_label, path.string());
}

json resume_to_json(const Resume& resume, const Vocabularies& vocab) {
  json entries = json::array();
  for (const auto& e : resume.entries) {
    json je = {{"title", vocab.titles.key(e.title_id)},
               {"company", vocab.companies.key(e.company_id)},
               {"duration_months", e.duration_months}};
    if (!e.start.empty()) je["start"] = e.start;
    if (!e.end.empty()) je["end"] = e.end;
    entries.push_back(std::move(je));
  }
  return {{"id", resume.id}, {"label", resume.label}, {"source", resume.source},
          {"entries", std::move(entries)}};
}

void write_resumes(std::ostream& out, std::span<const Resume> resumes, const Vocabularies& vocab) {
  for (const auto& r : resumes) out << resume_to_json(r, vocab).dump() << '\n';
}

void save_resumes(const std::filesystem::path& path, std::span<const Resume> resumes,
                  const Vocabularies& vocab) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_resumes(out, resumes, vocab);
}

// ---------------------------------------------------------------------------

std::unordered_map<std::int32_t, std::int64_t> count_company_occurrences(
    std::span<const Resume> resumes) {
  std::unordered_map<std::int32_t, std::int64_t> counts;
  for (const auto& r : resumes)
    for (const auto& e : r.entries) ++counts[e.company_id];
  return counts;
}

std::vector<Resume> filter_by_company_frequency(
    std::span<const Resume> resumes, const std::unordered_map<std::int32_t, std::int64_t>& counts,
    std::int64_t min_occurrences) {
  if (min_occurrences < 1) throw UsageError("min_occurrences must be >= 1");
  std::vector<Resume> kept;
  for (const auto& r : resumes) {
    bool ok = true;
    for (const auto& e : r.entries) {
      auto it = counts.find(e.company_id);
      if (it == counts.end() || it->second < min_occurrences) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(r);
  }
  return kept;
}

std::vector<Resume> filter_by_company_frequency(std::span<const Resume> resumes,
                                                std::int64_t min_occurrences) {
  return filter_by_company_frequency(resumes, count_company_occurrences(resumes), min_occurrences);
}

// ---------------------------------------------------------------------------

void DescriptionTable::set(std::int32_t title_id, std::int32_t description_id, std::string text,
                           std::vector<double> vector) {
  if (title_id < 0 || description_id < 0) throw DataError("negative id in description table");
  if (static_cast<int>(vector.size()) != dim_)
    throw DataError("description vector dimension mismatch: expected " + std::to_string(dim_) +
                    ", got " + std::to_string(vector.size()));
  for (double v : vector)
    if (!std::isfinite(v)) throw DataError("non-finite value in description vector");
  if (static_cast<std::size_t>(title_id) >= by_title_.size()) by_title_.resize(title_id + 1, -1);
  if (by_title_[title_id] != -1) throw DataError("title mapped twice in description table");
  if (texts_.contains(description_id))
    throw DataError("description '" + text + "' mapped from two titles (mapping must be one-to-one)");
  by_title_[title_id] = description_id;
  texts_.emplace(description_id, std::move(text));
  vectors_.emplace(description_id, std::move(vector));
}

bool DescriptionTable::has(std::int32_t title_id) const { return description_of(title_id) >= 0; }

std::int32_t DescriptionTable::description_of(std::int32_t title_id) const {
  if (title_id < 0 || static_cast<std::size_t>(title_id) >= by_title_.size()) return -1;
  return by_title_[title_id];
}

const std::string& DescriptionTable::text(std::int32_t description_id) const {
  auto it = texts_.find(description_id);
  if (it == texts_.end()) throw DataError("unknown description id " + std::to_string(description_id));
  return it->second;
}

const std::vector<double>& DescriptionTable::vector(std::int32_t description_id) const {
  auto it = vectors_.find(description_id);
  if (it == vectors_.end()) throw DataError("unknown description id " + std::to_string(description_id));
  return it->second;
}

std::vector<std::int32_t> DescriptionTable::description_ids() const {
  std::vector<std::int32_t> ids;
  ids.reserve(texts_.size());
  for (const auto& [id, _] : texts_) ids.push_back(id);
  return ids;
}

std::vector<double> fallback_embedding(std::string_view text, int dim) {
  if (text.empty()) throw DataError("fallback_embedding: empty text");
  if (dim < 2) throw UsageError("fallback_embedding: dim must be >= 2");
  const CounterRng rng(fnv1a64(text));
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    v[i] = rng.normal(static_cast<std::uint64_t>(i));
    norm2 += v[i] * v[i];
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

DescriptionMapping load_description_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mapping file " + path.string());
  DescriptionMapping m;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto rec = json::parse(text);
      m.records.emplace_back(rec.at("title").get<std::string>(),
                             rec.at("description").get<std::string>());
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  return m;
}

std::map<std::string, std::vector<double>> load_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  std::map<std::string, std::vector<double>> out;
  std::string text;
  std::size_t line = 0;
  std::optional<std::size_t> dim;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string key;
    std::vector<double> vec;
    try {
      auto rec = json::parse(text);
      key = rec.at("key").get<std::string>();
      vec = rec.at("vector").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
    if (dim && *dim != vec.size())
      throw DataError(path.string() + ":" + std::to_string(line) + ": dimension mismatch (" +
                      std::to_string(vec.size()) + " vs " + std::to_string(*dim) + ")");
    dim = vec.size();
    out[key] = std::move(vec);
  }
  return out;
}

namespace {

std::string expand_default(const std::string& pattern, const std::string& title) {
  static constexpr std::string_view placeholder = "{title}";
  if (auto pos = pattern.find(placeholder); pos != std::string::npos) {
    std::string s = pattern;
    s.replace(pos, placeholder.size(), title);
    return s;
  }
  return pattern + " (" + title + ")";
}

}  // namespace

DescriptionTable attach_descriptions(Vocabularies& vocab, const DescriptionMapping& mapping,
                                     const std::map<std::string, std::vector<double>>* vectors,
                                     int fallback_dim) {
  std::map<std::string, std::string> by_title;
  std::optional<std::string> fallback_pattern;
  for (const auto& [title, desc] : mapping.records) {
    if (desc.empty()) throw DataError("empty description for title '" + title + "'");
    if (title == kDefaultMappingKey)
      fallback_pattern = desc;
    else
      by_title[title] = desc;
  }

  int dim = fallback_dim;
  if (vectors) {
    if (vectors->empty()) throw DataError("embedding file is empty");
    dim = static_cast<int>(vectors->begin()->second.size());
    for (const auto& [key, v] : *vectors)
      if (static_cast<int>(v.size()) != dim)
        throw DataError("embedding dimension mismatch for '" + key + "': " +
                        std::to_string(v.size()) + " vs " + std::to_string(dim));
  }

  DescriptionTable table(dim);
  for (std::int32_t t = 1; t < static_cast<std::int32_t>(vocab.titles.size()); ++t) {
    const auto& title = vocab.titles.key(t);
    std::string desc;
    if (auto it = by_title.find(title); it != by_title.end())
      desc = it->second;
    else if (fallback_pattern)
      desc = expand_default(*fallback_pattern, title);
    else
      throw DataError("no description mapping for title '" + title + "' and no default entry");

    std::vector<double> vec;
    if (vectors) {
      auto it = vectors->find(title);
      if (it == vectors->end()) throw DataError("no embedding vector for title '" + title + "'");
      vec = it->second;
    } else {
      vec = fallback_embedding(desc, dim);
    }
    const auto desc_id = vocab.descriptions.intern(desc);
    table.set(t, desc_id, std::move(desc), std::move(vec));
  }
  return table;
}

DescriptionTable attach_descriptions(Vocabularies& vocab, const std::filesystem::path& mapping_file,
                                     const std::optional<std::filesystem::path>& embedding_file,
                                     int fallback_dim) {
  const auto mapping = load_description_mapping(mapping_file);
  if (embedding_file) {
    const auto vectors = load_embedding_file(*embedding_file);
    return attach_descriptions(vocab, mapping, &vectors, fallback_dim);
  }
  return attach_descriptions(vocab, mapping, nullptr, fallback_dim);
}

DescriptionMapping identity_description_mapping(const Vocabulary& titles) {
  DescriptionMapping m;
  for (std::int32_t t = 1; t < static_cast<std::int32_t>(titles.size()); ++t)
    m.records.emplace_back(titles.key(t), "Role: " + titles.key(t));
  return m;
}

}  // namespace careerscape

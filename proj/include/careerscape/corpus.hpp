#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace careerscape {

enum class EntityKind : std::uint8_t { title = 0, company = 1, description = 2 };

inline constexpr int kEntityKindCount = 3;

std::string_view to_string(EntityKind kind);
EntityKind entity_kind_from_string(std::string_view name);

/// Dense string <-> index map for one entity kind. Index 0 is the reserved UNK entry.
class Vocabulary {
 public:
  static constexpr std::int32_t unk = 0;
  static constexpr std::string_view unk_key = "<UNK>";

  Vocabulary();

  /// Returns the index of `key`, assigning the next dense index on first sight.
  std::int32_t intern(std::string_view key);
  std::optional<std::int32_t> find(std::string_view key) const;
  std::int32_t lookup_or_unk(std::string_view key) const;
  const std::string& key(std::int32_t index) const;

  /// Number of entries including UNK.
  std::size_t size() const noexcept { return keys_.size(); }
  std::size_t known_size() const noexcept { return keys_.size() - 1; }

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct Vocabularies {
  Vocabulary titles;
  Vocabulary companies;
  Vocabulary descriptions;

  const Vocabulary& of(EntityKind kind) const;
  Vocabulary& of(EntityKind kind);
};

struct JobEntry {
  std::int32_t title_id = Vocabulary::unk;
  std::int32_t company_id = Vocabulary::unk;
  std::int32_t duration_months = 1;
  // Carried through for serialization only.
  std::string start;
  std::string end;

  friend bool operator==(const JobEntry&, const JobEntry&) = default;
};

/// One career trajectory, oldest entry first. label: 0 = human, 1 = synthetic.
struct Resume {
  std::string id;
  int label = 0;
  std::string source;
  std::vector<JobEntry> entries;

  friend bool operator==(const Resume&, const Resume&) = default;
};

// ---------------------------------------------------------------------------
// Resume files: one JSON object per line.

std::vector<Resume> parse_resumes(std::istream& in, Vocabularies& vocab,
                                  std::optional<int> expected_label = std::nullopt,
                                  std::string_view origin = "<stream>");
std::vector<Resume> load_resumes(const std::filesystem::path& path, Vocabularies& vocab,
                                 std::optional<int> expected_label = std::nullopt);

nlohmann::json resume_to_json(const Resume& resume, const Vocabularies& vocab);
void write_resumes(std::ostream& out, std::span<const Resume> resumes, const Vocabularies& vocab);
void save_resumes(const std::filesystem::path& path, std::span<const Resume> resumes,
                  const Vocabularies& vocab);

// ---------------------------------------------------------------------------
// Company-frequency filtering.

/// Occurrences (one per job entry) of each company id.
std::unordered_map<std::int32_t, std::int64_t> count_company_occurrences(
    std::span<const Resume> resumes);

std::vector<Resume> filter_by_company_frequency(
    std::span<const Resume> resumes, const std::unordered_map<std::int32_t, std::int64_t>& counts,
    std::int64_t min_occurrences);

/// Keeps resumes whose every company occurs at least `min_occurrences` times in the input.
std::vector<Resume> filter_by_company_frequency(std::span<const Resume> resumes,
                                                std::int64_t min_occurrences = 4);

// ---------------------------------------------------------------------------
// Descriptions.

/// Per-title description text and vector. Titles without a mapping have no entry.
class DescriptionTable {
 public:
  DescriptionTable() = default;
  explicit DescriptionTable(int dim) : dim_(dim) {}

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return texts_.size(); }

  /// Adds (or replaces nothing; duplicates are errors) the description of a title.
  void set(std::int32_t title_id, std::int32_t description_id, std::string text,
           std::vector<double> vector);

  bool has(std::int32_t title_id) const;
  std::int32_t description_of(std::int32_t title_id) const;  // -1 when unmapped
  const std::string& text(std::int32_t description_id) const;
  const std::vector<double>& vector(std::int32_t description_id) const;

  /// Description ids in ascending order.
  std::vector<std::int32_t> description_ids() const;

 private:
  int dim_ = 0;
  std::vector<std::int32_t> by_title_;
  std::map<std::int32_t, std::string> texts_;
  std::map<std::int32_t, std::vector<double>> vectors_;
};

/// Deterministic unit vector seeded by a stable hash of `text`.
std::vector<double> fallback_embedding(std::string_view text, int dim);

inline constexpr int kDefaultFallbackDim = 64;
/// Mapping record whose title is this key supplies a template for unmapped titles.
inline constexpr std::string_view kDefaultMappingKey = "*";

struct DescriptionMapping {
  std::vector<std::pair<std::string, std::string>> records;  // (title, description)
};

DescriptionMapping load_description_mapping(const std::filesystem::path& path);
std::map<std::string, std::vector<double>> load_embedding_file(const std::filesystem::path& path);

/// Builds the table for every known title in `vocab`. Vectors come from `vectors` (keyed by
/// title) when supplied, else from fallback_embedding(description, fallback_dim).
DescriptionTable attach_descriptions(Vocabularies& vocab, const DescriptionMapping& mapping,
                                     const std::map<std::string, std::vector<double>>* vectors,
                                     int fallback_dim = kDefaultFallbackDim);

DescriptionTable attach_descriptions(Vocabularies& vocab, const std::filesystem::path& mapping_file,
                                     const std::optional<std::filesystem::path>& embedding_file,
                                     int fallback_dim = kDefaultFallbackDim);

/// Mapping where each title describes itself; used when no mapping file is supplied.
DescriptionMapping identity_description_mapping(const Vocabulary& titles);

}  // namespace careerscape

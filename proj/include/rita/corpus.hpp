#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rita/taxonomy.hpp"

namespace rita {

/// A labeled character range. Offsets count code points; `end` is exclusive.
struct EntitySpan {
  /// Offset value for predictions that could not be located in the text.
  static constexpr std::size_t kUnlocatable = std::numeric_limits<std::size_t>::max();

  std::size_t start = 0;
  std::size_t end = 0;
  IcoCategory label = IcoCategory::Actuator;
  std::string surface;

  bool unlocatable() const { return start == kUnlocatable; }

  /// A prediction whose text was not found; it overlaps nothing.
  static EntitySpan make_unlocatable(IcoCategory label, std::string surface) {
    return {kUnlocatable, kUnlocatable, label, std::move(surface)};
  }

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

enum class SourceKind { Storyline, UserStory, Requirement, Unknown };

std::string_view source_kind_name(SourceKind k);
/// Accepts "storyline", "user_story" (or "user story"/"user-story"),
/// "requirement"; anything else is a ParseError.
SourceKind parse_source_kind(std::string_view s);

struct LabeledPhrase {
  std::string id;
  std::string text;
  std::vector<EntitySpan> spans;
  SourceKind source = SourceKind::Unknown;

  friend bool operator==(const LabeledPhrase&, const LabeledPhrase&) = default;
};

/// Ordered, validated phrases plus a cached per-category span count.
class Corpus {
 public:
  Corpus() = default;

  /// Validates every span against its phrase (throws SpanOutOfBounds),
  /// fills in surfaces, deduplicates identical gold spans and rejects
  /// duplicate phrase ids (ParseError).
  explicit Corpus(std::vector<LabeledPhrase> phrases);

  const std::vector<LabeledPhrase>& phrases() const { return phrases_; }
  const PerCategory<std::size_t>& per_category_counts() const { return counts_; }
  std::size_t size() const { return phrases_.size(); }
  bool empty() const { return phrases_.empty(); }

  /// Index into phrases(), or npos.
  std::size_t find(std::string_view id) const;
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  std::vector<LabeledPhrase> phrases_;
  std::unordered_map<std::string, std::size_t> index_;
  PerCategory<std::size_t> counts_{};
};

/// Checks bounds and sets `surface` from `text`. Throws SpanOutOfBounds.
void ground_span(const std::string& id, std::u32string_view text, EntitySpan& span);

enum class CorpusFormat {
  /// One JSON object per line: text, label ([start, end, "CATEGORY"]
  /// triples), optional id and source.
  JsonLines,
  /// Comma-separated rows: id, text, start, end, category. Rows sharing an id
  /// form one phrase; empty start/end marks a phrase without entities.
  Csv,
};

/// Chooses by extension: .csv is Csv, everything else JsonLines.
CorpusFormat format_for_path(const std::filesystem::path& path);

Corpus read_corpus(std::istream& in, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path);

/// Writes the JSON-lines form. Reading the output back yields an equal corpus.
void write_corpus(std::ostream& out, const Corpus& corpus);
/// CSV output has a header row and drops the source kind.
void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format);
/// Format chosen by format_for_path.
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

struct CorpusStats {
  std::size_t phrases = 0;
  std::size_t spans = 0;
  /// Distinct normalized surfaces over all categories.
  std::size_t distinct_surfaces = 0;
  PerCategory<std::size_t> span_counts{};
  PerCategory<std::size_t> distinct_surface_counts{};
  /// Phrases per source kind, indexed by SourceKind.
  std::array<std::size_t, 4> phrases_by_source{};
};

/// Recounts from scratch; does not consult the cached counts.
CorpusStats corpus_stats(const Corpus& corpus);

/// Uniform random partition by phrase. |test| = round(test_ratio * size);
/// both halves keep the input order. Deterministic for a given seed on every
/// platform. Throws EmptyCorpus, or std::invalid_argument for a ratio outside
/// (0, 1).
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_ratio, std::uint64_t seed);

}  // namespace rita

#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rita/corpus.hpp"
#include "rita/taxonomy.hpp"

namespace rita {

struct CategoryCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  CategoryCounts& operator+=(const CategoryCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

struct MatchCounts {
  PerCategory<CategoryCounts> per_category{};

  CategoryCounts& operator[](IcoCategory c) { return per_category[index_of(c)]; }
  const CategoryCounts& operator[](IcoCategory c) const { return per_category[index_of(c)]; }

  /// Sum over categories.
  CategoryCounts total() const;

  MatchCounts& operator+=(const MatchCounts& o) {
    for (std::size_t i = 0; i < kCategoryCount; ++i) per_category[i] += o.per_category[i];
    return *this;
  }
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

/// Overlap-and-category matching for the spans of one text.
///
/// Predictions are visited in (start, end) order. Each takes the unmatched
/// gold span of the same category with the largest character overlap (at
/// least one character; ties go to the smaller gold start) and counts a true
/// positive; otherwise it is a false positive of its own category. Gold spans
/// left unmatched are false negatives. Unlocatable predictions are always
/// false positives. Throws SpanOutOfBounds for spans outside the text.
MatchCounts match_predictions(std::span<const EntitySpan> gold, std::span<const EntitySpan> pred,
                              std::size_t text_length, std::string_view phrase_id = {});

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// False when there was neither gold nor prediction (tp = fp = fn = 0).
  bool defined = false;
};

/// Precision, recall and their harmonic mean. A ratio whose denominator is
/// zero is 0; with all three counts zero the result is undefined.
Scores f_score(std::size_t tp, std::size_t fp, std::size_t fn);
inline Scores f_score(const CategoryCounts& c) { return f_score(c.tp, c.fp, c.fn); }

struct EvalRow {
  CategoryCounts counts;
  Scores scores;
};

struct EvalTable {
  PerCategory<EvalRow> rows{};
  /// Scores from counts summed over all categories.
  EvalRow micro;
  /// Means of the defined per-category precision, recall and F1.
  Scores macro;
  std::size_t macro_categories = 0;

  const EvalRow& operator[](IcoCategory c) const { return rows[index_of(c)]; }
};

EvalTable make_eval_table(const MatchCounts& counts);

using Predictions = std::map<std::string, std::vector<EntitySpan>, std::less<>>;

/// Scores predictions keyed by phrase id against the gold corpus. Phrases
/// without an entry contribute only false negatives. Throws UnknownPhraseId.
EvalTable evaluate_corpus(const Corpus& gold, const Predictions& predictions);
MatchCounts count_corpus(const Corpus& gold, const Predictions& predictions);

/// Gold spans re-keyed as predictions.
Predictions predictions_from_corpus(const Corpus& corpus);

/// Tuple lines: `<id> ("<entity>","<CATEGORY>")` or `<id> none`. Each entity
/// is located at the first normalized, token-aligned occurrence in the
/// phrase text not already claimed by an earlier tuple of the same phrase.
/// Entities that cannot be found become unlocatable predictions.
/// Throws ParseError, UnknownCategory, UnknownPhraseId.
Predictions read_tuple_predictions(std::istream& in, const Corpus& gold);
Predictions parse_external_predictions(const std::filesystem::path& file, const Corpus& gold);

/// Writes predictions in the tuple format, `none` for empty lists. Surfaces
/// are written normalized.
void write_tuple_predictions(std::ostream& out, const Predictions& predictions);

/// JSON lines keyed by "id", with spans either as corpus-style "label"
/// triples or as "entities" objects. Throws ParseError, UnknownCategory,
/// UnknownPhraseId, SpanOutOfBounds.
Predictions read_span_predictions(std::istream& in, const Corpus& gold);
Predictions load_span_predictions(const std::filesystem::path& file, const Corpus& gold);

/// Aligned table: 7 category rows then micro and macro; undefined cells
/// print as an em dash.
std::string render_eval_table(const EvalTable& table);
/// Single-line JSON object; undefined scores are null.
std::string render_eval_table_machine(const EvalTable& table);
/// Inverse of render_eval_table_machine. Throws ParseError.
EvalTable parse_eval_table_machine(std::string_view line);

}  // namespace rita

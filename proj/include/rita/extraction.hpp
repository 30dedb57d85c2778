#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "rita/corpus.hpp"
#include "rita/lexicon.hpp"

namespace rita {

/// Something that finds ICO mentions in text. Implementations return spans
/// that are in bounds, non-overlapping and sorted by start, with `surface`
/// filled in.
class Extractor {
 public:
  virtual ~Extractor() = default;
  virtual std::vector<EntitySpan> extract(std::string_view text) = 0;
};

/// Dictionary lookup with leftmost-longest overlap resolution. Matches start
/// and end on token boundaries; each match takes the lexicon's preferred
/// label for its key.
std::vector<EntitySpan> gazetteer_extract(const Lexicon& lex, std::string_view text);
std::vector<EntitySpan> gazetteer_extract(const Lexicon& lex, std::u32string_view text);

/// Stateless; safe to share across threads.
class GazetteerExtractor final : public Extractor {
 public:
  explicit GazetteerExtractor(Lexicon lex) : lex_(std::move(lex)) {}

  std::vector<EntitySpan> extract(std::string_view text) override {
    return gazetteer_extract(lex_, text);
  }

  const Lexicon& lexicon() const { return lex_; }

 private:
  Lexicon lex_;
};

}  // namespace rita

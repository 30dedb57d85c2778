#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rita/corpus.hpp"
#include "rita/taxonomy.hpp"

namespace rita {

struct LabelCount {
  IcoCategory category;
  std::size_t frequency;

  friend bool operator==(const LabelCount&, const LabelCount&) = default;
};

/// Normalized surface form -> observed labels with counts, plus a character
/// trie over the keys for longest-match lookup.
class Lexicon {
 public:
  using Entries = std::map<std::string, std::vector<LabelCount>, std::less<>>;

  Lexicon();

  /// Adds `count` observations of `label` for `surface`. The surface is
  /// normalized first; blank surfaces are ignored.
  void add(std::string_view surface, IcoCategory label, std::size_t count = 1);

  /// Keys are normalized; label lists are ordered by category.
  const Entries& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Labels for an already-normalized key, or nullptr.
  const std::vector<LabelCount>* find(std::string_view normalized) const;

  /// Highest-frequency label; ties go to the lexicographically smaller
  /// category name.
  static IcoCategory preferred_label(const std::vector<LabelCount>& labels);

  struct Match {
    std::size_t end;
    /// Normalized key of the match.
    const std::string* key;
  };
  /// Longest key matching `text` from `start` (both ends on token
  /// boundaries), or nullopt.
  std::optional<Match> longest_match(std::u32string_view text, std::size_t start) const;

 private:
  struct Node {
    static constexpr std::size_t kNoKey = static_cast<std::size_t>(-1);
    std::map<char32_t, std::size_t> next;
    std::size_t key = kNoKey;  // index into keys_
  };

  Entries entries_;
  std::vector<std::string> keys_;
  std::vector<Node> trie_;
};

/// One entry per gold span of the corpus, keyed by its normalized surface.
Lexicon compile_lexicon(const Corpus& train);

/// JSON lines: {"surface": "...", "labels": {"SENSOR": 3, ...}}.
void write_lexicon(std::ostream& out, const Lexicon& lex);
Lexicon read_lexicon(std::istream& in);

/// Reads a lexicon file, or compiles one when the file holds a corpus
/// (records with "text") or is a .csv corpus.
Lexicon load_lexicon(const std::filesystem::path& path);

}  // namespace rita

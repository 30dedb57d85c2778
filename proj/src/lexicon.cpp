#include "rita/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rita/error.hpp"
#include "rita/text.hpp"

namespace rita {

using nlohmann::json;

Lexicon::Lexicon() : trie_(1) {}

void Lexicon::add(std::string_view surface, IcoCategory label, std::size_t count) {
  if (count == 0) return;
  const std::u32string key32 = text::normalize_surface(std::u32string_view(text::decode_utf8(surface)));
  if (key32.empty()) return;

  auto [it, inserted] = entries_.try_emplace(text::encode_utf8(key32));
  auto& labels = it->second;
  auto pos = std::find_if(labels.begin(), labels.end(),
                          [&](const LabelCount& lc) { return lc.category == label; });
  if (pos != labels.end()) {
    pos->frequency += count;
  } else {
    labels.push_back({label, count});
    std::sort(labels.begin(), labels.end(), [](const LabelCount& a, const LabelCount& b) {
      return a.category < b.category;
    });
  }
  if (!inserted) return;

  std::size_t node = 0;
  for (char32_t c : key32) {
    auto edge = trie_[node].next.find(c);
    if (edge == trie_[node].next.end()) {
      trie_.emplace_back();
      edge = trie_[node].next.emplace(c, trie_.size() - 1).first;
    }
    node = edge->second;
  }
  trie_[node].key = keys_.size();
  keys_.push_back(it->first);
}

const std::vector<LabelCount>* Lexicon::find(std::string_view normalized) const {
  const auto it = entries_.find(normalized);
  return it == entries_.end() ? nullptr : &it->second;
}

IcoCategory Lexicon::preferred_label(const std::vector<LabelCount>& labels) {
  const LabelCount* best = nullptr;
  for (const LabelCount& lc : labels) {
    if (!best || lc.frequency > best->frequency ||
        (lc.frequency == best->frequency &&
         category_name(lc.category) < category_name(best->category)))
      best = &lc;
  }
  return best ? best->category : IcoCategory::Actuator;
}

std::optional<Lexicon::Match> Lexicon::longest_match(std::u32string_view text,
                                                     std::size_t start) const {
  if (start >= text.size() || text::is_space(text[start]) || !text::is_token_boundary(text, start))
    return std::nullopt;
  std::size_t best_end = 0;
  std::size_t best_key = Node::kNoKey;
  text::NormalizedCursor cursor(text, start);
  std::size_t node = 0;
  while (!cursor.done()) {
    const auto edge = trie_[node].next.find(cursor.next());
    if (edge == trie_[node].next.end()) break;
    node = edge->second;
    if (trie_[node].key != Node::kNoKey && text::is_token_boundary(text, cursor.position())) {
      best_end = cursor.position();
      best_key = trie_[node].key;
    }
  }
  if (best_key == Node::kNoKey) return std::nullopt;
  return Match{best_end, &keys_[best_key]};
}

Lexicon compile_lexicon(const Corpus& train) {
  Lexicon lex;
  for (const LabeledPhrase& p : train.phrases())
    for (const EntitySpan& s : p.spans) lex.add(s.surface, s.label);
  return lex;
}

void write_lexicon(std::ostream& out, const Lexicon& lex) {
  for (const auto& [key, labels] : lex.entries()) {
    json counts = json::object();
    for (const LabelCount& lc : labels) counts[std::string(category_name(lc.category))] = lc.frequency;
    out << json{{"surface", key}, {"labels", counts}}.dump() << '\n';
  }
}

Lexicon read_lexicon(std::istream& in) {
  Lexicon lex;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("surface") || !obj["surface"].is_string() ||
        !obj.contains("labels") || !obj["labels"].is_object())
      throw ParseError(line, "lexicon records need 'surface' and 'labels'");
    for (const auto& [name, freq] : obj["labels"].items()) {
      if (!freq.is_number_integer() || freq.get<long long>() < 1)
        throw ParseError(line, "label frequencies must be positive integers");
      lex.add(obj["surface"].get<std::string>(), parse_category(name), freq.get<std::size_t>());
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open lexicon file " + path.string());
  if (format_for_path(path) == CorpusFormat::Csv) return compile_lexicon(read_corpus(in, CorpusFormat::Csv));

  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string data = buffer.str();

  // Peek at the first record to tell a lexicon from a corpus.
  std::istringstream lines(data);
  std::string first;
  while (std::getline(lines, first) && first.find_first_not_of(" \t\r") == std::string::npos) {
  }
  bool is_corpus = false;
  try {
    const json obj = json::parse(first);
    is_corpus = obj.is_object() && obj.contains("text");
  } catch (const json::parse_error&) {
    // read_lexicon reports the error with its line number
  }
  std::istringstream src(data);
  return is_corpus ? compile_lexicon(read_corpus(src, CorpusFormat::JsonLines)) : read_lexicon(src);
}

}  // namespace rita

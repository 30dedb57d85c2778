#include "rita/extraction.hpp"

#include "rita/text.hpp"

namespace rita {

std::vector<EntitySpan> gazetteer_extract(const Lexicon& lex, std::u32string_view text) {
  std::vector<EntitySpan> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto match = lex.longest_match(text, pos);
    if (!match) {
      ++pos;
      continue;
    }
    const std::vector<LabelCount>* labels = lex.find(*match->key);
    out.push_back({pos, match->end, Lexicon::preferred_label(*labels),
                   text::encode_utf8(text.substr(pos, match->end - pos))});
    pos = match->end;
  }
  return out;
}

std::vector<EntitySpan> gazetteer_extract(const Lexicon& lex, std::string_view text) {
  const std::u32string cps = text::decode_utf8(text);
  return gazetteer_extract(lex, std::u32string_view(cps));
}

}  // namespace rita

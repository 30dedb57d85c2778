#include "rita/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "rita/csv.hpp"
#include "rita/error.hpp"
#include "rita/text.hpp"

namespace rita {

using nlohmann::json;

std::string_view source_kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::Storyline: return "storyline";
    case SourceKind::UserStory: return "user_story";
    case SourceKind::Requirement: return "requirement";
    case SourceKind::Unknown: return "unknown";
  }
  return "unknown";
}

SourceKind parse_source_kind(std::string_view s) {
  if (s == "storyline") return SourceKind::Storyline;
  if (s == "user_story" || s == "user story" || s == "user-story") return SourceKind::UserStory;
  if (s == "requirement") return SourceKind::Requirement;
  if (s == "unknown") return SourceKind::Unknown;
  throw ParseError(0, "unknown source kind '" + std::string(s) + "'");
}

void ground_span(const std::string& id, std::u32string_view text, EntitySpan& span) {
  if (span.start >= span.end || span.end > text.size())
    throw SpanOutOfBounds(id, span.start, span.end);
  span.surface = text::encode_utf8(text.substr(span.start, span.end - span.start));
}

Corpus::Corpus(std::vector<LabeledPhrase> phrases) : phrases_(std::move(phrases)) {
  for (std::size_t i = 0; i < phrases_.size(); ++i) {
    LabeledPhrase& p = phrases_[i];
    if (!index_.try_emplace(p.id, i).second)
      throw ParseError(0, "duplicate phrase id '" + p.id + "'");
    const std::u32string cps = text::decode_utf8(p.text);
    for (EntitySpan& s : p.spans) ground_span(p.id, cps, s);
    std::sort(p.spans.begin(), p.spans.end(), [](const EntitySpan& a, const EntitySpan& b) {
      return std::tie(a.start, a.end, a.label) < std::tie(b.start, b.end, b.label);
    });
    p.spans.erase(std::unique(p.spans.begin(), p.spans.end()), p.spans.end());
    for (const EntitySpan& s : p.spans) ++counts_[index_of(s.label)];
  }
}

std::size_t Corpus::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  return it == index_.end() ? npos : it->second;
}

CorpusFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? CorpusFormat::Csv : CorpusFormat::JsonLines;
}

namespace {

std::size_t parse_offset(const json& v, std::size_t line) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ParseError(line, "span offsets must be non-negative integers");
  return v.get<std::size_t>();
}

std::size_t parse_offset(const std::string& s, std::size_t line) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size() || s.front() == '-')
    throw ParseError(line, "bad offset '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::vector<LabeledPhrase> read_json_lines(std::istream& in) {
  std::vector<LabeledPhrase> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "record is not an object");
    const auto text_it = obj.find("text");
    if (text_it == obj.end() || !text_it->is_string())
      throw ParseError(line, "missing string field 'text'");

    LabeledPhrase p;
    p.text = text_it->get<std::string>();
    try {
      text::decode_utf8(p.text);
    } catch (const ParseError& e) {
      throw ParseError(line, e.reason());
    }
    if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
      if (it->is_string())
        p.id = it->get<std::string>();
      else if (it->is_number_integer())
        p.id = std::to_string(it->get<long long>());
      else
        throw ParseError(line, "'id' must be a string");
    } else {
      p.id = std::to_string(line);
    }
    if (auto it = obj.find("source"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(line, "'source' must be a string");
      try {
        p.source = parse_source_kind(it->get<std::string>());
      } catch (const ParseError& e) {
        throw ParseError(line, e.reason());
      }
    }
    if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) throw ParseError(line, "'label' must be an array");
      for (const json& triple : *it) {
        if (!triple.is_array() || triple.size() != 3 || !triple[2].is_string())
          throw ParseError(line, "each label must be [start, end, \"CATEGORY\"]");
        EntitySpan s;
        s.start = parse_offset(triple[0], line);
        s.end = parse_offset(triple[1], line);
        s.label = parse_category(triple[2].get<std::string>());
        p.spans.push_back(std::move(s));
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<LabeledPhrase> read_csv_rows(std::istream& in) {
  std::vector<csv::Row> rows = csv::read(in);
  std::vector<LabeledPhrase> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.fields.size() != 5)
      throw ParseError(row.line, "expected 5 fields (id, text, start, end, category), got " +
                                     std::to_string(row.fields.size()));
    if (r == 0 && row.fields[0] == "id" && row.fields[2] == "start") continue;  // header
    const std::string& id = row.fields[0];
    auto [it, inserted] = index.try_emplace(id, out.size());
    if (inserted) {
      LabeledPhrase p;
      p.id = id;
      p.text = row.fields[1];
      try {
        text::decode_utf8(p.text);
      } catch (const ParseError& e) {
        throw ParseError(row.line, e.reason());
      }
      out.push_back(std::move(p));
    } else if (out[it->second].text != row.fields[1]) {
      throw ParseError(row.line, "rows for id '" + id + "' disagree on text");
    }
    const bool no_entity = row.fields[2].empty() && row.fields[3].empty() && row.fields[4].empty();
    if (no_entity) continue;
    EntitySpan s;
    s.start = parse_offset(row.fields[2], row.line);
    s.end = parse_offset(row.fields[3], row.line);
    s.label = parse_category(row.fields[4]);
    out[it->second].spans.push_back(std::move(s));
  }
  return out;
}

}  // namespace

Corpus read_corpus(std::istream& in, CorpusFormat format) {
  return Corpus(format == CorpusFormat::Csv ? read_csv_rows(in) : read_json_lines(in));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open corpus file " + path.string());
  return read_corpus(in, format);
}

Corpus load_corpus(const std::filesystem::path& path) {
  return load_corpus(path, format_for_path(path));
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const LabeledPhrase& p : corpus.phrases()) {
    json obj;
    obj["id"] = p.id;
    obj["text"] = p.text;
    json labels = json::array();
    for (const EntitySpan& s : p.spans)
      labels.push_back(json::array({s.start, s.end, category_name(s.label)}));
    obj["label"] = std::move(labels);
    if (p.source != SourceKind::Unknown) obj["source"] = source_kind_name(p.source);
    out << obj.dump() << '\n';
  }
}

void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format) {
  if (format == CorpusFormat::JsonLines) return write_corpus(out, corpus);
  csv::write_row(out, {"id", "text", "start", "end", "category"});
  for (const LabeledPhrase& p : corpus.phrases()) {
    if (p.spans.empty()) csv::write_row(out, {p.id, p.text, "", "", ""});
    for (const EntitySpan& s : p.spans)
      csv::write_row(out, {p.id, p.text, std::to_string(s.start), std::to_string(s.end),
                           std::string(category_name(s.label))});
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file " + path.string());
  write_corpus(out, corpus, format_for_path(path));
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats st;
  PerCategory<std::set<std::string>> surfaces;
  std::set<std::string> all_surfaces;
  for (const LabeledPhrase& p : corpus.phrases()) {
    ++st.phrases;
    ++st.phrases_by_source[static_cast<std::size_t>(p.source)];
    for (const EntitySpan& s : p.spans) {
      ++st.spans;
      ++st.span_counts[index_of(s.label)];
      std::string norm = text::normalize_surface(s.surface);
      surfaces[index_of(s.label)].insert(norm);
      all_surfaces.insert(std::move(norm));
    }
  }
  for (IcoCategory c : kAllCategories)
    st.distinct_surface_counts[index_of(c)] = surfaces[index_of(c)].size();
  st.distinct_surfaces = all_surfaces.size();
  return st;
}

namespace {

// Unbiased draw in [0, bound] from the raw engine output. Spelled out rather
// than using std::uniform_int_distribution, whose algorithm differs between
// standard libraries.
std::uint64_t draw_upto(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t range = bound + 1;
  if (range == 0) return rng();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  for (;;) {
    const std::uint64_t v = rng();
    if (v < limit) return v % range;
  }
}

}  // namespace

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_ratio, std::uint64_t seed) {
  if (corpus.empty()) throw EmptyCorpus();
  if (!(test_ratio > 0.0 && test_ratio < 1.0))
    throw std::invalid_argument("test ratio must lie strictly between 0 and 1");

  const std::size_t n = corpus.size();
  const auto n_test = static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[draw_upto(rng, i)]);

  std::vector<bool> in_test(n, false);
  for (std::size_t k = 0; k < n_test; ++k) in_test[order[k]] = true;

  std::vector<LabeledPhrase> train, test;
  for (std::size_t i = 0; i < n; ++i)
    (in_test[i] ? test : train).push_back(corpus.phrases()[i]);
  return {Corpus(std::move(train)), Corpus(std::move(test))};
}

}  // namespace rita

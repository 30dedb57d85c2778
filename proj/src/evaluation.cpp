#include "rita/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "rita/error.hpp"
#include "rita/text.hpp"

namespace rita {

using nlohmann::json;

CategoryCounts MatchCounts::total() const {
  CategoryCounts sum;
  for (const CategoryCounts& c : per_category) sum += c;
  return sum;
}

namespace {

void check_bounds(std::span<const EntitySpan> spans, std::size_t text_length, std::string_view id) {
  for (const EntitySpan& s : spans) {
    if (s.unlocatable()) continue;
    if (s.start >= s.end || s.end > text_length) throw SpanOutOfBounds(std::string(id), s.start, s.end);
  }
}

std::size_t overlap(const EntitySpan& a, const EntitySpan& b) {
  if (a.unlocatable() || b.unlocatable()) return 0;
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

}  // namespace

MatchCounts match_predictions(std::span<const EntitySpan> gold, std::span<const EntitySpan> pred,
                              std::size_t text_length, std::string_view phrase_id) {
  check_bounds(gold, text_length, phrase_id);
  check_bounds(pred, text_length, phrase_id);

  std::vector<std::size_t> order(pred.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(pred[a].start, pred[a].end, pred[a].label) <
           std::tie(pred[b].start, pred[b].end, pred[b].label);
  });

  MatchCounts counts;
  std::vector<bool> used(gold.size(), false);
  for (std::size_t pi : order) {
    const EntitySpan& p = pred[pi];
    std::size_t best = gold.size();
    std::size_t best_overlap = 0;
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (used[g] || gold[g].label != p.label) continue;
      const std::size_t ov = overlap(p, gold[g]);
      if (ov == 0) continue;
      const bool better = ov > best_overlap ||
                          (ov == best_overlap && std::tie(gold[g].start, gold[g].end) <
                                                     std::tie(gold[best].start, gold[best].end));
      if (better) {
        best = g;
        best_overlap = ov;
      }
    }
    if (best < gold.size()) {
      used[best] = true;
      ++counts[p.label].tp;
    } else {
      ++counts[p.label].fp;
    }
  }
  for (std::size_t g = 0; g < gold.size(); ++g)
    if (!used[g]) ++counts[gold[g].label].fn;
  return counts;
}

Scores f_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  Scores s;
  s.defined = tp + fp + fn > 0;
  if (!s.defined) return s;
  const auto t = static_cast<double>(tp);
  s.precision = tp + fp > 0 ? t / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? t / static_cast<double>(tp + fn) : 0.0;
  const double sum = s.precision + s.recall;
  s.f1 = sum > 0.0 ? 2.0 * s.precision * s.recall / sum : 0.0;
  return s;
}

EvalTable make_eval_table(const MatchCounts& counts) {
  EvalTable table;
  double p = 0, r = 0, f = 0;
  for (IcoCategory c : kAllCategories) {
    EvalRow& row = table.rows[index_of(c)];
    row.counts = counts[c];
    row.scores = f_score(row.counts);
    if (!row.scores.defined) continue;
    ++table.macro_categories;
    p += row.scores.precision;
    r += row.scores.recall;
    f += row.scores.f1;
  }
  table.micro.counts = counts.total();
  table.micro.scores = f_score(table.micro.counts);
  if (table.macro_categories > 0) {
    const auto n = static_cast<double>(table.macro_categories);
    table.macro = {p / n, r / n, f / n, true};
  }
  return table;
}

MatchCounts count_corpus(const Corpus& gold, const Predictions& predictions) {
  for (const auto& [id, spans] : predictions)
    if (gold.find(id) == Corpus::npos) throw UnknownPhraseId(id);

  MatchCounts total;
  const std::vector<EntitySpan> none;
  for (const LabeledPhrase& p : gold.phrases()) {
    const auto it = predictions.find(p.id);
    const std::vector<EntitySpan>& pred = it == predictions.end() ? none : it->second;
    total += match_predictions(p.spans, pred, text::length(p.text), p.id);
  }
  return total;
}

EvalTable evaluate_corpus(const Corpus& gold, const Predictions& predictions) {
  return make_eval_table(count_corpus(gold, predictions));
}

Predictions predictions_from_corpus(const Corpus& corpus) {
  Predictions out;
  for (const LabeledPhrase& p : corpus.phrases()) out.emplace(p.id, p.spans);
  return out;
}

namespace {

class TupleLineParser {
 public:
  TupleLineParser(std::string_view s, std::size_t line) : s_(s), line_(line) {}

  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }

  void expect(char c) {
    skip_ws();
    if (i_ >= s_.size() || s_[i_] != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  std::string quoted() {
    skip_ws();
    if (i_ >= s_.size() || (s_[i_] != '"' && s_[i_] != '\'')) fail("expected a quoted string");
    const char q = s_[i_++];
    std::string out;
    while (i_ < s_.size() && s_[i_] != q) {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
      out.push_back(s_[i_++]);
    }
    if (i_ >= s_.size()) fail("unterminated string");
    ++i_;
    return out;
  }

  void expect_end() {
    skip_ws();
    if (i_ != s_.size()) fail("unexpected trailing characters");
  }

  [[noreturn]] void fail(const std::string& why) const { throw ParseError(line_, why); }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t i_ = 0;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct GroundingCache {
  std::u32string text;
  std::set<std::size_t> claimed;  // start offsets already used
};

EntitySpan ground_tuple(GroundingCache& cache, const std::string& entity, IcoCategory label) {
  const std::u32string needle = text::normalize_surface(std::u32string_view(text::decode_utf8(entity)));
  std::optional<std::pair<std::size_t, std::size_t>> first, first_free;
  for (std::size_t s = 0; s < cache.text.size() && !first_free; ++s) {
    const auto end = text::match_at(cache.text, s, needle);
    if (!end) continue;
    if (!first) first = {s, *end};
    if (!cache.claimed.contains(s)) first_free = {s, *end};
  }
  const auto hit = first_free ? first_free : first;
  if (!hit) return EntitySpan::make_unlocatable(label, entity);
  cache.claimed.insert(hit->first);
  return {hit->first, hit->second, label,
          text::encode_utf8(std::u32string_view(cache.text).substr(hit->first, hit->second - hit->first))};
}

}  // namespace

Predictions read_tuple_predictions(std::istream& in, const Corpus& gold) {
  Predictions out;
  std::map<std::string, GroundingCache, std::less<>> caches;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view body = trim(raw);
    if (body.empty()) continue;
    const auto ws = body.find_first_of(" \t");
    if (ws == std::string_view::npos) throw ParseError(line, "expected '<id> (\"entity\",\"CATEGORY\")' or '<id> none'");
    const std::string id(body.substr(0, ws));
    const std::string_view rest = trim(body.substr(ws));

    const std::size_t idx = gold.find(id);
    if (idx == Corpus::npos) throw UnknownPhraseId(id);
    std::vector<EntitySpan>& spans = out[id];

    std::string lowered(rest);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "none") continue;

    TupleLineParser parser(rest, line);
    parser.expect('(');
    const std::string entity = parser.quoted();
    parser.expect(',');
    const std::string category = parser.quoted();
    parser.expect(')');
    parser.expect_end();
    const IcoCategory label = parse_category(category);

    auto [cache, fresh] = caches.try_emplace(id);
    if (fresh) cache->second.text = text::decode_utf8(gold.phrases()[idx].text);
    spans.push_back(ground_tuple(cache->second, entity, label));
  }
  return out;
}

Predictions parse_external_predictions(const std::filesystem::path& file, const Corpus& gold) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open predictions file " + file.string());
  return read_tuple_predictions(in, gold);
}

void write_tuple_predictions(std::ostream& out, const Predictions& predictions) {
  for (const auto& [id, spans] : predictions) {
    if (spans.empty()) {
      out << id << " none\n";
      continue;
    }
    for (const EntitySpan& s : spans)
      out << id << " (" << json(text::normalize_surface(s.surface)).dump() << ","
          << json(std::string(category_name(s.label))).dump() << ")\n";
  }
}

Predictions read_span_predictions(std::istream& in, const Corpus& gold) {
  Predictions out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string())
      throw ParseError(line, "prediction records need a string 'id'");
    const std::string id = obj["id"].get<std::string>();
    const std::size_t idx = gold.find(id);
    if (idx == Corpus::npos) throw UnknownPhraseId(id);
    const std::u32string cps = text::decode_utf8(gold.phrases()[idx].text);

    std::vector<EntitySpan>& spans = out[id];
    auto add = [&](const json& start, const json& end, const json& label) {
      if (!start.is_number_integer() || !end.is_number_integer() || !label.is_string() ||
          start.get<long long>() < 0 || end.get<long long>() < 0)
        throw ParseError(line, "span needs integer offsets and a category string");
      EntitySpan s{start.get<std::size_t>(), end.get<std::size_t>(), parse_category(label.get<std::string>()), {}};
      ground_span(id, cps, s);
      spans.push_back(std::move(s));
    };
    try {
      if (auto it = obj.find("label"); it != obj.end()) {
        for (const json& t : *it) {
          if (!t.is_array() || t.size() != 3) throw ParseError(line, "each label must be [start, end, \"CATEGORY\"]");
          add(t[0], t[1], t[2]);
        }
      } else if (auto it2 = obj.find("entities"); it2 != obj.end()) {
        for (const json& e : *it2) {
          if (!e.is_object() || !e.contains("start") || !e.contains("end") || !e.contains("label"))
            throw ParseError(line, "entities need start, end and label");
          add(e["start"], e["end"], e["label"]);
        }
      } else {
        throw ParseError(line, "record has neither 'label' nor 'entities'");
      }
    } catch (const json::exception& e) {
      throw ParseError(line, e.what());
    }
  }
  return out;
}

Predictions load_span_predictions(const std::filesystem::path& file, const Corpus& gold) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open predictions file " + file.string());
  return read_span_predictions(in, gold);
}

namespace {

constexpr std::string_view kDash = "—";

std::string cell(double v, bool defined) {
  if (!defined) return std::string(kDash);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Pads by code points so the em dash lines up.
void put(std::ostringstream& out, const std::string& s, std::size_t width, bool right = false) {
  const std::size_t len = text::length(s);
  const std::string pad(width > len ? width - len : 0, ' ');
  out << (right ? pad + s : s + pad);
}

json scores_json(const Scores& s) {
  if (!s.defined) return {{"precision", nullptr}, {"recall", nullptr}, {"f1", nullptr}};
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

json counts_json(const CategoryCounts& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; }

}  // namespace

std::string render_eval_table(const EvalTable& t) {
  std::ostringstream out;
  put(out, "Category", 20);
  for (const char* h : {"Precision", "Recall", "F1"}) put(out, h, 11, true);
  for (const char* h : {"TP", "FP", "FN"}) put(out, h, 8, true);
  out << '\n';
  auto row = [&](std::string_view name, const Scores& s, const CategoryCounts* c) {
    put(out, std::string(name), 20);
    put(out, cell(s.precision, s.defined), 11, true);
    put(out, cell(s.recall, s.defined), 11, true);
    put(out, cell(s.f1, s.defined), 11, true);
    if (c) {
      put(out, std::to_string(c->tp), 8, true);
      put(out, std::to_string(c->fp), 8, true);
      put(out, std::to_string(c->fn), 8, true);
    }
    out << '\n';
  };
  for (IcoCategory c : kAllCategories) row(category_title(c), t[c].scores, &t[c].counts);
  row("micro", t.micro.scores, &t.micro.counts);
  row("macro", t.macro, nullptr);
  return out.str();
}

std::string render_eval_table_machine(const EvalTable& t) {
  json cats = json::array();
  for (IcoCategory c : kAllCategories) {
    json row = scores_json(t[c].scores);
    row.update(counts_json(t[c].counts));
    row["category"] = category_name(c);
    cats.push_back(std::move(row));
  }
  json micro = scores_json(t.micro.scores);
  micro.update(counts_json(t.micro.counts));
  json macro = scores_json(t.macro);
  macro["categories"] = t.macro_categories;
  return json{{"categories", std::move(cats)}, {"micro", std::move(micro)}, {"macro", std::move(macro)}}.dump() +
         "\n";
}

EvalTable parse_eval_table_machine(std::string_view line) {
  auto scores = [](const json& j) {
    Scores s;
    if (j.at("f1").is_null()) return s;
    s = {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>(), true};
    return s;
  };
  auto counts = [](const json& j) {
    return CategoryCounts{j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(),
                          j.at("fn").get<std::size_t>()};
  };
  try {
    const json j = json::parse(line);
    EvalTable t;
    for (const json& row : j.at("categories")) {
      const IcoCategory c = parse_category(row.at("category").get<std::string>());
      t.rows[index_of(c)] = {counts(row), scores(row)};
    }
    t.micro = {counts(j.at("micro")), scores(j.at("micro"))};
    t.macro = scores(j.at("macro"));
    t.macro_categories = j.at("macro").at("categories").get<std::size_t>();
    return t;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("bad evaluation table: ") + e.what());
  }
}

}  // namespace rita

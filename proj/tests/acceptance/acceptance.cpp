// Acceptance checks. Prints one line per criterion and exits non-zero if any
// check fails.
//
//   rita_acceptance [--require-offline] [--isolation-probe]
//
// Criterion 1 needs the published fine-tuned model. Set RITA_REFERENCE_CORPUS
// (the labelled test split) and RITA_REFERENCE_ADAPTER (a predictor command)
// to run it; otherwise it reports N/A.

#include <sys/wait.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "rita/adapter.hpp"
#include "rita/corpus.hpp"
#include "rita/error.hpp"
#include "rita/evaluation.hpp"
#include "rita/extraction.hpp"
#include "rita/knowledge_base.hpp"
#include "rita/pipeline.hpp"
#include "test_paths.hpp"

using namespace rita;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum class Status { Pass, Fail, NotApplicable } status = Status::Pass;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Status::Fail, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const char* kA3144e =
    "The A3144E Hall Effect Sensor Switch is used in the smart garage door opener, which allows you "
    "to open and close the garage door remotely";

// ---- 1 ------------------------------------------------------------------

Outcome published_scores() {
  const char* corpus_path = std::getenv("RITA_REFERENCE_CORPUS");
  const char* adapter_cmd = std::getenv("RITA_REFERENCE_ADAPTER");
  if (!corpus_path || !adapter_cmd)
    return {Outcome::Status::NotApplicable,
            "published per-category F1 needs the fine-tuned transformer; not reproducible at desk scale "
            "(set RITA_REFERENCE_CORPUS and RITA_REFERENCE_ADAPTER to check)"};

  const PerCategory<double> published = {0.9740831296, 0.9512195122, 0.9740831296, 0.9370629371,
                                         0.9967506806, 0.9982910595, 0.8931830381};
  const Corpus gold = load_corpus(corpus_path);
  AdapterConfig cfg;
  cfg.locator = adapter_cmd;
  cfg.timeout = std::chrono::seconds(120);
  AdapterExtractor ex(cfg);
  Predictions pred;
  for (const LabeledPhrase& p : gold.phrases()) pred[p.id] = ex.extract(p.text);
  const EvalTable t = evaluate_corpus(gold, pred);
  double worst = 0;
  for (IcoCategory c : kAllCategories) worst = std::max(worst, std::abs(t[c].scores.f1 - published[index_of(c)]));
  const std::string d = fmt("largest per-category F1 gap %.4f over %zu phrases", worst, gold.size());
  return worst <= 0.02 ? pass(d) : fail(d);
}

// ---- 2 ------------------------------------------------------------------

Outcome self_evaluation() {
  const Corpus gold = oracle::synthetic_corpus(1000, 2024);
  const auto t0 = std::chrono::steady_clock::now();
  const EvalTable t = evaluate_corpus(gold, predictions_from_corpus(gold));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::size_t checked = 0;
  for (IcoCategory c : kAllCategories) {
    if (gold.per_category_counts()[index_of(c)] == 0) continue;
    ++checked;
    if (std::abs(t[c].scores.f1 - 1.0) > 1e-9) return fail(fmt("%s F1 = %.12f", category_name(c).data(), t[c].scores.f1));
  }
  const std::string d = fmt("%zu categories at F1 1.0 on 1000 phrases in %.3f s", checked, secs);
  return secs < 1.0 && checked == kCategoryCount ? pass(d) : fail(d);
}

// ---- 3 ------------------------------------------------------------------

Outcome scorer_formula() {
  std::mt19937_64 rng(3);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    // Mix small counts (many zeros) with large ones.
    const std::uint64_t range = i % 2 ? 4 : 100000;
    const std::size_t tp = rng() % range, fp = rng() % range, fn = rng() % range;
    const Scores s = f_score(tp, fp, fn);
    if (s.defined != (tp + fp + fn > 0)) return fail(fmt("definedness wrong at (%zu,%zu,%zu)", tp, fp, fn));
    worst = std::max(worst, std::abs(s.f1 - oracle::harmonic_f1(tp, fp, fn)));
  }
  const std::string d = fmt("max |f1 - harmonic oracle| = %.3g over 10000 triples", worst);
  return worst <= 1e-12 ? pass(d) : fail(d);
}

// ---- 4 ------------------------------------------------------------------

Outcome bookkeeping() {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 20 + rng() % 200;
    std::vector<EntitySpan> gold, pred;
    PerCategory<std::size_t> ng{}, np{};
    auto draw = [&](std::vector<EntitySpan>& out, PerCategory<std::size_t>& n) {
      for (std::size_t k = 0, m = rng() % 12; k < m; ++k) {
        const std::size_t s = rng() % (len - 1);
        const std::size_t e = s + 1 + rng() % std::min<std::size_t>(len - s, 15);
        const IcoCategory c = kAllCategories[rng() % kCategoryCount];
        out.push_back({s, e, c, {}});
        ++n[index_of(c)];
      }
    };
    draw(gold, ng);
    draw(pred, np);
    const MatchCounts m = match_predictions(gold, pred, len);
    for (IcoCategory c : kAllCategories)
      if (m[c].tp + m[c].fn != ng[index_of(c)] || m[c].tp + m[c].fp != np[index_of(c)])
        return fail(fmt("trial %d, %s", trial, category_name(c).data()));
  }
  return pass("tp+fn = |gold| and tp+fp = |pred| per category on 1000 random sets");
}

// ---- 5 ------------------------------------------------------------------

using SpanSet = std::vector<EntitySpan>;

std::vector<SpanSet> grid_sets() {
  std::vector<EntitySpan> atoms;
  for (std::size_t s = 0; s <= 30; s += 6)
    for (std::size_t e = s + 6; e <= 30; e += 6)
      for (IcoCategory c : {IcoCategory::Sensor, IcoCategory::Service}) atoms.push_back({s, e, c, {}});
  std::vector<SpanSet> sets{{}};
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    sets.push_back({atoms[a]});
    for (std::size_t b = a + 1; b < atoms.size(); ++b) {
      sets.push_back({atoms[a], atoms[b]});
      for (std::size_t c = b + 1; c < atoms.size(); ++c) sets.push_back({atoms[a], atoms[b], atoms[c]});
    }
  }
  return sets;
}

Outcome greedy_vs_optimal() {
  const std::vector<std::pair<SpanSet, SpanSet>> fixtures = {
      {{{10, 20, IcoCategory::Sensor, {}}}, {{15, 25, IcoCategory::Sensor, {}}}},
      {{{10, 20, IcoCategory::Sensor, {}}}, {{10, 20, IcoCategory::Actuator, {}}}},
      {{{0, 5, IcoCategory::Tag, {}}, {10, 15, IcoCategory::Tag, {}}}, {{0, 5, IcoCategory::Tag, {}}}},
      {{{0, 10, IcoCategory::Sensor, {}}}, {{0, 4, IcoCategory::Sensor, {}}, {5, 10, IcoCategory::Sensor, {}}}},
      {{{0, 5, IcoCategory::Sensor, {}}, {5, 12, IcoCategory::Sensor, {}}},
       {{3, 9, IcoCategory::Sensor, {}}, {0, 2, IcoCategory::Sensor, {}}}},
      {{{0, 6, IcoCategory::Sensor, {}}, {6, 12, IcoCategory::Actuator, {}}, {12, 18, IcoCategory::Sensor, {}}},
       {{3, 15, IcoCategory::Sensor, {}}, {0, 3, IcoCategory::Sensor, {}}, {15, 18, IcoCategory::Sensor, {}}}},
  };
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& [g, p] = fixtures[i];
    if (match_predictions(g, p, 30).total().tp != oracle::max_matching(g, p))
      return fail(fmt("fixture %zu: greedy differs from maximum matching", i));
  }

  // Known difference: the long prediction is visited first and takes the gold
  // it overlaps most, stranding the short one.
  const SpanSet kg{{0, 12, IcoCategory::Sensor, {}}, {12, 20, IcoCategory::Sensor, {}}};
  const SpanSet kp{{0, 20, IcoCategory::Sensor, {}}, {5, 10, IcoCategory::Sensor, {}}};
  if (match_predictions(kg, kp, 30).total().tp != 1 || oracle::max_matching(kg, kp) != 2)
    return fail("known-difference instance no longer behaves as documented");

  // Every gold/pred pair of up to three spans with endpoints on a 6-character
  // grid of the 30-character text, two categories.
  const std::vector<SpanSet> sets = grid_sets();
  std::atomic<std::size_t> next{0}, divergent{0}, bound_violations{0};
  auto worker = [&] {
    for (std::size_t gi; (gi = next++) < sets.size();)
      for (const SpanSet& p : sets) {
        const std::size_t greedy = match_predictions(sets[gi], p, 30).total().tp;
        const std::size_t best = oracle::max_matching(sets[gi], p);
        if (greedy == best) continue;
        ++divergent;
        if (greedy > best || 2 * greedy < best) ++bound_violations;
      }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0, n = std::max(1u, std::thread::hardware_concurrency()); t < n; ++t) pool.emplace_back(worker);
  }
  const std::size_t pairs = sets.size() * sets.size();
  const std::string d =
      fmt("%zu fixtures equal; sweep %zu pairs, %zu diverge (all within [optimal/2, optimal]: %s)",
          fixtures.size() + 1, pairs, divergent.load(), bound_violations == 0 ? "yes" : "no");
  return bound_violations == 0 ? pass(d) : fail(d);
}

// ---- 6 ------------------------------------------------------------------

Outcome gazetteer_round_trip() {
  const Corpus corpus = oracle::synthetic_corpus(200, 6);
  const Lexicon lex = compile_lexicon(corpus);
  Predictions pred;
  for (const LabeledPhrase& p : corpus.phrases()) pred[p.id] = gazetteer_extract(lex, p.text);
  const EvalTable t = evaluate_corpus(corpus, pred);
  for (IcoCategory c : kAllCategories) {
    const Scores& s = t[c].scores;
    if (corpus.per_category_counts()[index_of(c)] == 0) continue;
    if (s.precision != 1.0 || s.recall != 1.0)
      return fail(fmt("%s precision %.4f recall %.4f", category_name(c).data(), s.precision, s.recall));
  }
  if (t.micro.counts.fp != 0) return fail("false positives outside gold categories");
  return pass(fmt("precision = recall = 1.0 per category, %zu spans", t.micro.counts.tp));
}

// ---- 7 ------------------------------------------------------------------

bool reachable_only(const DesignReport& r, const KnowledgeBase& kb, std::string& why) {
  std::set<IcoCategory> cats;
  for (const EntitySpan& e : r.entities) cats.insert(e.label);
  std::set<std::string> want_t, want_c, got_t, got_c;
  for (IcoCategory c : cats)
    for (const Threat& t : threats_for_category(kb, c)) {
      want_t.insert(t.id);
      for (const Countermeasure& m : mitigations_for_threat(kb, t.id)) want_c.insert(m.id);
    }
  for (const ReportCategory& rc : r.categories) {
    if (!cats.contains(rc.category)) return why = "category without entity", false;
    for (const ReportThreat& t : rc.threats) {
      got_t.insert(t.id);
      for (const ReportCountermeasure& m : t.countermeasures) got_c.insert(m.id);
    }
  }
  if (got_t != want_t) return why = "threat set differs from KB closure", false;
  if (got_c != want_c) return why = "countermeasure set differs from KB closure", false;
  if (r.summary.threats != got_t.size() || r.summary.countermeasures != got_c.size())
    return why = "summary counts disagree", false;
  return true;
}

Outcome end_to_end() {
  const Lexicon lex = load_lexicon(test_paths::sample_corpus());
  const std::vector<EntitySpan> spans = gazetteer_extract(lex, kA3144e);
  Predictions one{{"s1", spans}};
  std::ostringstream tuples;
  write_tuple_predictions(tuples, one);
  const std::string expected = "s1 (\"a3144e hall effect sensor switch\",\"ACTUATOR\")\n";
  if (tuples.str() != expected) return fail("tuple output was: " + tuples.str());

  const KnowledgeBase kb = load_kb(test_paths::fixture_kb());
  GazetteerExtractor ex(lex);
  const DesignReport r = analyze_document(ex, kb, "a3144e", kA3144e);
  std::string why;
  if (!reachable_only(r, kb, why)) return fail(why);
  if (r.summary.threats < 1 || r.summary.countermeasures < 1) return fail("report has no threat or countermeasure");
  return pass(fmt("tuple matches; report lists %zu threat(s), %zu countermeasure(s)", r.summary.threats,
                  r.summary.countermeasures));
}

// ---- 8 ------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

// Drops every line containing `needle` from a table file.
void drop_lines(const fs::path& p, const std::string& needle) {
  std::istringstream in(slurp(p));
  std::string out, line;
  while (std::getline(in, line))
    if (line.find(needle) == std::string::npos) out += line + "\n";
  spit(p, out);
}

Outcome kb_integrity_check() {
  const IntegrityReport clean = kb_integrity(read_kb_tables(test_paths::fixture_kb()));
  if (!clean.ok()) return fail("fixture KB: " + clean.violations.front().describe());

  struct Fault {
    const char* name;
    Violation::Kind kind;
    std::string token;
    std::function<void(const fs::path&)> inject;
  };
  const std::vector<Fault> faults = {
      {"dangling threat link", Violation::Kind::DanglingReference, "T999",
       [](const fs::path& d) { std::ofstream(d / kThreatCategoryTable, std::ios::app) << "T999,SENSOR\n"; }},
      {"dangling countermeasure link", Violation::Kind::DanglingReference, "C999",
       [](const fs::path& d) { std::ofstream(d / kCountermeasureThreatTable, std::ios::app) << "C999,T001\n"; }},
      {"empty link set", Violation::Kind::EmptyLinkSet, "T004",
       [](const fs::path& d) { std::ofstream(d / kThreatsTable, std::ios::app) << "T004,Orphan,No links\n"; }},
      {"uncovered category", Violation::Kind::UncoveredCategory, "SERVICE",
       [](const fs::path& d) { drop_lines(d / kThreatCategoryTable, "SERVICE"); }},
  };
  for (const Fault& f : faults) {
    const fs::path dir = test_paths::scratch("acceptance_kb");
    fs::copy(test_paths::fixture_kb(), dir, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    f.inject(dir);
    const IntegrityReport r = kb_integrity(read_kb_tables(dir));
    const bool named = std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation& v) {
      const std::string text = v.describe();
      return v.kind == f.kind && text.find(violation_kind_name(f.kind)) != std::string::npos &&
             text.find(f.token) != std::string::npos;
    });
    if (!named) return fail(std::string(f.name) + " not detected");
    fs::remove_all(dir);
  }
  return pass("fixture KB has 0 violations; 4 injected fault kinds detected and named");
}

// ---- 9 ------------------------------------------------------------------

int run_shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome determinism() {
  const Corpus corpus = oracle::synthetic_corpus(300, 9);
  auto split_bytes = [&] {
    const auto [train, test] = split_corpus(corpus, 0.3, 77);
    std::ostringstream out;
    write_corpus(out, train);
    out << "--\n";
    write_corpus(out, test);
    return out.str();
  };
  if (split_bytes() != split_bytes()) return fail("split differs between runs");

  auto extraction_bytes = [&] {
    const Lexicon lex = compile_lexicon(corpus);
    Predictions p;
    for (const LabeledPhrase& ph : corpus.phrases()) p[ph.id] = gazetteer_extract(lex, ph.text);
    std::ostringstream out;
    write_tuple_predictions(out, p);
    return out.str();
  };
  if (extraction_bytes() != extraction_bytes()) return fail("extraction differs between runs");

  const KnowledgeBase kb = load_kb(test_paths::fixture_kb());
  auto report_bytes = [&] {
    GazetteerExtractor ex(load_lexicon(test_paths::sample_corpus()));
    const DesignReport r = analyze_document(ex, kb, "d", kA3144e);
    return render_report(r, ReportFormat::Text) + render_report(r, ReportFormat::Machine);
  };
  if (report_bytes() != report_bytes()) return fail("report rendering differs between runs");

  // Separate processes, through the command-line tool.
  const fs::path dir = test_paths::scratch("acceptance_determinism");
  save_corpus(dir / "all.jsonl", corpus);
  const std::string cli = q(RITA_CLI);
  for (const char* tag : {"a", "b"}) {
    const std::string t(tag);
    const std::string cmds[] = {
        cli + " corpus split -i " + q(dir / "all.jsonl") + " --seed 5 --out-train " + q(dir / ("tr" + t)) +
            " --out-test " + q(dir / ("te" + t)) + " > /dev/null",
        cli + " extract -i " + q(dir / "all.jsonl") + " --lexicon " + q(dir / "all.jsonl") + " -j 4 > " +
            q(dir / ("ex" + t)),
        cli + " analyze -i " + q(dir / "all.jsonl") + " --lexicon " + q(dir / "all.jsonl") + " --kb " +
            q(test_paths::fixture_kb()) + " > " + q(dir / ("an" + t)),
    };
    for (const std::string& c : cmds)
      if (run_shell(c) != 0) return fail("command failed: " + c);
  }
  for (const char* f : {"tr", "te", "ex", "an"})
    if (slurp(dir / (std::string(f) + "a")) != slurp(dir / (std::string(f) + "b")))
      return fail(std::string("CLI output differs between runs: ") + f);
  fs::remove_all(dir);
  return pass("split, extraction and reports byte-identical in-process and across CLI runs");
}

// ---- 10 -----------------------------------------------------------------

// True when loopback is the only network interface.
bool network_isolated() {
  std::ifstream in("/proc/net/dev");
  if (!in) return false;
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string name = line.substr(line.find_first_not_of(' '), colon - line.find_first_not_of(' '));
    if (name != "lo") return false;
  }
  return true;
}

Outcome offline(bool required) {
  const bool isolated = network_isolated();
  if (required && !isolated) return fail("--require-offline given but non-loopback interfaces are present");

  std::string prefix;
  if (!isolated) {
    const std::string wrapper = RITA_OFFLINE;
    if (wrapper.empty()) return fail("not isolated and no network namespace wrapper available");
    prefix = wrapper + " ";
    if (run_shell(prefix + q(RITA_SELF) + " --isolation-probe") != 0)
      return fail("wrapper did not produce an isolated network namespace");
  }
  const int unit = run_shell(prefix + q(RITA_UNIT_TESTS) + " --test-suite-exclude=network > /dev/null 2>&1");
  const int cli = run_shell(prefix + q(RITA_CLI_TESTS) + " > /dev/null 2>&1");
  const std::string d = fmt("unit suites exit %d, CLI suite exit %d, with no network (%s)", unit, cli,
                            isolated ? "already isolated" : "fresh namespace");
  return unit == 0 && cli == 0 ? pass(d) : fail(d);
}

}  // namespace

int main(int argc, char** argv) {
  bool require_offline = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--isolation-probe") return network_isolated() ? 0 : 1;
    if (a == "--require-offline") require_offline = true;
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"published model scores", published_scores},
      {"self-evaluation oracle", self_evaluation},
      {"scorer formula", scorer_formula},
      {"bookkeeping", bookkeeping},
      {"greedy vs optimal matching", greedy_vs_optimal},
      {"gazetteer round trip", gazetteer_round_trip},
      {"A3144E end to end", end_to_end},
      {"knowledge base integrity", kb_integrity_check},
      {"determinism", determinism},
      {"offline", [&] { return offline(require_offline); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Outcome::Status::Pass   ? "PASS"
                      : o.status == Outcome::Status::Fail ? "FAIL"
                                                          : "N/A ";
    if (o.status == Outcome::Status::Fail) ++failures;
    std::cout << tag << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

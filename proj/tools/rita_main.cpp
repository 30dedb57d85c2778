// rita: command-line front end for extraction, analysis, scoring and data
// maintenance. Exit codes: 0 ok, 1 usage, 2 bad data, 3 adapter failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rita/adapter.hpp"
#include "rita/corpus.hpp"
#include "rita/error.hpp"
#include "rita/evaluation.hpp"
#include "rita/extraction.hpp"
#include "rita/knowledge_base.hpp"
#include "rita/lexicon.hpp"
#include "rita/pipeline.hpp"
#include "rita/text.hpp"

namespace {

using nlohmann::json;
using namespace rita;

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kAdapter = 3;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Document {
  std::string id;
  std::string text;
};

bool is_corpus_path(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jsonl" || ext == ".json" || ext == ".ndjson" || ext == ".csv";
}

// Plain text holds one document per non-blank line, identified by line number.
std::vector<Document> read_plain_documents(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      text::decode_utf8(line);
    } catch (const ParseError& e) {
      throw ParseError(n, e.reason());
    }
    docs.push_back({std::to_string(n), std::move(line)});
  }
  return docs;
}

std::vector<Document> read_documents(const std::string& path) {
  if (path == "-") return read_plain_documents(std::cin);
  if (is_corpus_path(path)) {
    const Corpus corpus = load_corpus(path);
    std::vector<Document> docs;
    for (const LabeledPhrase& p : corpus.phrases()) docs.push_back({p.id, p.text});
    return docs;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open input file " + path);
  return read_plain_documents(in);
}

// Extraction over a lexicon shared by all workers.
class SharedGazetteer final : public Extractor {
 public:
  explicit SharedGazetteer(const Lexicon& lex) : lex_(lex) {}
  std::vector<EntitySpan> extract(std::string_view text) override { return gazetteer_extract(lex_, text); }

 private:
  const Lexicon& lex_;
};

struct BackendOptions {
  std::string lexicon;
  std::string adapter;
  std::string adapter_tcp;
  int timeout_ms = 10000;
  unsigned jobs = 1;

  void attach(CLI::App& cmd) {
    auto* lex = cmd.add_option("--lexicon", lexicon, "Lexicon file, or a labelled corpus to compile one from");
    auto* proc = cmd.add_option("--adapter", adapter, "Shell command of an external predictor (stdin/stdout)");
    auto* tcp = cmd.add_option("--adapter-tcp", adapter_tcp, "host:port of an external predictor (network)");
    lex->excludes(proc)->excludes(tcp);
    proc->excludes(tcp);
    cmd.add_option("--timeout", timeout_ms, "Adapter reply timeout in milliseconds")->check(CLI::PositiveNumber);
    cmd.add_option("--jobs,-j", jobs, "Documents processed concurrently")->check(CLI::PositiveNumber);
  }
};

// One extractor per worker; adapters each get their own connection.
class Backend {
 public:
  explicit Backend(const BackendOptions& opt) : opt_(opt) {
    if (opt.lexicon.empty() && opt.adapter.empty() && opt.adapter_tcp.empty())
      throw UsageError("one of --lexicon, --adapter or --adapter-tcp is required");
    if (!opt.lexicon.empty()) lexicon_ = std::make_unique<Lexicon>(load_lexicon(opt.lexicon));
  }

  std::unique_ptr<Extractor> make() {
    if (lexicon_) return std::make_unique<SharedGazetteer>(*lexicon_);
    AdapterConfig cfg;
    cfg.transport = opt_.adapter.empty() ? AdapterConfig::Transport::Tcp : AdapterConfig::Transport::Process;
    cfg.locator = opt_.adapter.empty() ? opt_.adapter_tcp : opt_.adapter;
    cfg.timeout = std::chrono::milliseconds(opt_.timeout_ms);
    auto ex = std::make_unique<AdapterExtractor>(cfg);
    adapters_.push_back(ex.get());
    return ex;
  }

  std::size_t dropped() const {
    std::size_t n = 0;
    for (const AdapterExtractor* a : adapters_) n += a->dropped();
    return n;
  }

 private:
  const BackendOptions& opt_;
  std::unique_ptr<Lexicon> lexicon_;
  std::vector<const AdapterExtractor*> adapters_;
};

// Runs work(extractor, i) for every i in [0, n) on up to `jobs` threads.
// Rethrows the error of the lowest failing index.
void for_each_document(std::size_t n, unsigned jobs, Backend& backend,
                       const std::function<void(Extractor&, std::size_t)>& work) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, n));
  std::vector<std::unique_ptr<Extractor>> extractors;
  for (std::size_t w = 0; w < workers; ++w) extractors.push_back(backend.make());

  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto loop = [&](Extractor& ex) {
    for (std::size_t i; !failed && (i = next++) < n;) {
      try {
        work(ex, i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  if (workers == 1) {
    loop(*extractors[0]);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop, std::ref(*extractors[w]));
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void warn_dropped(const Backend& backend) {
  if (const std::size_t n = backend.dropped())
    std::cerr << "rita: warning: " << n << " invalid entities from the adapter were dropped\n";
}

std::string tuple_line(const std::string& id, const EntitySpan& s) {
  return id + " (" + json(text::normalize_surface(s.surface)).dump() + "," + json(std::string(category_name(s.label))).dump() +
         ")\n";
}

json spans_json(const std::vector<EntitySpan>& spans) {
  json out = json::array();
  for (const EntitySpan& s : spans)
    out.push_back({{"start", s.start}, {"end", s.end}, {"label", category_name(s.label)}, {"surface", s.surface}});
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw Error("cannot write " + path);
}

// ---- extract ------------------------------------------------------------

struct ExtractCmd {
  std::string input;
  std::string out;
  bool machine = false;
  BackendOptions backend;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("extract", "Find ICO mentions in documents");
    cmd->add_option("--input,-i", input, "Plain text (one document per line) or a corpus file")->required();
    cmd->add_option("--out,-o", out, "Output file (default stdout)");
    cmd->add_flag("--machine", machine, "One JSON object per document instead of tuples");
    backend.attach(*cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    const std::vector<Document> docs = read_documents(input);
    Backend be(backend);
    std::vector<std::string> lines(docs.size());
    for_each_document(docs.size(), backend.jobs, be, [&](Extractor& ex, std::size_t i) {
      std::vector<EntitySpan> spans;
      try {
        spans = ex.extract(docs[i].text);
      } catch (const AdapterError& e) {
        throw AdapterError(e.kind(), "document " + docs[i].id + ": " + e.what(), e.line());
      }
      std::string& line = lines[i];
      if (machine) {
        line = json{{"id", docs[i].id}, {"entities", spans_json(spans)}}.dump() + "\n";
      } else if (spans.empty()) {
        line = docs[i].id + " none\n";
      } else {
        for (const EntitySpan& s : spans) line += tuple_line(docs[i].id, s);
      }
    });
    std::string all;
    for (const std::string& l : lines) all += l;
    write_output(out, all);
    warn_dropped(be);
  }
};

// ---- analyze ------------------------------------------------------------

struct AnalyzeCmd {
  std::string input;
  std::string kb_dir;
  std::string format = "text";
  std::string out;
  BackendOptions backend;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("analyze", "Produce resilience design reports");
    cmd->add_option("--input,-i", input, "Plain text (one document per line) or a corpus file")->required();
    cmd->add_option("--kb", kb_dir, "Knowledge base directory")->required();
    cmd->add_option("--format", format, "text or machine")->check(CLI::IsMember({"text", "machine"}));
    cmd->add_option("--out,-o", out, "Output file (default stdout)");
    backend.attach(*cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    const KnowledgeBase kb = load_kb(kb_dir);
    const std::vector<Document> docs = read_documents(input);
    Backend be(backend);
    const ReportFormat fmt = format == "machine" ? ReportFormat::Machine : ReportFormat::Text;
    std::vector<std::string> reports(docs.size());
    for_each_document(docs.size(), backend.jobs, be, [&](Extractor& ex, std::size_t i) {
      reports[i] = render_report(analyze_document(ex, kb, docs[i].id, docs[i].text), fmt);
    });
    std::string all;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i > 0 && fmt == ReportFormat::Text) all += '\n';
      all += reports[i];
    }
    write_output(out, all);
    warn_dropped(be);
  }
};

// ---- eval ---------------------------------------------------------------

struct EvalCmd {
  std::string gold;
  std::string pred;
  bool tuple_format = false;
  bool machine = false;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "Score predictions against a labelled corpus");
    cmd->add_option("--gold", gold, "Labelled corpus")->required();
    cmd->add_option("--pred", pred, "Predictions: JSON lines, or tuples with --tuple-format")->required();
    cmd->add_flag("--tuple-format", tuple_format, "Predictions are ('entity','CATEGORY') tuple lines");
    cmd->add_flag("--machine", machine, "Single-line JSON output");
    cmd->callback([this] { run(); });
  }

  void run() {
    const Corpus g = load_corpus(gold);
    const Predictions p = tuple_format ? parse_external_predictions(pred, g) : load_span_predictions(pred, g);
    std::size_t lost = 0;
    for (const auto& [id, spans] : p)
      lost += std::count_if(spans.begin(), spans.end(), [](const EntitySpan& s) { return s.unlocatable(); });
    if (lost)
      std::cerr << "rita: warning: " << lost << " predicted entities not found in their phrase count as false positives\n";
    const EvalTable t = evaluate_corpus(g, p);
    std::cout << (machine ? render_eval_table_machine(t) : render_eval_table(t));
  }
};

// ---- kb -----------------------------------------------------------------

struct KbCmd {
  std::string dir;
  std::string category;
  std::string threat;
  bool machine = false;

  void attach(CLI::App& app) {
    auto* kb = app.add_subcommand("kb", "Inspect a knowledge base");
    kb->require_subcommand(1);

    auto* check = kb->add_subcommand("check", "Verify referential integrity and coverage");
    add_common(*check);
    check->callback([this] { throw_exit(run_check()); });

    auto* threats = kb->add_subcommand("threats", "Threats linked to a category");
    add_common(*threats);
    threats->add_option("--category,-c", category, "ICO category, e.g. SENSOR")->required();
    threats->callback([this] { run_threats(); });

    auto* mitigations = kb->add_subcommand("mitigations", "Countermeasures for a threat");
    add_common(*mitigations);
    mitigations->add_option("--threat,-t", threat, "Threat id")->required();
    mitigations->callback([this] { run_mitigations(); });
  }

  void add_common(CLI::App& cmd) {
    cmd.add_option("--kb", dir, "Knowledge base directory")->required();
    cmd.add_flag("--machine", machine, "JSON output");
  }

  static void throw_exit(int code) {
    if (code != 0) throw CLI::RuntimeError(code);
  }

  int run_check() {
    const IntegrityReport r = kb_integrity(read_kb_tables(dir));
    if (machine) {
      json v = json::array();
      for (const Violation& x : r.violations)
        v.push_back({{"kind", violation_kind_name(x.kind)}, {"table", x.table}, {"from", x.from}, {"to", x.to}});
      std::cout << json{{"violations", v}, {"unmitigated_threats", r.unmitigated_threats}}.dump() << '\n';
    } else {
      for (const Violation& x : r.violations) std::cout << x.describe() << '\n';
      std::cout << (r.ok() ? "OK, " : "FAILED, ") << r.violations.size() << " violations\n";
      for (const std::string& t : r.unmitigated_threats)
        std::cerr << "rita: warning: threat " << t << " has no countermeasure\n";
    }
    return r.ok() ? 0 : kData;
  }

  void run_threats() {
    const KnowledgeBase kb = load_kb(dir);
    const std::vector<Threat> ts = threats_for_category(kb, parse_category(category));
    if (machine) {
      json out = json::array();
      for (const Threat& t : ts) out.push_back({{"id", t.id}, {"name", t.name}, {"description", t.description}});
      std::cout << out.dump() << '\n';
      return;
    }
    for (const Threat& t : ts) std::cout << t.id << '\t' << t.name << '\n';
  }

  void run_mitigations() {
    const KnowledgeBase kb = load_kb(dir);
    const std::vector<Countermeasure> cs = mitigations_for_threat(kb, threat);
    if (machine) {
      json out = json::array();
      for (const Countermeasure& c : cs)
        out.push_back({{"id", c.id},
                       {"name", c.name},
                       {"requirement_class", requirement_class_name(c.requirement_class)},
                       {"description", c.description}});
      std::cout << out.dump() << '\n';
      return;
    }
    for (const Countermeasure& c : cs)
      std::cout << c.id << '\t' << c.name << '\t' << requirement_class_name(c.requirement_class) << '\n';
  }
};

// ---- corpus -------------------------------------------------------------

struct CorpusCmd {
  std::string input;
  double ratio = 0.3;
  std::uint64_t seed = 0;
  std::string out_train;
  std::string out_test;
  bool machine = false;

  void attach(CLI::App& app) {
    auto* corpus = app.add_subcommand("corpus", "Corpus statistics and splitting");
    corpus->require_subcommand(1);

    auto* stats = corpus->add_subcommand("stats", "Counts per category and source");
    stats->add_option("--input,-i", input, "Corpus file")->required();
    stats->add_flag("--machine", machine, "JSON output");
    stats->callback([this] { run_stats(); });

    auto* split = corpus->add_subcommand("split", "Seeded train/test partition");
    split->add_option("--input,-i", input, "Corpus file")->required();
    split->add_option("--ratio", ratio, "Fraction of phrases for the test side")->capture_default_str();
    split->add_option("--seed", seed, "Random seed")->capture_default_str();
    split->add_option("--out-train", out_train, "Training corpus output")->required();
    split->add_option("--out-test", out_test, "Test corpus output")->required();
    split->callback([this] { run_split(); });
  }

  void run_stats() {
    const CorpusStats s = corpus_stats(load_corpus(input));
    const SourceKind sources[] = {SourceKind::Storyline, SourceKind::UserStory, SourceKind::Requirement,
                                  SourceKind::Unknown};
    if (machine) {
      json cats = json::array();
      for (IcoCategory c : kAllCategories)
        cats.push_back({{"category", category_name(c)},
                        {"spans", s.span_counts[index_of(c)]},
                        {"distinct_surfaces", s.distinct_surface_counts[index_of(c)]}});
      json by_source = json::object();
      for (SourceKind k : sources) by_source[source_kind_name(k)] = s.phrases_by_source[static_cast<std::size_t>(k)];
      std::cout << json{{"phrases", s.phrases},
                        {"spans", s.spans},
                        {"distinct_surfaces", s.distinct_surfaces},
                        {"categories", cats},
                        {"sources", by_source}}
                       .dump()
                << '\n';
      return;
    }
    std::cout << "phrases: " << s.phrases << "\nspans: " << s.spans << "\ndistinct surfaces: " << s.distinct_surfaces
              << "\nsources:";
    for (SourceKind k : sources)
      std::cout << ' ' << source_kind_name(k) << '=' << s.phrases_by_source[static_cast<std::size_t>(k)];
    std::cout << "\n\n";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-20s %8s %10s\n", "Category", "Spans", "Surfaces");
    std::cout << buf;
    for (IcoCategory c : kAllCategories) {
      std::snprintf(buf, sizeof buf, "%-20s %8zu %10zu\n", std::string(category_title(c)).c_str(),
                    s.span_counts[index_of(c)], s.distinct_surface_counts[index_of(c)]);
      std::cout << buf;
    }
  }

  void run_split() {
    const auto [train, test] = split_corpus(load_corpus(input), ratio, seed);
    save_corpus(out_train, train);
    save_corpus(out_test, test);
    std::cout << "train: " << train.size() << " phrases -> " << out_train << "\ntest: " << test.size()
              << " phrases -> " << out_test << '\n';
  }
};

// ---- lexicon ------------------------------------------------------------

struct LexiconCmd {
  std::string input;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("lexicon", "Compile a gazetteer lexicon from a labelled corpus");
    cmd->add_option("--input,-i", input, "Labelled corpus")->required();
    cmd->add_option("--out,-o", out, "Output file (default stdout)");
    cmd->callback([this] { run(); });
  }

  void run() {
    std::ostringstream buf;
    write_lexicon(buf, compile_lexicon(load_corpus(input)));
    write_output(out, buf.str());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline ICO extraction, threat analysis and scoring"};
  app.name("rita");
  app.require_subcommand(1);

  ExtractCmd extract;
  AnalyzeCmd analyze;
  EvalCmd eval;
  KbCmd kb;
  CorpusCmd corpus;
  LexiconCmd lexicon;
  extract.attach(app);
  analyze.attach(app);
  eval.attach(app);
  kb.attach(app);
  corpus.attach(app);
  lexicon.attach(app);

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "rita: error: " << e.what() << '\n';
    return kUsage;
  } catch (const AdapterError& e) {
    std::cerr << "rita: adapter error: " << e.what() << '\n';
    return kAdapter;
  } catch (const rita::Error& e) {
    std::cerr << "rita: error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "rita: error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "rita: error: " << e.what() << '\n';
    return kData;
  }
}

#include "rita/knowledge_base.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "rita/csv.hpp"

namespace rita {

namespace {

constexpr std::string_view kClassNames[] = {"monitoring", "detection", "protection", "restoration",
                                            "memorization"};

}  // namespace

std::string_view requirement_class_name(RequirementClass rc) {
  return kClassNames[static_cast<std::size_t>(rc)];
}

RequirementClass parse_requirement_class(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::size_t i = 0; i < std::size(kClassNames); ++i)
    if (kClassNames[i] == lower) return static_cast<RequirementClass>(i);
  throw ParseError(0, "unknown requirement class '" + std::string(s) + "'");
}

void KnowledgeBase::add_threat(std::string id, std::string name, std::string description) {
  if (threats_.contains(id)) throw std::invalid_argument("duplicate threat id '" + id + "'");
  Threat t{id, std::move(name), std::move(description), {}};
  for (const CategoryLink& l : category_links_)
    if (l.threat_id == id) t.categories.insert(l.category);
  threats_.emplace(std::move(id), std::move(t));
}

void KnowledgeBase::add_countermeasure(std::string id, std::string name, std::string description,
                                       RequirementClass rc) {
  if (countermeasures_.contains(id))
    throw std::invalid_argument("duplicate countermeasure id '" + id + "'");
  Countermeasure c{id, std::move(name), std::move(description), rc, {}};
  for (const MitigationLink& l : mitigation_links_)
    if (l.countermeasure_id == id) c.threats.insert(l.threat_id);
  countermeasures_.emplace(std::move(id), std::move(c));
}

void KnowledgeBase::link_threat(std::string threat_id, IcoCategory category) {
  if (auto it = threats_.find(threat_id); it != threats_.end()) it->second.categories.insert(category);
  category_links_.insert({std::move(threat_id), category});
}

void KnowledgeBase::link_countermeasure(std::string countermeasure_id, std::string threat_id) {
  if (auto it = countermeasures_.find(countermeasure_id); it != countermeasures_.end())
    it->second.threats.insert(threat_id);
  mitigation_links_.insert({std::move(countermeasure_id), std::move(threat_id)});
}

std::string_view violation_kind_name(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::DanglingReference: return "DanglingReference";
    case Violation::Kind::EmptyLinkSet: return "EmptyLinkSet";
    case Violation::Kind::UncoveredCategory: return "UncoveredCategory";
  }
  return "";
}

std::string Violation::describe() const {
  std::string out(violation_kind_name(kind));
  switch (kind) {
    case Kind::DanglingReference:
      return out + ": " + table + " links " + from + " to missing id " + to;
    case Kind::EmptyLinkSet:
      return out + ": " + from + " in " + table + " has no links";
    case Kind::UncoveredCategory:
      return out + ": no threat is linked to category " + from;
  }
  return out;
}

IntegrityReport kb_integrity(const KnowledgeBase& kb) {
  IntegrityReport report;
  using Kind = Violation::Kind;
  const std::string threat_category(kThreatCategoryTable);
  const std::string countermeasure_threat(kCountermeasureThreatTable);

  for (const auto& l : kb.category_links())
    if (!kb.threats().contains(l.threat_id))
      report.violations.push_back(
          {Kind::DanglingReference, threat_category, std::string(category_name(l.category)), l.threat_id});
  for (const auto& l : kb.mitigation_links()) {
    if (!kb.countermeasures().contains(l.countermeasure_id))
      report.violations.push_back(
          {Kind::DanglingReference, countermeasure_threat, l.threat_id, l.countermeasure_id});
    if (!kb.threats().contains(l.threat_id))
      report.violations.push_back(
          {Kind::DanglingReference, countermeasure_threat, l.countermeasure_id, l.threat_id});
  }

  for (const auto& [id, t] : kb.threats())
    if (t.categories.empty())
      report.violations.push_back({Kind::EmptyLinkSet, std::string(kThreatsTable), id, {}});
  for (const auto& [id, c] : kb.countermeasures())
    if (c.threats.empty())
      report.violations.push_back({Kind::EmptyLinkSet, std::string(kCountermeasuresTable), id, {}});

  PerCategory<bool> covered{};
  for (const auto& [id, t] : kb.threats())
    for (IcoCategory c : t.categories) covered[index_of(c)] = true;
  for (IcoCategory c : kAllCategories)
    if (!covered[index_of(c)])
      report.violations.push_back({Kind::UncoveredCategory, threat_category, std::string(category_name(c)), {}});

  std::set<std::string> mitigated;
  for (const auto& l : kb.mitigation_links())
    if (kb.countermeasures().contains(l.countermeasure_id)) mitigated.insert(l.threat_id);
  for (const auto& [id, t] : kb.threats())
    if (!mitigated.contains(id)) report.unmitigated_threats.push_back(id);
  return report;
}

namespace {

std::vector<csv::Row> read_table(const std::filesystem::path& dir, std::string_view name,
                                 const std::vector<std::string>& header) {
  const std::filesystem::path path = dir / name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingTable(std::string(name));
  std::vector<csv::Row> rows;
  try {
    rows = csv::read(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), std::string(name) + ": " + e.reason());
  }
  if (rows.empty()) throw ParseError(0, std::string(name) + ": missing header row");
  std::vector<std::string> got = rows.front().fields;
  for (std::string& f : got) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  if (got != header) {
    std::string want;
    for (const std::string& h : header) want += (want.empty() ? "" : ",") + h;
    throw ParseError(rows.front().line, std::string(name) + ": header must be " + want);
  }
  rows.erase(rows.begin());
  for (const csv::Row& r : rows)
    if (r.fields.size() != header.size())
      throw ParseError(r.line, std::string(name) + ": expected " + std::to_string(header.size()) +
                                   " fields, got " + std::to_string(r.fields.size()));
  return rows;
}

template <typename F>
void with_table_context(std::string_view table, const csv::Row& row, F&& body) {
  try {
    body();
  } catch (const ParseError& e) {
    throw ParseError(row.line, std::string(table) + ": " + e.reason());
  } catch (const std::invalid_argument& e) {
    throw ParseError(row.line, std::string(table) + ": " + e.what());
  }
}

}  // namespace

KnowledgeBase read_kb_tables(const std::filesystem::path& dir) {
  // Open everything first so a missing table is reported before content errors.
  auto threats = read_table(dir, kThreatsTable, {"id", "name", "description"});
  auto cms = read_table(dir, kCountermeasuresTable, {"id", "name", "description", "requirement_class"});
  auto tc = read_table(dir, kThreatCategoryTable, {"threat_id", "category"});
  auto ct = read_table(dir, kCountermeasureThreatTable, {"countermeasure_id", "threat_id"});

  KnowledgeBase kb;
  for (auto& r : threats)
    with_table_context(kThreatsTable, r, [&] {
      if (r.fields[0].empty()) throw ParseError(0, "empty id");
      kb.add_threat(r.fields[0], r.fields[1], r.fields[2]);
    });
  for (auto& r : cms)
    with_table_context(kCountermeasuresTable, r, [&] {
      if (r.fields[0].empty()) throw ParseError(0, "empty id");
      kb.add_countermeasure(r.fields[0], r.fields[1], r.fields[2], parse_requirement_class(r.fields[3]));
    });
  for (auto& r : tc) kb.link_threat(r.fields[0], parse_category(r.fields[1]));
  for (auto& r : ct) kb.link_countermeasure(r.fields[0], r.fields[1]);
  return kb;
}

KnowledgeBase load_kb(const std::filesystem::path& dir) {
  KnowledgeBase kb = read_kb_tables(dir);
  IntegrityReport report = kb_integrity(kb);
  if (!report.ok()) throw IntegrityError(std::move(report.violations.front()));
  return kb;
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](std::string_view name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open(kThreatsTable);
    csv::write_row(out, {"id", "name", "description"});
    for (const auto& [id, t] : kb.threats()) csv::write_row(out, {id, t.name, t.description});
  }
  {
    auto out = open(kCountermeasuresTable);
    csv::write_row(out, {"id", "name", "description", "requirement_class"});
    for (const auto& [id, c] : kb.countermeasures())
      csv::write_row(out, {id, c.name, c.description, std::string(requirement_class_name(c.requirement_class))});
  }
  {
    auto out = open(kThreatCategoryTable);
    csv::write_row(out, {"threat_id", "category"});
    for (const auto& l : kb.category_links())
      csv::write_row(out, {l.threat_id, std::string(category_name(l.category))});
  }
  {
    auto out = open(kCountermeasureThreatTable);
    csv::write_row(out, {"countermeasure_id", "threat_id"});
    for (const auto& l : kb.mitigation_links()) csv::write_row(out, {l.countermeasure_id, l.threat_id});
  }
}

std::vector<Threat> threats_for_category(const KnowledgeBase& kb, IcoCategory cat) {
  std::vector<Threat> out;
  for (const auto& [id, t] : kb.threats())
    if (t.categories.contains(cat)) out.push_back(t);
  return out;
}

std::vector<Countermeasure> mitigations_for_threat(const KnowledgeBase& kb, std::string_view threat_id) {
  if (!kb.threats().contains(threat_id)) throw UnknownThreat(std::string(threat_id));
  std::vector<Countermeasure> out;
  for (const auto& [id, c] : kb.countermeasures())
    if (c.threats.contains(std::string(threat_id))) out.push_back(c);
  return out;
}

}  // namespace rita

#include "rita/pipeline.hpp"

#include <set>
#include <sstream>

#include <json.hpp>

#include "rita/error.hpp"

namespace rita {

using nlohmann::json;

DesignReport build_report(const KnowledgeBase& kb, std::string document_id,
                          std::vector<EntitySpan> entities) {
  DesignReport report;
  report.document_id = std::move(document_id);
  report.entities = std::move(entities);

  PerCategory<bool> present{};
  for (const EntitySpan& e : report.entities) present[index_of(e.label)] = true;

  std::set<std::string> threat_ids, countermeasure_ids;
  for (IcoCategory cat : kAllCategories) {
    if (!present[index_of(cat)]) continue;
    ReportCategory rc{cat, {}};
    for (const Threat& t : threats_for_category(kb, cat)) {
      ReportThreat rt{t.id, t.name, {}};
      for (const Countermeasure& c : mitigations_for_threat(kb, t.id)) {
        rt.countermeasures.push_back({c.id, c.name, c.requirement_class});
        countermeasure_ids.insert(c.id);
      }
      threat_ids.insert(t.id);
      rc.threats.push_back(std::move(rt));
    }
    report.categories.push_back(std::move(rc));
  }

  report.summary = {report.entities.size(), report.categories.size(), threat_ids.size(),
                    countermeasure_ids.size()};
  return report;
}

DesignReport analyze_document(Extractor& backend, const KnowledgeBase& kb, std::string_view doc_id,
                              std::string_view text) {
  std::vector<EntitySpan> entities;
  try {
    entities = backend.extract(text);
  } catch (const AdapterError& e) {
    throw AdapterError(e.kind(), "document " + std::string(doc_id) + ": " + e.what(), e.line());
  }
  return build_report(kb, std::string(doc_id), std::move(entities));
}

namespace {

std::string render_text(const DesignReport& r) {
  std::ostringstream out;
  out << "Resilience design report: " << r.document_id << '\n';
  out << "entities: " << r.summary.entities << "  categories: " << r.summary.categories
      << "  threats: " << r.summary.threats << "  countermeasures: " << r.summary.countermeasures
      << '\n';
  if (r.categories.empty()) {
    out << "no ICOs identified\n";
    return out.str();
  }
  for (const ReportCategory& rc : r.categories) {
    out << '\n'
        << "[" << category_name(rc.category) << "] " << category_title(rc.category) << " ("
        << group_name(parent_group(rc.category)) << ")\n";
    for (const EntitySpan& e : r.entities)
      if (e.label == rc.category)
        out << "  entity \"" << e.surface << "\" [" << e.start << ", " << e.end << ")\n";
    for (const ReportThreat& t : rc.threats) {
      out << "  threat " << t.id << ": " << t.name << '\n';
      if (t.countermeasures.empty()) out << "    (no countermeasure registered)\n";
      for (const ReportCountermeasure& c : t.countermeasures)
        out << "    countermeasure " << c.id << ": " << c.name << " ["
            << requirement_class_name(c.requirement_class) << "]\n";
    }
  }
  return out.str();
}

json to_json(const DesignReport& r) {
  json entities = json::array();
  for (const EntitySpan& e : r.entities)
    entities.push_back(
        {{"start", e.start}, {"end", e.end}, {"label", category_name(e.label)}, {"surface", e.surface}});
  json categories = json::array();
  for (const ReportCategory& rc : r.categories) {
    json threats = json::array();
    for (const ReportThreat& t : rc.threats) {
      json cms = json::array();
      for (const ReportCountermeasure& c : t.countermeasures)
        cms.push_back({{"id", c.id},
                       {"name", c.name},
                       {"requirement_class", requirement_class_name(c.requirement_class)}});
      threats.push_back({{"id", t.id}, {"name", t.name}, {"countermeasures", std::move(cms)}});
    }
    categories.push_back({{"category", category_name(rc.category)}, {"threats", std::move(threats)}});
  }
  return {{"id", r.document_id},
          {"entities", std::move(entities)},
          {"categories", std::move(categories)},
          {"summary",
           {{"entities", r.summary.entities},
            {"categories", r.summary.categories},
            {"threats", r.summary.threats},
            {"countermeasures", r.summary.countermeasures}}}};
}

}  // namespace

std::string render_report(const DesignReport& report, ReportFormat format) {
  if (format == ReportFormat::Text) return render_text(report);
  return to_json(report).dump() + "\n";
}

DesignReport parse_machine_report(std::string_view line) {
  try {
    const json j = json::parse(line);
    DesignReport r;
    r.document_id = j.at("id").get<std::string>();
    for (const json& e : j.at("entities"))
      r.entities.push_back({e.at("start").get<std::size_t>(), e.at("end").get<std::size_t>(),
                            parse_category(e.at("label").get<std::string>()),
                            e.at("surface").get<std::string>()});
    for (const json& c : j.at("categories")) {
      ReportCategory rc{parse_category(c.at("category").get<std::string>()), {}};
      for (const json& t : c.at("threats")) {
        ReportThreat rt{t.at("id").get<std::string>(), t.at("name").get<std::string>(), {}};
        for (const json& m : t.at("countermeasures"))
          rt.countermeasures.push_back(
              {m.at("id").get<std::string>(), m.at("name").get<std::string>(),
               parse_requirement_class(m.at("requirement_class").get<std::string>())});
        rc.threats.push_back(std::move(rt));
      }
      r.categories.push_back(std::move(rc));
    }
    const json& s = j.at("summary");
    r.summary = {s.at("entities").get<std::size_t>(), s.at("categories").get<std::size_t>(),
                 s.at("threats").get<std::size_t>(), s.at("countermeasures").get<std::size_t>()};
    return r;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("bad machine report: ") + e.what());
  }
}

}  // namespace rita

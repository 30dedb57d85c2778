#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rita/corpus.hpp"
#include "rita/extraction.hpp"
#include "rita/knowledge_base.hpp"

namespace rita {

struct ReportCountermeasure {
  std::string id;
  std::string name;
  RequirementClass requirement_class;

  friend bool operator==(const ReportCountermeasure&, const ReportCountermeasure&) = default;
};

struct ReportThreat {
  std::string id;
  std::string name;
  std::vector<ReportCountermeasure> countermeasures;  // by id

  friend bool operator==(const ReportThreat&, const ReportThreat&) = default;
};

struct ReportCategory {
  IcoCategory category;
  std::vector<ReportThreat> threats;  // by id

  friend bool operator==(const ReportCategory&, const ReportCategory&) = default;
};

struct ReportSummary {
  std::size_t entities = 0;
  std::size_t categories = 0;
  std::size_t threats = 0;          // distinct ids across the report
  std::size_t countermeasures = 0;  // distinct ids across the report

  friend bool operator==(const ReportSummary&, const ReportSummary&) = default;
};

/// Resilience-design report for one document. Categories appear in taxonomy
/// order and only when some entity carries them. A threat linked from two
/// categories is listed under both but counted once.
struct DesignReport {
  std::string document_id;
  std::vector<EntitySpan> entities;
  std::vector<ReportCategory> categories;
  ReportSummary summary;

  friend bool operator==(const DesignReport&, const DesignReport&) = default;
};

/// Joins already-extracted entities against the knowledge base.
DesignReport build_report(const KnowledgeBase& kb, std::string document_id,
                          std::vector<EntitySpan> entities);

/// Extraction followed by build_report. Backend failures are rethrown with
/// the document id in the message, keeping their type.
DesignReport analyze_document(Extractor& backend, const KnowledgeBase& kb, std::string_view doc_id,
                              std::string_view text);

enum class ReportFormat { Text, Machine };

/// Machine form is one JSON object on one line (with trailing newline).
std::string render_report(const DesignReport& report, ReportFormat format);

/// Inverse of the machine rendering. Throws ParseError.
DesignReport parse_machine_report(std::string_view line);

}  // namespace rita

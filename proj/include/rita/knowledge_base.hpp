#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rita/error.hpp"
#include "rita/taxonomy.hpp"

namespace rita {

/// Resilience requirement family a countermeasure serves.
enum class RequirementClass { Monitoring, Detection, Protection, Restoration, Memorization };

std::string_view requirement_class_name(RequirementClass rc);
/// Case-insensitive. Throws ParseError (line 0) for anything else.
RequirementClass parse_requirement_class(std::string_view s);

struct Threat {
  std::string id;
  std::string name;
  std::string description;
  std::set<IcoCategory> categories;

  friend bool operator==(const Threat&, const Threat&) = default;
};

struct Countermeasure {
  std::string id;
  std::string name;
  std::string description;
  RequirementClass requirement_class = RequirementClass::Monitoring;
  /// May name threats that do not exist; see kb_integrity.
  std::set<std::string> threats;

  friend bool operator==(const Countermeasure&, const Countermeasure&) = default;
};

/// The four relational tables. Link rows are kept verbatim, so a knowledge
/// base can hold dangling references until kb_integrity reports them.
class KnowledgeBase {
 public:
  struct CategoryLink {
    std::string threat_id;
    IcoCategory category;
    friend auto operator<=>(const CategoryLink&, const CategoryLink&) = default;
  };
  struct MitigationLink {
    std::string countermeasure_id;
    std::string threat_id;
    friend auto operator<=>(const MitigationLink&, const MitigationLink&) = default;
  };

  /// Throw std::invalid_argument on a duplicate id.
  void add_threat(std::string id, std::string name, std::string description);
  void add_countermeasure(std::string id, std::string name, std::string description,
                          RequirementClass rc);

  void link_threat(std::string threat_id, IcoCategory category);
  void link_countermeasure(std::string countermeasure_id, std::string threat_id);

  const std::map<std::string, Threat, std::less<>>& threats() const { return threats_; }
  const std::map<std::string, Countermeasure, std::less<>>& countermeasures() const {
    return countermeasures_;
  }
  const std::set<CategoryLink>& category_links() const { return category_links_; }
  const std::set<MitigationLink>& mitigation_links() const { return mitigation_links_; }

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

 private:
  std::map<std::string, Threat, std::less<>> threats_;
  std::map<std::string, Countermeasure, std::less<>> countermeasures_;
  std::set<CategoryLink> category_links_;
  std::set<MitigationLink> mitigation_links_;
};

struct Violation {
  enum class Kind { DanglingReference, EmptyLinkSet, UncoveredCategory };

  Kind kind;
  /// Link table holding the bad row (DanglingReference) or the table of the
  /// entity with no links (EmptyLinkSet).
  std::string table;
  /// Referencing side: the countermeasure, category or threat id; or the id
  /// with an empty link set; or the uncovered category name.
  std::string from;
  /// The missing id, for DanglingReference.
  std::string to;

  std::string describe() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

std::string_view violation_kind_name(Violation::Kind k);

struct IntegrityReport {
  std::vector<Violation> violations;
  /// Threats with no countermeasure. Allowed, but worth surfacing.
  std::vector<std::string> unmitigated_threats;

  bool ok() const { return violations.empty(); }
};

/// Every dangling reference, empty link set and uncovered category, in a
/// stable order: dangling references, then empty link sets, then categories.
IntegrityReport kb_integrity(const KnowledgeBase& kb);

class MissingTable : public Error {
 public:
  explicit MissingTable(const std::string& name)
      : Error("missing knowledge-base table " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// load_kb found the knowledge base inconsistent.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(Violation v) : Error(v.describe()), violation_(std::move(v)) {}
  const Violation& violation() const { return violation_; }

 private:
  Violation violation_;
};

inline constexpr std::string_view kThreatsTable = "threats.csv";
inline constexpr std::string_view kCountermeasuresTable = "countermeasures.csv";
inline constexpr std::string_view kThreatCategoryTable = "threat_category.csv";
inline constexpr std::string_view kCountermeasureThreatTable = "countermeasure_threat.csv";

/// Parses the four tables without checking integrity. Throws MissingTable,
/// ParseError, UnknownCategory.
KnowledgeBase read_kb_tables(const std::filesystem::path& dir);

/// read_kb_tables followed by kb_integrity; throws IntegrityError carrying
/// the first violation.
KnowledgeBase load_kb(const std::filesystem::path& dir);

/// Writes the four tables, rows ordered by id. load_kb reads them back equal.
void save_kb(const KnowledgeBase& kb, const std::filesystem::path& dir);

/// Threats linked to the category, ordered by id.
std::vector<Threat> threats_for_category(const KnowledgeBase& kb, IcoCategory cat);

/// Countermeasures linked to the threat, ordered by id. Throws UnknownThreat.
std::vector<Countermeasure> mitigations_for_threat(const KnowledgeBase& kb, std::string_view threat_id);

}  // namespace rita

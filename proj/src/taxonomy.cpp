#include "rita/taxonomy.hpp"

#include <string>

#include "rita/error.hpp"

namespace rita {

namespace {

struct CategoryInfo {
  std::string_view name;
  std::string_view title;
  ParentGroup group;
};

constexpr PerCategory<CategoryInfo> kInfo = {{
    {"ACTUATOR", "Actuator", ParentGroup::Device},
    {"TAG", "Tag", ParentGroup::Device},
    {"SENSOR", "Sensor", ParentGroup::Device},
    {"SMART_CAMERA", "Smart Camera", ParentGroup::Device},
    {"ON_DEVICE_RESOURCE", "On-Device Resource", ParentGroup::Resource},
    {"NETWORK_RESOURCE", "Network Resource", ParentGroup::Resource},
    {"SERVICE", "Service", ParentGroup::Service},
}};

}  // namespace

std::string_view category_name(IcoCategory c) { return kInfo[index_of(c)].name; }

std::string_view category_title(IcoCategory c) { return kInfo[index_of(c)].title; }

ParentGroup parent_group(IcoCategory c) { return kInfo[index_of(c)].group; }

std::string_view group_name(ParentGroup g) {
  switch (g) {
    case ParentGroup::Device: return "Device";
    case ParentGroup::Resource: return "Resource";
    case ParentGroup::Service: return "Service";
  }
  return "";
}

IcoCategory parse_category(std::string_view name) {
  // Canonical form: upper case, separator runs collapsed to one underscore,
  // no leading/trailing separators.
  std::string canon;
  bool pending_sep = false;
  for (char ch : name) {
    if (ch == ' ' || ch == '-' || ch == '_' || ch == '\t') {
      pending_sep = !canon.empty();
      continue;
    }
    if (pending_sep) canon.push_back('_');
    pending_sep = false;
    canon.push_back(ch >= 'a' && ch <= 'z' ? static_cast<char>(ch - 32) : ch);
  }
  for (IcoCategory c : kAllCategories)
    if (kInfo[index_of(c)].name == canon) return c;
  throw UnknownCategory(std::string(name));
}

}  // namespace rita

#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace rita {

/// The closed set of IoT Critical Object categories. Enumerator order is the
/// canonical taxonomy order used by every report.
enum class IcoCategory {
  Actuator,
  Tag,
  Sensor,
  SmartCamera,
  OnDeviceResource,
  NetworkResource,
  Service,
};

enum class ParentGroup { Device, Resource, Service };

inline constexpr std::size_t kCategoryCount = 7;

inline constexpr std::array<IcoCategory, kCategoryCount> kAllCategories = {
    IcoCategory::Actuator,         IcoCategory::Tag,
    IcoCategory::Sensor,           IcoCategory::SmartCamera,
    IcoCategory::OnDeviceResource, IcoCategory::NetworkResource,
    IcoCategory::Service,
};

constexpr std::size_t index_of(IcoCategory c) { return static_cast<std::size_t>(c); }

/// Canonical upper-case name, e.g. "SMART_CAMERA".
std::string_view category_name(IcoCategory c);

/// Human-readable name, e.g. "Smart Camera".
std::string_view category_title(IcoCategory c);

ParentGroup parent_group(IcoCategory c);
std::string_view group_name(ParentGroup g);

/// Case-insensitive; spaces, hyphens and underscores are interchangeable.
/// Throws UnknownCategory.
IcoCategory parse_category(std::string_view name);

/// Per-category value table indexed by IcoCategory.
template <typename T>
using PerCategory = std::array<T, kCategoryCount>;

}  // namespace rita

#include <doctest.h>

#include <set>

#include "rita/error.hpp"
#include "rita/taxonomy.hpp"

using namespace rita;

TEST_SUITE("taxonomy") {
  TEST_CASE("the category set is closed and grouped") {
    CHECK(kAllCategories.size() == 7);
    std::set<std::string_view> names;
    for (IcoCategory c : kAllCategories) names.insert(category_name(c));
    CHECK(names.size() == 7);

    CHECK(parent_group(IcoCategory::Actuator) == ParentGroup::Device);
    CHECK(parent_group(IcoCategory::Tag) == ParentGroup::Device);
    CHECK(parent_group(IcoCategory::Sensor) == ParentGroup::Device);
    CHECK(parent_group(IcoCategory::SmartCamera) == ParentGroup::Device);
    CHECK(parent_group(IcoCategory::OnDeviceResource) == ParentGroup::Resource);
    CHECK(parent_group(IcoCategory::NetworkResource) == ParentGroup::Resource);
    CHECK(parent_group(IcoCategory::Service) == ParentGroup::Service);
  }

  TEST_CASE("parse_category") {
    CHECK(parse_category("ACTUATOR") == IcoCategory::Actuator);
    CHECK(parse_category("on-device resource") == IcoCategory::OnDeviceResource);
    CHECK(parse_category("Smart Camera") == IcoCategory::SmartCamera);
    CHECK(parse_category("network__resource") == IcoCategory::NetworkResource);
    CHECK(parse_category(" service ") == IcoCategory::Service);
    for (IcoCategory c : kAllCategories) CHECK(parse_category(category_name(c)) == c);
    for (IcoCategory c : kAllCategories) CHECK(parse_category(category_title(c)) == c);

    CHECK_THROWS_AS(parse_category("ROBOT"), UnknownCategory);
    CHECK_THROWS_AS(parse_category(""), UnknownCategory);
    CHECK_THROWS_AS(parse_category("SMARTCAMERA"), UnknownCategory);
    try {
      parse_category("GADGET");
    } catch (const UnknownCategory& e) {
      CHECK(e.name() == "GADGET");
    }
  }
}

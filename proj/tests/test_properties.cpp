#include "doctest.h"
#include "property_suite.hpp"

TEST_SUITE("properties") {
  TEST_CASE("randomised invariants") {
    const auto results = motionsm::testing::run_property_suite(1000, 7);
    CHECK(results.size() == 8);
    for (const auto& r : results) {
      CAPTURE(r.name);
      CAPTURE(r.first_failure);
      CHECK(r.cases == 1000);
      CHECK(r.failures == 0);
    }
  }
}

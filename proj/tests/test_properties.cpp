#include "doctest.h"
#include "oblmp/properties.hpp"

using namespace oblmp;

TEST_CASE("every property holds at the default seed") {
  const VerifyConfig cfg;
  for (const auto& name : property_names()) {
    CAPTURE(name);
    const auto out = run_property(name, cfg);
    CHECK(out.cases > 0);
    CHECK_MESSAGE(out.passed, out.detail);
  }
}

TEST_CASE("flipping the dual update sign is caught") {
  VerifyConfig cfg;
  cfg.inject_sign_fault = true;
  const auto out = run_property("biorthogonality", cfg);
  CHECK_FALSE(out.passed);
  CHECK(out.failing_case >= 0);
  CHECK_FALSE(run_property("oracle_duals", cfg).passed);
}

TEST_CASE("outcomes are reproducible from the seed") {
  VerifyConfig cfg;
  cfg.seed = 99;
  cfg.scale = 0.2;
  const auto a = run_property_suite(cfg);
  const auto b = run_property_suite(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].passed == b[i].passed);
    CHECK(a[i].cases == b[i].cases);
    CHECK(a[i].worst == b[i].worst);
  }
  CHECK_THROWS_AS(run_property("no_such_property", cfg), std::exception);
}

#include <doctest.h>

#include "cftwin/error.hpp"
#include "cftwin/fixtures.hpp"
#include "cftwin/policy_opt.hpp"

using namespace cftwin;

TEST_CASE("every bundled fixture loads and reproduces its goldens") {
  const auto names = fixture_names();
  CHECK(names == std::vector<std::string>{"FIX-H", "FIX-HC", "FIX-G", "FIX-G2", "FIX-NULL"});
  for (const auto& n : names) {
    const auto fx = load_fixture(n);
    CHECK(fx.name == n);
    CHECK_FALSE(fx.golden.empty());
    for (const auto& [key, value] : fx.golden)
      CHECK(compute_golden(key, fx.scm, fx.metadata) == doctest::Approx(value).epsilon(1e-12));
    CHECK(parse_model(std::string(fixture_text(n))).metadata == fx.metadata);
  }
}

TEST_CASE("fixture goldens") {
  const auto h = load_fixture("FIX-H");
  CHECK(h.action == "A");
  CHECK(h.golden.at("rho_star_value") == 1.0);
  CHECK(h.golden.at("sigma_star_value") == 0.5);
  CHECK(h.golden.at("ett[0->1]") == 1.0);
  CHECK(h.golden.at("observational_value") == 0.0);

  const auto hc = load_fixture("FIX-HC");
  CHECK(hc.is_twin);
  CHECK(hc.golden.at("pi_star_value") == 1.0);

  const auto g = load_fixture("FIX-G");
  CHECK(g.targets == std::vector<std::string>{"A", "B"});
  CHECK(g.golden.at("rho_star_value") - g.golden.at("sigma_star_value") >= 0.2);

  const auto g2 = load_fixture("FIX-G2");
  CHECK(std::abs(g2.golden.at("naive_limit") - g2.golden.at("cf_exact")) >= 0.05);

  const auto n = load_fixture("FIX-NULL");
  CHECK(n.golden.at("vo[A]") == 0.0);
}

TEST_CASE("fixture lookup and golden tampering") {
  try {
    load_fixture("FIX-Q");
    FAIL("expected a lookup error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Lookup);
  }
  CHECK_THROWS_AS(fixture_text("nope"), Error);

  auto fx = load_fixture("FIX-H");
  CHECK_THROWS_AS(compute_golden("nonsense", fx.scm, fx.metadata), Error);
  auto j = nlohmann::ordered_json::parse(std::string(fixture_text("FIX-H")));
  j["metadata"]["golden"]["rho_star_value"] = 0.75;
  const auto m = parse_model(j.dump());
  CHECK(compute_golden("rho_star_value", m.scm, m.metadata) != 0.75);
}

TEST_CASE("metadata accessors") {
  nlohmann::ordered_json meta = {{"targets", {"A", "B"}}, {"action", "B"}, {"twin", true}};
  CHECK(metadata_targets(meta) == std::vector<std::string>{"A", "B"});
  CHECK(metadata_action(meta) == "B");
  CHECK(metadata_twin(meta));
  CHECK(metadata_targets(nullptr).empty());
  CHECK_FALSE(metadata_twin(nullptr));
}

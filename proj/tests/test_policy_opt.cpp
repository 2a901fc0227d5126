#include <doctest.h>

#include <random>

#include "cftwin/error.hpp"
#include "cftwin/policy_opt.hpp"
#include "cftwin/random_models.hpp"
#include "helpers.hpp"

using namespace cftwin;
using testing::fixture;

namespace {

const std::vector<std::string> kA{"A"};
const std::vector<std::string> kAB{"A", "B"};

// A and B both copy U; Y = 1 exactly when A xor B equals U.
Scm parity_model() {
  return ScmBuilder()
      .exogenous("U")
      .variable("A", {0, 1}, {"U"}, "U")
      .variable("B", {0, 1}, {"U"}, "U")
      .variable("Y", {0, 1}, {"A", "B", "U"}, "(A ^ B) == U")
      .uniform()
      .reward_identity("Y")
      .build();
}

}  // namespace

TEST_CASE("optima on FIX-H") {
  const Scm h = fixture("FIX-H");
  const auto rho = optimize_rho(h, kA);
  CHECK(rho.value == 1.0);
  CHECK(rho.maps == std::vector<std::vector<int>>{{1, 0}});
  CHECK(rho.candidates == 4);
  const auto sigma = optimize_sigma(h, kA);
  CHECK(sigma.value == 0.5);
  CHECK(sigma.maps == std::vector<std::vector<int>>{{0}});
  CHECK(sigma.candidates == 2);
  CHECK(optimize_rho_empty(h, kA).value == 0.5);
  CHECK(value_of_observation(h, kA, "A") == 0.5);
  CHECK_FALSE(observation_d_separated(conditional_twin(h, kA), "A"));
  const auto c3 = check_condition3(h, kA);
  CHECK(c3.original_side);
  CHECK(c3.twin_side);
  CHECK(c3.biconditional);
  const auto cor = check_corollaries(h, kA);
  CHECK(cor.passed());
  CHECK(cor.rho_star == 1.0);
  CHECK(cor.pi_empty_star == 0.5);
}

TEST_CASE("optima on FIX-G") {
  const Scm g = fixture("FIX-G");
  CHECK(optimize_rho(g, kAB).value == 1.0);
  CHECK(optimize_sigma(g, kAB).value == 0.5);
  CHECK(optimize_rho_empty(g, kAB).value == 0.5);
  const auto tw = conditional_twin(g, kAB);
  CHECK(value_of_observation(tw, "A") == doctest::Approx(0.40625));
  CHECK(value_of_observation(tw, "B") == doctest::Approx(0.125));
  CHECK(optimize_pi(tw, {true, true}).value == 1.0);
  CHECK(optimize_pi(tw, {false, false}).value == 0.5);
  CHECK(optimize_rho(g, kAB).value == doctest::Approx(to_double(oracle::best_rho(g.definition(), kAB, false))));
  CHECK(optimize_sigma(g, kAB).value == doctest::Approx(to_double(oracle::best_rho(g.definition(), kAB, true))));
}

TEST_CASE("FIX-HC optimised directly as a twin") {
  const auto fx = load_fixture("FIX-HC");
  const auto tw = twin_from_model(fx.scm, fx.targets);
  CHECK(optimize_pi(tw, {true}).value == 1.0);
  CHECK(optimize_pi(tw, {false}).value == 0.5);
  CHECK(value_of_observation(tw, "A") == 0.5);
}

TEST_CASE("flat reward: first policy wins and observation is worthless") {
  const Scm n = fixture("FIX-NULL");
  const auto rho = optimize_rho(n, kA);
  CHECK(rho.value == 0.5);
  CHECK(rho.maps == std::vector<std::vector<int>>{{0, 0}});
  CHECK(optimize_sigma(n, kA).maps == std::vector<std::vector<int>>{{0}});
  CHECK(value_of_observation(n, kA, "A") == 0.0);
  CHECK(observation_d_separated(conditional_twin(n, kA), "A"));

  // Y reads A but ignores it: VO = 0 although A and Y are d-connected.
  const Scm flat = ScmBuilder()
                       .exogenous("U")
                       .variable("A", {0, 1}, {"U"}, "U")
                       .variable("Y", {0, 1}, {"A", "U"}, "U | (A & !A)")
                       .uniform()
                       .reward_identity("Y")
                       .build();
  CHECK_FALSE(observation_d_separated(conditional_twin(flat, kA), "A"));
  CHECK(value_of_observation(flat, kA, "A") == 0.0);
  CHECK(optimize_rho(flat, kA).maps == std::vector<std::vector<int>>{{0, 0}});
}

TEST_CASE("exhaustive search agrees with brute force") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    const Scm scm = random_scm(rng);
    const auto targets = random_targets(scm, rng);
    const auto rho = optimize_rho(scm, targets);
    CHECK(rho.value == doctest::Approx(to_double(oracle::best_rho(scm.definition(), targets, false))).epsilon(1e-12));
    CHECK(optimize_sigma(scm, targets).value ==
          doctest::Approx(to_double(oracle::best_rho(scm.definition(), targets, true))).epsilon(1e-12));
    CHECK(expected_reward(scm, rho.regime) == doctest::Approx(rho.value).epsilon(1e-12));
  }
}

TEST_CASE("optimum equalities, observation values and dominance on random models") {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 100; ++trial) {
    const Scm scm = random_scm(rng);
    const auto targets = random_targets(scm, rng);
    const auto r = policy_report(scm, targets);
    CHECK(r.corollaries.passed());
    CHECK(r.condition3.biconditional);
    CHECK(r.condition3.dsep_sound);
    CHECK(r.dominance);
    for (const auto& [name, vo] : r.condition3.vo) CHECK(vo >= -1e-12);
    const bool any_vo = std::any_of(r.condition3.vo.begin(), r.condition3.vo.end(),
                                    [](const auto& kv) { return kv.second > kStrictness; });
    if (any_vo) CHECK(r.condition3.original_side);
  }
}

TEST_CASE("all observations worthless one at a time yet jointly valuable") {
  const Scm scm = parity_model();
  const auto r = policy_report(scm, kAB);
  CHECK(r.condition3.vo.at("A") == 0.0);
  CHECK(r.condition3.vo.at("B") == 0.0);
  CHECK(r.best_rho.value == 1.0);
  CHECK(r.best_sigma.value == 0.5);
  CHECK(r.condition3.original_side);
  CHECK(r.condition3.biconditional);
  CHECK(r.corollaries.passed());
}

TEST_CASE("search budget") {
  const Scm g = fixture("FIX-G");
  try {
    optimize_rho(g, kAB, 3);
    FAIL("expected a budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Budget);
  }
  CHECK_NOTHROW(optimize_rho(g, kAB, 16));
  CHECK_THROWS_AS(value_of_observation(conditional_twin(g, kAB), "Y"), Error);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "cftwin/error.hpp"
#include "cftwin/random_models.hpp"
#include "cftwin/twin.hpp"
#include "cftwin/semantics.hpp"
#include "helpers.hpp"

using namespace cftwin;
using testing::fixture;

namespace {

Regime flip_a(const Scm& h) {
  return Regime(h, {Intervention::counterfactual(h.id("A"), Policy::flip(2))});
}

const std::vector<double> kNoise(8, 0.5);

double p_y1(const Scm& scm, const Regime& r) {
  const auto j = exact_joint<double>(scm, r);
  const auto c = j.column("Y");
  return j.probability([&](std::span<const int> row) { return row[c] == 1; });
}

Policy stochastic_row(std::vector<Rational> row) {
  Policy p;
  p.input = PolicyInput::Ignore;
  std::vector<Probability> r;
  for (auto& x : row) r.emplace_back(x);
  p.rows.push_back(std::move(r));
  return p;
}

}  // namespace

TEST_CASE("evaluate on FIX-H") {
  const Scm h = fixture("FIX-H");
  const int u1[] = {1};
  const auto plain = evaluate(h, u1, Regime(), {});
  CHECK(h.value_at(h.id("A"), plain[index_of(h.id("A"))]) == 1);
  CHECK(h.value_at(h.id("Y"), plain[index_of(h.id("Y"))]) == 0);

  const auto flipped = evaluate(h, u1, flip_a(h), kNoise);
  CHECK(flipped[index_of(h.id("A"))] == 0);
  CHECK(flipped[index_of(h.id("Y"))] == 1);
}

TEST_CASE("stochastic policies consume noise") {
  const Scm h = fixture("FIX-H");
  const Regime r(h, {Intervention::soft(h.id("A"), stochastic_row({Rational(1, 2), Rational(1, 2)}))});
  const int u[] = {0};
  CHECK_THROWS_AS(evaluate(h, u, r, {}), Error);
  const double low[] = {0.25}, high[] = {0.75};
  CHECK(evaluate(h, u, r, low)[index_of(h.id("A"))] == 0);
  CHECK(evaluate(h, u, r, high)[index_of(h.id("A"))] == 1);
}

TEST_CASE("identity rho leaves every world unchanged") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Scm scm = random_scm(rng);
    std::vector<Intervention> ivs;
    for (NodeId v : scm.endogenous_order())
      if (v != scm.reward_var()) ivs.push_back(Intervention::counterfactual(v, Policy::identity(scm.domain_size(v))));
    const Regime id(scm, ivs);
    for (const auto& cfg : scm.exogenous_support())
      REQUIRE(evaluate(scm, cfg.values, id, kNoise) == evaluate(scm, cfg.values, Regime(), {}));
  }
}

TEST_CASE("exact joint on FIX-H") {
  const Scm h = fixture("FIX-H");
  const auto j = exact_joint<Rational>(h, Regime());
  const auto ca = j.column("A"), cy = j.column("Y");
  auto mass = [&](int a, int y) {
    return j.probability([&](std::span<const int> r) { return r[ca] == a && r[cy] == y; });
  };
  CHECK(mass(0, 0) == Rational(1, 2));
  CHECK(mass(1, 0) == Rational(1, 2));
  CHECK(mass(0, 1) == 0);
  CHECK(mass(1, 1) == 0);
  CHECK(p_y1(h, Regime(h, {Intervention::atomic(h.id("A"), 0)})) == doctest::Approx(0.5));
  CHECK(p_y1(h, flip_a(h)) == doctest::Approx(1.0));
}

TEST_CASE("exact joint agrees with the direct evaluator under random rho") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Scm scm = random_scm(rng);
    const auto targets = random_targets(scm, rng);
    const auto policies = random_policies(scm, targets, rng);
    std::vector<Intervention> ivs;
    for (const auto& [name, p] : policies) ivs.push_back(Intervention::counterfactual(scm.id(name), p));
    const Regime rho(scm, ivs);
    const auto names = oracle::endogenous_names(scm.definition());
    const auto lib = testing::as_joint(exact_joint<Rational>(scm, rho), names);
    const auto ref = testing::drop_zeros(oracle::joint(scm.definition(), testing::value_maps(scm, policies)));
    REQUIRE(lib == ref);
    CHECK(exact_joint<Rational>(scm, rho).total() == 1);
    CHECK(std::abs(exact_joint<double>(scm, rho).total() - 1.0) < 1e-12);
  }
}

TEST_CASE("stochastic branches are enumerated exactly") {
  const Scm h = fixture("FIX-H");
  // A' = 1 with probability 1/3 regardless of u: Y = A xor U is 1 w.p. 1/2.
  const Regime soft(h, {Intervention::soft(h.id("A"), stochastic_row({Rational(2, 3), Rational(1, 3)}))});
  CHECK(expected_reward_exact(h, soft) == Rational(1, 2));

  // rho that flips with probability 1/4: Y = 1 exactly when the flip happens.
  Policy p;
  p.input = PolicyInput::Observed;
  p.rows = {{Probability(Rational(3, 4)), Probability(Rational(1, 4))},
            {Probability(Rational(1, 4)), Probability(Rational(3, 4))}};
  const Regime rho(h, {Intervention::counterfactual(h.id("A"), p)});
  CHECK(expected_reward_exact(h, rho) == Rational(1, 4));
}

TEST_CASE("atomic equals a point-mass soft intervention") {
  for (const char* name : {"FIX-H", "FIX-G", "FIX-G2", "FIX-NULL"}) {
    const Scm scm = fixture(name);
    const NodeId a = scm.id("A");
    for (int v = 0; v < 2; ++v) {
      const auto atomic = exact_joint<Rational>(scm, Regime(scm, {Intervention::atomic(a, v)}));
      const auto soft = exact_joint<Rational>(scm, Regime(scm, {Intervention::soft(a, Policy::constant(2, v))}));
      CHECK(compare_distributions(atomic, soft, 0.0).passed);
    }
  }
}

TEST_CASE("expected reward") {
  const Scm h = fixture("FIX-H");
  CHECK(expected_reward(h, flip_a(h)) == doctest::Approx(1.0));
  for (int v = 0; v < 2; ++v)
    CHECK(expected_reward(h, Regime(h, {Intervention::soft(h.id("A"), Policy::constant(2, v))})) ==
          doctest::Approx(0.5));

  ScmBuilder b;
  b.exogenous("U").variable("A", {0, 1}, {"U"}, "U").variable("Y", {0, 1}, {"A", "U"}, "A ^ U").uniform();
  b.reward("Y", {{0, 0.0}, {1, 0.0}});
  const Scm zero = b.build();
  CHECK(expected_reward(zero, Regime()) == 0.0);
  CHECK(expected_reward(zero, flip_a(zero)) == 0.0);
}

TEST_CASE("a rho copying sigma's row matches sigma") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Scm scm = random_scm(rng);
    const auto targets = random_targets(scm, rng);
    std::vector<Intervention> sigma, rho;
    for (const auto& t : targets) {
      const NodeId v = scm.id(t);
      const int out = static_cast<int>(rng() % scm.domain_size(v));
      sigma.push_back(Intervention::soft(v, Policy::constant(scm.domain_size(v), out)));
      rho.push_back(Intervention::counterfactual(v, Policy::deterministic(std::vector<int>(scm.domain_size(v), out))));
    }
    CHECK(expected_reward_exact(scm, Regime(scm, rho)) == expected_reward_exact(scm, Regime(scm, sigma)));
  }
}

TEST_CASE("regime validation") {
  const Scm h = fixture("FIX-H");
  CHECK_THROWS_AS(Regime(h, {Intervention::atomic(h.id("Y"), 0)}), Error);
  CHECK_THROWS_AS(Regime(h, {Intervention::atomic(h.id("U"), 0)}), Error);
  CHECK_THROWS_AS(Regime(h, {Intervention::atomic(h.id("A"), 0), Intervention::atomic(h.id("A"), 1)}), Error);
  CHECK_THROWS_AS(Regime(h, {Intervention::atomic(h.id("A"), 5)}), Error);
  CHECK_THROWS_AS(Regime(h, {Intervention::soft(h.id("A"), Policy::flip(2))}), Error);
  CHECK_THROWS_AS(Regime(h, {Intervention::counterfactual(h.id("A"), stochastic_row({Rational(1, 2), Rational(1, 4)}))}),
                  Error);
  try {
    Regime(h, {Intervention::atomic(h.id("Y"), 0)});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("reward variable cannot be targeted") != std::string::npos);
  }
}

TEST_CASE("enumeration budget") {
  const Scm g = fixture("FIX-G");
  try {
    exact_joint<double>(g, Regime(), 3);
    FAIL("expected budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Budget);
  }
  CHECK_NOTHROW(exact_joint<double>(g, Regime(), 8));
}

TEST_CASE("sampling") {
  const Scm h = fixture("FIX-H");
  CHECK_THROWS_AS(sample(h, Regime(), 0, 1), Error);
  const auto one = sample(h, Regime(), 1, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == h.diagram().size());

  const auto a = sample(h, Regime(), 100000, 5);
  CHECK(a == sample(h, Regime(), 100000, 5));
  const auto y = index_of(h.id("Y"));
  CHECK(std::count_if(a.begin(), a.end(), [&](const Assignment& r) { return r[y] == 1; }) == 0);

  // a prefix does not depend on how many trials are requested
  const auto short_run = sample(h, Regime(), 10, 5);
  CHECK(std::equal(short_run.begin(), short_run.end(), a.begin()));
}

TEST_CASE("sample frequencies are within 5 standard errors of the exact joint") {
  for (const char* name : {"FIX-H", "FIX-HC", "FIX-G", "FIX-G2", "FIX-NULL"}) {
    const Scm scm = fixture(name);
    const std::uint64_t n = 100000;
    const auto draws = sample(scm, Regime(), n, 3);
    const auto j = exact_joint<double>(scm, Regime());
    std::vector<std::size_t> cols;
    for (const auto& v : j.vars) cols.push_back(index_of(scm.id(v)));
    for (std::size_t r = 0; r < j.support.size(); ++r) {
      std::uint64_t hits = 0;
      for (const auto& d : draws) {
        bool same = true;
        for (std::size_t k = 0; k < cols.size() && same; ++k)
          same = scm.value_at(scm.id(j.vars[k]), d[cols[k]]) == j.support[r][k];
        hits += same;
      }
      const double p = j.probs[r];
      const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
      CHECK_MESSAGE(std::abs(static_cast<double>(hits) / n - p) <= 5 * se + 1e-12, name);
    }
  }
}

TEST_CASE("draw_index") {
  const double w[] = {0.2, 0.0, 0.8};
  CHECK(draw_index(w, 0.0) == 0);
  CHECK(draw_index(w, 0.19) == 0);
  CHECK(draw_index(w, 0.21) == 2);
  CHECK(draw_index(w, 0.999999) == 2);
}

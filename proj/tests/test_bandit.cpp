#include <doctest.h>

#include <cmath>
#include <random>

#include "cftwin/bandit.hpp"
#include "cftwin/commands.hpp"
#include "cftwin/error.hpp"
#include "cftwin/estimation.hpp"
#include "cftwin/random_models.hpp"
#include "helpers.hpp"

using namespace cftwin;
using testing::fixture;

TEST_CASE("agent names") {
  for (auto k : {AgentKind::DoUCB, AgentKind::DoThompson, AgentKind::CfThompson, AgentKind::UniformRandom})
    CHECK(parse_agent(to_string(k)) == k);
  CHECK(reads_intuition(AgentKind::CfThompson));
  CHECK_FALSE(reads_intuition(AgentKind::DoThompson));
  CHECK_THROWS_AS(parse_agent("greedy"), Error);
}

TEST_CASE("environment tables match exact counterfactuals") {
  std::mt19937_64 rng(71);
  std::vector<Scm> models{fixture("FIX-H"), fixture("FIX-G"), fixture("FIX-NULL")};
  for (int i = 0; i < 30; ++i) models.push_back(random_scm(rng));
  for (const auto& scm : models) {
    if (scm.reward_table().size() != 2) continue;
    const NodeId a = scm.endogenous_order().front();
    const BanditEnvironment env(scm, scm.name(a), true);
    REQUIRE(env.arms() == scm.domain_size(a));
    const int y = scm.domain(scm.reward_var()).back();
    const double lo = scm.reward(0), hi = scm.reward(1);
    for (std::size_t n = 0; n < env.arms(); ++n) {
      if (env.natural_probability()[n] == 0) continue;
      for (std::size_t k = 0; k < env.arms(); ++k) {
        const auto p = exact_counterfactual_single(scm, scm.name(a), env.value(n), env.value(k), y);
        REQUIRE(p);
        CHECK(env.q()[n][k] == doctest::Approx(lo + (hi - lo) * *p).epsilon(1e-12));
      }
    }
    double best = 0;
    for (std::size_t n = 0; n < env.arms(); ++n)
      best += env.natural_probability()[n] * env.q()[n][env.rho_star()[n]];
    CHECK(env.rho_star_value() == doctest::Approx(best));
  }
}

TEST_CASE("FIX-H: do-agents are stuck at one half") {
  const BanditEnvironment env(fixture("FIX-H"), "A", true);
  CHECK(env.do_value() == std::vector<double>{0.5, 0.5});
  CHECK(env.rho_star_value() == 1.0);
  const std::uint64_t horizon = 10000;
  for (auto agent : {AgentKind::DoThompson, AgentKind::DoUCB, AgentKind::UniformRandom}) {
    const auto run = run_episode(env, agent, horizon, 3);
    for (const auto& arm : run.per_arm)
      if (arm.pulls > 1000) CHECK(std::abs(arm.mean() - 0.5) < 0.05);
    CHECK(std::abs(run.regret.back() - 0.5 * horizon) < 5 * 0.5 * std::sqrt(horizon));
    CHECK(run.class_regret.back() == doctest::Approx(0.0));
    CHECK(std::abs(run.mean_reward() - 0.5) < 0.02);
  }
}

TEST_CASE("FIX-H: the intuition-reading agent converges") {
  const BanditEnvironment env(fixture("FIX-H"), "A", true);
  const std::uint64_t horizon = 10000;
  const auto run = run_episode(env, AgentKind::CfThompson, horizon, 3);
  CHECK(run.mean_reward() >= 0.95);
  CHECK(run.regret.back() < 0.01 * horizon);
  CHECK(run.regret == run.class_regret);
  CHECK(run.per_cell[0][1].pulls > run.per_cell[0][0].pulls);
  CHECK(run.per_cell[1][0].pulls > run.per_cell[1][1].pulls);
  for (std::size_t t = 1; t < horizon; ++t) REQUIRE(run.regret[t] >= run.regret[t - 1]);
}

TEST_CASE("episodes") {
  const BanditEnvironment env(fixture("FIX-H"), "A", true);
  const auto one = run_episode(env, AgentKind::CfThompson, 1, 5);
  CHECK(one.horizon() == 1);
  CHECK(one.to_csv().rfind("round,natural,arm,reward,regret\n1,", 0) == 0);

  const auto a = run_episode(env, AgentKind::DoUCB, 500, 8);
  const auto b = run_episode(env, AgentKind::DoUCB, 500, 8);
  CHECK(a.to_csv() == b.to_csv());
  // environment draws depend on the seed and round only
  const auto c = run_episode(env, AgentKind::UniformRandom, 500, 8);
  CHECK(a.natural == c.natural);
  CHECK(run_episode(env, AgentKind::DoUCB, 500, 9).natural != a.natural);

  CHECK_THROWS_AS(run_episode(env, AgentKind::DoUCB, 0, 1), Error);
  const BanditEnvironment hidden(fixture("FIX-H"), "A", false);
  try {
    run_episode(hidden, AgentKind::CfThompson, 10, 1);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  const auto masked = run_episode(hidden, AgentKind::DoThompson, 3, 1);
  CHECK_FALSE(masked.natural_exposed);
  CHECK_THROWS_AS(BanditEnvironment(fixture("FIX-H"), "Y", true), Error);
  CHECK_THROWS_AS(BanditEnvironment(fixture("FIX-H"), "Z", true), Error);
}

TEST_CASE("regret curves") {
  const BanditEnvironment env(fixture("FIX-H"), "A", true);
  std::vector<RunResult> runs;
  for (std::uint64_t s = 0; s < 4; ++s) runs.push_back(run_episode(env, AgentKind::CfThompson, 50, s));
  const auto curve = regret_curve(runs);
  CHECK(curve.runs == 4);
  REQUIRE(curve.mean.size() == 50);
  for (std::size_t t = 0; t < 50; ++t) {
    double m = 0;
    for (const auto& r : runs) m += r.regret[t];
    m /= 4;
    double v = 0;
    for (const auto& r : runs) v += (r.regret[t] - m) * (r.regret[t] - m);
    CHECK(curve.mean[t] == doctest::Approx(m));
    CHECK(curve.se[t] == doctest::Approx(std::sqrt(v / 3) / 2));
  }
  CHECK(curve.to_csv().rfind("round,mean_regret,se_regret,mean_class_regret,se_class_regret\n", 0) == 0);
  CHECK_THROWS_AS(regret_curve({}), Error);
  runs.push_back(run_episode(env, AgentKind::CfThompson, 49, 9));
  CHECK_THROWS_AS(regret_curve(runs), Error);
}

TEST_CASE("bandit command") {
  BanditOptions opt;
  opt.agent = AgentKind::CfThompson;
  opt.action = "A";
  opt.horizon = 200;
  opt.seeds = 3;
  const auto out = run_bandit(fixture("FIX-H"), opt);
  CHECK(out.runs.size() == 3);
  CHECK(out.runs[2].seed == 3);
  CHECK(out.summary["horizon"] == 200);
  CHECK(out.summary["final_regret_mean"].get<double>() == doctest::Approx(out.curve.mean.back()));
  opt.seeds = 0;
  CHECK_THROWS_AS(run_bandit(fixture("FIX-H"), opt), Error);
}

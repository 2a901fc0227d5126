#include "cftwin/commands.hpp"

#include <random>

#include "cftwin/error.hpp"
#include "cftwin/random_models.hpp"

namespace cftwin {

using nlohmann::ordered_json;

namespace {

ordered_json number_or_null(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json domain_json(const Scm& scm, NodeId v) {
  return ordered_json(std::vector<int>(scm.domain(v).begin(), scm.domain(v).end()));
}

/// natural value -> acted value for a deterministic policy on `target`.
std::map<int, int> deterministic_map(const Scm& scm, NodeId target, const Policy& p) {
  if (!p.is_deterministic())
    throw Error(ErrorKind::Argument, "estimator needs a deterministic policy on '" + scm.name(target) + "'");
  std::map<int, int> out;
  const std::size_t n = scm.domain_size(target);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row = p.input == PolicyInput::Ignore ? 0 : i;
    out.emplace(scm.value_at(target, static_cast<int>(i)), scm.value_at(target, p.deterministic_output(row)));
  }
  return out;
}

ordered_json report_json(const EstimateReport& r) {
  ordered_json j;
  j["estimand"] = r.estimand;
  j["point"] = number_or_null(r.point);
  j["numerator"] = r.numerator;
  j["denominator"] = r.denominator;
  j["exact"] = number_or_null(r.exact);
  j["abs_error"] = number_or_null(r.abs_error);
  if (!r.undefined_cells.empty() || r.partial) {
    j["undefined_cells"] = r.undefined_cells;
    j["partial"] = r.partial;
  }
  return j;
}

ordered_json maps_json(const Scm& scm, const std::vector<NodeId>& ids, const PolicyChoice& c, bool observed) {
  ordered_json out = ordered_json::object();
  for (std::size_t j = 0; j < ids.size() && j < c.maps.size(); ++j) {
    ordered_json m = ordered_json::object();
    const std::size_t n = scm.domain_size(ids[j]);
    for (std::size_t i = 0; i < n; ++i) {
      const int out_index = c.maps[j][observed ? i : 0];
      m[std::to_string(scm.value_at(ids[j], static_cast<int>(i)))] = scm.value_at(ids[j], out_index);
    }
    out[scm.name(ids[j])] = m;
  }
  return out;
}

ordered_json choice_json(const Scm& scm, const std::vector<NodeId>& ids, const PolicyChoice& c, bool observed) {
  ordered_json j;
  j["value"] = c.value;
  j["policy"] = describe(scm, c.regime);
  j["maps"] = maps_json(scm, ids, c, observed);
  j["candidates"] = c.candidates;
  return j;
}

}  // namespace

ordered_json model_summary(const Scm& scm) {
  const auto& d = scm.diagram();
  ordered_json j;
  ordered_json vars = ordered_json::array(), exo = ordered_json::array(), edges = ordered_json::array();
  for (NodeId v : d.endogenous()) {
    std::vector<std::string> parents;
    for (NodeId p : d.parents(v)) parents.push_back(d.name(p));
    vars.push_back({{"name", d.name(v)}, {"domain", domain_json(scm, v)}, {"parents", parents}});
  }
  for (NodeId v : d.exogenous()) exo.push_back({{"name", d.name(v)}, {"domain", domain_json(scm, v)}});
  for (const auto& [from, to] : d.edges()) edges.push_back({d.name(from), d.name(to)});
  std::vector<std::string> order;
  for (NodeId v : d.topological_order()) order.push_back(d.name(v));
  j["variables"] = vars;
  j["exogenous"] = exo;
  j["edges"] = edges;
  j["topological_order"] = order;
  j["reward"] = scm.name(scm.reward_var());
  j["exogenous_support"] = scm.exogenous_support().size();
  return j;
}

VerifyOutcome run_verify(const Scm& scm, const VerifyOptions& opt) {
  VerifyOutcome out;
  ordered_json& rep = out.report;
  rep["targets"] = opt.targets;
  rep["mode"] = opt.mode == ArithmeticMode::Exact ? "exact" : "float";
  rep["policies"] = opt.policies;
  ordered_json rows = ordered_json::array();

  const TwinResult tw = opt.twin ? twin_from_model(*opt.twin, opt.targets) : conditional_twin(scm, opt.targets);
  rep["vacuous"] = opt.targets.empty();
  if (!opt.targets.empty()) {
    std::vector<std::map<std::string, Policy>> sets;
    if (opt.policies.rfind("random:", 0) == 0) {
      std::uint64_t count = 0;
      try {
        count = std::stoull(opt.policies.substr(7));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Argument, "bad policy spec '" + opt.policies + "': expected random:<count>");
      }
      if (count == 0) throw Error(ErrorKind::Argument, "random:<count> needs a positive count");
      std::mt19937_64 rng(opt.seed);
      for (std::uint64_t i = 0; i < count; ++i) sets.push_back(random_policies(scm, opt.targets, rng));
    } else {
      sets.push_back(parse_policy_spec(scm, opt.targets, opt.policies));
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const Regime rho = make_rho(scm, sets[i]);
      ordered_json row;
      row["index"] = i;
      row["policy"] = describe(scm, rho);
      ordered_json diffs = ordered_json::array();
      for (const auto& check : {verify_lemma1(scm, tw, rho, opt.mode, opt.budget),
                                verify_theorem1(scm, tw, rho, opt.mode, opt.budget)}) {
        row[check.what] = check.passed;
        out.all_passed = out.all_passed && check.passed;
        for (const auto& d : check.differences) {
          ordered_json cell = ordered_json::object();
          for (std::size_t k = 0; k < check.vars.size(); ++k) cell[check.vars[k]] = d.values[k];
          diffs.push_back({{"check", check.what}, {"cell", cell}, {"lhs", d.lhs}, {"rhs", d.rhs}});
        }
      }
      row["differences"] = diffs;
      rows.push_back(std::move(row));
    }
  }
  rep["results"] = rows;
  rep["all_passed"] = out.all_passed;
  return out;
}

EstimatorKind parse_estimator(const std::string& text) {
  if (text == "eq1") return EstimatorKind::Eq1;
  if (text == "naive") return EstimatorKind::Naive;
  if (text == "three-factor") return EstimatorKind::ThreeFactor;
  throw Error(ErrorKind::Argument, "unknown estimator '" + text + "' (expected eq1, naive or three-factor)");
}

EstimateOutcome run_estimate(const Scm& scm, const EstimateOptions& opt) {
  if (opt.n == 0) throw Error(ErrorKind::Argument, "--n must be at least 1");
  if (opt.targets.empty()) throw Error(ErrorKind::Argument, "estimation needs at least one target");
  const TwinResult tw = opt.model_is_twin ? twin_from_model(scm, opt.targets) : conditional_twin(scm, opt.targets);
  const Scm original = opt.model_is_twin ? untwin(tw) : scm;
  const auto policies = parse_policy_spec(original, opt.targets, opt.rho);
  const Regime rho = make_rho(original, policies);
  const Regime pi = lift_policy(tw, original, rho);

  EstimateOutcome out;
  out.log = simulate_trials(tw, pi, opt.n, opt.seed);
  const TrialLog& log = out.log;
  ordered_json& rep = out.report;
  const char* names[] = {"eq1", "naive", "three-factor"};
  rep["estimator"] = names[static_cast<int>(opt.estimator)];
  rep["targets"] = opt.targets;
  rep["rho"] = describe(original, rho);
  rep["n"] = opt.n;
  rep["seed"] = opt.seed;
  rep["y"] = opt.y;
  ordered_json cells = ordered_json::array();

  switch (opt.estimator) {
    case EstimatorKind::Eq1: {
      if (opt.targets.size() != 1) throw Error(ErrorKind::Argument, "eq1 needs exactly one target");
      const std::string& a_name = opt.targets[0];
      const NodeId a = original.id(a_name);
      const Policy& pol = policies.at(a_name);
      for (std::size_t i = 0; i < original.domain_size(a); ++i) {
        const int a_val = original.value_at(a, static_cast<int>(i));
        EstimateReport r = estimate_eq1(log, a_val, opt.y);
        const auto& row = pol.rows[pol.input == PolicyInput::Ignore ? 0 : i];
        std::optional<double> exact = 0.0;
        for (std::size_t k = 0; k < row.size() && exact; ++k) {
          if (row[k].is_zero()) continue;
          auto v = exact_counterfactual_single(original, a_name, a_val, original.value_at(a, static_cast<int>(k)),
                                               opt.y);
          exact = v ? std::optional<double>(*exact + row[k].value * *v) : std::nullopt;
        }
        if (exact) r.attach_exact(*exact);
        cells.push_back(report_json(r));
      }
      break;
    }
    case EstimatorKind::Naive: {
      if (opt.targets.size() != 2) throw Error(ErrorKind::Argument, "naive needs exactly two targets");
      const NodeId a = original.id(opt.targets[0]), b = original.id(opt.targets[1]);
      const auto map_a = deterministic_map(original, a, policies.at(opt.targets[0]));
      const auto map_b = deterministic_map(original, b, policies.at(opt.targets[1]));
      for (const auto& [a_val, a_act] : map_a)
        for (const auto& [b_val, b_act] : map_b) {
          EstimateReport r = naive_multi_estimate(log, a_val, b_val, a_act, b_act, opt.y);
          const auto cf = exact_counterfactual(original, {{opt.targets[0], a_val}, {opt.targets[1], b_val}},
                                                {{opt.targets[0], a_act}, {opt.targets[1], b_act}}, opt.y);
          const auto limit = naive_multi_limit(tw, pi, a_val, b_val, a_act, b_act, opt.y);
          if (cf) r.attach_exact(*cf);
          ordered_json j = report_json(r);
          j["cf_exact"] = number_or_null(cf);
          j["naive_limit"] = number_or_null(limit);
          j["limit_gap"] = cf && limit ? ordered_json(std::abs(*limit - *cf)) : ordered_json(nullptr);
          cells.push_back(std::move(j));
        }
      break;
    }
    case EstimatorKind::ThreeFactor: {
      if (opt.targets.size() != 2) throw Error(ErrorKind::Argument, "three-factor needs exactly two targets");
      ThreeFactorOptions tf;
      tf.y = opt.y;
      tf.smoothing = opt.smoothing;
      for (const auto& t : opt.targets) tf.acted_maps.push_back(deterministic_map(original, original.id(t), policies.at(t)));
      EstimateReport r = three_factor_estimate(log, tf);
      r.attach_exact(exact_rho_value(original, rho, opt.y));
      cells.push_back(report_json(r));
      break;
    }
  }
  rep["cells"] = cells;

  std::uint64_t hits = 0;
  for (const auto& row : log.rows) hits += row.outcome == opt.y;
  EstimateReport overall;
  overall.estimand = "P(Y_rho=" + std::to_string(opt.y) + ")";
  overall.numerator = hits;
  overall.denominator = log.rows.size();
  overall.point = static_cast<double>(hits) / static_cast<double>(log.rows.size());
  overall.attach_exact(exact_rho_value(original, rho, opt.y));
  rep["overall"] = report_json(overall);
  return out;
}

ordered_json run_optimize(const Scm& scm, const std::vector<std::string>& targets, std::uint64_t budget) {
  const PolicyReport pr = policy_report(scm, targets, budget);
  const TwinResult tw = conditional_twin(scm, targets);
  std::vector<NodeId> ids, copy_ids;
  for (const auto& t : targets) ids.push_back(scm.id(t));
  for (const auto& [from, to] : tw.copy_map) copy_ids.push_back(tw.derived.id(to));

  ordered_json j;
  j["targets"] = targets;
  j["rho_star"] = choice_json(scm, ids, pr.best_rho, true);
  j["sigma_star"] = choice_json(scm, ids, pr.best_sigma, false);
  j["rho_empty_star"] = choice_json(scm, ids, pr.best_rho_empty, false);
  j["pi_star"] = choice_json(tw.derived, copy_ids, pr.best_pi, true);
  j["pi_empty_star"] = choice_json(tw.derived, copy_ids, pr.best_pi_empty, false);
  const auto& c = pr.corollaries;
  j["corollaries"] = {{"rho_star_equals_pi_star", c.corollary1},
                      {"rho_empty_star_equals_pi_empty_star", c.corollary2},
                      {"sigma_star_equals_rho_empty_star", c.bridge}};
  j["dominance"] = pr.dominance;
  const auto& c3 = pr.condition3;
  j["condition3"] = c3.original_side;
  j["condition3_detail"] = {{"original_side", c3.original_side},
                            {"twin_side", c3.twin_side},
                            {"biconditional", c3.biconditional}};
  ordered_json vo = ordered_json::object(), dsep = ordered_json::object();
  for (const auto& t : targets) {
    vo[t] = c3.vo.at(t);
    dsep[t] = c3.dsep.at(t);
  }
  j["vo"] = vo;
  j["dsep"] = dsep;
  j["dsep_implies_zero_vo"] = c3.dsep_sound;
  return j;
}

BanditOutcome run_bandit(const Scm& scm, const BanditOptions& opt) {
  if (opt.seeds == 0) throw Error(ErrorKind::Argument, "--seeds must be at least 1");
  if (opt.horizon == 0) throw Error(ErrorKind::Argument, "--horizon must be at least 1");
  if (opt.action.empty()) throw Error(ErrorKind::Argument, "bandit needs an action variable");
  const BanditEnvironment env(scm, opt.action, opt.exposes_intuition);
  BanditOutcome out;
  for (std::uint64_t k = 0; k < opt.seeds; ++k) out.runs.push_back(run_episode(env, opt.agent, opt.horizon, opt.seed + k));
  out.curve = regret_curve(out.runs);

  ordered_json& s = out.summary;
  s["agent"] = to_string(opt.agent);
  s["action"] = opt.action;
  s["horizon"] = opt.horizon;
  s["seeds"] = opt.seeds;
  s["first_seed"] = opt.seed;
  s["exposes_intuition"] = opt.exposes_intuition;
  s["rho_star_value"] = env.rho_star_value();
  ordered_json rho_star = ordered_json::object(), do_values = ordered_json::object();
  for (std::size_t i = 0; i < env.arms(); ++i) {
    rho_star[std::to_string(env.value(i))] = env.value(env.rho_star()[i]);
    do_values[std::to_string(env.value(i))] = env.do_value()[i];
  }
  s["rho_star"] = rho_star;
  s["do_values"] = do_values;

  double reward = 0;
  std::vector<ArmStats> arms(env.arms());
  std::vector<std::vector<ArmStats>> cells(env.arms(), std::vector<ArmStats>(env.arms()));
  for (const auto& r : out.runs) {
    reward += r.mean_reward();
    for (std::size_t i = 0; i < env.arms(); ++i) {
      arms[i].pulls += r.per_arm[i].pulls;
      arms[i].reward_sum += r.per_arm[i].reward_sum;
      for (std::size_t k = 0; k < env.arms(); ++k) {
        cells[i][k].pulls += r.per_cell[i][k].pulls;
        cells[i][k].reward_sum += r.per_cell[i][k].reward_sum;
      }
    }
  }
  s["mean_reward"] = reward / static_cast<double>(out.runs.size());
  s["final_regret_mean"] = out.curve.mean.back();
  s["final_regret_se"] = out.curve.se.back();
  s["final_class_regret_mean"] = out.curve.class_mean.back();
  ordered_json arm_means = ordered_json::object(), cell_means = ordered_json::object();
  for (std::size_t i = 0; i < env.arms(); ++i) {
    arm_means[std::to_string(env.value(i))] = {{"pulls", arms[i].pulls}, {"mean", arms[i].mean()}};
    ordered_json row = ordered_json::object();
    for (std::size_t k = 0; k < env.arms(); ++k)
      row[std::to_string(env.value(k))] = {{"pulls", cells[i][k].pulls}, {"mean", cells[i][k].mean()}};
    cell_means[std::to_string(env.value(i))] = row;
  }
  s["per_arm"] = arm_means;
  s["per_cell"] = cell_means;
  return out;
}

}  // namespace cftwin

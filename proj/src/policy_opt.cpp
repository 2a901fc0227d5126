#include "cftwin/policy_opt.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "cftwin/error.hpp"

namespace cftwin {

namespace {

constexpr double kTieTolerance = 1e-12;

/// One decision in the search: which variable, how many inputs its policy
/// distinguishes and how a map becomes an intervention.
struct Slot {
  std::size_t domain = 0;
  std::size_t inputs = 1;
  std::function<Intervention(const std::vector<int>&)> make;
};

std::uint64_t count_candidates(const std::vector<Slot>& slots, std::uint64_t budget) {
  std::uint64_t total = 1;
  for (const auto& s : slots) {
    for (std::size_t i = 0; i < s.inputs; ++i) {
      if (total > budget / std::max<std::size_t>(s.domain, 1))
        throw Error(ErrorKind::Budget, "policy search space exceeds the budget of " + std::to_string(budget) +
                                           " candidates");
      total *= s.domain;
    }
  }
  return total;
}

PolicyChoice search(const Scm& model, const std::vector<Slot>& slots, std::uint64_t budget) {
  PolicyChoice best;
  best.candidates = count_candidates(slots, budget);
  std::vector<std::vector<int>> maps;
  for (const auto& s : slots) maps.emplace_back(s.inputs, 0);

  bool first = true;
  for (;;) {
    std::vector<Intervention> ivs;
    for (std::size_t j = 0; j < slots.size(); ++j) ivs.push_back(slots[j].make(maps[j]));
    Regime regime(model, std::move(ivs));
    const double value = expected_reward(model, regime);
    if (first || value > best.value + kTieTolerance) {
      best.regime = std::move(regime);
      best.value = value;
      best.maps = maps;
      first = false;
    }
    // Odometer: the last entry of the last slot varies fastest.
    bool advanced = false;
    for (std::size_t j = slots.size(); j-- > 0 && !advanced;) {
      for (std::size_t i = maps[j].size(); i-- > 0;) {
        if (static_cast<std::size_t>(++maps[j][i]) < slots[j].domain) {
          advanced = true;
          break;
        }
        maps[j][i] = 0;
      }
    }
    if (!advanced) break;
  }
  return best;
}

std::vector<NodeId> resolve(const Scm& scm, std::span<const std::string> targets) {
  std::vector<NodeId> ids;
  for (const auto& t : targets) {
    const NodeId id = scm.id(t);
    if (scm.diagram().is_exogenous(id)) throw Error(ErrorKind::Validation, "target '" + t + "' is exogenous");
    if (id == scm.reward_var()) throw Error(ErrorKind::Validation, "reward variable cannot be targeted");
    ids.push_back(id);
  }
  return ids;
}

Policy constant_of(std::size_t domain, const std::vector<int>& map) { return Policy::constant(domain, map[0]); }

}  // namespace

PolicyChoice optimize_rho(const Scm& scm, std::span<const std::string> targets, std::uint64_t budget) {
  std::vector<Slot> slots;
  for (NodeId id : resolve(scm, targets)) {
    const std::size_t dom = scm.domain_size(id);
    slots.push_back({dom, dom, [id](const std::vector<int>& m) {
                       return Intervention::counterfactual(id, Policy::deterministic(m));
                     }});
  }
  return search(scm, slots, budget);
}

PolicyChoice optimize_sigma(const Scm& scm, std::span<const std::string> targets, std::uint64_t budget) {
  std::vector<Slot> slots;
  for (NodeId id : resolve(scm, targets)) {
    const std::size_t dom = scm.domain_size(id);
    slots.push_back({dom, 1, [id, dom](const std::vector<int>& m) {
                       return Intervention::soft(id, constant_of(dom, m));
                     }});
  }
  return search(scm, slots, budget);
}

PolicyChoice optimize_rho_empty(const Scm& scm, std::span<const std::string> targets, std::uint64_t budget) {
  std::vector<Slot> slots;
  for (NodeId id : resolve(scm, targets)) {
    const std::size_t dom = scm.domain_size(id);
    slots.push_back({dom, 1, [id, dom](const std::vector<int>& m) {
                       return Intervention::counterfactual(id, constant_of(dom, m));
                     }});
  }
  return search(scm, slots, budget);
}

PolicyChoice optimize_pi(const TwinResult& tw, const std::vector<bool>& reads, std::uint64_t budget) {
  if (reads.size() != tw.copy_map.size())
    throw Error(ErrorKind::Argument, "need one read flag per twin target");
  const Scm& g = tw.derived;
  std::vector<Slot> slots;
  for (std::size_t j = 0; j < tw.copy_map.size(); ++j) {
    const NodeId natural = g.id(tw.copy_map[j].first);
    const NodeId copy = g.id(tw.copy_map[j].second);
    const std::size_t dom = g.domain_size(copy);
    if (reads[j]) {
      slots.push_back({dom, dom, [natural, copy](const std::vector<int>& m) {
                         return Intervention::soft_observing(copy, natural, Policy::deterministic(m));
                       }});
    } else {
      slots.push_back({dom, 1, [copy, dom](const std::vector<int>& m) {
                         return Intervention::soft(copy, constant_of(dom, m));
                       }});
    }
  }
  return search(g, slots, budget);
}

double value_of_observation(const TwinResult& tw, const std::string& observed, std::uint64_t budget) {
  std::vector<bool> reads(tw.copy_map.size(), true);
  bool found = false;
  for (std::size_t j = 0; j < tw.copy_map.size(); ++j) {
    if (tw.copy_map[j].first == observed) {
      reads[j] = false;
      found = true;
    }
  }
  if (!found) throw Error(ErrorKind::Argument, "'" + observed + "' is not an observed input of the twin policies");
  const std::vector<bool> all(tw.copy_map.size(), true);
  const double v_with = optimize_pi(tw, all, budget).value;
  const double v_without = optimize_pi(tw, reads, budget).value;
  return v_with - v_without;
}

double value_of_observation(const Scm& scm, std::span<const std::string> targets, const std::string& observed,
                            std::uint64_t budget) {
  return value_of_observation(conditional_twin(scm, targets), observed, budget);
}

bool observation_d_separated(const TwinResult& tw, const std::string& target) {
  const auto& d = tw.derived.diagram();
  const NodeId natural = d.id(target);
  const NodeId copy = d.id(primed(target));
  const std::pair<NodeId, NodeId> cut{natural, copy};
  const CausalDiagram mutilated = d.without_edges({&cut, 1});
  const NodeId y = tw.derived.reward_var();
  return mutilated.d_separated({&natural, 1}, {&y, 1}, {});
}

namespace {

bool same(double a, double b) { return std::abs(a - b) <= kTieTolerance; }

}  // namespace

CorollaryReport check_corollaries(const Scm& scm, std::span<const std::string> targets, std::uint64_t budget) {
  const TwinResult tw = conditional_twin(scm, targets);
  const std::size_t k = tw.copy_map.size();
  const std::vector<bool> yes(k, true), no(k, false);
  CorollaryReport rep;
  rep.rho_star = optimize_rho(scm, targets, budget).value;
  rep.sigma_star = optimize_sigma(scm, targets, budget).value;
  rep.rho_empty_star = optimize_rho_empty(scm, targets, budget).value;
  rep.pi_star = optimize_pi(tw, yes, budget).value;
  rep.pi_empty_star = optimize_pi(tw, no, budget).value;
  rep.corollary1 = same(rep.rho_star, rep.pi_star);
  rep.corollary2 = same(rep.rho_empty_star, rep.pi_empty_star);
  rep.bridge = same(rep.sigma_star, rep.rho_empty_star);
  return rep;
}

Condition3Report check_condition3(const Scm& scm, std::span<const std::string> targets, std::uint64_t budget) {
  const TwinResult tw = conditional_twin(scm, targets);
  const std::size_t k = tw.copy_map.size();
  const std::vector<bool> yes(k, true), no(k, false);
  Condition3Report rep;
  const double rho_star = optimize_rho(scm, targets, budget).value;
  const double sigma_star = optimize_sigma(scm, targets, budget).value;
  const double pi_star = optimize_pi(tw, yes, budget).value;
  const double pi_empty = optimize_pi(tw, no, budget).value;
  rep.original_side = rho_star > sigma_star + kStrictness;
  rep.twin_side = pi_star > pi_empty + kStrictness;
  rep.biconditional = rep.original_side == rep.twin_side;
  for (const auto& t : targets) {
    const bool sep = observation_d_separated(tw, t);
    const double vo = value_of_observation(tw, t, budget);
    rep.dsep[t] = sep;
    rep.vo[t] = vo;
    if (sep && std::abs(vo) > kTieTolerance) rep.dsep_sound = false;
  }
  return rep;
}

PolicyReport policy_report(const Scm& scm, std::span<const std::string> targets, std::uint64_t budget) {
  const TwinResult tw = conditional_twin(scm, targets);
  const std::size_t k = tw.copy_map.size();
  const std::vector<bool> yes(k, true), no(k, false);
  PolicyReport rep;
  rep.targets.assign(targets.begin(), targets.end());
  rep.best_rho = optimize_rho(scm, targets, budget);
  rep.best_sigma = optimize_sigma(scm, targets, budget);
  rep.best_rho_empty = optimize_rho_empty(scm, targets, budget);
  rep.best_pi = optimize_pi(tw, yes, budget);
  rep.best_pi_empty = optimize_pi(tw, no, budget);

  auto& c = rep.corollaries;
  c.rho_star = rep.best_rho.value;
  c.sigma_star = rep.best_sigma.value;
  c.rho_empty_star = rep.best_rho_empty.value;
  c.pi_star = rep.best_pi.value;
  c.pi_empty_star = rep.best_pi_empty.value;
  c.corollary1 = same(c.rho_star, c.pi_star);
  c.corollary2 = same(c.rho_empty_star, c.pi_empty_star);
  c.bridge = same(c.sigma_star, c.rho_empty_star);

  auto& c3 = rep.condition3;
  c3.original_side = c.rho_star > c.sigma_star + kStrictness;
  c3.twin_side = c.pi_star > c.pi_empty_star + kStrictness;
  c3.biconditional = c3.original_side == c3.twin_side;
  for (const auto& t : targets) {
    const bool sep = observation_d_separated(tw, t);
    const double vo = value_of_observation(tw, t, budget);
    c3.dsep[t] = sep;
    c3.vo[t] = vo;
    if (sep && std::abs(vo) > kTieTolerance) c3.dsep_sound = false;
  }
  rep.dominance = c.rho_star >= c.sigma_star - kTieTolerance;
  return rep;
}

}  // namespace cftwin

#include "cftwin/twin.hpp"

#include <algorithm>
#include <set>

#include "cftwin/error.hpp"
#include "cftwin/expr.hpp"

namespace cftwin {

std::string primed(const std::string& name) { return name + "'"; }

std::vector<std::string> TwinResult::targets() const {
  std::vector<std::string> out;
  for (const auto& [from, to] : copy_map) out.push_back(from);
  return out;
}

std::vector<std::string> TwinResult::copies() const {
  std::vector<std::string> out;
  for (const auto& [from, to] : copy_map) out.push_back(to);
  return out;
}

namespace {

void rename_parent(MechanismDef& md, const std::map<std::string, std::string>& names) {
  bool touched = false;
  for (auto& p : md.parents) {
    auto it = names.find(p);
    if (it != names.end()) {
      p = it->second;
      touched = true;
    }
  }
  if (touched && md.expr) md.expr = expr::rename(expr::parse(*md.expr), names).source();
}

MechanismDef identity_mechanism(const std::string& var, const VariableDef& source) {
  return {var, {source.name}, std::nullopt, source.domain};
}

std::size_t position_of(const std::vector<VariableDef>& vs, const std::string& name) {
  return static_cast<std::size_t>(
      std::find_if(vs.begin(), vs.end(), [&](const VariableDef& v) { return v.name == name; }) - vs.begin());
}

std::size_t mechanism_position(const std::vector<MechanismDef>& ms, const std::string& var) {
  return static_cast<std::size_t>(
      std::find_if(ms.begin(), ms.end(), [&](const MechanismDef& m) { return m.var == var; }) - ms.begin());
}

void check_targets(const Scm& scm, std::span<const std::string> targets) {
  const auto& d = scm.diagram();
  std::set<std::string> seen;
  for (const auto& t : targets) {
    if (!d.contains(t)) throw Error(ErrorKind::Lookup, "unknown target '" + t + "'");
    const NodeId id = d.id(t);
    if (d.is_exogenous(id)) throw Error(ErrorKind::Validation, "target '" + t + "' is exogenous");
    if (id == scm.reward_var()) throw Error(ErrorKind::Validation, "reward variable cannot be targeted");
    if (!t.empty() && t.back() == '\'')
      throw Error(ErrorKind::Validation, "target '" + t + "' is already a primed copy");
    if (d.contains(primed(t)))
      throw Error(ErrorKind::Validation, "name collision: '" + primed(t) + "' is already declared");
    if (!seen.insert(t).second) throw Error(ErrorKind::Validation, "target '" + t + "' listed twice");
  }
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t j = i + 1; j < targets.size(); ++j)
      if (d.is_ancestor(d.id(targets[j]), d.id(targets[i])))
        throw Error(ErrorKind::Validation, "targets out of topological order: '" + targets[j] +
                                               "' is an ancestor of '" + targets[i] +
                                               "' but is listed after it");
}

}  // namespace

TwinResult conditional_twin(const Scm& scm, std::span<const std::string> targets) {
  check_targets(scm, targets);
  if (targets.empty()) return TwinResult{scm, {}, {}};

  ScmDefinition def = scm.definition();
  TwinResult out{scm, {}, {}};
  // One construction step per target, in order: insert I' between I and its
  // children, then continue with the remaining targets on the rewired model.
  for (const auto& target : targets) {
    const std::string copy = primed(target);
    const std::size_t at = position_of(def.endogenous, target);
    const VariableDef source = def.endogenous[at];
    def.endogenous.insert(def.endogenous.begin() + static_cast<std::ptrdiff_t>(at + 1), {copy, source.domain});

    const std::map<std::string, std::string> names{{target, copy}};
    for (auto& md : def.mechanisms) rename_parent(md, names);
    const std::size_t mat = mechanism_position(def.mechanisms, target);
    def.mechanisms.insert(def.mechanisms.begin() + static_cast<std::ptrdiff_t>(mat + 1),
                          identity_mechanism(copy, source));
    out.copy_map.emplace_back(target, copy);
  }
  out.derived = Scm::create(std::move(def));
  for (const auto& [from, to] : out.copy_map)
    out.lifted.emplace(to, Policy::identity(out.derived.domain_size(out.derived.id(to))));
  return out;
}

TwinResult twin_from_model(const Scm& twin_model, std::span<const std::string> targets) {
  TwinResult out{twin_model, {}, {}};
  const auto& d = twin_model.diagram();
  for (const auto& t : targets) {
    const std::string copy = primed(t);
    if (!d.contains(t) || !d.contains(copy))
      throw Error(ErrorKind::Validation, "twin model lacks '" + t + "' or its copy '" + copy + "'");
    const auto ps = d.parents(d.id(copy));
    if (ps.size() != 1 || ps[0] != d.id(t))
      throw Error(ErrorKind::Validation, "'" + copy + "' must have '" + t + "' as its only parent");
    if (twin_model.domain_size(d.id(t)) != twin_model.domain_size(d.id(copy)))
      throw Error(ErrorKind::Validation, "'" + copy + "' and '" + t + "' have different domains");
    out.copy_map.emplace_back(t, copy);
    out.lifted.emplace(copy, Policy::identity(twin_model.domain_size(d.id(copy))));
  }
  return out;
}

Scm untwin(const TwinResult& tw) {
  ScmDefinition def = tw.derived.definition();
  std::map<std::string, std::string> back;
  for (const auto& [from, to] : tw.copy_map) back.emplace(to, from);
  std::erase_if(def.endogenous, [&](const VariableDef& v) { return back.count(v.name) > 0; });
  std::erase_if(def.mechanisms, [&](const MechanismDef& m) { return back.count(m.var) > 0; });
  for (auto& md : def.mechanisms) rename_parent(md, back);
  return Scm::create(std::move(def));
}

Regime make_rho(const Scm& scm, const std::map<std::string, Policy>& policies) {
  std::vector<Intervention> ivs;
  for (const auto& [name, policy] : policies) ivs.push_back(Intervention::counterfactual(scm.id(name), policy));
  return Regime(scm, std::move(ivs));
}

Regime lift_policy(const TwinResult& tw, const Scm& original, const Regime& rho) {
  if (rho.size() != tw.copy_map.size())
    throw Error(ErrorKind::Validation, "rho targets " + std::to_string(rho.size()) + " variables but the twin has " +
                                           std::to_string(tw.copy_map.size()) + " copies");
  const Scm& g = tw.derived;
  std::vector<Intervention> lifted;
  for (const auto& [from, to] : tw.copy_map) {
    const Intervention* iv = rho.find(original.id(from));
    if (!iv) throw Error(ErrorKind::Validation, "rho does not target '" + from + "'");
    if (iv->kind != InterventionKind::Counterfactual)
      throw Error(ErrorKind::Validation, "rho on '" + from + "' is not a counterfactual intervention");
    if (iv->policy.input == PolicyInput::Ignore)
      lifted.push_back(Intervention::soft(g.id(to), iv->policy));
    else
      lifted.push_back(Intervention::soft_observing(g.id(to), g.id(from), iv->policy));
  }
  return Regime(g, std::move(lifted));
}

TwinGraph twin_graph(const Scm& scm, const std::string& action, const Policy& pi) {
  const auto& d = scm.diagram();
  if (!d.contains(action)) throw Error(ErrorKind::Lookup, "unknown action '" + action + "'");
  const NodeId a = d.id(action);
  if (d.is_exogenous(a) || a == scm.reward_var())
    throw Error(ErrorKind::Validation, "invalid twin target '" + action + "'");

  const ScmDefinition& src = scm.definition();
  ScmDefinition def = src;
  std::map<std::string, std::string> row1;
  for (const auto& v : src.endogenous) {
    if (d.contains(primed(v.name)))
      throw Error(ErrorKind::Validation, "name collision: '" + primed(v.name) + "' is already declared");
    row1.emplace(v.name, primed(v.name));
    def.endogenous.push_back({primed(v.name), v.domain});
  }
  for (const auto& md : src.mechanisms) {
    if (md.var == action) {
      def.mechanisms.push_back(identity_mechanism(primed(action), src.endogenous[position_of(src.endogenous, action)]));
      continue;
    }
    MechanismDef copy = md;
    copy.var = primed(md.var);
    rename_parent(copy, row1);
    def.mechanisms.push_back(std::move(copy));
  }
  def.reward.var = primed(src.reward.var);

  TwinGraph out{Scm::create(std::move(def)), row1, {}};
  const NodeId a1 = out.scm.id(primed(action));
  Intervention iv = pi.input == PolicyInput::Ignore ? Intervention::soft(a1, pi)
                                                    : Intervention::soft_observing(a1, out.scm.id(action), pi);
  out.pi = Regime(out.scm, {iv});
  return out;
}

std::string VerificationReport::summary() const {
  std::string out = what + (passed ? ": pass" : ": FAIL");
  for (const auto& diff : differences) {
    out += "\n  cell (";
    for (std::size_t k = 0; k < vars.size(); ++k) {
      if (k) out += ", ";
      out += vars[k] + "=" + std::to_string(diff.values[k]);
    }
    out += "): " + diff.lhs + " vs " + diff.rhs;
  }
  return out;
}

namespace {

template <class P>
std::string show(const P& p) {
  if constexpr (std::is_same_v<P, double>) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    return buf;
  } else {
    return to_string(p);
  }
}

}  // namespace

template <class P>
VerificationReport compare_distributions(const Distribution<P>& lhs, const Distribution<P>& rhs_in,
                                         double tolerance) {
  VerificationReport rep;
  rep.vars = lhs.vars;
  const Distribution<P> rhs = rhs_in.marginal(lhs.vars);
  std::map<std::vector<int>, std::pair<P, P>> cells;
  for (std::size_t r = 0; r < lhs.support.size(); ++r) cells[lhs.support[r]].first += lhs.probs[r];
  for (std::size_t r = 0; r < rhs.support.size(); ++r) cells[rhs.support[r]].second += rhs.probs[r];
  for (const auto& [values, pq] : cells) {
    bool equal;
    if constexpr (std::is_same_v<P, double>) {
      equal = std::abs(pq.first - pq.second) <= tolerance;
    } else {
      equal = pq.first == pq.second;
    }
    if (!equal) {
      rep.passed = false;
      rep.differences.push_back({values, show(pq.first), show(pq.second)});
    }
  }
  return rep;
}

template VerificationReport compare_distributions<double>(const Distribution<double>&,
                                                          const Distribution<double>&, double);
template VerificationReport compare_distributions<Rational>(const Distribution<Rational>&,
                                                            const Distribution<Rational>&, double);

namespace {

std::map<std::string, std::string> unprime_map(const TwinResult& tw) {
  std::map<std::string, std::string> back;
  for (const auto& [from, to] : tw.copy_map) back.emplace(to, from);
  return back;
}

template <class P>
VerificationReport lemma1(const Scm& scm, const TwinResult& tw, const Regime& rho, std::uint64_t budget) {
  const Regime pi = lift_policy(tw, scm, rho);
  const auto targets = tw.targets();
  const auto copies = tw.copies();
  auto lhs = exact_joint<P>(scm, rho, budget).marginal(targets);
  auto rhs = exact_joint<P>(tw.derived, pi, budget).marginal(copies).renamed(unprime_map(tw));
  auto rep = compare_distributions(lhs, rhs, 1e-12);
  rep.what = "lemma1";
  return rep;
}

template <class P>
VerificationReport theorem1(const Scm& scm, const TwinResult& tw, const Regime& rho, std::uint64_t budget) {
  const Regime pi = lift_policy(tw, scm, rho);
  auto lhs = exact_joint<P>(scm, rho, budget);
  std::map<std::string, std::string> forward;
  for (const auto& [from, to] : tw.copy_map) forward.emplace(from, to);
  std::vector<std::string> keep;
  for (const auto& v : lhs.vars) {
    auto it = forward.find(v);
    keep.push_back(it == forward.end() ? v : it->second);
  }
  for (const auto& name : keep)
    if (!tw.derived.diagram().contains(name))
      throw Error(ErrorKind::Validation, "twin model lacks variable '" + name + "'");
  auto rhs = exact_joint<P>(tw.derived, pi, budget).marginal(keep).renamed(unprime_map(tw));
  auto rep = compare_distributions(lhs, rhs, 1e-12);
  rep.what = "theorem1";
  return rep;
}

}  // namespace

VerificationReport verify_lemma1(const Scm& scm, const TwinResult& tw, const Regime& rho, ArithmeticMode mode,
                                 std::uint64_t budget) {
  return mode == ArithmeticMode::Exact ? lemma1<Rational>(scm, tw, rho, budget)
                                       : lemma1<double>(scm, tw, rho, budget);
}

VerificationReport verify_theorem1(const Scm& scm, const TwinResult& tw, const Regime& rho, ArithmeticMode mode,
                                   std::uint64_t budget) {
  return mode == ArithmeticMode::Exact ? theorem1<Rational>(scm, tw, rho, budget)
                                       : theorem1<double>(scm, tw, rho, budget);
}

}  // namespace cftwin

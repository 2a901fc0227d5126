#include "cftwin/semantics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cftwin/error.hpp"

namespace cftwin {

// ---------------------------------------------------------------- Policy

Policy Policy::deterministic(std::span<const int> map) {
  Policy p;
  p.input = PolicyInput::Observed;
  for (int out : map) {
    std::vector<Probability> row(map.size(), Probability::zero());
    if (out < 0 || static_cast<std::size_t>(out) >= map.size())
      throw Error(ErrorKind::Domain, "deterministic policy output " + std::to_string(out) + " out of range");
    row[static_cast<std::size_t>(out)] = Probability::one();
    p.rows.push_back(std::move(row));
  }
  return p;
}

Policy Policy::constant(std::size_t domain_size, int output_index) {
  Policy p;
  p.input = PolicyInput::Ignore;
  std::vector<Probability> row(domain_size, Probability::zero());
  if (output_index < 0 || static_cast<std::size_t>(output_index) >= domain_size)
    throw Error(ErrorKind::Domain, "constant policy output out of range");
  row[static_cast<std::size_t>(output_index)] = Probability::one();
  p.rows.push_back(std::move(row));
  return p;
}

Policy Policy::identity(std::size_t domain_size) {
  std::vector<int> map(domain_size);
  std::iota(map.begin(), map.end(), 0);
  return deterministic(map);
}

Policy Policy::flip(std::size_t domain_size) {
  std::vector<int> map(domain_size);
  for (std::size_t i = 0; i < domain_size; ++i) map[i] = static_cast<int>(domain_size - 1 - i);
  return deterministic(map);
}

bool Policy::is_deterministic() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& row) {
    return std::count_if(row.begin(), row.end(), [](const Probability& p) { return !p.is_zero(); }) == 1;
  });
}

int Policy::deterministic_output(std::size_t row) const {
  const auto& r = rows.at(row);
  for (std::size_t k = 0; k < r.size(); ++k)
    if (r[k].exact == 1) return static_cast<int>(k);
  throw Error(ErrorKind::Argument, "policy row is not deterministic");
}

// ---------------------------------------------------------------- Intervention

Intervention Intervention::atomic(NodeId target, int value_index) {
  Intervention iv;
  iv.target = target;
  iv.kind = InterventionKind::Atomic;
  iv.atomic_index = value_index;
  return iv;
}

Intervention Intervention::soft(NodeId target, Policy policy) {
  Intervention iv;
  iv.target = target;
  iv.kind = InterventionKind::Soft;
  iv.policy = std::move(policy);
  return iv;
}

Intervention Intervention::soft_observing(NodeId target, NodeId observed, Policy policy) {
  Intervention iv = soft(target, std::move(policy));
  iv.observes = observed;
  return iv;
}

Intervention Intervention::counterfactual(NodeId target, Policy policy) {
  Intervention iv;
  iv.target = target;
  iv.kind = InterventionKind::Counterfactual;
  iv.policy = std::move(policy);
  return iv;
}

// ---------------------------------------------------------------- Regime

namespace {

void validate_policy(const Scm& scm, const Intervention& iv, std::size_t expected_rows) {
  const std::string& name = scm.name(iv.target);
  const Policy& p = iv.policy;
  if (p.rows.size() != expected_rows)
    throw Error(ErrorKind::Validation, "policy on '" + name + "' has " + std::to_string(p.rows.size()) +
                                           " rows, expected " + std::to_string(expected_rows));
  for (const auto& row : p.rows) {
    if (row.size() != scm.domain_size(iv.target))
      throw Error(ErrorKind::Validation, "policy row on '" + name + "' does not match its domain size");
    Rational sum = 0;
    double fsum = 0;
    for (const auto& x : row) {
      if (x.exact < 0) throw Error(ErrorKind::Validation, "negative policy probability on '" + name + "'");
      sum += x.exact;
      fsum += x.value;
    }
    if (std::abs(fsum - 1.0) > 1e-9)
      throw Error(ErrorKind::Validation, "policy row on '" + name + "' does not sum to 1");
  }
}

}  // namespace

Regime::Regime(const Scm& scm, std::vector<Intervention> interventions) : items_(std::move(interventions)) {
  const auto& d = scm.diagram();
  std::vector<bool> seen(d.size(), false);
  for (const auto& iv : items_) {
    if (index_of(iv.target) >= d.size()) throw Error(ErrorKind::Lookup, "intervention target out of range");
    const std::string& name = d.name(iv.target);
    if (d.is_exogenous(iv.target))
      throw Error(ErrorKind::Validation, "cannot intervene on exogenous variable '" + name + "'");
    if (iv.target == scm.reward_var())
      throw Error(ErrorKind::Validation, "reward variable cannot be targeted ('" + name + "')");
    if (seen[index_of(iv.target)])
      throw Error(ErrorKind::Validation, "variable '" + name + "' targeted twice");
    seen[index_of(iv.target)] = true;
    switch (iv.kind) {
      case InterventionKind::Atomic:
        if (iv.atomic_index < 0 || static_cast<std::size_t>(iv.atomic_index) >= scm.domain_size(iv.target))
          throw Error(ErrorKind::Domain, "atomic value outside the domain of '" + name + "'");
        break;
      case InterventionKind::Soft:
        if (iv.observes) {
          if (iv.policy.input != PolicyInput::Observed)
            throw Error(ErrorKind::Validation, "observing soft policy on '" + name + "' must index rows by the observed value");
          if (!d.is_ancestor(*iv.observes, iv.target))
            throw Error(ErrorKind::Validation, "soft policy on '" + name + "' may only observe an ancestor");
          validate_policy(scm, iv, scm.domain_size(*iv.observes));
        } else {
          if (iv.policy.input != PolicyInput::Ignore)
            throw Error(ErrorKind::Validation, "soft policy on '" + name + "' cannot read the natural value");
          validate_policy(scm, iv, 1);
        }
        break;
      case InterventionKind::Counterfactual:
        validate_policy(scm, iv, iv.policy.input == PolicyInput::Ignore ? 1 : scm.domain_size(iv.target));
        break;
    }
  }
  std::stable_sort(items_.begin(), items_.end(), [&](const Intervention& a, const Intervention& b) {
    return d.topological_rank(a.target) < d.topological_rank(b.target);
  });
}

const Intervention* Regime::find(NodeId target) const {
  for (const auto& iv : items_)
    if (iv.target == target) return &iv;
  return nullptr;
}

// ---------------------------------------------------------------- Distribution

template <class P>
P Distribution<P>::total() const {
  P sum = 0;
  for (const auto& p : probs) sum += p;
  return sum;
}

template <class P>
std::size_t Distribution<P>::column(std::string_view var) const {
  auto it = std::find(vars.begin(), vars.end(), var);
  if (it == vars.end()) throw Error(ErrorKind::Lookup, "distribution has no variable '" + std::string(var) + "'");
  return static_cast<std::size_t>(it - vars.begin());
}

template <class P>
Distribution<P> Distribution<P>::marginal(std::span<const std::string> keep) const {
  std::vector<std::size_t> cols;
  for (const auto& k : keep) cols.push_back(column(k));
  std::map<std::vector<int>, P> acc;
  for (std::size_t r = 0; r < support.size(); ++r) {
    std::vector<int> key;
    for (auto c : cols) key.push_back(support[r][c]);
    auto [it, inserted] = acc.try_emplace(std::move(key), probs[r]);
    if (!inserted) it->second += probs[r];
  }
  Distribution out;
  out.vars.assign(keep.begin(), keep.end());
  for (auto& [k, p] : acc) {
    if (p == 0) continue;
    out.support.push_back(k);
    out.probs.push_back(p);
  }
  return out;
}

template <class P>
P Distribution<P>::probability(const std::function<bool(std::span<const int>)>& pred) const {
  P sum = 0;
  for (std::size_t r = 0; r < support.size(); ++r)
    if (pred(support[r])) sum += probs[r];
  return sum;
}

template <class P>
Distribution<P> Distribution<P>::renamed(const std::map<std::string, std::string>& names) const {
  Distribution out = *this;
  for (auto& v : out.vars) {
    auto it = names.find(v);
    if (it != names.end()) v = it->second;
  }
  return out;
}

template struct Distribution<double>;
template struct Distribution<Rational>;

// ---------------------------------------------------------------- evaluation

namespace {

std::vector<const Intervention*> index_regime(const Scm& scm, const Regime& regime) {
  std::vector<const Intervention*> by_node(scm.diagram().size(), nullptr);
  for (const auto& iv : regime.interventions()) by_node[index_of(iv.target)] = &iv;
  return by_node;
}

const std::vector<Probability>& select_row(const Scm& scm, const Intervention& iv, const Assignment& a) {
  if (iv.policy.input == PolicyInput::Ignore) return iv.policy.rows[0];
  if (iv.kind == InterventionKind::Soft) return iv.policy.rows[static_cast<std::size_t>(a[index_of(*iv.observes)])];
  const int natural = scm.mechanism(iv.target).apply(a);
  return iv.policy.rows[static_cast<std::size_t>(natural)];
}

void load_exogenous(Assignment& a, std::span<const int> u) {
  for (std::size_t k = 0; k < u.size(); ++k) a[k] = u[k];
}

}  // namespace

std::size_t draw_index(std::span<const double> weights, double uniform01) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = k;
    if (uniform01 < acc) return k;
  }
  return last_positive;
}

Assignment evaluate(const Scm& scm, std::span<const int> u, const Regime& regime,
                    std::span<const double> policy_noise) {
  if (u.size() != scm.diagram().exogenous().size())
    throw Error(ErrorKind::Argument, "exogenous assignment has the wrong length");
  const auto by_node = index_regime(scm, regime);
  Assignment a(scm.diagram().size(), 0);
  load_exogenous(a, u);
  std::size_t noise_pos = 0;
  std::vector<double> weights;
  for (NodeId v : scm.endogenous_order()) {
    const Intervention* iv = by_node[index_of(v)];
    if (!iv) {
      a[index_of(v)] = scm.mechanism(v).apply(a);
      continue;
    }
    if (iv->kind == InterventionKind::Atomic) {
      a[index_of(v)] = iv->atomic_index;
      continue;
    }
    if (noise_pos >= policy_noise.size()) throw Error(ErrorKind::Argument, "policy noise exhausted");
    const auto& row = select_row(scm, *iv, a);
    weights.clear();
    for (const auto& p : row) weights.push_back(p.value);
    a[index_of(v)] = static_cast<int>(draw_index(weights, policy_noise[noise_pos++]));
  }
  return a;
}

Assignment evaluate_natural(const Scm& scm, std::span<const int> u) {
  Assignment a(scm.diagram().size(), 0);
  load_exogenous(a, u);
  for (NodeId v : scm.endogenous_order()) a[index_of(v)] = scm.mechanism(v).apply(a);
  return a;
}

template <class P>
Distribution<P> exact_joint(const Scm& scm, const Regime& regime, std::uint64_t budget) {
  // Upper bound on enumeration terms, saturating.
  std::uint64_t bound = scm.exogenous_support().size();
  for (const auto& iv : regime.interventions()) {
    if (iv.kind == InterventionKind::Atomic) continue;
    std::uint64_t widest = 1;
    for (const auto& row : iv.policy.rows) {
      auto nz = static_cast<std::uint64_t>(
          std::count_if(row.begin(), row.end(), [](const Probability& p) { return !p.is_zero(); }));
      widest = std::max(widest, nz);
    }
    bound = bound > std::numeric_limits<std::uint64_t>::max() / widest ? std::numeric_limits<std::uint64_t>::max()
                                                                         : bound * widest;
  }
  if (bound > budget)
    throw Error(ErrorKind::Budget, "exact enumeration needs up to " + std::to_string(bound) +
                                       " terms, budget is " + std::to_string(budget));

  const auto by_node = index_regime(scm, regime);
  const auto& order = scm.endogenous_order();
  const auto endo = scm.diagram().endogenous();
  std::map<std::vector<int>, P> acc;
  Assignment a(scm.diagram().size(), 0);

  auto step = [&](auto&& self, std::size_t pos, const P& weight) -> void {
    if (pos == order.size()) {
      std::vector<int> key;
      key.reserve(endo.size());
      for (NodeId v : endo) key.push_back(a[index_of(v)]);
      auto [it, inserted] = acc.try_emplace(std::move(key), weight);
      if (!inserted) it->second += weight;
      return;
    }
    const NodeId v = order[pos];
    const Intervention* iv = by_node[index_of(v)];
    if (!iv) {
      a[index_of(v)] = scm.mechanism(v).apply(a);
      self(self, pos + 1, weight);
      return;
    }
    if (iv->kind == InterventionKind::Atomic) {
      a[index_of(v)] = iv->atomic_index;
      self(self, pos + 1, weight);
      return;
    }
    const auto& row = select_row(scm, *iv, a);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k].is_zero()) continue;
      a[index_of(v)] = static_cast<int>(k);
      self(self, pos + 1, P(weight * pick<P>(row[k])));
    }
  };

  for (const auto& cfg : scm.exogenous_support()) {
    load_exogenous(a, cfg.values);
    step(step, 0, pick<P>(cfg.p));
  }

  Distribution<P> out;
  out.vars = names_of(scm.diagram(), endo);
  for (auto& [key, p] : acc) {
    std::vector<int> values(key.size());
    for (std::size_t k = 0; k < key.size(); ++k) values[k] = scm.value_at(endo[k], key[k]);
    out.support.push_back(std::move(values));
    out.probs.push_back(p);
  }
  return out;
}

template Distribution<double> exact_joint<double>(const Scm&, const Regime&, std::uint64_t);
template Distribution<Rational> exact_joint<Rational>(const Scm&, const Regime&, std::uint64_t);

namespace {

template <class P>
P reward_of(const Scm& scm, const Distribution<P>& joint) {
  const std::size_t col = joint.column(scm.name(scm.reward_var()));
  P sum = 0;
  for (std::size_t r = 0; r < joint.support.size(); ++r) {
    const int idx = scm.value_index(scm.reward_var(), joint.support[r][col]);
    if constexpr (std::is_same_v<P, double>) {
      sum += scm.reward(idx) * joint.probs[r];
    } else {
      sum += rational_from_double(scm.reward(idx)) * joint.probs[r];
    }
  }
  return sum;
}

}  // namespace

double expected_reward(const Scm& scm, const Regime& regime, std::uint64_t budget) {
  return reward_of(scm, exact_joint<double>(scm, regime, budget));
}

Rational expected_reward_exact(const Scm& scm, const Regime& regime, std::uint64_t budget) {
  return reward_of(scm, exact_joint<Rational>(scm, regime, budget));
}

// ---------------------------------------------------------------- sampling

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

TrialRandom::TrialRandom(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
    : state_(mix64(mix64(mix64(seed + kGolden) ^ (stream + kGolden)) ^ (index + kGolden))) {}

std::uint64_t TrialRandom::bits() {
  state_ += kGolden;
  return mix64(state_);
}

double TrialRandom::uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

std::vector<Assignment> sample(const Scm& scm, const Regime& regime, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorKind::Argument, "sample size must be at least 1");
  const auto& support = scm.exogenous_support();
  std::vector<double> weights;
  for (const auto& cfg : support) weights.push_back(cfg.p.value);
  std::size_t noise_needed = 0;
  for (const auto& iv : regime.interventions())
    if (iv.kind != InterventionKind::Atomic) ++noise_needed;

  std::vector<Assignment> out;
  out.reserve(n);
  std::vector<double> noise(noise_needed);
  for (std::uint64_t i = 0; i < n; ++i) {
    TrialRandom rng(seed, 0, i);
    const auto& cfg = support[draw_index(weights, rng.uniform())];
    for (auto& x : noise) x = rng.uniform();
    out.push_back(evaluate(scm, cfg.values, regime, noise));
  }
  return out;
}

// ---------------------------------------------------------------- descriptions

std::string describe(const Scm& scm, const Intervention& iv) {
  const std::string& name = scm.name(iv.target);
  if (iv.kind == InterventionKind::Atomic)
    return "do(" + name + "=" + std::to_string(scm.value_at(iv.target, iv.atomic_index)) + ")";
  std::string body;
  const auto dom = scm.domain(iv.target);
  for (std::size_t r = 0; r < iv.policy.rows.size(); ++r) {
    if (r) body += ", ";
    if (iv.policy.input == PolicyInput::Observed) {
      const int in = iv.observes ? scm.value_at(*iv.observes, static_cast<int>(r)) : dom[r];
      body += std::to_string(in) + "->";
    }
    const auto& row = iv.policy.rows[r];
    if (iv.policy.is_deterministic()) {
      body += std::to_string(dom[static_cast<std::size_t>(iv.policy.deterministic_output(r))]);
    } else {
      body += "[";
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) body += " ";
        body += to_string(row[k].exact);
      }
      body += "]";
    }
  }
  const char* tag = iv.kind == InterventionKind::Soft ? "soft" : "rho";
  std::string observed = iv.observes ? "|" + scm.name(*iv.observes) : "";
  return std::string(tag) + "(" + name + observed + ": " + body + ")";
}

std::string describe(const Scm& scm, const Regime& regime) {
  if (regime.empty()) return "{}";
  std::string out = "{";
  for (std::size_t i = 0; i < regime.size(); ++i) {
    if (i) out += ", ";
    out += describe(scm, regime.interventions()[i]);
  }
  return out + "}";
}

}  // namespace cftwin

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cftwin/scm.hpp"

namespace cftwin {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

/// What a policy row is indexed by.
///   Ignore:   a single row; the policy never looks at anything (sigma, rho_empty).
///   Observed: one row per value of the observed quantity. For counterfactual
///             interventions that is the target's natural value; for soft
///             interventions it is the `observes` variable.
enum class PolicyInput { Ignore, Observed };

struct Policy {
  PolicyInput input = PolicyInput::Ignore;
  std::vector<std::vector<Probability>> rows;  // rows[input index][output index]

  /// Deterministic policy: map[input index] = output index.
  static Policy deterministic(std::span<const int> map);
  static Policy constant(std::size_t domain_size, int output_index);
  static Policy identity(std::size_t domain_size);
  /// Reverses the domain order (0 <-> 1 on binary domains).
  static Policy flip(std::size_t domain_size);

  bool is_deterministic() const;
  /// Output index for a deterministic policy row.
  int deterministic_output(std::size_t row) const;
};

enum class InterventionKind { Atomic, Soft, Counterfactual };

struct Intervention {
  NodeId target{};
  InterventionKind kind = InterventionKind::Atomic;
  int atomic_index = 0;                // Atomic: value index forced on the target
  Policy policy;                       // Soft / Counterfactual
  std::optional<NodeId> observes;      // Soft with PolicyInput::Observed

  static Intervention atomic(NodeId target, int value_index);
  static Intervention soft(NodeId target, Policy policy);
  static Intervention soft_observing(NodeId target, NodeId observed, Policy policy);
  static Intervention counterfactual(NodeId target, Policy policy);
};

/// A set of interventions with distinct targets, stored in topological order.
class Regime {
 public:
  Regime() = default;
  /// Validates against `scm` (targets endogenous, distinct, not the reward
  /// variable, policies well-formed) and sorts topologically.
  Regime(const Scm& scm, std::vector<Intervention> interventions);

  const std::vector<Intervention>& interventions() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  const Intervention* find(NodeId target) const;

 private:
  std::vector<Intervention> items_;
};

/// Finite distribution over named variables. Support rows hold actual domain
/// values (not indices) so distributions from different models compare by name.
template <class P>
struct Distribution {
  std::vector<std::string> vars;
  std::vector<std::vector<int>> support;
  std::vector<P> probs;

  P total() const;
  /// Sums out everything but `keep` (in the given order). Zero-mass rows dropped.
  Distribution marginal(std::span<const std::string> keep) const;
  /// Mass of rows satisfying `pred` (row values ordered as `vars`).
  P probability(const std::function<bool(std::span<const int>)>& pred) const;
  /// Renames variables (missing names unchanged).
  Distribution renamed(const std::map<std::string, std::string>& names) const;
  std::size_t column(std::string_view var) const;
};

/// Evaluates every variable in topological order for one exogenous
/// configuration `u` (value indices per exogenous node). Each soft or
/// counterfactual target consumes exactly one element of `policy_noise`,
/// in topological target order. Counterfactual targets read their natural
/// value computed from the already-intervened parents.
Assignment evaluate(const Scm& scm, std::span<const int> u, const Regime& regime,
                    std::span<const double> policy_noise);

/// Exact joint over the endogenous variables by enumerating exogenous
/// configurations and policy branches. Throws Error(Budget) when the number of
/// terms could exceed `budget`.
template <class P>
Distribution<P> exact_joint(const Scm& scm, const Regime& regime,
                            std::uint64_t budget = kDefaultEnumerationBudget);

/// i.i.d. draws; trial i uses randomness derived only from (seed, i).
std::vector<Assignment> sample(const Scm& scm, const Regime& regime, std::uint64_t n,
                               std::uint64_t seed);

/// Sum over y of reward(y) * P(Y = y) under the regime.
double expected_reward(const Scm& scm, const Regime& regime,
                       std::uint64_t budget = kDefaultEnumerationBudget);
Rational expected_reward_exact(const Scm& scm, const Regime& regime,
                               std::uint64_t budget = kDefaultEnumerationBudget);

/// Natural values of all variables under no intervention for configuration u.
Assignment evaluate_natural(const Scm& scm, std::span<const int> u);

/// Per-trial random source: a SplitMix64 sequence whose starting state is a
/// hash of (seed, stream, index), so any trial can be replayed on its own.
class TrialRandom {
 public:
  TrialRandom(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t bits();

 private:
  std::uint64_t state_ = 0;
};

/// Index drawn from a discrete distribution using one uniform value.
std::size_t draw_index(std::span<const double> weights, double uniform01);

std::string describe(const Scm& scm, const Intervention& iv);
std::string describe(const Scm& scm, const Regime& regime);

}  // namespace cftwin

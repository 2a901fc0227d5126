#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cftwin/scm.hpp"
#include "cftwin/semantics.hpp"

namespace cftwin {

/// Name of the counterfactual copy of `name` ("A" -> "A'").
std::string primed(const std::string& name);

/// Output of the conditional-twin construction.
struct TwinResult {
  Scm derived;
  /// (I_j, I_j') by name, in the order the targets were processed.
  std::vector<std::pair<std::string, std::string>> copy_map;
  /// Policy currently placed on each primed copy (identity until lifted).
  std::map<std::string, Policy> lifted;

  std::vector<std::string> targets() const;
  std::vector<std::string> copies() const;
};

/// Conditional twin of `scm` for the targets `targets` (must be listed
/// ancestors-first). Each target I gains a primed child I' that takes over all
/// of I's outgoing edges; I' carries an identity mechanism on I. Exogenous
/// parents stay on I. Throws Error(Validation) for the reward variable,
/// out-of-order targets, primed names and name collisions.
TwinResult conditional_twin(const Scm& scm, std::span<const std::string> targets);

/// Rebuilds a TwinResult from a model that already contains the primed copies
/// (e.g. a twin loaded from disk). Checks only that each I' exists with I as
/// its sole parent; the rest of the wiring is taken as given.
TwinResult twin_from_model(const Scm& twin_model, std::span<const std::string> targets);

/// The model the twin was built from: each I' is removed and its children
/// read I again.
Scm untwin(const TwinResult& tw);

/// Counterfactual regime on the original model with the given policies
/// (keyed by target name).
Regime make_rho(const Scm& scm, const std::map<std::string, Policy>& policies);

/// The soft regime on the primed copies that mimics `rho`: row i of the
/// policy on I' equals rho's row for natural value i. `rho` must target
/// exactly the twin's targets with counterfactual interventions.
Regime lift_policy(const TwinResult& tw, const Scm& original, const Regime& rho);

/// Full twin network for a single action: every endogenous V gets a row-1
/// copy V' sharing V's exogenous parents; A' observes A through `pi`.
struct TwinGraph {
  Scm scm;
  std::map<std::string, std::string> row1;  // V -> V'
  Regime pi;                                // soft regime on A' observing A
};
TwinGraph twin_graph(const Scm& scm, const std::string& action, const Policy& pi);

struct CellDifference {
  std::vector<int> values;
  std::string lhs;
  std::string rhs;
};

struct VerificationReport {
  bool passed = true;
  std::string what;
  std::vector<std::string> vars;
  std::vector<CellDifference> differences;
  std::string summary() const;
};

enum class ArithmeticMode { Exact, Float };

/// P_rho(I) in `scm` against P_pi(I') in the twin, cell by cell.
VerificationReport verify_lemma1(const Scm& scm, const TwinResult& tw, const Regime& rho,
                                 ArithmeticMode mode,
                                 std::uint64_t budget = kDefaultEnumerationBudget);

/// Full joint over V in G_rho against the twin joint under the correspondence
/// (untargeted V -> V, I_j -> I_j'); the unprimed I_j of the twin are dropped.
VerificationReport verify_theorem1(const Scm& scm, const TwinResult& tw, const Regime& rho,
                                   ArithmeticMode mode,
                                   std::uint64_t budget = kDefaultEnumerationBudget);

/// Compares two distributions over the same variables (in any column order).
template <class P>
VerificationReport compare_distributions(const Distribution<P>& lhs, const Distribution<P>& rhs,
                                         double tolerance);

}  // namespace cftwin

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cftwin/twin.hpp"

namespace cftwin {

inline constexpr std::uint64_t kDefaultSearchBudget = 1'000'000;
/// Gap separating "strictly better" from numeric noise.
inline constexpr double kStrictness = 1e-9;

/// Result of an exhaustive search over deterministic policies.
struct PolicyChoice {
  Regime regime;
  double value = 0.0;
  /// Per target (search order): output index for each input index. Input-
  /// ignoring policies have a single entry.
  std::vector<std::vector<int>> maps;
  std::uint64_t candidates = 0;
};

/// argmax over deterministic counterfactual policies on `targets` in `scm`.
/// Candidates are visited in lexicographic order of their maps; the first
/// maximiser wins.
PolicyChoice optimize_rho(const Scm& scm, std::span<const std::string> targets,
                          std::uint64_t budget = kDefaultSearchBudget);

/// argmax over input-ignoring soft interventions (constants) on `targets`.
PolicyChoice optimize_sigma(const Scm& scm, std::span<const std::string> targets,
                            std::uint64_t budget = kDefaultSearchBudget);

/// argmax over counterfactual policies that ignore the natural value.
PolicyChoice optimize_rho_empty(const Scm& scm, std::span<const std::string> targets,
                                std::uint64_t budget = kDefaultSearchBudget);

/// argmax over soft policies on the twin's primed copies. `reads[j]` says
/// whether the copy of target j may observe its natural value.
PolicyChoice optimize_pi(const TwinResult& tw, const std::vector<bool>& reads,
                         std::uint64_t budget = kDefaultSearchBudget);

/// Optimal twin value when `observed` may be read minus the optimum when it
/// may not (every other copy keeps reading its natural value). `observed`
/// must be one of the twin's targets.
double value_of_observation(const TwinResult& tw, const std::string& observed,
                            std::uint64_t budget = kDefaultSearchBudget);
double value_of_observation(const Scm& scm, std::span<const std::string> targets, const std::string& observed,
                            std::uint64_t budget = kDefaultSearchBudget);

/// d-separation of the natural node I_j from the reward variable in the twin
/// after removing the edge I_j -> I_j'. True implies VO(I_j) = 0.
bool observation_d_separated(const TwinResult& tw, const std::string& target);

struct CorollaryReport {
  double rho_star = 0, pi_star = 0, rho_empty_star = 0, pi_empty_star = 0, sigma_star = 0;
  bool corollary1 = false;  // rho* = pi*
  bool corollary2 = false;  // rho*_empty = pi*_empty
  bool bridge = false;      // sigma* = rho*_empty
  bool passed() const { return corollary1 && corollary2 && bridge; }
};

CorollaryReport check_corollaries(const Scm& scm, std::span<const std::string> targets,
                                  std::uint64_t budget = kDefaultSearchBudget);

struct Condition3Report {
  bool original_side = false;  // E[Y_rho*] > E[Y_sigma*]
  bool twin_side = false;      // E^c[Y_pi*] > E^c[Y_pi*_empty]
  bool biconditional = false;
  std::map<std::string, bool> dsep;
  std::map<std::string, double> vo;
  /// d-separated => VO = 0 for every target.
  bool dsep_sound = true;
};

Condition3Report check_condition3(const Scm& scm, std::span<const std::string> targets,
                                  std::uint64_t budget = kDefaultSearchBudget);

struct PolicyReport {
  std::vector<std::string> targets;
  PolicyChoice best_rho;
  PolicyChoice best_sigma;
  PolicyChoice best_rho_empty;
  PolicyChoice best_pi;
  PolicyChoice best_pi_empty;
  CorollaryReport corollaries;
  Condition3Report condition3;
  bool dominance = false;  // rho* >= sigma* - 1e-12
};

PolicyReport policy_report(const Scm& scm, std::span<const std::string> targets,
                           std::uint64_t budget = kDefaultSearchBudget);

}  // namespace cftwin

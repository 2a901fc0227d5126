#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "cftwin/scm.hpp"
#include "cftwin/semantics.hpp"

namespace cftwin {

struct RandomModelOptions {
  std::size_t min_endogenous = 2;
  std::size_t max_endogenous = 4;
  std::size_t max_exogenous = 3;  // binary, jointly distributed
  std::size_t max_domain = 3;     // endogenous domain sizes drawn from 2..max_domain
  int max_pmf_weight = 4;         // pmf masses are w / sum(w) with w in 0..max
};

/// Random SCM with variables V1..Vn (declaration order is topological),
/// exogenous U1..Um, random parent sets and tables and a correlated rational
/// pmf. The last variable is the reward variable.
Scm random_scm(std::mt19937_64& rng, const RandomModelOptions& options = {});

/// Nonempty random subset of the non-reward endogenous variables, ancestors first.
std::vector<std::string> random_targets(const Scm& scm, std::mt19937_64& rng);

/// Random deterministic counterfactual policy per target.
std::map<std::string, Policy> random_policies(const Scm& scm, const std::vector<std::string>& targets,
                                              std::mt19937_64& rng);

}  // namespace cftwin

#include "cftwin/random_models.hpp"

#include <algorithm>

namespace cftwin {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

Scm random_scm(std::mt19937_64& rng, const RandomModelOptions& opt) {
  ScmBuilder b;
  const std::size_t n_exo = pick(rng, 1, opt.max_exogenous);
  const std::size_t n_endo = pick(rng, opt.min_endogenous, opt.max_endogenous);
  std::vector<std::string> exo, endo;
  for (std::size_t i = 0; i < n_exo; ++i) {
    exo.push_back("U" + std::to_string(i + 1));
    b.exogenous(exo.back());
  }

  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < n_endo; ++i) {
    const std::size_t dom = pick(rng, 2, opt.max_domain);
    std::vector<int> domain(dom);
    for (std::size_t k = 0; k < dom; ++k) domain[k] = static_cast<int>(k);

    std::vector<std::string> parents;
    std::size_t rows = 1;
    for (std::size_t j = 0; j < i; ++j)
      if (coin(rng, 0.6)) {
        parents.push_back(endo[j]);
        rows *= sizes[j];
      }
    for (const auto& u : exo)
      if (coin(rng, 0.5)) {
        parents.push_back(u);
        rows *= 2;
      }
    std::vector<int> table(rows);
    for (auto& t : table) t = static_cast<int>(pick(rng, 0, dom - 1));
    endo.push_back("V" + std::to_string(i + 1));
    sizes.push_back(dom);
    b.variable_table(endo.back(), domain, parents, table);
  }

  // Joint pmf over all 2^m configurations with integer weights; at least one
  // configuration carries mass.
  const std::size_t configs = std::size_t{1} << n_exo;
  std::vector<int> weights(configs);
  int total = 0;
  while (total == 0) {
    total = 0;
    for (auto& w : weights) {
      w = static_cast<int>(pick(rng, 0, static_cast<std::size_t>(opt.max_pmf_weight)));
      total += w;
    }
  }
  for (std::size_t c = 0; c < configs; ++c) {
    if (weights[c] == 0) continue;
    std::vector<int> values(n_exo);
    for (std::size_t k = 0; k < n_exo; ++k) values[k] = static_cast<int>((c >> (n_exo - 1 - k)) & 1u);
    b.mass(values, Rational(weights[c], total));
  }

  std::vector<std::pair<int, double>> reward;
  for (std::size_t k = 0; k < sizes.back(); ++k)
    reward.emplace_back(static_cast<int>(k), static_cast<double>(pick(rng, 0, 3)));
  b.reward(endo.back(), reward);
  return b.build();
}

std::vector<std::string> random_targets(const Scm& scm, std::mt19937_64& rng) {
  std::vector<std::string> candidates;
  for (NodeId v : scm.endogenous_order())
    if (v != scm.reward_var()) candidates.push_back(scm.name(v));
  std::vector<std::string> out;
  while (out.empty() && !candidates.empty()) {
    for (const auto& c : candidates)
      if (coin(rng, 0.5)) out.push_back(c);
  }
  return out;
}

std::map<std::string, Policy> random_policies(const Scm& scm, const std::vector<std::string>& targets,
                                              std::mt19937_64& rng) {
  std::map<std::string, Policy> out;
  for (const auto& t : targets) {
    const std::size_t n = scm.domain_size(scm.id(t));
    std::vector<int> map(n);
    for (auto& m : map) m = static_cast<int>(pick(rng, 0, n - 1));
    out.emplace(t, Policy::deterministic(map));
  }
  return out;
}

}  // namespace cftwin

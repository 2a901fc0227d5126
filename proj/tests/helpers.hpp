#pragma once

#include <map>
#include <string>
#include <vector>

#include "cftwin/fixtures.hpp"
#include "cftwin/semantics.hpp"
#include "cftwin/twin.hpp"
#include "oracles.hpp"

namespace testing {

inline cftwin::Scm fixture(const char* name) { return cftwin::load_fixture(name).scm; }

/// Deterministic policy as a natural value -> acted value map (actual values).
inline std::map<int, int> value_map(const cftwin::Scm& scm, const std::string& target, const cftwin::Policy& p) {
  const auto id = scm.id(target);
  std::map<int, int> out;
  for (std::size_t i = 0; i < scm.domain_size(id); ++i) {
    const std::size_t row = p.input == cftwin::PolicyInput::Ignore ? 0 : i;
    out[scm.value_at(id, static_cast<int>(i))] = scm.value_at(id, p.deterministic_output(row));
  }
  return out;
}

inline std::map<std::string, std::map<int, int>> value_maps(const cftwin::Scm& scm,
                                                            const std::map<std::string, cftwin::Policy>& ps) {
  std::map<std::string, std::map<int, int>> out;
  for (const auto& [name, p] : ps) out[name] = value_map(scm, name, p);
  return out;
}

/// Library distribution re-keyed to the oracle's layout (columns `names`).
inline oracle::Joint as_joint(const cftwin::Distribution<cftwin::Rational>& d, const std::vector<std::string>& names) {
  const auto m = d.marginal(names);
  oracle::Joint out;
  for (std::size_t r = 0; r < m.support.size(); ++r)
    if (m.probs[r] != 0) out[m.support[r]] += m.probs[r];
  return out;
}

inline oracle::Joint drop_zeros(oracle::Joint j) {
  for (auto it = j.begin(); it != j.end();) it = it->second == 0 ? j.erase(it) : std::next(it);
  return j;
}

/// The twin without the rewiring: children of each target keep reading the
/// target instead of its copy.
inline cftwin::Scm skip_rewiring(const cftwin::TwinResult& tw) {
  cftwin::ScmDefinition def = tw.derived.definition();
  std::map<std::string, std::string> back;
  for (const auto& [from, to] : tw.copy_map) back[to] = from;
  for (auto& m : def.mechanisms) {
    if (back.count(m.var)) continue;
    for (auto& p : m.parents)
      if (back.count(p)) p = back[p];
    if (m.expr) m.expr = cftwin::expr::to_string(cftwin::expr::rename(cftwin::expr::parse(*m.expr), back));
  }
  return cftwin::Scm::create(def);
}

}  // namespace testing

#include "cftwin/scm.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "cftwin/error.hpp"
#include "cftwin/expr.hpp"

namespace cftwin {

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty() || s == "min" || s == "max") return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  std::size_t i = 1;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
  while (i < s.size() && s[i] == '\'') ++i;
  return i == s.size();
}

std::string values_text(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

class Problems {
 public:
  void add(std::string msg) { list_.push_back(std::move(msg)); }
  bool empty() const { return list_.empty(); }
  void throw_if_any(ErrorKind kind) const {
    if (list_.empty()) return;
    std::string msg;
    for (std::size_t i = 0; i < list_.size(); ++i) {
      if (i) msg += "\n";
      msg += list_[i];
    }
    throw Error(kind, msg);
  }

 private:
  std::vector<std::string> list_;
};

}  // namespace

Scm Scm::create(ScmDefinition def, double pmf_tolerance) {
  Scm m;
  Problems problems;

  std::vector<CausalDiagram::Node> nodes;
  std::vector<std::vector<int>> domains;
  auto declare = [&](const VariableDef& v, bool exo, const std::string& where) {
    if (!valid_identifier(v.name)) problems.add(where + ": invalid variable name '" + v.name + "'");
    if (v.domain.empty()) problems.add(where + ": variable '" + v.name + "' has an empty domain");
    std::set<int> distinct(v.domain.begin(), v.domain.end());
    if (distinct.size() != v.domain.size())
      problems.add(where + ": variable '" + v.name + "' has repeated domain values");
    nodes.push_back({v.name, exo});
    domains.push_back(v.domain);
  };
  for (std::size_t i = 0; i < def.exogenous.size(); ++i)
    declare(def.exogenous[i], true, "exogenous[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < def.endogenous.size(); ++i)
    declare(def.endogenous[i], false, "variables[" + std::to_string(i) + "]");
  problems.throw_if_any(ErrorKind::Validation);

  std::map<std::string, std::size_t> node_index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!node_index.emplace(nodes[i].name, i).second)
      problems.add("duplicate variable '" + nodes[i].name + "'");
  }
  problems.throw_if_any(ErrorKind::Validation);

  // Mechanisms: one per endogenous variable, parents declared.
  std::map<std::string, std::size_t> mech_of;
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < def.mechanisms.size(); ++i) {
    const auto& md = def.mechanisms[i];
    const std::string where = "mechanisms[" + std::to_string(i) + "]";
    auto it = node_index.find(md.var);
    if (it == node_index.end()) {
      problems.add(where + ".var: unknown variable '" + md.var + "'");
      continue;
    }
    if (nodes[it->second].exogenous) {
      problems.add(where + ".var: '" + md.var + "' is exogenous and cannot have a mechanism");
      continue;
    }
    if (!mech_of.emplace(md.var, i).second) problems.add(where + ": second mechanism for '" + md.var + "'");
    std::set<std::string> seen;
    for (const auto& p : md.parents) {
      if (!node_index.count(p)) problems.add(where + ".parents: unknown variable '" + p + "'");
      if (!seen.insert(p).second) problems.add(where + ".parents: '" + p + "' listed twice");
      edges.emplace_back(p, md.var);
    }
  }
  for (const auto& v : def.endogenous)
    if (!mech_of.count(v.name)) problems.add("mechanisms: no mechanism for '" + v.name + "'");
  problems.throw_if_any(ErrorKind::Validation);

  m.diagram_ = CausalDiagram::create(nodes, edges);
  m.domains_ = domains;
  m.mechanisms_.resize(nodes.size());

  for (const auto& [var, mi] : mech_of) {
    const auto& md = def.mechanisms[mi];
    const std::string where = "mechanisms[" + std::to_string(mi) + "]";
    const NodeId child = m.diagram_.id(var);
    Mechanism mech;
    std::size_t rows = 1;
    for (const auto& p : md.parents) {
      mech.parents.push_back(m.diagram_.id(p));
      rows *= m.domains_[index_of(mech.parents.back())].size();
    }
    mech.strides.assign(mech.parents.size(), 1);
    for (std::size_t k = mech.parents.size(); k-- > 1;)
      mech.strides[k - 1] = mech.strides[k] * m.domains_[index_of(mech.parents[k])].size();
    const auto& out_domain = m.domains_[index_of(child)];
    if (md.expr) {
      try {
        auto e = expr::parse(*md.expr);
        std::vector<expr::Parent> ps;
        for (std::size_t k = 0; k < md.parents.size(); ++k)
          ps.push_back({md.parents[k], m.domains_[index_of(mech.parents[k])]});
        mech.table = expr::compile(e, ps, out_domain);
      } catch (const Error& err) {
        problems.add(where + ".expr: " + err.what());
        continue;
      }
    } else {
      if (md.table.size() != rows) {
        problems.add(where + ".table: expected " + std::to_string(rows) + " rows, found " +
                     std::to_string(md.table.size()));
        continue;
      }
      mech.table.resize(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        auto it = std::find(out_domain.begin(), out_domain.end(), md.table[r]);
        if (it == out_domain.end()) {
          problems.add(where + ".table: value " + std::to_string(md.table[r]) + " in row " +
                       std::to_string(r) + " is outside the domain of '" + var + "'");
          continue;
        }
        mech.table[r] = static_cast<int>(it - out_domain.begin());
      }
    }
    m.mechanisms_[index_of(child)] = std::move(mech);
  }

  // Exogenous pmf.
  const std::size_t n_exo = def.exogenous.size();
  std::set<std::vector<int>> seen_cfg;
  Rational total = 0;
  for (std::size_t i = 0; i < def.pmf.size(); ++i) {
    const auto& e = def.pmf[i];
    const std::string where = "pmf.joint[" + std::to_string(i) + "]";
    if (e.values.size() != n_exo) {
      problems.add(where + ": expected " + std::to_string(n_exo) + " exogenous values");
      continue;
    }
    if (e.p < 0) problems.add(where + ".p: negative probability");
    if (!seen_cfg.insert(e.values).second) problems.add(where + ": duplicate configuration (" + values_text(e.values) + ")");
    ExogenousConfig cfg;
    bool ok = true;
    for (std::size_t k = 0; k < n_exo; ++k) {
      const auto& dom = m.domains_[k];
      auto it = std::find(dom.begin(), dom.end(), e.values[k]);
      if (it == dom.end()) {
        problems.add(where + ".u." + def.exogenous[k].name + ": value " + std::to_string(e.values[k]) +
                     " outside its domain");
        ok = false;
        break;
      }
      cfg.values.push_back(static_cast<int>(it - dom.begin()));
    }
    total += e.p;
    if (ok && e.p > 0) {
      cfg.p = Probability(e.p);
      m.support_.push_back(std::move(cfg));
    }
  }
  if (n_exo == 0 && def.pmf.empty()) {
    // No exogenous variables: the single empty configuration carries all mass.
    m.support_.push_back({{}, Probability::one()});
    total = 1;
  }
  if (std::abs(to_double(total) - 1.0) > pmf_tolerance)
    problems.add("pmf: probabilities sum to " + std::to_string(to_double(total)) + ", not 1");

  // Reward.
  if (!m.diagram_.contains(def.reward.var)) {
    problems.add("reward.var: unknown variable '" + def.reward.var + "'");
  } else {
    m.reward_var_ = m.diagram_.id(def.reward.var);
    if (m.diagram_.is_exogenous(m.reward_var_)) problems.add("reward.var: '" + def.reward.var + "' is exogenous");
    const auto& dom = m.domains_[index_of(m.reward_var_)];
    m.reward_.assign(dom.size(), 0.0);
    std::vector<bool> covered(dom.size(), false);
    for (auto [value, r] : def.reward.map) {
      auto it = std::find(dom.begin(), dom.end(), value);
      if (it == dom.end()) {
        problems.add("reward.map: value " + std::to_string(value) + " outside the domain of '" + def.reward.var + "'");
        continue;
      }
      m.reward_[static_cast<std::size_t>(it - dom.begin())] = r;
      covered[static_cast<std::size_t>(it - dom.begin())] = true;
    }
    for (std::size_t k = 0; k < dom.size(); ++k)
      if (!covered[k]) problems.add("reward.map: missing value " + std::to_string(dom[k]));
  }
  problems.throw_if_any(ErrorKind::Validation);

  for (NodeId v : m.diagram_.topological_order())
    if (!m.diagram_.is_exogenous(v)) m.endo_order_.push_back(v);
  m.def_ = std::move(def);
  return m;
}

int Scm::value_index(NodeId v, int value) const {
  const auto& dom = domains_[index_of(v)];
  auto it = std::find(dom.begin(), dom.end(), value);
  if (it == dom.end())
    throw Error(ErrorKind::Domain, "value " + std::to_string(value) + " is outside the domain of '" + name(v) + "'");
  return static_cast<int>(it - dom.begin());
}

ScmBuilder& ScmBuilder::exogenous(std::string name, std::vector<int> domain) {
  def_.exogenous.push_back({std::move(name), std::move(domain)});
  return *this;
}

ScmBuilder& ScmBuilder::variable(std::string name, std::vector<int> domain,
                                 std::vector<std::string> parents, std::string expr) {
  def_.mechanisms.push_back({name, std::move(parents), std::move(expr), {}});
  def_.endogenous.push_back({std::move(name), std::move(domain)});
  return *this;
}

ScmBuilder& ScmBuilder::variable_table(std::string name, std::vector<int> domain,
                                       std::vector<std::string> parents, std::vector<int> table) {
  def_.mechanisms.push_back({name, std::move(parents), std::nullopt, std::move(table)});
  def_.endogenous.push_back({std::move(name), std::move(domain)});
  return *this;
}

ScmBuilder& ScmBuilder::mass(std::vector<int> values, Rational p) {
  def_.pmf.push_back({std::move(values), std::move(p)});
  return *this;
}

ScmBuilder& ScmBuilder::uniform() {
  def_.pmf.clear();
  Rational total_configs = 1;
  for (const auto& v : def_.exogenous) total_configs *= static_cast<long long>(v.domain.size());
  std::vector<std::size_t> digit(def_.exogenous.size(), 0);
  for (;;) {
    std::vector<int> values;
    for (std::size_t k = 0; k < digit.size(); ++k) values.push_back(def_.exogenous[k].domain[digit[k]]);
    def_.pmf.push_back({values, Rational(1) / total_configs});
    std::size_t k = digit.size();
    while (k-- > 0) {
      if (++digit[k] < def_.exogenous[k].domain.size()) break;
      digit[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return *this;
}

ScmBuilder& ScmBuilder::reward(std::string var, std::vector<std::pair<int, double>> map) {
  def_.reward = {std::move(var), std::move(map)};
  return *this;
}

ScmBuilder& ScmBuilder::reward_identity(std::string var) {
  std::vector<std::pair<int, double>> map;
  for (const auto& v : def_.endogenous)
    if (v.name == var)
      for (int x : v.domain) map.emplace_back(x, static_cast<double>(x));
  return reward(std::move(var), std::move(map));
}

}  // namespace cftwin

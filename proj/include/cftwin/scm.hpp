#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cftwin/graph.hpp"
#include "cftwin/probability.hpp"

namespace cftwin {

struct VariableDef {
  std::string name;
  std::vector<int> domain;
};

/// One structural equation. Either `expr` is set (compiled at load) or
/// `table` lists the output value for every parent combination, last parent
/// varying fastest.
struct MechanismDef {
  std::string var;
  std::vector<std::string> parents;
  std::optional<std::string> expr;
  std::vector<int> table;
};

struct PmfEntry {
  std::vector<int> values;  // one per exogenous variable, declaration order
  Rational p;
};

struct RewardDef {
  std::string var;
  std::vector<std::pair<int, double>> map;
};

/// Plain description of an SCM as it appears on disk. Scm::create validates
/// it; Scm::definition() gives it back.
struct ScmDefinition {
  std::vector<VariableDef> endogenous;
  std::vector<VariableDef> exogenous;
  std::vector<PmfEntry> pmf;
  std::vector<MechanismDef> mechanisms;
  RewardDef reward;
};

/// Compiled mechanism: output value index for each parent configuration
/// (indices into the parents' domains, last parent fastest).
struct Mechanism {
  std::vector<NodeId> parents;
  std::vector<std::size_t> strides;
  std::vector<int> table;

  template <class Assignment>
  int apply(const Assignment& values) const {
    std::size_t row = 0;
    for (std::size_t k = 0; k < parents.size(); ++k)
      row += strides[k] * static_cast<std::size_t>(values[index_of(parents[k])]);
    return table[row];
  }
};

/// A full exogenous configuration with nonzero mass.
struct ExogenousConfig {
  std::vector<int> values;  // value indices, one per exogenous node (diagram order)
  Probability p;
};

/// Assignments store value *indices* (positions within each node's domain)
/// for every node of the diagram, indexed by NodeId.
using Assignment = std::vector<int>;

class Scm {
 public:
  /// Validation: every endogenous variable has exactly one mechanism; table
  /// entries land in the child's domain; pmf entries are in-domain, distinct,
  /// nonnegative and sum to 1 within `pmf_tolerance`; the reward map covers
  /// the reward variable's domain. Throws Error (Validation/Structural/...)
  /// listing every problem found.
  static Scm create(ScmDefinition def, double pmf_tolerance = 1e-9);

  const CausalDiagram& diagram() const { return diagram_; }
  const ScmDefinition& definition() const { return def_; }

  NodeId id(std::string_view name) const { return diagram_.id(name); }
  const std::string& name(NodeId v) const { return diagram_.name(v); }

  std::span<const int> domain(NodeId v) const { return domains_[index_of(v)]; }
  std::size_t domain_size(NodeId v) const { return domains_[index_of(v)].size(); }
  /// Index of `value` in the domain of `v`; throws Error(Domain) if absent.
  int value_index(NodeId v, int value) const;
  int value_at(NodeId v, int index) const { return domains_[index_of(v)][static_cast<std::size_t>(index)]; }

  const Mechanism& mechanism(NodeId v) const { return mechanisms_[index_of(v)]; }
  const std::vector<ExogenousConfig>& exogenous_support() const { return support_; }

  NodeId reward_var() const { return reward_var_; }
  /// Reward for the reward variable's value index.
  double reward(int value_index) const { return reward_[static_cast<std::size_t>(value_index)]; }
  std::span<const double> reward_table() const { return reward_; }

  /// Endogenous nodes in topological order.
  const std::vector<NodeId>& endogenous_order() const { return endo_order_; }

 private:
  ScmDefinition def_;
  CausalDiagram diagram_;
  std::vector<std::vector<int>> domains_;
  std::vector<Mechanism> mechanisms_;
  std::vector<ExogenousConfig> support_;
  NodeId reward_var_{};
  std::vector<double> reward_;
  std::vector<NodeId> endo_order_;
};

/// Fluent construction used by fixtures and tests.
class ScmBuilder {
 public:
  ScmBuilder& exogenous(std::string name, std::vector<int> domain = {0, 1});
  ScmBuilder& variable(std::string name, std::vector<int> domain, std::vector<std::string> parents,
                       std::string expr);
  ScmBuilder& variable_table(std::string name, std::vector<int> domain,
                             std::vector<std::string> parents, std::vector<int> table);
  /// Mass for one exogenous configuration (values in declaration order).
  ScmBuilder& mass(std::vector<int> values, Rational p);
  /// Independent uniform distribution over all exogenous variables.
  ScmBuilder& uniform();
  ScmBuilder& reward(std::string var, std::vector<std::pair<int, double>> map);
  /// reward(var) with map value -> value.
  ScmBuilder& reward_identity(std::string var);

  Scm build() const { return Scm::create(def_); }
  const ScmDefinition& definition() const { return def_; }

 private:
  ScmDefinition def_;
};

}  // namespace cftwin

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cftwin/twin.hpp"

namespace cftwin {

enum class AgentKind { DoUCB, DoThompson, CfThompson, UniformRandom };

/// "do-ucb", "do-ts", "cf-ts", "uniform".
AgentKind parse_agent(std::string_view text);
const char* to_string(AgentKind kind);
bool reads_intuition(AgentKind kind);

/// Single-action environment played through the conditional twin of `action`:
/// each round draws u, the natural value A = f_A(u) is computed, the agent
/// picks an arm for A' and Y is evaluated with A' fixed to that arm.
class BanditEnvironment {
 public:
  BanditEnvironment(const Scm& scm, const std::string& action, bool exposes_intuition);

  const TwinResult& twin() const { return twin_; }
  const std::string& action() const { return action_; }
  bool exposes_intuition() const { return exposes_; }
  std::size_t arms() const { return arms_; }
  /// Actual domain value of arm / natural index i.
  int value(std::size_t index) const { return values_[index]; }

  /// P(A = a) by natural index.
  const std::vector<double>& natural_probability() const { return p_natural_; }
  /// E[R(Y_{arm}) | A = a], indexed [a][arm].
  const std::vector<std::vector<double>>& q() const { return q_; }
  /// E[R(Y) | do(A = arm)].
  const std::vector<double>& do_value() const { return do_value_; }
  /// Best arm per natural value (lowest index on ties).
  const std::vector<std::size_t>& rho_star() const { return rho_star_; }
  double rho_star_value() const { return rho_star_value_; }
  double do_star_value() const { return do_star_value_; }
  /// Rewards rescaled to [0, 1] for the Beta-Bernoulli learners.
  double reward_low() const { return reward_low_; }
  double reward_high() const { return reward_high_; }

  /// Natural index and the reward of every arm for exogenous config `k`.
  std::size_t natural_of(std::size_t k) const { return natural_[k]; }
  double reward_of(std::size_t k, std::size_t arm) const { return reward_[k][arm]; }
  const std::vector<double>& config_weights() const { return weights_; }

 private:
  TwinResult twin_;
  std::string action_;
  bool exposes_ = false;
  std::size_t arms_ = 0;
  std::vector<int> values_;
  std::vector<double> weights_;
  std::vector<std::size_t> natural_;
  std::vector<std::vector<double>> reward_;
  std::vector<double> p_natural_;
  std::vector<std::vector<double>> q_;
  std::vector<double> do_value_;
  std::vector<std::size_t> rho_star_;
  double rho_star_value_ = 0.0;
  double do_star_value_ = 0.0;
  double reward_low_ = 0.0;
  double reward_high_ = 1.0;
};

struct ArmStats {
  std::uint64_t pulls = 0;
  double reward_sum = 0.0;
  double mean() const { return pulls ? reward_sum / static_cast<double>(pulls) : 0.0; }
};

struct RunResult {
  AgentKind agent = AgentKind::UniformRandom;
  std::uint64_t seed = 0;
  bool natural_exposed = false;
  std::vector<int> natural;  // actual values; always recorded, printed only if exposed
  std::vector<int> arm;
  std::vector<double> reward;
  /// Cumulative context-conditional regret against rho*.
  std::vector<double> regret;
  /// Cumulative regret against the best policy the agent can represent.
  std::vector<double> class_regret;
  std::vector<ArmStats> per_arm;
  std::vector<std::vector<ArmStats>> per_cell;  // [natural][arm]

  std::size_t horizon() const { return arm.size(); }
  double mean_reward() const;
  /// Columns: round,natural,arm,reward,regret.
  std::string to_csv() const;
};

/// Plays `horizon` rounds. Environment randomness for round t depends only on
/// (seed, t); the agent's own randomness on the seed.
RunResult run_episode(const BanditEnvironment& env, AgentKind agent, std::uint64_t horizon,
                      std::uint64_t seed);

struct RegretCurve {
  std::size_t runs = 0;
  std::vector<double> mean;
  std::vector<double> se;
  std::vector<double> class_mean;
  std::vector<double> class_se;
  /// Columns: round,mean_regret,se_regret,mean_class_regret,se_class_regret.
  std::string to_csv() const;
};

/// Mean and standard error of cumulative regret per round across runs.
RegretCurve regret_curve(const std::vector<RunResult>& results);

}  // namespace cftwin

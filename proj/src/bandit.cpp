#include "cftwin/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cftwin/error.hpp"

namespace cftwin {

AgentKind parse_agent(std::string_view text) {
  if (text == "do-ucb") return AgentKind::DoUCB;
  if (text == "do-ts") return AgentKind::DoThompson;
  if (text == "cf-ts") return AgentKind::CfThompson;
  if (text == "uniform") return AgentKind::UniformRandom;
  throw Error(ErrorKind::Argument,
              "unknown agent '" + std::string(text) + "' (expected do-ucb, do-ts, cf-ts or uniform)");
}

const char* to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::DoUCB: return "do-ucb";
    case AgentKind::DoThompson: return "do-ts";
    case AgentKind::CfThompson: return "cf-ts";
    case AgentKind::UniformRandom: return "uniform";
  }
  return "?";
}

bool reads_intuition(AgentKind kind) { return kind == AgentKind::CfThompson; }

BanditEnvironment::BanditEnvironment(const Scm& scm, const std::string& action, bool exposes_intuition)
    : twin_(conditional_twin(scm, std::vector<std::string>{action})), action_(action), exposes_(exposes_intuition) {
  const Scm& g = twin_.derived;
  const NodeId a = g.id(action);
  const NodeId a_prime = g.id(primed(action));
  const NodeId y = g.reward_var();
  arms_ = g.domain_size(a);
  values_.assign(g.domain(a).begin(), g.domain(a).end());

  const auto rewards = g.reward_table();
  reward_low_ = *std::min_element(rewards.begin(), rewards.end());
  reward_high_ = *std::max_element(rewards.begin(), rewards.end());

  const Regime natural_regime;
  p_natural_.assign(arms_, 0.0);
  q_.assign(arms_, std::vector<double>(arms_, 0.0));
  do_value_.assign(arms_, 0.0);
  for (const auto& cfg : g.exogenous_support()) {
    const Assignment nat = evaluate(g, cfg.values, natural_regime, {});
    const auto n = static_cast<std::size_t>(nat[index_of(a)]);
    weights_.push_back(cfg.p.value);
    natural_.push_back(n);
    std::vector<double> row;
    for (std::size_t arm = 0; arm < arms_; ++arm) {
      const Regime fixed(g, {Intervention::atomic(a_prime, static_cast<int>(arm))});
      const Assignment out = evaluate(g, cfg.values, fixed, {});
      row.push_back(g.reward(out[index_of(y)]));
      q_[n][arm] += cfg.p.value * row.back();
      do_value_[arm] += cfg.p.value * row.back();
    }
    reward_.push_back(std::move(row));
    p_natural_[n] += cfg.p.value;
  }

  rho_star_.assign(arms_, 0);
  for (std::size_t n = 0; n < arms_; ++n) {
    if (p_natural_[n] > 0)
      for (auto& v : q_[n]) v /= p_natural_[n];
    std::size_t best = 0;
    for (std::size_t arm = 1; arm < arms_; ++arm)
      if (q_[n][arm] > q_[n][best] + 1e-12) best = arm;
    rho_star_[n] = best;
    rho_star_value_ += p_natural_[n] * q_[n][best];
  }
  do_star_value_ = *std::max_element(do_value_.begin(), do_value_.end());
}

double RunResult::mean_reward() const {
  if (reward.empty()) return 0.0;
  double s = 0;
  for (double r : reward) s += r;
  return s / static_cast<double>(reward.size());
}

std::string RunResult::to_csv() const {
  std::ostringstream out;
  out << "round,natural,arm,reward,regret\n";
  for (std::size_t t = 0; t < arm.size(); ++t) {
    out << (t + 1) << ',';
    if (natural_exposed) out << natural[t];
    out << ',' << arm[t] << ',' << format_number(reward[t]) << ',' << format_number(regret[t]) << '\n';
  }
  return out.str();
}

namespace {

class Agent {
 public:
  Agent(AgentKind kind, std::size_t arms, std::uint64_t seed)
      : kind_(kind), arms_(arms), engine_(seed_from(seed)), alpha_(arms, std::vector<double>(arms, 1.0)),
        beta_(arms, std::vector<double>(arms, 1.0)), pulls_(arms, 0), sums_(arms, 0.0) {}

  std::size_t choose(std::size_t context, std::uint64_t round) {
    switch (kind_) {
      case AgentKind::UniformRandom:
        return std::uniform_int_distribution<std::size_t>(0, arms_ - 1)(engine_);
      case AgentKind::DoUCB: {
        for (std::size_t arm = 0; arm < arms_; ++arm)
          if (pulls_[arm] == 0) return arm;
        std::size_t best = 0;
        double best_score = -1;
        for (std::size_t arm = 0; arm < arms_; ++arm) {
          const double n = static_cast<double>(pulls_[arm]);
          const double score = sums_[arm] / n + std::sqrt(2.0 * std::log(static_cast<double>(round)) / n);
          if (score > best_score) {
            best_score = score;
            best = arm;
          }
        }
        return best;
      }
      case AgentKind::DoThompson: return thompson(0);
      case AgentKind::CfThompson: return thompson(context);
    }
    return 0;
  }

  void update(std::size_t context, std::size_t arm, double scaled) {
    ++pulls_[arm];
    sums_[arm] += scaled;
    // Binarize fractional rewards so the Beta posterior stays conjugate.
    const bool success = std::uniform_real_distribution<double>(0.0, 1.0)(engine_) < scaled;
    const std::size_t cell = kind_ == AgentKind::CfThompson ? context : 0;
    (success ? alpha_ : beta_)[cell][arm] += 1.0;
  }

 private:
  static std::mt19937_64 seed_from(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xa9e47u};
    return std::mt19937_64(seq);
  }

  double beta_draw(double a, double b) {
    const double x = std::gamma_distribution<double>(a, 1.0)(engine_);
    const double y = std::gamma_distribution<double>(b, 1.0)(engine_);
    return x / (x + y);
  }

  std::size_t thompson(std::size_t cell) {
    std::size_t best = 0;
    double best_draw = -1;
    for (std::size_t arm = 0; arm < arms_; ++arm) {
      const double d = beta_draw(alpha_[cell][arm], beta_[cell][arm]);
      if (d > best_draw) {
        best_draw = d;
        best = arm;
      }
    }
    return best;
  }

  AgentKind kind_;
  std::size_t arms_;
  std::mt19937_64 engine_;
  std::vector<std::vector<double>> alpha_, beta_;
  std::vector<std::uint64_t> pulls_;
  std::vector<double> sums_;
};

}  // namespace

RunResult run_episode(const BanditEnvironment& env, AgentKind agent, std::uint64_t horizon, std::uint64_t seed) {
  if (horizon == 0) throw Error(ErrorKind::Argument, "horizon must be at least 1");
  if (reads_intuition(agent) && !env.exposes_intuition())
    throw Error(ErrorKind::Config, std::string("agent ") + to_string(agent) +
                                       " needs the natural action value, but the environment does not expose it");

  const std::size_t arms = env.arms();
  const double span = env.reward_high() - env.reward_low();
  const auto& q = env.q();
  const double do_star = env.do_star_value();

  RunResult res;
  res.agent = agent;
  res.seed = seed;
  res.natural_exposed = env.exposes_intuition();
  res.per_arm.assign(arms, {});
  res.per_cell.assign(arms, std::vector<ArmStats>(arms));
  res.natural.reserve(horizon);
  res.arm.reserve(horizon);
  res.reward.reserve(horizon);
  res.regret.reserve(horizon);
  res.class_regret.reserve(horizon);

  Agent learner(agent, arms, seed);
  double regret = 0, class_regret = 0;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    TrialRandom rng(seed, 1, t);
    const std::size_t k = draw_index(env.config_weights(), rng.uniform());
    const std::size_t natural = env.natural_of(k);
    const std::size_t arm = learner.choose(natural, t + 1);
    const double r = env.reward_of(k, arm);
    learner.update(natural, arm, span > 0 ? (r - env.reward_low()) / span : 0.5);

    regret += q[natural][env.rho_star()[natural]] - q[natural][arm];
    class_regret += reads_intuition(agent) ? q[natural][env.rho_star()[natural]] - q[natural][arm]
                                           : do_star - env.do_value()[arm];
    res.natural.push_back(env.value(natural));
    res.arm.push_back(env.value(arm));
    res.reward.push_back(r);
    res.regret.push_back(regret);
    res.class_regret.push_back(class_regret);
    res.per_arm[arm].pulls++;
    res.per_arm[arm].reward_sum += r;
    res.per_cell[natural][arm].pulls++;
    res.per_cell[natural][arm].reward_sum += r;
  }
  return res;
}

std::string RegretCurve::to_csv() const {
  std::ostringstream out;
  out << "round,mean_regret,se_regret,mean_class_regret,se_class_regret\n";
  for (std::size_t t = 0; t < mean.size(); ++t)
    out << (t + 1) << ',' << format_number(mean[t]) << ',' << format_number(se[t]) << ','
        << format_number(class_mean[t]) << ',' << format_number(class_se[t]) << '\n';
  return out.str();
}

namespace {

void mean_and_se(const std::vector<RunResult>& results, std::vector<double> RunResult::*field,
                 std::vector<double>& mean, std::vector<double>& se) {
  const std::size_t h = results.front().horizon();
  const double n = static_cast<double>(results.size());
  mean.assign(h, 0.0);
  se.assign(h, 0.0);
  for (std::size_t t = 0; t < h; ++t) {
    double s = 0;
    for (const auto& r : results) s += (r.*field)[t];
    const double m = s / n;
    double ss = 0;
    for (const auto& r : results) ss += ((r.*field)[t] - m) * ((r.*field)[t] - m);
    mean[t] = m;
    se[t] = results.size() > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
  }
}

}  // namespace

RegretCurve regret_curve(const std::vector<RunResult>& results) {
  if (results.empty()) throw Error(ErrorKind::Argument, "regret curve needs at least one run");
  for (const auto& r : results)
    if (r.horizon() != results.front().horizon())
      throw Error(ErrorKind::Argument, "regret curve needs runs of equal horizon");
  RegretCurve curve;
  curve.runs = results.size();
  mean_and_se(results, &RunResult::regret, curve.mean, curve.se);
  mean_and_se(results, &RunResult::class_regret, curve.class_mean, curve.class_se);
  return curve;
}

}  // namespace cftwin

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cftwin/twin.hpp"

namespace cftwin {

/// Trials run in a conditional twin: the natural value of every target I_j,
/// the acted value of its copy I_j', and the outcome. Values are actual domain
/// values, not indices.
struct TrialLog {
  struct Row {
    std::vector<int> natural;
    std::vector<int> acted;
    int outcome = 0;
  };

  std::vector<std::string> natural_names;  // I_j
  std::vector<std::string> acted_names;    // I_j'
  std::string outcome_name;
  std::vector<std::vector<int>> natural_domains;
  std::vector<int> outcome_domain;
  std::vector<Row> rows;

  /// Header "natural_<I>,...,acted_<I'>,...,y"; one line per trial.
  std::string to_csv() const;
  /// Domains are taken as the sorted distinct values seen in each column.
  static TrialLog from_csv(const std::string& text);
};

struct EstimateReport {
  std::string estimand;
  std::optional<double> point;  // empty when the denominator is zero
  /// Counts behind a single ratio; both 0 for assembled estimates.
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
  std::optional<double> exact;
  std::optional<double> abs_error;
  /// For assembled estimators: cells that could not be estimated.
  std::vector<std::string> undefined_cells;
  bool partial = false;

  bool defined() const { return point.has_value(); }
  void attach_exact(double value);
};

/// n independent evaluations of the twin under `regime` (which must target
/// only primed copies), seeded per trial from (seed, trial index).
TrialLog simulate_trials(const TwinResult& tw, const Regime& regime, std::uint64_t n, std::uint64_t seed);

/// count{natural = a, Y = y} / count{natural = a} on a single-action log. If
/// `acted` is given, both counts additionally require the acted value.
EstimateReport estimate_eq1(const TrialLog& log, int a, int y, std::optional<int> acted = std::nullopt);

/// P(Y_{a'} = y | A = a) by enumeration over exogenous configurations.
/// Returns nullopt when P(A = a) = 0.
std::optional<double> exact_counterfactual_single(const Scm& scm, const std::string& action, int a,
                                                  int a_prime, int y);

/// P(Y_{x'} = y | X = x) for several actions at once (natural world on the
/// conditioning side, joint atomic intervention on the other).
std::optional<double> exact_counterfactual(const Scm& scm, const std::map<std::string, int>& observed,
                                           const std::map<std::string, int>& forced, int y);

/// The indicator ratio count{A=a, A'=a_act, B=b, B'=b_act, Y=y} / count{A=a,
/// A'=a_act, B=b, B'=b_act} on a two-action log. Not a consistent estimator of
/// P(Y_{a_act b_act} = y | a, b) unless the first action is left unchanged.
EstimateReport naive_multi_estimate(const TrialLog& log, int a, int b, int a_act, int b_act, int y);

/// Large-sample limit of naive_multi_estimate, computed from the twin's exact
/// joint under `regime`.
std::optional<double> naive_multi_limit(const TwinResult& tw, const Regime& regime, int a, int b, int a_act,
                                        int b_act, int y);

struct ThreeFactorOptions {
  int y = 1;
  /// Deterministic rho per natural column (natural value -> acted value).
  /// When set, the second and first factors only count rows whose acted
  /// values agree with it; when empty, no acted condition is applied.
  std::vector<std::map<int, int>> acted_maps;
  /// Laplace pseudo-count per cell (0 disables smoothing).
  double smoothing = 0.0;
};

/// Sum over (a, b) of  P^(Y=y | A=a, B_{a'}=b) * P^(B_{a'}=b | A=a) * P^(A=a)
/// using the three indicator ratios on a two-action log.
EstimateReport three_factor_estimate(const TrialLog& log, const ThreeFactorOptions& options = {});

/// P(Y_rho = y) by exact enumeration.
double exact_rho_value(const Scm& scm, const Regime& rho, int y);

}  // namespace cftwin

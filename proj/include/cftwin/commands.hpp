#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cftwin/bandit.hpp"
#include "cftwin/estimation.hpp"
#include "cftwin/fixtures.hpp"
#include "cftwin/model_io.hpp"
#include "cftwin/policy_opt.hpp"

namespace cftwin {

/// Whole-task entry points shared by the C API and the tests. Each returns a
/// JSON report; nothing here touches stdout.

nlohmann::ordered_json model_summary(const Scm& scm);

struct VerifyOptions {
  std::vector<std::string> targets;
  /// flip | identity | const:<v> | A=..,B=.. | <file>.json | random:N
  std::string policies = "random:20";
  ArithmeticMode mode = ArithmeticMode::Exact;
  std::uint64_t seed = 1;
  /// Verify against this twin instead of building one.
  std::optional<Scm> twin;
  std::uint64_t budget = kDefaultEnumerationBudget;
};

struct VerifyOutcome {
  nlohmann::ordered_json report;
  bool all_passed = true;
};

VerifyOutcome run_verify(const Scm& scm, const VerifyOptions& options);

enum class EstimatorKind { Eq1, Naive, ThreeFactor };
EstimatorKind parse_estimator(const std::string& text);

struct EstimateOptions {
  /// Targets of rho; when empty, taken from the model's metadata.
  std::vector<std::string> targets;
  std::string rho = "flip";
  EstimatorKind estimator = EstimatorKind::Eq1;
  std::uint64_t n = 100000;
  std::uint64_t seed = 1;
  int y = 1;
  double smoothing = 0.0;
  /// The model already is a conditional twin over `targets`.
  bool model_is_twin = false;
};

struct EstimateOutcome {
  nlohmann::ordered_json report;
  TrialLog log;
};

EstimateOutcome run_estimate(const Scm& scm, const EstimateOptions& options);

nlohmann::ordered_json run_optimize(const Scm& scm, const std::vector<std::string>& targets,
                                    std::uint64_t budget = kDefaultSearchBudget);

struct BanditOptions {
  AgentKind agent = AgentKind::DoThompson;
  std::string action;
  std::uint64_t horizon = 10000;
  std::uint64_t seeds = 20;
  std::uint64_t seed = 1;  // run k uses seed + k
  bool exposes_intuition = true;
};

struct BanditOutcome {
  std::vector<RunResult> runs;
  RegretCurve curve;
  nlohmann::ordered_json summary;
};

BanditOutcome run_bandit(const Scm& scm, const BanditOptions& options);

}  // namespace cftwin

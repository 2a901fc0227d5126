#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cftwin/model_io.hpp"

namespace cftwin {

/// A bundled model with the golden values recorded in its metadata.
struct Fixture {
  std::string name;
  Scm scm;
  /// Default intervention targets (empty when the fixture has none).
  std::vector<std::string> targets;
  /// Single action for the bandit and single-action estimators, if any.
  std::string action;
  /// True when the model already is a conditional twin over `targets`.
  bool is_twin = false;
  std::map<std::string, double> golden;
  nlohmann::ordered_json metadata;
};

/// FIX-H, FIX-HC, FIX-G, FIX-G2, FIX-NULL.
std::vector<std::string> fixture_names();

/// Loads a bundled fixture and recomputes every golden value by exact
/// enumeration; a mismatch raises Error(Validation). Unknown names raise
/// Error(Lookup).
Fixture load_fixture(std::string_view name);

/// The fixture's JSON text as shipped.
std::string_view fixture_text(std::string_view name);

/// Targets, action and twin flag recorded in a model's metadata, if any.
std::vector<std::string> metadata_targets(const nlohmann::ordered_json& metadata);
std::string metadata_action(const nlohmann::ordered_json& metadata);
bool metadata_twin(const nlohmann::ordered_json& metadata);

/// Golden quantity `key` recomputed for a model with the given metadata.
/// Keys:
///   observational_value, rho_star_value, sigma_star_value,
///   rho_empty_star_value, pi_star_value, pi_empty_star_value,
///   vo[<I>], do_value[<v>], ett[<a>-><a'>], flip_rho_value,
///   cf_exact, naive_limit
double compute_golden(const std::string& key, const Scm& scm, const nlohmann::ordered_json& metadata);

}  // namespace cftwin

#include "cftwin/fixtures.hpp"

#include <cmath>

#include "cftwin/error.hpp"
#include "cftwin/estimation.hpp"
#include "cftwin/policy_opt.hpp"

namespace cftwin {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_fixtures();
}

using nlohmann::ordered_json;

namespace {

constexpr double kGoldenTolerance = 1e-12;

}  // namespace

std::vector<std::string> metadata_targets(const ordered_json& meta) {
  std::vector<std::string> out;
  if (meta.is_object() && meta.contains("targets"))
    for (const auto& t : meta["targets"]) out.push_back(t.get<std::string>());
  return out;
}

std::string metadata_action(const ordered_json& meta) {
  if (meta.is_object() && meta.contains("action") && meta["action"].is_string()) return meta["action"].get<std::string>();
  return {};
}

bool metadata_twin(const ordered_json& meta) {
  return meta.is_object() && meta.contains("twin") && meta["twin"].is_boolean() && meta["twin"].get<bool>();
}

namespace {

/// Text between the brackets of "name[inner]".
std::string bracketed(const std::string& key, std::size_t open) { return key.substr(open + 1, key.size() - open - 2); }

Regime flip_all(const Scm& scm, const std::vector<std::string>& targets) {
  std::map<std::string, Policy> pols;
  for (const auto& t : targets) pols.emplace(t, Policy::flip(scm.domain_size(scm.id(t))));
  return make_rho(scm, pols);
}

}  // namespace

double compute_golden(const std::string& key, const Scm& scm, const ordered_json& meta) {
  const auto targets = metadata_targets(meta);
  const std::string action = metadata_action(meta);
  const bool twin = metadata_twin(meta);
  auto twin_result = [&] { return twin ? twin_from_model(scm, targets) : conditional_twin(scm, targets); };
  auto need_plain = [&] {
    if (twin) throw Error(ErrorKind::Validation, "golden '" + key + "' is not defined on a twin fixture");
  };

  if (key == "observational_value") return expected_reward(scm, Regime());
  if (key == "rho_star_value") return need_plain(), optimize_rho(scm, targets).value;
  if (key == "sigma_star_value") return need_plain(), optimize_sigma(scm, targets).value;
  if (key == "rho_empty_star_value") return need_plain(), optimize_rho_empty(scm, targets).value;
  if (key == "pi_star_value" || key == "pi_empty_star_value") {
    const TwinResult tw = twin_result();
    return optimize_pi(tw, std::vector<bool>(targets.size(), key == "pi_star_value")).value;
  }
  if (key == "flip_rho_value") return need_plain(), exact_rho_value(scm, flip_all(scm, targets), 1);

  const auto open = key.find('[');
  if (open != std::string::npos && key.back() == ']') {
    const std::string head = key.substr(0, open);
    const std::string inner = bracketed(key, open);
    if (head == "vo") return value_of_observation(twin_result(), inner);
    if (head == "do_value") {
      need_plain();
      const NodeId a = scm.id(action);
      return expected_reward(scm, Regime(scm, {Intervention::atomic(a, scm.value_index(a, std::stoi(inner)))}));
    }
    if (head == "ett") {
      need_plain();
      const auto arrow = inner.find("->");
      if (arrow == std::string::npos) throw Error(ErrorKind::Validation, "golden key '" + key + "' needs a->b");
      auto v = exact_counterfactual_single(scm, action, std::stoi(inner.substr(0, arrow)),
                                           std::stoi(inner.substr(arrow + 2)), 1);
      if (!v) throw Error(ErrorKind::Validation, "golden '" + key + "' conditions on a zero-probability event");
      return *v;
    }
  }

  if (key == "cf_exact" || key == "naive_limit") {
    need_plain();
    if (targets.size() != 2 || !meta.contains("naive_cell"))
      throw Error(ErrorKind::Validation, "golden '" + key + "' needs two targets and a naive_cell");
    const auto& c = meta["naive_cell"];
    const int a = c["a"], b = c["b"], a_act = c["a_act"], b_act = c["b_act"], y = c["y"];
    std::optional<double> v;
    if (key == "cf_exact") {
      v = exact_counterfactual(scm, {{targets[0], a}, {targets[1], b}}, {{targets[0], a_act}, {targets[1], b_act}}, y);
    } else {
      const TwinResult tw = conditional_twin(scm, targets);
      v = naive_multi_limit(tw, lift_policy(tw, scm, flip_all(scm, targets)), a, b, a_act, b_act, y);
    }
    if (!v) throw Error(ErrorKind::Validation, "golden '" + key + "' conditions on a zero-probability event");
    return *v;
  }
  throw Error(ErrorKind::Validation, "unknown golden key '" + key + "'");
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : detail::embedded_fixtures()) out.emplace_back(name);
  return out;
}

std::string_view fixture_text(std::string_view name) {
  for (const auto& [n, text] : detail::embedded_fixtures())
    if (n == name) return text;
  std::string known;
  for (const auto& n : fixture_names()) known += (known.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::Lookup, "unknown fixture '" + std::string(name) + "' (known: " + known + ")");
}

Fixture load_fixture(std::string_view name) {
  ModelFile file = parse_model(std::string(fixture_text(name)));
  Fixture fx{std::string(name), std::move(file.scm), {}, {}, false, {}, std::move(file.metadata)};
  fx.targets = metadata_targets(fx.metadata);
  fx.action = metadata_action(fx.metadata);
  fx.is_twin = metadata_twin(fx.metadata);
  if (fx.metadata.is_object() && fx.metadata.contains("golden")) {
    for (const auto& [key, value] : fx.metadata["golden"].items()) {
      const double expected = value.get<double>();
      const double actual = compute_golden(key, fx.scm, fx.metadata);
      if (std::abs(actual - expected) > kGoldenTolerance)
        throw Error(ErrorKind::Validation, "fixture " + fx.name + ": golden '" + key + "' is " +
                                               format_number(expected) + " but recomputes to " +
                                               format_number(actual));
      fx.golden.emplace(key, expected);
    }
  }
  return fx;
}

}  // namespace cftwin

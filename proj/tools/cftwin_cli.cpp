#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "cftwin/cftwin.h"

using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitBudget = 2;

/// Thrown when a library call fails; carries the exit code to use.
struct Failure {
  int code;
};

int exit_code(cft_status s) { return s == CFT_ERR_BUDGET ? kExitBudget : kExitFailure; }

void check(cft_status s) {
  if (s == CFT_OK) return;
  std::cerr << "error: " << cft_last_error() << "\n";
  throw Failure{exit_code(s)};
}

struct CString {
  char* p = nullptr;
  ~CString() { cft_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

using ModelPtr = std::unique_ptr<cft_model, decltype(&cft_model_free)>;

/// A model argument is a file path or, when no such file exists, the name of
/// a bundled fixture.
ModelPtr open_model(const std::string& arg) {
  cft_model* m = nullptr;
  if (!std::filesystem::exists(arg) && arg.rfind("FIX-", 0) == 0)
    check(cft_model_load_fixture(arg.c_str(), &m));
  else
    check(cft_model_load_file(arg.c_str(), &m));
  return ModelPtr(m, cft_model_free);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) {
    std::cerr << "error: cannot write '" << path << "'\n";
    throw Failure{kExitFailure};
  }
}

std::string show(const ordered_json& v) {
  if (v.is_null()) return "undefined";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v.get<double>());
    return buf;
  }
  return v.dump();
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& path) {
  auto model = open_model(path);
  CString summary;
  check(cft_model_summary(model.get(), &summary.p));
  const auto j = ordered_json::parse(summary.str());
  std::cout << "valid: " << j["variables"].size() << " endogenous, " << j["exogenous"].size() << " exogenous, "
            << j["edges"].size() << " edges, " << j["exogenous_support"] << " exogenous configurations\n";
  for (const auto& v : j["variables"]) {
    std::cout << "  " << v["name"].get<std::string>() << " " << v["domain"].dump() << " <-";
    for (const auto& p : v["parents"]) std::cout << " " << p.get<std::string>();
    std::cout << "\n";
  }
  for (const auto& v : j["exogenous"])
    std::cout << "  " << v["name"].get<std::string>() << " " << v["domain"].dump() << " (exogenous)\n";
  std::cout << "order:";
  for (const auto& n : j["topological_order"]) std::cout << " " << n.get<std::string>();
  std::cout << "\nreward: " << j["reward"].get<std::string>() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- twin

int cmd_twin(const std::string& path, const std::optional<std::string>& targets, const std::string& out) {
  auto model = open_model(path);
  cft_twin* raw = nullptr;
  check(cft_twin_build(model.get(), targets ? targets->c_str() : nullptr, &raw));
  std::unique_ptr<cft_twin, decltype(&cft_twin_free)> twin(raw, cft_twin_free);
  cft_model* derived_raw = nullptr;
  check(cft_twin_model(twin.get(), &derived_raw));
  ModelPtr derived(derived_raw, cft_model_free);
  CString json, map;
  check(cft_model_to_json(derived.get(), &json.p));
  check(cft_twin_copy_map(twin.get(), &map.p));

  std::ostream& info = out.empty() ? std::cerr : std::cout;
  const auto pairs = ordered_json::parse(map.str());
  if (pairs.empty()) info << "no targets: model returned unchanged\n";
  for (const auto& p : pairs) info << p[0].get<std::string>() << " -> " << p[1].get<std::string>() << "\n";
  if (out.empty())
    std::cout << json.str();
  else
    write_file(out, json.str());
  return kExitOk;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const std::string& path, const std::optional<std::string>& targets, const std::string& policies,
               const std::string& mode, std::uint64_t seed, const std::string& twin_path, bool as_json) {
  auto model = open_model(path);
  std::optional<ModelPtr> twin;
  if (!twin_path.empty()) twin.emplace(open_model(twin_path));
  cft_verify_options opt{targets ? targets->c_str() : nullptr, policies.c_str(), mode == "exact" ? 1 : 0, seed,
                         twin ? twin->get() : nullptr};
  CString report;
  int all_passed = 0;
  check(cft_verify(model.get(), &opt, &report.p, &all_passed));
  const auto j = ordered_json::parse(report.str());
  if (as_json) {
    std::cout << j.dump(2) << "\n";
  } else if (j["vacuous"].get<bool>()) {
    std::cout << "no targets: nothing to verify (pass)\n";
  } else {
    std::cout << "mode " << j["mode"].get<std::string>() << ", " << j["results"].size() << " policies\n";
    std::cout << "  #  lemma1  theorem1  policy\n";
    for (const auto& r : j["results"]) {
      char line[64];
      std::snprintf(line, sizeof line, "%3d  %-6s  %-8s  ", r["index"].get<int>(), r["lemma1"].get<bool>() ? "pass" : "FAIL",
                    r["theorem1"].get<bool>() ? "pass" : "FAIL");
      std::cout << line << r["policy"].get<std::string>() << "\n";
      for (const auto& d : r["differences"])
        std::cout << "       " << d["check"].get<std::string>() << " differs at " << d["cell"].dump() << ": "
                  << d["lhs"].get<std::string>() << " vs " << d["rhs"].get<std::string>() << "\n";
    }
    std::cout << (all_passed ? "all passed\n" : "FAILED\n");
  }
  return all_passed ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- estimate

void print_cell(const ordered_json& c) {
  std::cout << "  " << c["estimand"].get<std::string>() << "\n"
            << "    estimate " << show(c["point"]);
  if (c["denominator"].get<std::uint64_t>() > 0 || c["point"].is_null())
    std::cout << " (" << c["numerator"] << "/" << c["denominator"] << ")";
  std::cout << "  exact " << show(c["exact"]) << "  abs error " << show(c["abs_error"]) << "\n";
  if (c.contains("cf_exact"))
    std::cout << "    exact two-action counterfactual " << show(c["cf_exact"]) << "  naive large-sample limit "
              << show(c["naive_limit"]) << "  gap " << show(c["limit_gap"]) << "\n";
  if (c.contains("undefined_cells") && !c["undefined_cells"].empty()) {
    std::cout << "    undefined cells:";
    for (const auto& u : c["undefined_cells"]) std::cout << " " << u.get<std::string>();
    std::cout << "\n";
  }
  if (c.value("partial", false)) std::cout << "    (partial: some cells could not be estimated)\n";
}

int cmd_estimate(const std::string& path, const std::optional<std::string>& targets, const std::string& rho,
                 const std::string& estimator, std::uint64_t n, std::uint64_t seed, int y, double smoothing,
                 const std::string& out, bool as_json) {
  auto model = open_model(path);
  cft_estimate_options opt{targets ? targets->c_str() : nullptr, rho.c_str(), estimator.c_str(), n, seed, y,
                           smoothing};
  CString report, csv;
  check(cft_estimate(model.get(), &opt, &report.p, out.empty() ? nullptr : &csv.p));
  if (!out.empty()) write_file(out, csv.str());
  const auto j = ordered_json::parse(report.str());
  if (as_json) {
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  std::cout << "estimator " << j["estimator"].get<std::string>() << ", rho " << j["rho"].get<std::string>() << ", n "
            << j["n"] << ", seed " << j["seed"] << "\n";
  for (const auto& c : j["cells"]) print_cell(c);
  std::cout << "overall\n";
  print_cell(j["overall"]);
  return kExitOk;
}

// ---------------------------------------------------------------- optimize

int cmd_optimize(const std::string& path, const std::optional<std::string>& targets, std::uint64_t budget) {
  auto model = open_model(path);
  CString report;
  check(cft_optimize(model.get(), targets ? targets->c_str() : nullptr, budget, &report.p));
  std::cout << report.str() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- bandit

int cmd_bandit(const std::string& path, const std::string& agent, const std::string& action, std::uint64_t horizon,
               std::uint64_t seeds, std::uint64_t seed, bool hide_intuition, const std::string& out,
               const std::string& runs_dir) {
  auto model = open_model(path);
  cft_bandit_options opt{agent.c_str(), action.empty() ? nullptr : action.c_str(), horizon, seeds, seed,
                         hide_intuition ? 0 : 1};
  cft_bandit_result* raw = nullptr;
  check(cft_bandit(model.get(), &opt, &raw));
  std::unique_ptr<cft_bandit_result, decltype(&cft_bandit_free)> result(raw, cft_bandit_free);
  CString curve, summary;
  check(cft_bandit_curve_csv(result.get(), &curve.p));
  check(cft_bandit_summary(result.get(), &summary.p));
  if (!runs_dir.empty()) {
    std::filesystem::create_directories(runs_dir);
    for (std::uint64_t k = 0; k < cft_bandit_run_count(result.get()); ++k) {
      CString run;
      check(cft_bandit_run_csv(result.get(), k, &run.p));
      write_file(runs_dir + "/run_" + std::to_string(k) + ".csv", run.str());
    }
  }
  if (out.empty()) {
    std::cout << curve.str();
  } else {
    write_file(out, curve.str());
    std::cout << summary.str() << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- fixture

int cmd_fixture_list() {
  CString names;
  check(cft_fixture_names(&names.p));
  std::stringstream ss(names.str());
  std::string name;
  while (std::getline(ss, name, ',')) std::cout << name << "\n";
  return kExitOk;
}

int cmd_fixture_dump(const std::string& name, const std::string& out) {
  CString text;
  check(cft_fixture_json(name.c_str(), &text.p));
  if (out.empty())
    std::cout << text.str();
  else
    write_file(out, text.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual interventions and conditional twins on discrete structural causal models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cft_version());

  std::string model_path;
  std::optional<std::string> targets;
  std::string out;
  std::uint64_t seed = 1;
  bool as_json = false;

  auto* validate = app.add_subcommand("validate", "Load a model and print its structure");
  validate->add_option("model", model_path, "Model file or bundled fixture name")->required();

  auto* twin = app.add_subcommand("twin", "Build the conditional twin over the given targets");
  twin->add_option("model", model_path, "Model file or bundled fixture name")->required();
  twin->add_option("--targets", targets, "Comma-separated targets, ancestors first (default: from metadata)");
  twin->add_option("--out", out, "Write the twin model here instead of stdout");

  std::string policies = "random:20", mode = "exact", twin_path;
  auto* verify = app.add_subcommand("verify", "Check that the twin reproduces the counterfactual regime exactly");
  verify->add_option("model", model_path, "Model file or bundled fixture name")->required();
  verify->add_option("--targets", targets, "Comma-separated targets (default: from metadata)");
  verify->add_option("--policies", policies, "flip | identity | const:<v> | A=..,B=.. | file.json | random:N")
      ->capture_default_str();
  verify->add_option("--mode", mode, "Arithmetic")->check(CLI::IsMember({"exact", "float"}))->capture_default_str();
  verify->add_option("--seed", seed, "Seed for random policies")->capture_default_str();
  verify->add_option("--twin", twin_path, "Verify against this twin model instead of building one");
  verify->add_flag("--json", as_json, "Print the JSON report");

  std::string rho = "flip", estimator = "eq1";
  std::uint64_t n = 100000;
  int y = 1;
  double smoothing = 0.0;
  auto* estimate = app.add_subcommand("estimate", "Simulate trials on the twin and run an estimator");
  estimate->add_option("model", model_path, "Model file or bundled fixture name")->required();
  estimate->add_option("--targets", targets, "Comma-separated targets (default: from metadata)");
  estimate->add_option("--rho", rho, "flip | identity | const:<v> | A=..,B=.. | file.json")->capture_default_str();
  estimate->add_option("--estimator", estimator, "Estimator")
      ->check(CLI::IsMember({"eq1", "naive", "three-factor"}))
      ->capture_default_str();
  estimate->add_option("--n", n, "Number of trials")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  estimate->add_option("--seed", seed, "Seed")->capture_default_str();
  estimate->add_option("--y", y, "Outcome value of interest")->capture_default_str();
  estimate->add_option("--smoothing", smoothing, "Laplace pseudo-count for the three-factor estimator")
      ->check(CLI::NonNegativeNumber);
  estimate->add_option("--out", out, "Write the trial log as CSV");
  estimate->add_flag("--json", as_json, "Print the JSON report");

  std::uint64_t budget = 0;
  auto* optimize = app.add_subcommand("optimize", "Exhaustive policy search and observation values");
  optimize->add_option("model", model_path, "Model file or bundled fixture name")->required();
  optimize->add_option("--targets", targets, "Comma-separated targets (default: from metadata)");
  optimize->add_option("--budget", budget, "Maximum number of candidate policies (0: default)");

  std::string agent = "do-ts", action, runs_dir;
  std::uint64_t horizon = 10000, seeds = 20;
  bool hide_intuition = false;
  auto* bandit = app.add_subcommand("bandit", "Run seeded bandit episodes and print the regret curve");
  bandit->add_option("model", model_path, "Model file or bundled fixture name")->required();
  bandit->add_option("--agent", agent, "Agent")
      ->check(CLI::IsMember({"do-ucb", "do-ts", "cf-ts", "uniform"}))
      ->capture_default_str();
  bandit->add_option("--action", action, "Action variable (default: from metadata)");
  bandit->add_option("--horizon", horizon, "Rounds per episode")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  bandit->add_option("--seeds", seeds, "Number of episodes")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  bandit->add_option("--seed", seed, "Seed of the first episode (episode k uses seed + k)")->capture_default_str();
  bandit->add_flag("--no-intuition", hide_intuition, "Do not reveal the natural action value to the agent");
  bandit->add_option("--out", out, "Write the regret curve here and print the summary");
  bandit->add_option("--runs-dir", runs_dir, "Also write one CSV per episode into this directory");

  std::string fixture_name;
  auto* fixture = app.add_subcommand("fixture", "Bundled fixtures");
  fixture->require_subcommand(1);
  auto* fixture_list = fixture->add_subcommand("list", "List fixture names");
  auto* fixture_dump = fixture->add_subcommand("dump", "Print a fixture's model file");
  fixture_dump->add_option("name", fixture_name, "Fixture name")->required();
  fixture_dump->add_option("--out", out, "Write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*validate) return cmd_validate(model_path);
    if (*twin) return cmd_twin(model_path, targets, out);
    if (*verify) return cmd_verify(model_path, targets, policies, mode, seed, twin_path, as_json);
    if (*estimate) return cmd_estimate(model_path, targets, rho, estimator, n, seed, y, smoothing, out, as_json);
    if (*optimize) return cmd_optimize(model_path, targets, budget);
    if (*bandit)
      return cmd_bandit(model_path, agent, action, horizon, seeds, seed, hide_intuition, out, runs_dir);
    if (*fixture_list) return cmd_fixture_list();
    if (*fixture_dump) return cmd_fixture_dump(fixture_name, out);
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

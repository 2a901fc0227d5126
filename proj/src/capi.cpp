#include "cftwin/cftwin.h"

#include <cstring>
#include <functional>
#include <new>
#include <string>

#include "cftwin/commands.hpp"
#include "cftwin/error.hpp"
#include "cftwin/fixtures.hpp"

struct cft_model {
  cftwin::ModelFile file;
};

struct cft_twin {
  cftwin::TwinResult result;
};

struct cft_bandit_result {
  cftwin::BanditOutcome outcome;
};

namespace {

thread_local std::string last_error;

cft_status status_of(cftwin::ErrorKind kind) {
  using cftwin::ErrorKind;
  switch (kind) {
    case ErrorKind::Structural:
    case ErrorKind::Syntax:
    case ErrorKind::Domain:
    case ErrorKind::Validation: return CFT_ERR_VALIDATION;
    case ErrorKind::Budget: return CFT_ERR_BUDGET;
    case ErrorKind::Argument: return CFT_ERR_ARGUMENT;
    case ErrorKind::Io: return CFT_ERR_IO;
    case ErrorKind::Lookup: return CFT_ERR_LOOKUP;
    case ErrorKind::Config: return CFT_ERR_CONFIG;
  }
  return CFT_ERR_INTERNAL;
}

template <class F>
cft_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return CFT_OK;
  } catch (const cftwin::Error& e) {
    last_error = std::string(cftwin::to_string(e.kind())) + " error: " + e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CFT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = std::string("internal error: ") + e.what();
    return CFT_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw cftwin::Error(cftwin::ErrorKind::Argument, std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> targets_or_default(const cft_model* m, const char* targets) {
  if (targets) return cftwin::split_list(targets);
  return cftwin::metadata_targets(m->file.metadata);
}

cft_status load(cft_model** out, const std::function<cftwin::ModelFile()>& make) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = new cft_model{make()};
  });
}

}  // namespace

extern "C" {

const char* cft_version(void) { return "0.1.0"; }

const char* cft_last_error(void) { return last_error.c_str(); }

const char* cft_status_name(cft_status status) {
  switch (status) {
    case CFT_OK: return "ok";
    case CFT_ERR_VALIDATION: return "validation";
    case CFT_ERR_BUDGET: return "budget";
    case CFT_ERR_ARGUMENT: return "argument";
    case CFT_ERR_IO: return "io";
    case CFT_ERR_LOOKUP: return "lookup";
    case CFT_ERR_CONFIG: return "config";
    case CFT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void cft_string_free(char* s) { delete[] s; }

cft_status cft_model_load_file(const char* path, cft_model** out) {
  if (!path) return guarded([] { require(nullptr, "path"); });
  return load(out, [&] { return cftwin::load_model(path); });
}

cft_status cft_model_load_json(const char* text, cft_model** out) {
  if (!text) return guarded([] { require(nullptr, "text"); });
  return load(out, [&] { return cftwin::parse_model(text); });
}

cft_status cft_model_load_fixture(const char* name, cft_model** out) {
  if (!name) return guarded([] { require(nullptr, "name"); });
  return load(out, [&] {
    cftwin::Fixture fx = cftwin::load_fixture(name);
    return cftwin::ModelFile{std::move(fx.scm), std::move(fx.metadata)};
  });
}

void cft_model_free(cft_model* model) { delete model; }

cft_status cft_model_to_json(const cft_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = dup(cftwin::dump_model(model->file.scm, model->file.metadata));
  });
}

cft_status cft_model_summary(const cft_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = dup(cftwin::model_summary(model->file.scm).dump(2));
  });
}

cft_status cft_model_metadata(const cft_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = dup(model->file.metadata.dump(2));
  });
}

cft_status cft_model_expected_reward(const cft_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = cftwin::expected_reward(model->file.scm, cftwin::Regime());
  });
}

cft_status cft_fixture_names(char** out) {
  return guarded([&] {
    require(out, "out");
    std::string s;
    for (const auto& n : cftwin::fixture_names()) s += (s.empty() ? "" : ",") + n;
    *out = dup(s);
  });
}

cft_status cft_fixture_json(const char* name, char** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = dup(std::string(cftwin::fixture_text(name)));
  });
}

cft_status cft_twin_build(const cft_model* model, const char* targets, cft_twin** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = nullptr;
    const auto names = targets_or_default(model, targets);
    *out = new cft_twin{cftwin::conditional_twin(model->file.scm, names)};
  });
}

cft_status cft_twin_model(const cft_twin* twin, cft_model** out) {
  return guarded([&] {
    require(twin, "twin");
    require(out, "out");
    nlohmann::ordered_json meta = nullptr;
    if (!twin->result.copy_map.empty()) {
      meta = nlohmann::ordered_json::object();
      meta["twin"] = true;
      meta["targets"] = twin->result.targets();
    }
    *out = new cft_model{{twin->result.derived, meta}};
  });
}

cft_status cft_twin_copy_map(const cft_twin* twin, char** out) {
  return guarded([&] {
    require(twin, "twin");
    require(out, "out");
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& [from, to] : twin->result.copy_map) j.push_back({from, to});
    *out = dup(j.dump());
  });
}

void cft_twin_free(cft_twin* twin) { delete twin; }

cft_status cft_verify(const cft_model* model, const cft_verify_options* options, char** report, int* all_passed) {
  return guarded([&] {
    require(model, "model");
    require(options, "options");
    require(report, "report");
    cftwin::VerifyOptions opt;
    opt.targets = targets_or_default(model, options->targets);
    if (options->policies) opt.policies = options->policies;
    opt.mode = options->exact ? cftwin::ArithmeticMode::Exact : cftwin::ArithmeticMode::Float;
    opt.seed = options->seed;
    if (options->twin) opt.twin = options->twin->file.scm;
    const auto outcome = cftwin::run_verify(model->file.scm, opt);
    *report = dup(outcome.report.dump(2));
    if (all_passed) *all_passed = outcome.all_passed ? 1 : 0;
  });
}

cft_status cft_estimate(const cft_model* model, const cft_estimate_options* options, char** report,
                        char** trials_csv) {
  return guarded([&] {
    require(model, "model");
    require(options, "options");
    cftwin::EstimateOptions opt;
    opt.targets = targets_or_default(model, options->targets);
    if (options->rho) opt.rho = options->rho;
    if (options->estimator) opt.estimator = cftwin::parse_estimator(options->estimator);
    opt.n = options->n;
    opt.seed = options->seed;
    opt.y = options->y;
    opt.smoothing = options->smoothing;
    opt.model_is_twin = cftwin::metadata_twin(model->file.metadata);
    const auto outcome = cftwin::run_estimate(model->file.scm, opt);
    if (report) *report = dup(outcome.report.dump(2));
    if (trials_csv) *trials_csv = dup(outcome.log.to_csv());
  });
}

cft_status cft_optimize(const cft_model* model, const char* targets, uint64_t budget, char** report) {
  return guarded([&] {
    require(model, "model");
    require(report, "report");
    if (cftwin::metadata_twin(model->file.metadata))
      throw cftwin::Error(cftwin::ErrorKind::Argument, "optimize expects the original model, not a twin");
    const auto names = targets_or_default(model, targets);
    const auto j = cftwin::run_optimize(model->file.scm, names, budget ? budget : cftwin::kDefaultSearchBudget);
    *report = dup(j.dump(2));
  });
}

cft_status cft_bandit(const cft_model* model, const cft_bandit_options* options, cft_bandit_result** out) {
  return guarded([&] {
    require(model, "model");
    require(options, "options");
    require(out, "out");
    *out = nullptr;
    cftwin::BanditOptions opt;
    if (options->agent) opt.agent = cftwin::parse_agent(options->agent);
    opt.action = options->action ? std::string(options->action) : cftwin::metadata_action(model->file.metadata);
    opt.horizon = options->horizon;
    opt.seeds = options->seeds;
    opt.seed = options->seed;
    opt.exposes_intuition = options->exposes_intuition != 0;
    *out = new cft_bandit_result{cftwin::run_bandit(model->file.scm, opt)};
  });
}

cft_status cft_bandit_curve_csv(const cft_bandit_result* result, char** out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    *out = dup(result->outcome.curve.to_csv());
  });
}

cft_status cft_bandit_summary(const cft_bandit_result* result, char** out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    *out = dup(result->outcome.summary.dump(2));
  });
}

uint64_t cft_bandit_run_count(const cft_bandit_result* result) { return result ? result->outcome.runs.size() : 0; }

cft_status cft_bandit_run_csv(const cft_bandit_result* result, uint64_t index, char** out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    if (index >= result->outcome.runs.size())
      throw cftwin::Error(cftwin::ErrorKind::Argument, "run index out of range");
    *out = dup(result->outcome.runs[index].to_csv());
  });
}

void cft_bandit_free(cft_bandit_result* result) { delete result; }

}  // extern "C"

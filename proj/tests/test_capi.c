/* Exercises the shared library through its C header only. */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "cftwin/cftwin.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static int contains(const char* s, const char* needle) { return s && strstr(s, needle) != NULL; }

int main(void) {
  cft_model* model = NULL;
  cft_model* twin_model = NULL;
  cft_twin* twin = NULL;
  cft_bandit_result* bandit = NULL;
  char* text = NULL;
  double value = -1;
  int passed = 0;

  EXPECT(strcmp(cft_version(), "") != 0);
  EXPECT(strcmp(cft_status_name(CFT_ERR_BUDGET), "budget") == 0);

  EXPECT(cft_fixture_names(&text) == CFT_OK);
  EXPECT(contains(text, "FIX-H,FIX-HC"));
  cft_string_free(text);

  EXPECT(cft_model_load_fixture("FIX-Q", &model) == CFT_ERR_LOOKUP);
  EXPECT(model == NULL);
  EXPECT(contains(cft_last_error(), "FIX-Q"));
  EXPECT(cft_model_load_json("{", &model) == CFT_ERR_VALIDATION);
  EXPECT(cft_model_load_file("/nonexistent.json", &model) == CFT_ERR_IO);
  EXPECT(cft_model_load_fixture(NULL, &model) == CFT_ERR_ARGUMENT);

  EXPECT(cft_model_load_fixture("FIX-H", &model) == CFT_OK);
  EXPECT(cft_model_expected_reward(model, &value) == CFT_OK);
  EXPECT(value == 0.0);
  EXPECT(cft_model_summary(model, &text) == CFT_OK);
  EXPECT(contains(text, "\"reward\": \"Y\""));
  cft_string_free(text);

  EXPECT(cft_model_to_json(model, &text) == CFT_OK);
  {
    cft_model* again = NULL;
    char* text2 = NULL;
    EXPECT(cft_model_load_json(text, &again) == CFT_OK);
    EXPECT(cft_model_to_json(again, &text2) == CFT_OK);
    EXPECT(text2 && strcmp(text, text2) == 0);
    cft_string_free(text2);
    cft_model_free(again);
  }
  cft_string_free(text);

  EXPECT(cft_twin_build(model, "A", &twin) == CFT_OK);
  EXPECT(cft_twin_copy_map(twin, &text) == CFT_OK);
  EXPECT(contains(text, "[[\"A\",\"A'\"]]"));
  cft_string_free(text);
  EXPECT(cft_twin_model(twin, &twin_model) == CFT_OK);
  {
    cft_twin* bad = NULL;
    EXPECT(cft_twin_build(model, "Y", &bad) != CFT_OK);
    EXPECT(bad == NULL);
    EXPECT(contains(cft_last_error(), "reward"));
  }

  {
    cft_verify_options v = {"A", "random:4", 1, 7, NULL};
    EXPECT(cft_verify(model, &v, &text, &passed) == CFT_OK);
    EXPECT(passed == 1);
    cft_string_free(text);
    v.twin = twin_model;
    EXPECT(cft_verify(model, &v, &text, &passed) == CFT_OK);
    EXPECT(passed == 1);
    cft_string_free(text);
  }

  {
    cft_estimate_options e = {NULL, "flip", "eq1", 1000, 3, 1, 0.0};
    char* csv = NULL;
    EXPECT(cft_estimate(model, &e, &text, &csv) == CFT_OK);
    EXPECT(contains(text, "\"estimator\": \"eq1\""));
    EXPECT(contains(csv, "natural_A,acted_A',y\n"));
    cft_string_free(text);
    cft_string_free(csv);
    e.n = 0;
    EXPECT(cft_estimate(model, &e, &text, NULL) == CFT_ERR_ARGUMENT);
  }

  EXPECT(cft_optimize(model, NULL, 0, &text) == CFT_OK);
  EXPECT(contains(text, "rho_star"));
  cft_string_free(text);
  EXPECT(cft_optimize(twin_model, NULL, 0, &text) == CFT_ERR_ARGUMENT);
  EXPECT(cft_optimize(model, NULL, 1, &text) == CFT_ERR_BUDGET);

  {
    cft_bandit_options b = {"cf-ts", NULL, 100, 2, 1, 1};
    EXPECT(cft_bandit(model, &b, &bandit) == CFT_OK);
    EXPECT(cft_bandit_run_count(bandit) == 2);
    EXPECT(cft_bandit_run_csv(bandit, 1, &text) == CFT_OK);
    EXPECT(contains(text, "round,natural,arm,reward,regret\n"));
    cft_string_free(text);
    EXPECT(cft_bandit_run_csv(bandit, 2, &text) == CFT_ERR_ARGUMENT);
    EXPECT(cft_bandit_curve_csv(bandit, &text) == CFT_OK);
    cft_string_free(text);
    EXPECT(cft_bandit_summary(bandit, &text) == CFT_OK);
    EXPECT(contains(text, "\"agent\": \"cf-ts\""));
    cft_string_free(text);
    cft_bandit_free(bandit);
    b.exposes_intuition = 0;
    bandit = NULL;
    EXPECT(cft_bandit(model, &b, &bandit) == CFT_ERR_CONFIG);
    EXPECT(bandit == NULL);
  }

  cft_twin_free(twin);
  cft_model_free(twin_model);
  cft_model_free(model);
  cft_model_free(NULL);

  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}

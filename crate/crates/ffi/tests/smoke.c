#include <stdio.h>
#include <string.h>

#include "cobord.h"

#define EXPECT(cond)                                             \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  CobordFgl *law = NULL;
  EXPECT(cobord_fgl_universal(3, &law) == COBORD_STATUS_OK);
  EXPECT(cobord_fgl_cap(law) == 4);
  char *json = NULL;
  EXPECT(cobord_fgl_to_json(law, &json) == COBORD_STATUS_OK);
  EXPECT(strstr(json, "a11*x*y") != NULL);
  cobord_string_free(json);
  cobord_fgl_free(law);

  EXPECT(cobord_hrr(2, 2, &json) == COBORD_STATUS_OK);
  EXPECT(strstr(json, "\"binomial\":\"6\"") != NULL);
  cobord_string_free(json);

  EXPECT(cobord_hrr(40, 0, &json) == COBORD_STATUS_INVALID_ARGUMENT);
  EXPECT(cobord_last_error_message() != NULL);

  CobordBudget budget = cobord_budget_default();
  EXPECT(budget.seed == 42 && budget.trials == 1000);
  budget.exhaustive_size = 2;
  budget.trials = 20;
  EXPECT(cobord_bivariant_check("a12", budget, COBORD_ENGINE_SKIPPED_PULLBACK, &json) ==
         COBORD_STATUS_VIOLATION);
  EXPECT(strstr(json, "counterexample") != NULL);
  cobord_string_free(json);

  puts("ok");
  return 0;
}

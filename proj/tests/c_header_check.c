/* Copyright 2026 The pdflow Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* pdflow.h from plain C: preset, check, read one regime name. */

#include <stdio.h>
#include <string.h>

#include "pdflow/pdflow.h"

int main(void) {
  pdflow_experiment* exp = NULL;
  pdflow_results* res = NULL;
  char regime[64];
  size_t count = 0;
  int rc = 1;

  if (pdflow_experiment_preset("example52", &exp) != PDFLOW_OK) goto done;
  if (pdflow_check(exp, &res) != PDFLOW_OK) goto done;
  if (pdflow_results_count(res, &count) != PDFLOW_OK || count != 4) goto done;
  if (pdflow_results_regime(res, 0, regime, sizeof regime, NULL) != PDFLOW_OK) goto done;
  printf("example52 member 0: %s\n", regime);
  rc = strcmp(regime, "Thm3.2(ii)") == 0 ? 0 : 1;

done:
  if (rc) fprintf(stderr, "c_header_check: %s\n", pdflow_last_error());
  pdflow_results_free(res);
  pdflow_experiment_free(exp);
  return rc;
}

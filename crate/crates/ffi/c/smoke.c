#include "tempsec.h"
#include <stdio.h>
int main(void) {
  const char *json = "{\"gamma\": 0.3, \"capacity\": 1, \"items\": [{\"value\": 5}, {\"value\": 4}, {\"value\": 6}]}";
  TsInstance *inst = NULL;
  if (tempsec_instance_from_json(json, &inst) != TsStatus_Ok) { printf("err %s\n", tempsec_last_error()); return 1; }
  double times[3] = {0.10, 0.25, 0.60}, opt = 0;
  TsStatus s = tempsec_opt_offline_exact(inst, times, 3, &opt);
  printf("status %d opt %g len %zu version %s\n", (int)s, opt, (size_t)tempsec_instance_len(inst), tempsec_version());
  tempsec_instance_free(inst);
  return 0;
}

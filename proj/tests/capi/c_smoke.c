/* Compiled as C: the public header must stay C-clean. */
#include <stdio.h>
#include <string.h>

#include "ponlab/ponlab.h"

int main(void) {
  ponlab_config* cfg = NULL;
  char hash[17];
  double km[2] = {5.0, 3.0};
  int rc;

  if (ponlab_config_create(&cfg) != PONLAB_OK) return 1;
  if (ponlab_config_hash(cfg, hash) != PONLAB_OK || strlen(hash) != 16) return 2;
  rc = ponlab_config_set_distances(cfg, km, 2);
  if (rc != PONLAB_ERR_INVALID_ARGUMENT || ponlab_last_error()[0] == '\0') return 3;
  if (strcmp(ponlab_status_name(rc), "invalid_argument") != 0) return 4;
  ponlab_config_destroy(cfg);
  printf("ponlab %s ok\n", ponlab_version());
  return 0;
}

#include <math.h>
#include <stdio.h>
#include "spt_qcnn.h"

#define CHECK(x)                                                                         \
  do {                                                                                   \
    SptStatus s_ = (x);                                                                  \
    if (s_ != SPT_STATUS_OK) {                                                           \
      char msg[256];                                                                     \
      spt_last_error_message(msg, sizeof msg);                                           \
      fprintf(stderr, "%s:%d: status %d: %s\n", __FILE__, __LINE__, (int)s_, msg);       \
      return 1;                                                                          \
    }                                                                                    \
  } while (0)

int main(void) {
  SptState *g = NULL;
  double s = 0.0, y = 0.0;
  CHECK(spt_ground_state(0.0, 0.0, 7, &g));
  CHECK(spt_state_string_order(g, &s));
  CHECK(spt_state_qcnn_output(g, &y));
  spt_state_free(g);
  if (fabs(s - 1.0) > 1e-10 || fabs(y - 1.0) > 1e-10) {
    fprintf(stderr, "cluster values %f %f\n", s, y);
    return 1;
  }

  SptMsop *m = NULL;
  CHECK(spt_msop_expand(1, &m));
  size_t terms = spt_msop_num_terms(m);
  spt_msop_free(m);

  if (spt_ground_state(0.0, 0.0, 1, &g) != SPT_STATUS_INVALID_ARGUMENT) return 1;
  printf("ok %s terms=%zu\n", spt_version(), terms);
  return 0;
}

/* Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any
 * failure. */
#include <stdio.h>

#include "belcal/belcal.h"

static void row(int id, const char* title, int pass, const char* detail, double seconds, void* user) {
  (void)user;
  printf("criterion %2d: %s  %s (%.2fs)\n    %s\n", id, pass ? "PASS" : "FAIL", title, seconds, detail);
  fflush(stdout);
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : BELCAL_THEORY_DIR;
  int all = 0;
  if (belcal_paper_table_run(dir, row, NULL, &all) != BELCAL_OK) {
    fprintf(stderr, "error: %s\n", belcal_last_error());
    return 2;
  }
  printf("%s\n", all ? "acceptance: all criteria passed" : "acceptance: FAILED");
  return all ? 0 : 1;
}

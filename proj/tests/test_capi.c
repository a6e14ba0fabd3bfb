/* Exercises the C interface from C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "belcal/belcal.h"

static int failures = 0;

#define CHECK(cond)                                               \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: CHECK(%s) failed\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static belcal_theory* load(const char* name) {
  char path[1024];
  snprintf(path, sizeof path, "%s/%s.bat", BELCAL_THEORY_DIR, name);
  belcal_theory* t = NULL;
  CHECK(belcal_theory_load_file(path, &t) == BELCAL_OK);
  return t;
}

static void test_theory(void) {
  belcal_theory* t = NULL;
  CHECK(belcal_theory_load_file("/nonexistent/x.bat", &t) == BELCAL_IO_ERROR);
  CHECK(t == NULL);
  CHECK(strstr(belcal_last_error(), "x.bat") != NULL);

  const char* bad = "theory t\nfluent h : real\ninit p = 1 +\n";
  CHECK(belcal_theory_parse(bad, strlen(bad), &t) == BELCAL_SYNTAX_ERROR);
  uint32_t line = 0, col = 0;
  belcal_last_error_span(&line, &col);
  CHECK(line == 4);

  const char* invalid = "theory t\nfluent w : {a, b}\ninit p = 1\naction s(z: {a, b}) sensing { w' = b }\n";
  CHECK(belcal_theory_parse(invalid, strlen(invalid), &t) == BELCAL_OK);
  CHECK(belcal_theory_has_errors(t));
  CHECK(belcal_theory_diagnostic_count(t) >= 1);
  int sev = -1;
  belcal_status code = BELCAL_OK;
  const char* msg = NULL;
  CHECK(belcal_theory_diagnostic(t, 0, &sev, &code, &line, &col, &msg) == BELCAL_OK);
  CHECK(sev == BELCAL_SEVERITY_ERROR);
  CHECK(code == BELCAL_VALIDATION_FAILED);
  CHECK(line == 4);
  CHECK(belcal_theory_diagnostic(t, 99, &sev, &code, &line, &col, &msg) == BELCAL_INVALID_ARGUMENT);
  belcal_theory_free(t);

  belcal_theory* r = load("robot1d");
  CHECK(strcmp(belcal_theory_name(r), "robot1d") == 0);
  CHECK(!belcal_theory_has_errors(r));
  CHECK(belcal_theory_digest(r) != 0);
  CHECK(strstr(belcal_theory_print(r), "action sonar") != NULL);
  belcal_theory_free(r);
  CHECK(strcmp(belcal_status_name(BELCAL_DEGENERATE_BELIEF), "DegenerateBelief") == 0);
  CHECK(strcmp(belcal_status_name(BELCAL_OK), "Ok") == 0);
}

static void test_queries(void) {
  belcal_theory* r = load("robot1d");
  belcal_query* q = NULL;
  CHECK(belcal_query_parse(r, "bel(h <= )", &q) == BELCAL_SYNTAX_ERROR);
  CHECK(q == NULL);
  CHECK(belcal_query_parse(r, "bel(h <= 9) after [sonar(5)] grid=1001", &q) == BELCAL_OK);
  CHECK(belcal_query_kind(q) == BELCAL_QUERY_BEL);

  belcal_config cfg;
  belcal_overrides flags;
  memset(&flags, 0, sizeof flags);
  CHECK(belcal_effective_config(r, q, NULL, NULL, &cfg) == BELCAL_OK);
  CHECK(cfg.quad_points_per_dim == 1001);
  CHECK(belcal_overrides_set(&flags, "grid", "3001") == BELCAL_OK);
  CHECK(belcal_overrides_set(&flags, "bogus", "1") == BELCAL_CONFIG_ERROR);
  CHECK(belcal_overrides_set(&flags, "samples", "x") == BELCAL_CONFIG_ERROR);
  CHECK(flags.mask == BELCAL_SET_GRID);
  CHECK(belcal_effective_config(r, q, NULL, &flags, &cfg) == BELCAL_OK);
  CHECK(cfg.quad_points_per_dim == 3001);

  belcal_result res;
  CHECK(belcal_bel(r, q, &cfg, &res) == BELCAL_OK);
  CHECK(fabs(res.value - 0.97) <= 0.01);
  CHECK(res.backend == BELCAL_BACKEND_QUAD);
  CHECK(!res.has_std_error);
  CHECK(res.points_per_dim == 3001);
  double oracle = 0;
  int method = -1;
  CHECK(belcal_oracle(r, q, &cfg, &oracle, &method) == BELCAL_OK);
  CHECK(method == BELCAL_ORACLE_BAYES);
  CHECK(fabs(oracle - res.value) <= 2e-3);
  int known = 0;
  CHECK(belcal_knows(r, q, &cfg, &known, NULL) == BELCAL_CONFIG_ERROR);
  belcal_query_free(q);

  CHECK(belcal_query_parse(r, "bel(h <= 9)", &q) == BELCAL_OK);
  belcal_config_default(&cfg);
  cfg.backend = BELCAL_BACKEND_MC;
  cfg.seed = 7;
  cfg.mc_samples = 20000;
  belcal_result a, b;
  CHECK(belcal_bel(r, q, &cfg, &a) == BELCAL_OK);
  cfg.threads = 3;
  CHECK(belcal_bel(r, q, &cfg, &b) == BELCAL_OK);
  CHECK(a.has_std_error && a.has_ess);
  CHECK(a.value == b.value);
  CHECK(fabs(a.value - 0.7) <= 3 * a.std_error);
  belcal_query_free(q);

  CHECK(belcal_query_parse(r, "bel(h > 0) after [sonar(-1)]", &q) == BELCAL_OK);
  belcal_config_default(&cfg);
  CHECK(belcal_bel(r, q, &cfg, &a) == BELCAL_DEGENERATE_BELIEF);
  CHECK(strstr(belcal_last_error(), "DegenerateBelief") != NULL);
  belcal_query_free(q);

  CHECK(belcal_query_parse(r, "knows(h >= 2)", &q) == BELCAL_OK);
  CHECK(belcal_knows(r, q, &cfg, &known, NULL) == BELCAL_OK);
  CHECK(known == 1);
  belcal_query_free(q);
  belcal_theory_free(r);
}

static void test_histogram(void) {
  belcal_theory* r = load("robot1d");
  belcal_query* q = NULL;
  CHECK(belcal_query_parse(r, "marginal h after [move(4)] range=0,8 bins=8", &q) == BELCAL_OK);
  belcal_config cfg;
  belcal_config_default(&cfg);
  belcal_histogram* h = NULL;
  CHECK(belcal_marginal(r, q, &cfg, &h) == BELCAL_OK);
  CHECK(belcal_histogram_bin_count(h) == 8);
  CHECK(belcal_histogram_atom_count(h) == 1);
  double v = -1, m = 0, lo = 0, hi = 0;
  CHECK(belcal_histogram_atom(h, 0, &v, &m) == BELCAL_OK);
  CHECK(v == 0.0);
  CHECK(fabs(m - 0.2) <= 1e-3);
  CHECK(belcal_histogram_bin(h, 7, &lo, &hi, &m) == BELCAL_OK);
  CHECK(lo == 7.0 && hi == 8.0);
  CHECK(fabs(belcal_histogram_total(h) - 1.0) <= 1e-6);
  const char* csv = belcal_histogram_csv(h);
  CHECK(strncmp(csv, "bin_lo,bin_hi,mass\n", 19) == 0);
  CHECK(strstr(csv, "\natom,0,0.") != NULL);
  CHECK(belcal_histogram_write_csv(h, "/nonexistent/dir/x.csv") == BELCAL_IO_ERROR);
  belcal_histogram_free(h);
  belcal_query_free(q);

  CHECK(belcal_query_parse(r, "marginal h range=4,6 bins=2", &q) == BELCAL_OK);
  CHECK(belcal_marginal(r, q, &cfg, &h) == BELCAL_OK);
  double below = 0, above = 0;
  belcal_histogram_outside(h, &below, &above);
  CHECK(fabs(below - 0.2) <= 1e-3 && fabs(above - 0.6) <= 1e-3);
  CHECK(strstr(belcal_histogram_csv(h), "-inf,4,") != NULL);
  CHECK(strstr(belcal_histogram_csv(h), "6,inf,") != NULL);
  belcal_histogram_free(h);
  belcal_query_free(q);
  belcal_theory_free(r);

  belcal_theory* w = load("window");
  CHECK(belcal_query_parse(w, "marginal win", &q) == BELCAL_OK);
  CHECK(belcal_marginal(w, q, &cfg, &h) == BELCAL_FINITE_FLUENT_MARGINAL);
  CHECK(h == NULL);
  belcal_query_free(q);
  belcal_theory_free(w);
}

static void test_null_arguments(void) {
  belcal_result res;
  CHECK(belcal_bel(NULL, NULL, NULL, &res) == BELCAL_INVALID_ARGUMENT);
  CHECK(belcal_theory_load_file(NULL, NULL) == BELCAL_INVALID_ARGUMENT);
  belcal_theory_free(NULL);
  belcal_query_free(NULL);
  belcal_histogram_free(NULL);
  CHECK(belcal_histogram_bin_count(NULL) == 0);
}

int main(void) {
  test_theory();
  test_queries();
  test_histogram();
  test_null_arguments();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}

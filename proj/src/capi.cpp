#include "belcal/belcal.h"

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "belcal/engine.hpp"
#include "belcal/oracle.hpp"
#include "belcal/paper_table.hpp"
#include "belcal/parser.hpp"

struct belcal_theory {
  belcal::TheorySpec spec;
  std::vector<belcal::Diagnostic> diagnostics;
  std::string printed;
};

struct belcal_query {
  belcal::Query query;
};

struct belcal_histogram {
  belcal::Histogram hist;
  std::string csv;
};

namespace {

using belcal::Error;
using belcal::ErrorCode;

static_assert(static_cast<int>(ErrorCode::IoError) + 1 == BELCAL_IO_ERROR, "status codes mirror ErrorCode");

thread_local std::string t_error;
thread_local belcal::SourceSpan t_span;
thread_local std::vector<std::string> t_notes;

belcal_status to_status(ErrorCode c) { return static_cast<belcal_status>(static_cast<int>(c) + 1); }

belcal_status fail(belcal_status s, std::string message, belcal::SourceSpan span = {}) {
  t_error = std::move(message);
  t_span = span;
  return s;
}

// Runs fn, translating exceptions into a status and thread-local message.
template <class Fn>
belcal_status guarded(Fn&& fn) {
  try {
    t_error.clear();
    t_span = {};
    fn();
    return BELCAL_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what(), e.span());
  } catch (const std::bad_alloc&) {
    return fail(BELCAL_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(BELCAL_INTERNAL_ERROR, e.what());
  }
}

belcal::EngineConfig from_c(const belcal_config& c) {
  belcal::EngineConfig e;
  e.backend = c.backend == BELCAL_BACKEND_MC ? belcal::Backend::MonteCarlo : belcal::Backend::Quad;
  e.mc_samples = c.mc_samples;
  e.seed = c.seed;
  e.quad_points_per_dim = c.quad_points_per_dim;
  e.gauss_truncation_sigmas = c.gauss_truncation_sigmas;
  e.max_quad_dims = c.max_quad_dims;
  e.equality_epsilon = c.equality_epsilon;
  e.max_quad_nodes = c.max_quad_nodes;
  e.atom_threshold = c.atom_threshold;
  e.threads = c.threads;
  return e;
}

belcal_config to_c(const belcal::EngineConfig& e) {
  belcal_config c{};
  c.backend = e.backend == belcal::Backend::MonteCarlo ? BELCAL_BACKEND_MC : BELCAL_BACKEND_QUAD;
  c.mc_samples = e.mc_samples;
  c.seed = e.seed;
  c.quad_points_per_dim = e.quad_points_per_dim;
  c.gauss_truncation_sigmas = e.gauss_truncation_sigmas;
  c.max_quad_dims = e.max_quad_dims;
  c.equality_epsilon = e.equality_epsilon;
  c.max_quad_nodes = e.max_quad_nodes;
  c.atom_threshold = e.atom_threshold;
  c.threads = e.threads;
  return c;
}

belcal::ConfigOverrides from_c(const belcal_overrides& o) {
  belcal::ConfigOverrides r;
  const belcal::EngineConfig v = from_c(o.values);
  if (o.mask & BELCAL_SET_BACKEND) r.backend = v.backend;
  if (o.mask & BELCAL_SET_SAMPLES) r.mc_samples = v.mc_samples;
  if (o.mask & BELCAL_SET_SEED) r.seed = v.seed;
  if (o.mask & BELCAL_SET_GRID) r.quad_points_per_dim = v.quad_points_per_dim;
  if (o.mask & BELCAL_SET_TRUNC_SIGMAS) r.gauss_truncation_sigmas = v.gauss_truncation_sigmas;
  if (o.mask & BELCAL_SET_MAX_DIMS) r.max_quad_dims = v.max_quad_dims;
  if (o.mask & BELCAL_SET_EPS) r.equality_epsilon = v.equality_epsilon;
  if (o.mask & BELCAL_SET_MAX_NODES) r.max_quad_nodes = v.max_quad_nodes;
  if (o.mask & BELCAL_SET_ATOM_THRESHOLD) r.atom_threshold = v.atom_threshold;
  if (o.mask & BELCAL_SET_THREADS) r.threads = v.threads;
  return r;
}

belcal_overrides to_c(const belcal::ConfigOverrides& r) {
  belcal_overrides o{};
  belcal::EngineConfig v;
  r.apply_to(v);
  o.values = to_c(v);
  if (r.backend) o.mask |= BELCAL_SET_BACKEND;
  if (r.mc_samples) o.mask |= BELCAL_SET_SAMPLES;
  if (r.seed) o.mask |= BELCAL_SET_SEED;
  if (r.quad_points_per_dim) o.mask |= BELCAL_SET_GRID;
  if (r.gauss_truncation_sigmas) o.mask |= BELCAL_SET_TRUNC_SIGMAS;
  if (r.max_quad_dims) o.mask |= BELCAL_SET_MAX_DIMS;
  if (r.equality_epsilon) o.mask |= BELCAL_SET_EPS;
  if (r.max_quad_nodes) o.mask |= BELCAL_SET_MAX_NODES;
  if (r.atom_threshold) o.mask |= BELCAL_SET_ATOM_THRESHOLD;
  if (r.threads) o.mask |= BELCAL_SET_THREADS;
  return o;
}

belcal_status make_theory(std::string_view text, std::string_view file, belcal_theory** out) {
  belcal::TheoryParse parsed = belcal::try_parse_theory(text);
  if (!parsed.spec) {
    const belcal::Diagnostic& d = parsed.diagnostics.front();
    return fail(to_status(d.code), belcal::format_diagnostic(file, d), d.span);
  }
  auto* t = new belcal_theory{std::move(*parsed.spec), std::move(parsed.diagnostics), {}};
  auto more = belcal::validate(t->spec);
  t->diagnostics.insert(t->diagnostics.end(), more.begin(), more.end());
  *out = t;
  return BELCAL_OK;
}

}  // namespace

extern "C" {

const char* belcal_version(void) { return "1.0.0"; }

const char* belcal_status_name(belcal_status status) {
  if (status == BELCAL_OK) return "Ok";
  if (status == BELCAL_INVALID_ARGUMENT) return "InvalidArgument";
  if (status == BELCAL_INTERNAL_ERROR) return "InternalError";
  if (status < BELCAL_SYNTAX_ERROR || status > BELCAL_IO_ERROR) return "Unknown";
  return belcal::to_string(static_cast<ErrorCode>(static_cast<int>(status) - 1)).data();
}

const char* belcal_last_error(void) { return t_error.c_str(); }

void belcal_last_error_span(uint32_t* line, uint32_t* column) {
  if (line) *line = t_span.line;
  if (column) *column = t_span.column;
}

void belcal_config_default(belcal_config* out) {
  if (out) *out = to_c(belcal::EngineConfig{});
}

belcal_status belcal_overrides_set(belcal_overrides* o, const char* key, const char* value) {
  if (!o || !key || !value) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    belcal::ConfigOverrides r = from_c(*o);
    if (!r.set(key, value)) throw Error(ErrorCode::ConfigError, std::string("unknown setting ") + key);
    *o = to_c(r);
  });
}

belcal_status belcal_theory_load_file(const char* path, belcal_theory** out) {
  if (!path || !out) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  std::string text;
  const belcal_status s = guarded([&] { text = belcal::read_text_file(path); });
  if (s != BELCAL_OK) return s;
  belcal_status p = BELCAL_OK;
  const belcal_status g = guarded([&] { p = make_theory(text, path, out); });
  return g != BELCAL_OK ? g : p;
}

belcal_status belcal_theory_parse(const char* text, size_t length, belcal_theory** out) {
  if (!text || !out) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  belcal_status s = BELCAL_OK;
  const belcal_status g = guarded([&] { s = make_theory(std::string_view(text, length), "<input>", out); });
  return g != BELCAL_OK ? g : s;
}

void belcal_theory_free(belcal_theory* theory) { delete theory; }

const char* belcal_theory_name(const belcal_theory* theory) { return theory ? theory->spec.name.c_str() : ""; }

uint64_t belcal_theory_digest(const belcal_theory* theory) { return theory ? theory->spec.digest() : 0; }

size_t belcal_theory_diagnostic_count(const belcal_theory* theory) { return theory ? theory->diagnostics.size() : 0; }

belcal_status belcal_theory_diagnostic(const belcal_theory* theory, size_t index, int* severity, belcal_status* code,
                                       uint32_t* line, uint32_t* column, const char** message) {
  if (!theory || index >= theory->diagnostics.size()) return fail(BELCAL_INVALID_ARGUMENT, "no such diagnostic");
  const belcal::Diagnostic& d = theory->diagnostics[index];
  if (severity) *severity = static_cast<int>(d.severity);
  if (code) *code = to_status(d.code);
  if (line) *line = d.span.line;
  if (column) *column = d.span.column;
  if (message) *message = d.message.c_str();
  return BELCAL_OK;
}

int belcal_theory_has_errors(const belcal_theory* theory) {
  return theory && belcal::has_errors(theory->diagnostics) ? 1 : 0;
}

const char* belcal_theory_print(belcal_theory* theory) {
  if (!theory) return "";
  if (theory->printed.empty()) theory->printed = belcal::print_theory(theory->spec);
  return theory->printed.c_str();
}

belcal_status belcal_query_parse(const belcal_theory* theory, const char* text, belcal_query** out) {
  if (!theory || !text || !out) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new belcal_query{belcal::parse_query(theory->spec, text)}; });
}

void belcal_query_free(belcal_query* query) { delete query; }

int belcal_query_kind(const belcal_query* query) { return query ? static_cast<int>(query->query.kind) : -1; }

const char* belcal_query_text(const belcal_query* query) { return query ? query->query.text.c_str() : ""; }

belcal_status belcal_effective_config(const belcal_theory* theory, const belcal_query* query, const belcal_config* base,
                                      const belcal_overrides* flags, belcal_config* out) {
  if (!theory || !query || !out) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const belcal::EngineConfig b = base ? from_c(*base) : belcal::EngineConfig{};
    const belcal::ConfigOverrides f = flags ? from_c(*flags) : belcal::ConfigOverrides{};
    const belcal::EngineConfig cfg = belcal::effective_config(theory->spec, query->query, b, f);
    cfg.check();
    *out = to_c(cfg);
  });
}

belcal_status belcal_bel(const belcal_theory* theory, const belcal_query* query, const belcal_config* cfg,
                         belcal_result* out) {
  if (!theory || !query || !cfg || !out) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  t_notes.clear();
  return guarded([&] {
    if (query->query.kind != belcal::QueryKind::Bel) throw Error(ErrorCode::ConfigError, "not a bel query");
    const belcal::BeliefResult r = belcal::bel(theory->spec, query->query, from_c(*cfg));
    *out = belcal_result{};
    out->value = r.value;
    out->numerator = r.numerator;
    out->gamma = r.gamma;
    out->has_std_error = r.std_error.has_value();
    out->std_error = r.std_error.value_or(0.0);
    out->has_ess = r.ess.has_value();
    out->ess = r.ess.value_or(0.0);
    out->backend = r.backend == belcal::Backend::MonteCarlo ? BELCAL_BACKEND_MC : BELCAL_BACKEND_QUAD;
    out->nodes = r.nodes;
    out->dims = static_cast<uint32_t>(r.dims.size());
    for (const belcal::DimInfo& d : r.dims) out->points_per_dim = std::max(out->points_per_dim, d.points);
    t_notes = r.notes;
  });
}

belcal_status belcal_knows(const belcal_theory* theory, const belcal_query* query, const belcal_config* cfg, int* known,
                           uint64_t* nodes) {
  if (!theory || !query || !cfg || !known) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  t_notes.clear();
  return guarded([&] {
    if (query->query.kind != belcal::QueryKind::Knows) throw Error(ErrorCode::ConfigError, "not a knows query");
    const belcal::KnowsResult r = belcal::knows(theory->spec, query->query, from_c(*cfg));
    *known = r.known ? 1 : 0;
    if (nodes) *nodes = r.nodes;
    t_notes = r.notes;
  });
}

belcal_status belcal_marginal(const belcal_theory* theory, const belcal_query* query, const belcal_config* cfg,
                              belcal_histogram** out) {
  if (!theory || !query || !cfg || !out) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  t_notes.clear();
  return guarded([&] {
    if (query->query.kind != belcal::QueryKind::Marginal) throw Error(ErrorCode::ConfigError, "not a marginal query");
    belcal::Histogram h = belcal::marginal(theory->spec, query->query, from_c(*cfg));
    t_notes = h.notes;
    *out = new belcal_histogram{std::move(h), {}};
  });
}

size_t belcal_note_count(void) { return t_notes.size(); }

const char* belcal_note(size_t index) { return index < t_notes.size() ? t_notes[index].c_str() : ""; }

void belcal_histogram_free(belcal_histogram* h) { delete h; }

size_t belcal_histogram_bin_count(const belcal_histogram* h) { return h ? h->hist.mass.size() : 0; }

void belcal_histogram_range(const belcal_histogram* h, double* lo, double* hi) {
  if (!h) return;
  if (lo) *lo = h->hist.lo;
  if (hi) *hi = h->hist.hi;
}

belcal_status belcal_histogram_bin(const belcal_histogram* h, size_t index, double* lo, double* hi, double* mass) {
  if (!h || index >= h->hist.mass.size()) return fail(BELCAL_INVALID_ARGUMENT, "no such bin");
  const double w = h->hist.bin_width();
  if (lo) *lo = h->hist.lo + w * static_cast<double>(index);
  if (hi) *hi = index + 1 == h->hist.mass.size() ? h->hist.hi : h->hist.lo + w * static_cast<double>(index + 1);
  if (mass) *mass = h->hist.mass[index];
  return BELCAL_OK;
}

void belcal_histogram_outside(const belcal_histogram* h, double* below, double* above) {
  if (!h) return;
  if (below) *below = h->hist.below;
  if (above) *above = h->hist.above;
}

size_t belcal_histogram_atom_count(const belcal_histogram* h) { return h ? h->hist.atoms.size() : 0; }

belcal_status belcal_histogram_atom(const belcal_histogram* h, size_t index, double* value, double* mass) {
  if (!h || index >= h->hist.atoms.size()) return fail(BELCAL_INVALID_ARGUMENT, "no such atom");
  if (value) *value = h->hist.atoms[index].first;
  if (mass) *mass = h->hist.atoms[index].second;
  return BELCAL_OK;
}

double belcal_histogram_total(const belcal_histogram* h) { return h ? h->hist.total() : 0.0; }

const char* belcal_histogram_csv(belcal_histogram* h) {
  if (!h) return "";
  if (!h->csv.empty()) return h->csv.c_str();
  using belcal::format_real;
  std::string s = "bin_lo,bin_hi,mass\n";
  for (size_t i = 0; i < h->hist.mass.size(); ++i) {
    double lo = 0.0;
    double hi = 0.0;
    double m = 0.0;
    belcal_histogram_bin(h, i, &lo, &hi, &m);
    s += format_real(lo) + "," + format_real(hi) + "," + format_real(m) + "\n";
  }
  if (h->hist.below > 0.0) s += "-inf," + format_real(h->hist.lo) + "," + format_real(h->hist.below) + "\n";
  if (h->hist.above > 0.0) s += format_real(h->hist.hi) + ",inf," + format_real(h->hist.above) + "\n";
  for (const auto& [v, m] : h->hist.atoms) s += "atom," + format_real(v) + "," + format_real(m) + "\n";
  h->csv = std::move(s);
  return h->csv.c_str();
}

belcal_status belcal_histogram_write_csv(belcal_histogram* h, const char* path) {
  if (!h || !path) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  const char* csv = belcal_histogram_csv(h);
  std::ofstream out(path, std::ios::binary);
  out << csv;
  out.close();
  if (!out) return fail(BELCAL_IO_ERROR, std::string("IoError: cannot write ") + path);
  return BELCAL_OK;
}

belcal_status belcal_oracle(const belcal_theory* theory, const belcal_query* query, const belcal_config* cfg,
                            double* value, int* method) {
  if (!theory || !query || !value) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const belcal::EngineConfig c = cfg ? from_c(*cfg) : belcal::EngineConfig{};
    const belcal::OracleAnswer a =
        belcal::oracle_bel(theory->spec, query->query, c.quad_points_per_dim, c.gauss_truncation_sigmas);
    *value = a.value;
    if (method) *method = a.method == belcal::OracleAnswer::Method::Bayes ? BELCAL_ORACLE_BAYES : BELCAL_ORACLE_ENUMERATE;
  });
}

belcal_status belcal_paper_table_run(const char* dir, belcal_criterion_fn on_row, void* user, int* all_passed) {
  if (!dir) return fail(BELCAL_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto rows = belcal::run_paper_table(dir, [&](const belcal::CriterionResult& r) {
      if (on_row) on_row(r.id, r.title.c_str(), r.pass ? 1 : 0, r.detail.c_str(), r.seconds, user);
    });
    if (all_passed) *all_passed = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; }) ? 1 : 0;
  });
}

}  // extern "C"

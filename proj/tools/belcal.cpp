// belcal: command-line front end over the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "belcal/belcal.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitQuery = 1;
constexpr int kExitInput = 2;

#ifndef BELCAL_DEFAULT_THEORY_DIR
#define BELCAL_DEFAULT_THEORY_DIR "theories"
#endif

struct Flags {
  std::vector<std::pair<std::string, std::string>> settings;  // key, value in command-line order
  std::string format = "text";
  std::string out_dir;
  bool oracle = false;
};

struct Source {
  bool is_file = false;
  std::string text;  // query text or file path
};

struct QueryItem {
  std::string text;
  std::string origin;  // "file:line" or "-q N"
  belcal_query* handle = nullptr;
};

std::string fmt(double x, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string hex64(std::uint64_t x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

json config_json(const belcal_config& c) {
  return json{{"backend", c.backend == BELCAL_BACKEND_MC ? "mc" : "quad"},
              {"samples", c.mc_samples},
              {"seed", c.seed},
              {"grid", c.quad_points_per_dim},
              {"trunc-sigmas", c.gauss_truncation_sigmas},
              {"max-dims", c.max_quad_dims},
              {"eps", c.equality_epsilon},
              {"max-nodes", c.max_quad_nodes},
              {"atom-threshold", c.atom_threshold},
              {"threads", c.threads}};
}

std::vector<std::string> take_notes() {
  std::vector<std::string> notes;
  for (size_t i = 0; i < belcal_note_count(); ++i) notes.emplace_back(belcal_note(i));
  return notes;
}

// Adds the engine flags shared by run and plotdata.
void add_engine_flags(CLI::App* app, Flags& f) {
  auto setting = [&f](const char* key) {
    return [&f, key](const std::string& v) { f.settings.emplace_back(key, v); };
  };
  app->add_option_function<std::string>("--backend", setting("backend"), "quad or mc");
  app->add_option_function<std::string>("--samples", setting("samples"), "Monte Carlo sample count");
  app->add_option_function<std::string>("--seed", setting("seed"), "Monte Carlo seed");
  app->add_option_function<std::string>("--grid", setting("grid"), "quadrature points per dimension");
  app->add_option_function<std::string>("--trunc-sigmas", setting("trunc-sigmas"), "gauss truncation in sigmas");
  app->add_option_function<std::string>("--eps", setting("eps"), "equality tolerance");
  app->add_option_function<std::string>("--max-dims", setting("max-dims"), "quadrature dimension limit");
  app->add_option_function<std::string>("--max-nodes", setting("max-nodes"), "quadrature node budget");
  app->add_option_function<std::string>("--atom-threshold", setting("atom-threshold"), "marginal atom threshold");
  app->add_option_function<std::string>("--threads", setting("threads"), "worker threads (0 = all)");
  app->add_option("--format", f.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  app->add_option("--out", f.out_dir, "directory for histogram CSV files");
}

void add_query_sources(CLI::App* app, std::vector<Source>& sources) {
  app->add_option_function<std::vector<std::string>>(
         "-q,--query", [&sources](const std::vector<std::string>& v) {
           for (const auto& s : v) sources.push_back({false, s});
         },
         "query text")
      ->trigger_on_parse()
      ->allow_extra_args(false);
  app->add_option_function<std::vector<std::string>>(
         "-f,--file", [&sources](const std::vector<std::string>& v) {
           for (const auto& s : v) sources.push_back({true, s});
         },
         "file with one query per line")
      ->trigger_on_parse()
      ->allow_extra_args(false);
}

// Loads the theory, printing diagnostics. Returns nullptr on failure.
belcal_theory* load_theory(const std::string& path, bool quiet_notes = false) {
  belcal_theory* t = nullptr;
  const belcal_status st = belcal_theory_load_file(path.c_str(), &t);
  if (st != BELCAL_OK) {
    if (st == BELCAL_IO_ERROR) std::cerr << path << ": error: ";
    std::cerr << belcal_last_error() << "\n";
    return nullptr;
  }
  for (size_t i = 0; i < belcal_theory_diagnostic_count(t); ++i) {
    int sev = 0;
    belcal_status code = BELCAL_OK;
    uint32_t line = 0;
    uint32_t col = 0;
    const char* msg = nullptr;
    belcal_theory_diagnostic(t, i, &sev, &code, &line, &col, &msg);
    if (quiet_notes && sev == BELCAL_SEVERITY_NOTE) continue;
    const char* label = sev == BELCAL_SEVERITY_ERROR ? "error" : sev == BELCAL_SEVERITY_WARNING ? "warning" : "note";
    std::cerr << path;
    if (line) std::cerr << ":" << line << ":" << col;
    std::cerr << ": " << label << ": " << msg << " [" << belcal_status_name(code) << "]\n";
  }
  if (belcal_theory_has_errors(t)) {
    belcal_theory_free(t);
    return nullptr;
  }
  return t;
}

bool blank_or_comment(const std::string& line, std::string& stripped) {
  stripped = line.substr(0, line.find('#'));
  const auto b = stripped.find_first_not_of(" \t\r");
  if (b == std::string::npos) return true;
  stripped = stripped.substr(b, stripped.find_last_not_of(" \t\r") - b + 1);
  return false;
}

// Parses every query up front; prints located errors and returns false if
// any source is unreadable or any query fails to parse.
bool parse_queries(const belcal_theory* t, const std::vector<Source>& sources, std::vector<QueryItem>& items) {
  bool ok = true;
  int inline_no = 0;
  auto parse_one = [&](const std::string& text, const std::string& where, uint32_t line, uint32_t col_offset) {
    QueryItem item{text, where, nullptr};
    if (belcal_query_parse(t, text.c_str(), &item.handle) != BELCAL_OK) {
      uint32_t l = 0;
      uint32_t c = 0;
      belcal_last_error_span(&l, &c);
      std::cerr << where;
      if (l) std::cerr << ":" << (line ? line : l) << ":" << c + col_offset;
      std::cerr << ": error: " << belcal_last_error() << "\n";
      ok = false;
    }
    items.push_back(item);
  };
  for (const Source& s : sources) {
    if (!s.is_file) {
      parse_one(s.text, "<query " + std::to_string(++inline_no) + ">", 0, 0);
      continue;
    }
    std::ifstream in(s.text);
    if (!in) {
      std::cerr << s.text << ": error: cannot open query file [IoError]\n";
      ok = false;
      continue;
    }
    std::string line;
    uint32_t no = 0;
    while (std::getline(in, line)) {
      ++no;
      std::string q;
      if (blank_or_comment(line, q)) continue;
      parse_one(q, s.text, no, static_cast<uint32_t>(line.find(q)));
    }
  }
  return ok;
}

void free_queries(std::vector<QueryItem>& items) {
  for (auto& q : items) belcal_query_free(q.handle);
  items.clear();
}

bool build_overrides(const Flags& f, belcal_overrides& o) {
  o = belcal_overrides{};
  for (const auto& [k, v] : f.settings) {
    if (belcal_overrides_set(&o, k.c_str(), v.c_str()) != BELCAL_OK) {
      std::cerr << "error: --" << k << " " << v << ": " << belcal_last_error() << "\n";
      return false;
    }
  }
  return true;
}

int run_queries(const std::string& theory_path, const std::vector<Source>& sources, const Flags& f, bool marginal_only) {
  if (!f.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(f.out_dir, ec);
    if (ec) {
      std::cerr << f.out_dir << ": error: " << ec.message() << " [IoError]\n";
      return kExitInput;
    }
  }
  belcal_overrides flags;
  if (!build_overrides(f, flags)) return kExitInput;
  belcal_theory* theory = load_theory(theory_path);
  if (!theory) return kExitInput;
  std::vector<QueryItem> items;
  if (sources.empty()) std::cerr << "error: no queries (use -q or -f)\n";
  if (sources.empty() || !parse_queries(theory, sources, items)) {
    free_queries(items);
    belcal_theory_free(theory);
    return kExitInput;
  }
  if (marginal_only) {
    for (const QueryItem& q : items) {
      if (belcal_query_kind(q.handle) != BELCAL_QUERY_MARGINAL) {
        std::cerr << q.origin << ": error: plotdata needs a marginal query\n";
        free_queries(items);
        belcal_theory_free(theory);
        return kExitInput;
      }
    }
    if (f.out_dir.empty() && items.size() > 1) {
      std::cerr << "error: several marginal queries need --out DIR\n";
      free_queries(items);
      belcal_theory_free(theory);
      return kExitInput;
    }
  }

  belcal_config base;
  belcal_config_default(&base);
  belcal_config echo;
  {
    // Flags applied to the defaults, without any query options.
    belcal_config d = base;
    const belcal_config& v = flags.values;
    if (flags.mask & BELCAL_SET_BACKEND) d.backend = v.backend;
    if (flags.mask & BELCAL_SET_SAMPLES) d.mc_samples = v.mc_samples;
    if (flags.mask & BELCAL_SET_SEED) d.seed = v.seed;
    if (flags.mask & BELCAL_SET_GRID) d.quad_points_per_dim = v.quad_points_per_dim;
    if (flags.mask & BELCAL_SET_TRUNC_SIGMAS) d.gauss_truncation_sigmas = v.gauss_truncation_sigmas;
    if (flags.mask & BELCAL_SET_MAX_DIMS) d.max_quad_dims = v.max_quad_dims;
    if (flags.mask & BELCAL_SET_EPS) d.equality_epsilon = v.equality_epsilon;
    if (flags.mask & BELCAL_SET_MAX_NODES) d.max_quad_nodes = v.max_quad_nodes;
    if (flags.mask & BELCAL_SET_ATOM_THRESHOLD) d.atom_threshold = v.atom_threshold;
    if (flags.mask & BELCAL_SET_THREADS) d.threads = v.threads;
    echo = d;
  }

  const bool as_json = f.format == "json";
  json report{{"theory", {{"path", theory_path}, {"name", belcal_theory_name(theory)},
                          {"digest", hex64(belcal_theory_digest(theory))}}},
              {"flags", config_json(echo)},
              {"queries", json::array()}};
  int exit_code = kExitOk;
  for (size_t k = 0; k < items.size(); ++k) {
    const QueryItem& q = items[k];
    json rec{{"query", q.text}, {"source", q.origin}};
    const int kind = belcal_query_kind(q.handle);
    rec["kind"] = kind == BELCAL_QUERY_BEL ? "bel" : kind == BELCAL_QUERY_KNOWS ? "knows" : "marginal";
    std::ostringstream text;
    text << q.text << "\n";
    const auto t0 = std::chrono::steady_clock::now();
    belcal_config cfg;
    belcal_status st = belcal_effective_config(theory, q.handle, &base, &flags, &cfg);
    if (st == BELCAL_OK) rec["config"] = config_json(cfg);
    if (st == BELCAL_OK && kind == BELCAL_QUERY_BEL) {
      belcal_result r;
      st = belcal_bel(theory, q.handle, &cfg, &r);
      if (st == BELCAL_OK) {
        const char* backend = r.backend == BELCAL_BACKEND_MC ? "mc" : "quad";
        rec["value"] = r.value;
        rec["numerator"] = r.numerator;
        rec["gamma"] = r.gamma;
        rec["backend"] = backend;
        rec["nodes"] = r.nodes;
        if (r.has_std_error) rec["std_error"] = r.std_error;
        if (r.has_ess) rec["ess"] = r.ess;
        if (r.backend == BELCAL_BACKEND_QUAD) {
          rec["dims"] = r.dims;
          rec["points_per_dim"] = r.points_per_dim;
        }
        text << "  = " << fmt(r.value);
        if (r.has_std_error) text << " +- " << fmt(r.std_error, "%.2g");
        text << "  [" << backend << ", " << r.nodes << (r.backend == BELCAL_BACKEND_MC ? " samples" : " nodes");
        if (r.has_ess) text << ", ess " << fmt(r.ess, "%.0f");
        text << "]\n";
        if (f.oracle) {
          double ov = 0.0;
          int method = 0;
          if (belcal_oracle(theory, q.handle, &cfg, &ov, &method) == BELCAL_OK) {
            const char* name = method == BELCAL_ORACLE_BAYES ? "bayes" : "enumerate";
            rec["oracle"] = {{"method", name}, {"value", ov}, {"delta", r.value - ov}};
            text << "  oracle (" << name << ") = " << fmt(ov) << ", delta " << fmt(r.value - ov, "%.3g") << "\n";
          } else {
            rec["oracle"] = {{"error", belcal_last_error()}};
            text << "  oracle: " << belcal_last_error() << "\n";
          }
        }
      }
    } else if (st == BELCAL_OK && kind == BELCAL_QUERY_KNOWS) {
      int known = 0;
      uint64_t nodes = 0;
      st = belcal_knows(theory, q.handle, &cfg, &known, &nodes);
      if (st == BELCAL_OK) {
        rec["value"] = known != 0;
        rec["nodes"] = nodes;
        text << "  = " << (known ? "true" : "false") << "  [" << nodes << " points]\n";
      }
    } else if (st == BELCAL_OK) {
      belcal_histogram* h = nullptr;
      st = belcal_marginal(theory, q.handle, &cfg, &h);
      if (st == BELCAL_OK) {
        double lo = 0.0;
        double hi = 0.0;
        belcal_histogram_range(h, &lo, &hi);
        rec["bins"] = belcal_histogram_bin_count(h);
        rec["range"] = {lo, hi};
        rec["total"] = belcal_histogram_total(h);
        json atoms = json::array();
        for (size_t i = 0; i < belcal_histogram_atom_count(h); ++i) {
          double v = 0.0;
          double m = 0.0;
          belcal_histogram_atom(h, i, &v, &m);
          atoms.push_back({{"value", v}, {"mass", m}});
        }
        rec["atoms"] = atoms;
        if (!f.out_dir.empty()) {
          const std::string name = (marginal_only ? "marginal" : "query") + std::to_string(k + 1) + ".csv";
          const std::string path = (std::filesystem::path(f.out_dir) / name).string();
          st = belcal_histogram_write_csv(h, path.c_str());
          if (st == BELCAL_OK) {
            rec["histogram"] = path;
            text << "  -> " << path << " (" << belcal_histogram_bin_count(h) << " bins, " << atoms.size()
                 << " atoms)\n";
          }
        } else if (marginal_only) {
          std::cout << belcal_histogram_csv(h);
        } else {
          std::istringstream csv(belcal_histogram_csv(h));
          for (std::string line; std::getline(csv, line);) text << "  " << line << "\n";
        }
        belcal_histogram_free(h);
      }
    }
    rec["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (st != BELCAL_OK) {
      rec["error"] = {{"code", belcal_status_name(st)}, {"message", belcal_last_error()}};
      text << "  error: " << belcal_last_error() << "\n";
      exit_code = kExitQuery;
    } else {
      const auto notes = take_notes();
      rec["notes"] = notes;
      for (const auto& n : notes) text << "  note: " << n << "\n";
    }
    report["queries"].push_back(rec);
    if (!as_json && !(marginal_only && f.out_dir.empty())) std::cout << text.str() << std::flush;
    if (marginal_only && st != BELCAL_OK) std::cerr << q.origin << ": error: " << belcal_last_error() << "\n";
  }
  report["exit_code"] = exit_code;
  if (as_json) std::cout << report.dump(2) << "\n";
  free_queries(items);
  belcal_theory_free(theory);
  return exit_code;
}

int check_theory(const std::string& path, bool print) {
  belcal_theory* t = load_theory(path);
  if (!t) return kExitInput;
  if (print) std::cout << belcal_theory_print(t);
  std::cout << path << ": ok (" << belcal_theory_name(t) << ", digest " << hex64(belcal_theory_digest(t)) << ")\n";
  belcal_theory_free(t);
  return kExitOk;
}

void print_row(int id, const char* title, int pass, const char* detail, double seconds, void*) {
  std::printf("[%s] %2d  %s  (%.2fs)\n       %s\n", pass ? "PASS" : "FAIL", id, title, seconds, detail);
  std::fflush(stdout);
}

int test_paper(std::string dir) {
  if (dir.empty()) {
    const char* env = std::getenv("BELCAL_THEORIES");
    dir = env && *env ? env : BELCAL_DEFAULT_THEORY_DIR;
  }
  int all = 0;
  if (belcal_paper_table_run(dir.c_str(), print_row, nullptr, &all) != BELCAL_OK) {
    std::cerr << "error: " << belcal_last_error() << "\n";
    return kExitInput;
  }
  std::printf("%s\n", all ? "all criteria passed" : "some criteria FAILED");
  return all ? kExitOk : kExitQuery;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"belcal: degrees of belief for probabilistic action theories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", belcal_version());

  Flags flags;
  std::vector<Source> sources;
  std::string theory;

  CLI::App* run = app.add_subcommand("run", "evaluate bel, knows and marginal queries");
  run->add_option("theory", theory, "theory file")->required();
  add_query_sources(run, sources);
  add_engine_flags(run, flags);
  run->add_flag("--oracle", flags.oracle, "also compute the reference value and print the delta");

  CLI::App* plot = app.add_subcommand("plotdata", "write marginal histograms as CSV");
  plot->add_option("theory", theory, "theory file")->required();
  add_query_sources(plot, sources);
  add_engine_flags(plot, flags);

  bool print = false;
  CLI::App* check = app.add_subcommand("check", "parse and validate a theory");
  check->add_option("theory", theory, "theory file")->required();
  check->add_flag("--print", print, "print the canonical form");

  std::string dir;
  CLI::App* paper = app.add_subcommand("test-paper", "run the acceptance table on the example theories");
  paper->add_option("dir", dir, "directory holding the example theories");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }
  if (*run) return run_queries(theory, sources, flags, false);
  if (*plot) return run_queries(theory, sources, flags, true);
  if (*check) return check_theory(theory, print);
  return test_paper(dir);
}

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "belcal/error.hpp"
#include "belcal/theory.hpp"

namespace belcal {

// Parses a theory file. Throws Error (SyntaxError, DuplicateName,
// UnknownIdentifier) carrying the source span of the first problem.
TheorySpec parse_theory(std::string_view text);

struct TheoryParse {
  std::optional<TheorySpec> spec;
  std::vector<Diagnostic> diagnostics;
};
// Non-throwing variant: parse errors become diagnostics.
TheoryParse try_parse_theory(std::string_view text);

// Parses one query against a theory. Throws Error on syntax errors, unknown
// names, ArityMismatch, DomainMismatch and TypeError.
Query parse_query(const TheorySpec& spec, std::string_view text);

// One query per non-blank line; `#` starts a comment.
std::vector<Query> parse_query_file(const TheorySpec& spec, std::string_view text);

// Reads a whole file; throws IoError.
std::string read_text_file(const std::string& path);
// read_text_file + parse_theory.
TheorySpec load_theory_file(const std::string& path);

std::string print_theory(const TheorySpec& spec);
std::string print_formula(const TheorySpec& spec, const Query& q);

// Static checks; an empty list means the theory is well formed and its
// initial density is in a form the samplers recognize. Notes never block use.
std::vector<Diagnostic> validate(const TheorySpec& spec);

}  // namespace belcal

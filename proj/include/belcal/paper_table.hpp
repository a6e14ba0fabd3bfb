#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "belcal/theory.hpp"

namespace belcal {

// The shipped example theories, loaded from one directory.
struct ExampleTheories {
  TheorySpec robot1d;
  TheorySpec noisy;
  TheorySpec sensewall;
  TheorySpec window;
  TheorySpec window_discrete;
};
// Throws IoError or a parse error naming the offending file.
ExampleTheories load_example_theories(const std::string& dir);

struct PropertyOutcome {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;  // query text and values of the first failing case
};

// Generated-input property suites. Each runs `cases` cases from `seed`.
PropertyOutcome check_complementarity(const ExampleTheories& t, std::size_t cases, std::uint64_t seed);
PropertyOutcome check_backend_agreement(const ExampleTheories& t, std::size_t cases, std::uint64_t seed);
PropertyOutcome check_seed_determinism(const ExampleTheories& t, std::size_t cases, std::uint64_t seed);
PropertyOutcome check_actual_irrelevance(const ExampleTheories& t, std::size_t cases, std::uint64_t seed);
PropertyOutcome check_frame_invariance(const ExampleTheories& t, std::size_t cases, std::uint64_t seed);

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Runs acceptance criteria 1 to 14 against the theories in `dir`, calling
// `on_row` as each finishes.
std::vector<CriterionResult> run_paper_table(const std::string& dir,
                                             const std::function<void(const CriterionResult&)>& on_row = {});

}  // namespace belcal

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "belcal/error.hpp"
#include "belcal/parser.hpp"

#ifndef BELCAL_THEORY_DIR
#define BELCAL_THEORY_DIR "theories"
#endif

inline belcal::TheorySpec example(const std::string& name) {
  return belcal::load_theory_file(std::string(BELCAL_THEORY_DIR) + "/" + name + ".bat");
}

// Error code raised by fn, or nullopt when it returns normally.
inline std::optional<belcal::ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const belcal::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline belcal::SourceSpan span_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const belcal::Error& e) {
    return e.span();
  }
  return {};
}

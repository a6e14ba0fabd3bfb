#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "belcal/config.hpp"
#include "belcal/expr.hpp"
#include "belcal/value.hpp"

namespace belcal {

struct FluentDecl {
  std::string name;
  Domain domain;
  SourceSpan span;
};

struct ParamDecl {
  std::string name;
  Domain domain;
  SourceSpan span;
};

enum class ActionKind : std::uint8_t { Deterministic, Sensing, Noisy };

std::string_view to_string(ActionKind k);

struct SsaEntry {
  std::uint32_t fluent = 0;
  ExprId value;
  SourceSpan span;
};

// Parameter slots: nominal parameters first, then actual parameters.
// The alternatives of an intended action are fixed to "same action type, same
// nominal arguments, actual arguments ranging over their domains".
struct ActionDecl {
  std::string name;
  std::vector<ParamDecl> nominal;
  std::vector<ParamDecl> actual;
  ActionKind kind = ActionKind::Deterministic;
  ExprId precondition;  // invalid = always executable
  ExprId likelihood;    // invalid = constant 1
  std::vector<SsaEntry> ssa;
  SourceSpan span;

  std::size_t arity() const { return nominal.size() + actual.size(); }
  std::vector<std::string> param_names() const;
  const ParamDecl& param(std::size_t slot) const {
    return slot < nominal.size() ? nominal[slot] : actual[slot - nominal.size()];
  }
  const SsaEntry* ssa_for(std::uint32_t fluent) const;
};

struct TheorySpec {
  std::string name;
  SymbolTable symbols;
  ExprPool pool;
  std::vector<FluentDecl> fluents;
  std::vector<ActionDecl> actions;
  ExprId init_p;
  SourceSpan init_span;
  ConfigOverrides defaults;
  std::string source;

  std::optional<std::uint32_t> find_fluent(std::string_view name) const;
  std::optional<std::uint32_t> find_action(std::string_view name) const;
  std::vector<std::string> fluent_names() const;
  bool all_finite() const;
  std::uint64_t digest() const;
};

// An intended action in a query. Actual arguments may be supplied for noisy
// actions; belief never looks at them.
struct GroundAction {
  std::uint32_t action = 0;
  std::vector<Value> nominal;
  std::optional<std::vector<Value>> actual;
  SourceSpan span;
};

enum class QueryKind : std::uint8_t { Bel, Knows, Marginal };

std::string_view to_string(QueryKind k);

struct Query {
  QueryKind kind = QueryKind::Bel;
  ExprPool pool;
  ExprId formula;  // invalid for marginal queries
  std::vector<GroundAction> alpha;
  std::uint32_t marginal_fluent = 0;
  std::optional<std::uint32_t> bins;
  std::optional<double> range_lo;
  std::optional<double> range_hi;
  ConfigOverrides overrides;
  std::string text;
};

bool same_structure(const TheorySpec& a, const TheorySpec& b);

}  // namespace belcal

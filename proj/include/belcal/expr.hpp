#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "belcal/error.hpp"
#include "belcal/value.hpp"

namespace belcal {

struct ExprId {
  static constexpr std::uint32_t kInvalid = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t index = kInvalid;

  bool valid() const { return index != kInvalid; }
  friend bool operator==(ExprId, ExprId) = default;
};

// Expressions and formulas share one node type; `op` says which one a node is.
enum class Op : std::uint8_t {
  // expressions
  Const,
  Fluent,
  Param,
  Neg,
  Abs,
  Add,
  Sub,
  Mul,
  Div,
  Min,
  Max,
  Gauss,
  Cases,
  // formulas
  Compare,
  And,
  Or,
  Not,
  Implies,
  True,
  False,
};

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

bool is_formula_op(Op op);
std::string_view to_string(CmpOp op);

inline constexpr std::uint32_t kNoHistory = std::numeric_limits<std::uint32_t>::max();

struct Node {
  Op op = Op::Const;
  CmpOp cmp = CmpOp::Eq;
  // Fluent: a = fluent index, b = history index or kNoHistory.
  // Param: a = parameter slot. Unary/Not: a. Binary/Compare/logic: a, b.
  // Gauss: a = argument, b = mean, c = variance.
  // Cases: a = first branch, b = branch count, c = default expression.
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t c = 0;
  Value value;
  // Set on numeric literals whose spelling is also a declared symbol, so the
  // type checker can reinterpret `win = 1` as a symbol comparison.
  std::optional<SymbolId> literal_sym;
  SourceSpan span;
};

struct Branch {
  ExprId guard;
  ExprId value;
};

class ExprPool {
 public:
  ExprId constant(Value v, SourceSpan span = {});
  ExprId real(double x, SourceSpan span = {}) { return constant(Value::real(x), span); }
  ExprId fluent(std::uint32_t index, std::uint32_t history = kNoHistory, SourceSpan span = {});
  ExprId param(std::uint32_t slot, SourceSpan span = {});
  ExprId unary(Op op, ExprId x, SourceSpan span = {});
  ExprId binary(Op op, ExprId x, ExprId y, SourceSpan span = {});
  ExprId gauss(ExprId arg, ExprId mean, ExprId variance, SourceSpan span = {});
  ExprId cases(std::span<const Branch> branches, ExprId otherwise, SourceSpan span = {});
  ExprId compare(CmpOp op, ExprId x, ExprId y, SourceSpan span = {});
  ExprId logic(Op op, ExprId x, ExprId y, SourceSpan span = {});
  ExprId negation(ExprId x, SourceSpan span = {});
  ExprId truth(bool value, SourceSpan span = {});

  const Node& node(ExprId id) const { return nodes_.at(id.index); }
  Node& mutable_node(ExprId id) { return nodes_.at(id.index); }
  std::span<const Branch> branches(ExprId cases_id) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  ExprId push(Node n);

  std::vector<Node> nodes_;
  std::vector<Branch> branch_data_;
};

// Evaluation environment. Index 0 of the trajectory is the initial
// situation, index k the situation after k actions.
struct Env {
  std::span<const WorldPoint> trajectory;
  std::span<const Value> params;
  std::size_t now = 0;
  // Reals compare equal under =/!= when |a - b| <= epsilon (0 is exact).
  double equality_epsilon = 0.0;
};

Value eval_expr(const ExprPool& pool, ExprId id, const Env& env);
double eval_real(const ExprPool& pool, ExprId id, const Env& env);
bool eval_formula(const ExprPool& pool, ExprId id, const Env& env);

// N(x; mean, variance). Throws NonPositiveVariance for variance <= 0.
double gauss_density(double x, double mean, double variance);

struct Refs {
  std::set<std::uint32_t> fluents;
  std::set<std::uint32_t> params;
  bool history = false;
};
void collect_refs(const ExprPool& pool, ExprId id, Refs& out);
Refs refs_of(const ExprPool& pool, ExprId id);

struct NameContext {
  std::span<const std::string> fluents;
  std::span<const std::string> params;
  const SymbolTable* symbols = nullptr;
};

std::string print_expr(const ExprPool& pool, ExprId id, const NameContext& names);

// Structural equality across pools; spans are ignored.
bool same_structure(const ExprPool& a, ExprId x, const ExprPool& b, ExprId y);

}  // namespace belcal

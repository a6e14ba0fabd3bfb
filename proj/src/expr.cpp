#include "belcal/expr.hpp"

#include <cmath>
#include <numbers>

namespace belcal {

bool is_formula_op(Op op) {
  switch (op) {
    case Op::Compare:
    case Op::And:
    case Op::Or:
    case Op::Not:
    case Op::Implies:
    case Op::True:
    case Op::False:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Construction

ExprId ExprPool::push(Node n) {
  nodes_.push_back(std::move(n));
  return ExprId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

ExprId ExprPool::constant(Value v, SourceSpan span) {
  Node n;
  n.op = Op::Const;
  n.value = v;
  n.span = span;
  return push(n);
}

ExprId ExprPool::fluent(std::uint32_t index, std::uint32_t history, SourceSpan span) {
  Node n;
  n.op = Op::Fluent;
  n.a = index;
  n.b = history;
  n.span = span;
  return push(n);
}

ExprId ExprPool::param(std::uint32_t slot, SourceSpan span) {
  Node n;
  n.op = Op::Param;
  n.a = slot;
  n.span = span;
  return push(n);
}

ExprId ExprPool::unary(Op op, ExprId x, SourceSpan span) {
  Node n;
  n.op = op;
  n.a = x.index;
  n.span = span;
  return push(n);
}

ExprId ExprPool::binary(Op op, ExprId x, ExprId y, SourceSpan span) {
  Node n;
  n.op = op;
  n.a = x.index;
  n.b = y.index;
  n.span = span;
  return push(n);
}

ExprId ExprPool::gauss(ExprId arg, ExprId mean, ExprId variance, SourceSpan span) {
  Node n;
  n.op = Op::Gauss;
  n.a = arg.index;
  n.b = mean.index;
  n.c = variance.index;
  n.span = span;
  return push(n);
}

ExprId ExprPool::cases(std::span<const Branch> branches, ExprId otherwise, SourceSpan span) {
  Node n;
  n.op = Op::Cases;
  n.a = static_cast<std::uint32_t>(branch_data_.size());
  n.b = static_cast<std::uint32_t>(branches.size());
  n.c = otherwise.index;
  n.span = span;
  branch_data_.insert(branch_data_.end(), branches.begin(), branches.end());
  return push(n);
}

ExprId ExprPool::compare(CmpOp op, ExprId x, ExprId y, SourceSpan span) {
  Node n;
  n.op = Op::Compare;
  n.cmp = op;
  n.a = x.index;
  n.b = y.index;
  n.span = span;
  return push(n);
}

ExprId ExprPool::logic(Op op, ExprId x, ExprId y, SourceSpan span) { return binary(op, x, y, span); }

ExprId ExprPool::negation(ExprId x, SourceSpan span) { return unary(Op::Not, x, span); }

ExprId ExprPool::truth(bool value, SourceSpan span) {
  Node n;
  n.op = value ? Op::True : Op::False;
  n.span = span;
  return push(n);
}

std::span<const Branch> ExprPool::branches(ExprId cases_id) const {
  const Node& n = node(cases_id);
  return std::span<const Branch>(branch_data_).subspan(n.a, n.b);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

ExprId child(std::uint32_t i) { return ExprId{i}; }

double checked(double x, const Node& n) {
  if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteResult, "arithmetic produced a non-finite value", n.span);
  return x;
}

double want_real(const Value& v, const Node& n) {
  if (!v.is_real()) throw Error(ErrorCode::TypeError, "symbolic value used where a real is required", n.span);
  return v.as_real();
}

bool values_equal(const Value& x, const Value& y, const Node& n, double eps) {
  if (x.kind() != y.kind()) {
    throw Error(ErrorCode::TypeError, "comparison between a symbol and a real", n.span);
  }
  if (x.is_sym()) return x.as_sym() == y.as_sym();
  if (eps == 0.0) return x.as_real() == y.as_real();
  return std::fabs(x.as_real() - y.as_real()) <= eps;
}

}  // namespace

double gauss_density(double x, double mean, double variance) {
  if (!(variance > 0.0)) {
    throw Error(ErrorCode::NonPositiveVariance, "gauss variance must be positive, got " + format_real(variance));
  }
  const double d = x - mean;
  return std::exp(-(d * d) / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
}

Value eval_expr(const ExprPool& pool, ExprId id, const Env& env) {
  const Node& n = pool.node(id);
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Fluent: {
      std::size_t at = env.now;
      if (n.b != kNoHistory) {
        at = n.b;
        if (at >= env.trajectory.size()) {
          throw Error(ErrorCode::HistoryIndexOutOfRange,
                      "history index " + std::to_string(n.b) + " beyond trajectory of length " +
                          std::to_string(env.trajectory.size()),
                      n.span);
        }
      }
      if (at >= env.trajectory.size() || n.a >= env.trajectory[at].size()) {
        throw Error(ErrorCode::UnboundReference, "fluent reference #" + std::to_string(n.a) + " is unbound", n.span);
      }
      return env.trajectory[at][n.a];
    }
    case Op::Param:
      if (n.a >= env.params.size()) {
        throw Error(ErrorCode::UnboundReference, "parameter slot #" + std::to_string(n.a) + " is unbound", n.span);
      }
      return env.params[n.a];
    case Op::Neg:
      return Value::real(-want_real(eval_expr(pool, child(n.a), env), n));
    case Op::Abs:
      return Value::real(std::fabs(want_real(eval_expr(pool, child(n.a), env), n)));
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Min:
    case Op::Max: {
      const double x = want_real(eval_expr(pool, child(n.a), env), n);
      const double y = want_real(eval_expr(pool, child(n.b), env), n);
      switch (n.op) {
        case Op::Add: return Value::real(checked(x + y, n));
        case Op::Sub: return Value::real(checked(x - y, n));
        case Op::Mul: return Value::real(checked(x * y, n));
        case Op::Div:
          if (y == 0.0) throw Error(ErrorCode::DivisionByZero, "division by zero", n.span);
          return Value::real(checked(x / y, n));
        case Op::Min: return Value::real(x < y ? x : y);
        default: return Value::real(x > y ? x : y);
      }
    }
    case Op::Gauss: {
      const double x = want_real(eval_expr(pool, child(n.a), env), n);
      const double m = want_real(eval_expr(pool, child(n.b), env), n);
      const double v = want_real(eval_expr(pool, child(n.c), env), n);
      if (!(v > 0.0)) {
        throw Error(ErrorCode::NonPositiveVariance, "gauss variance must be positive, got " + format_real(v), n.span);
      }
      return Value::real(gauss_density(x, m, v));
    }
    case Op::Cases:
      for (const Branch& br : pool.branches(id)) {
        if (eval_formula(pool, br.guard, env)) return eval_expr(pool, br.value, env);
      }
      return eval_expr(pool, child(n.c), env);
    default:
      throw Error(ErrorCode::TypeError, "formula used where an expression is required", n.span);
  }
}

double eval_real(const ExprPool& pool, ExprId id, const Env& env) {
  return want_real(eval_expr(pool, id, env), pool.node(id));
}

bool eval_formula(const ExprPool& pool, ExprId id, const Env& env) {
  const Node& n = pool.node(id);
  switch (n.op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Not: return !eval_formula(pool, child(n.a), env);
    case Op::And: return eval_formula(pool, child(n.a), env) && eval_formula(pool, child(n.b), env);
    case Op::Or: return eval_formula(pool, child(n.a), env) || eval_formula(pool, child(n.b), env);
    case Op::Implies: return !eval_formula(pool, child(n.a), env) || eval_formula(pool, child(n.b), env);
    case Op::Compare: {
      const Value x = eval_expr(pool, child(n.a), env);
      const Value y = eval_expr(pool, child(n.b), env);
      switch (n.cmp) {
        case CmpOp::Eq: return values_equal(x, y, n, env.equality_epsilon);
        case CmpOp::Ne: return !values_equal(x, y, n, env.equality_epsilon);
        case CmpOp::Lt: return want_real(x, n) < want_real(y, n);
        case CmpOp::Le: return want_real(x, n) <= want_real(y, n);
        case CmpOp::Gt: return want_real(x, n) > want_real(y, n);
        case CmpOp::Ge: return want_real(x, n) >= want_real(y, n);
      }
      return false;
    }
    default:
      throw Error(ErrorCode::TypeError, "expression used where a formula is required", n.span);
  }
}

// ---------------------------------------------------------------------------
// Analysis

void collect_refs(const ExprPool& pool, ExprId id, Refs& out) {
  const Node& n = pool.node(id);
  switch (n.op) {
    case Op::Const:
    case Op::True:
    case Op::False:
      return;
    case Op::Fluent:
      out.fluents.insert(n.a);
      if (n.b != kNoHistory) out.history = true;
      return;
    case Op::Param:
      out.params.insert(n.a);
      return;
    case Op::Neg:
    case Op::Abs:
    case Op::Not:
      collect_refs(pool, child(n.a), out);
      return;
    case Op::Gauss:
      collect_refs(pool, child(n.a), out);
      collect_refs(pool, child(n.b), out);
      collect_refs(pool, child(n.c), out);
      return;
    case Op::Cases:
      for (const Branch& br : pool.branches(id)) {
        collect_refs(pool, br.guard, out);
        collect_refs(pool, br.value, out);
      }
      collect_refs(pool, child(n.c), out);
      return;
    default:
      collect_refs(pool, child(n.a), out);
      collect_refs(pool, child(n.b), out);
      return;
  }
}

Refs refs_of(const ExprPool& pool, ExprId id) {
  Refs r;
  collect_refs(pool, id, r);
  return r;
}

bool same_structure(const ExprPool& pa, ExprId x, const ExprPool& pb, ExprId y) {
  const Node& a = pa.node(x);
  const Node& b = pb.node(y);
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Const:
      return a.value.identical(b.value);
    case Op::Fluent:
      return a.a == b.a && a.b == b.b;
    case Op::Param:
      return a.a == b.a;
    case Op::True:
    case Op::False:
      return true;
    case Op::Neg:
    case Op::Abs:
    case Op::Not:
      return same_structure(pa, child(a.a), pb, child(b.a));
    case Op::Gauss:
      return same_structure(pa, child(a.a), pb, child(b.a)) && same_structure(pa, child(a.b), pb, child(b.b)) &&
             same_structure(pa, child(a.c), pb, child(b.c));
    case Op::Cases: {
      auto ba = pa.branches(x);
      auto bb = pb.branches(y);
      if (ba.size() != bb.size()) return false;
      for (std::size_t i = 0; i < ba.size(); ++i) {
        if (!same_structure(pa, ba[i].guard, pb, bb[i].guard)) return false;
        if (!same_structure(pa, ba[i].value, pb, bb[i].value)) return false;
      }
      return same_structure(pa, child(a.c), pb, child(b.c));
    }
    case Op::Compare:
      if (a.cmp != b.cmp) return false;
      [[fallthrough]];
    default:
      return same_structure(pa, child(a.a), pb, child(b.a)) && same_structure(pa, child(a.b), pb, child(b.b));
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength, loosest first.
enum Prec : int {
  kImplies = 1,
  kOr,
  kAnd,
  kNot,
  kCompare,
  kAdditive,
  kMultiplicative,
  kUnary,
  kAtom,
};

int precedence(const Node& n) {
  switch (n.op) {
    case Op::Implies: return kImplies;
    case Op::Or: return kOr;
    case Op::And: return kAnd;
    case Op::Not: return kNot;
    case Op::Compare: return kCompare;
    case Op::Add:
    case Op::Sub: return kAdditive;
    case Op::Mul:
    case Op::Div: return kMultiplicative;
    case Op::Neg: return kUnary;
    case Op::Const: return n.value.is_real() && std::signbit(n.value.as_real()) ? kUnary : kAtom;
    default: return kAtom;
  }
}

class Printer {
 public:
  Printer(const ExprPool& pool, const NameContext& names) : pool_(pool), names_(names) {}

  void print(ExprId id, int min_prec) {
    const Node& n = pool_.node(id);
    const bool wrap = precedence(n) < min_prec;
    if (wrap) out_ += '(';
    body(id, n);
    if (wrap) out_ += ')';
  }

  std::string take() { return std::move(out_); }

 private:
  void body(ExprId id, const Node& n) {
    switch (n.op) {
      case Op::Const:
        if (n.value.is_sym()) {
          out_ += names_.symbols ? names_.symbols->name(n.value.as_sym()) : "#" + std::to_string(n.value.as_sym().index);
        } else {
          out_ += format_real(n.value.as_real());
        }
        return;
      case Op::Fluent:
        out_ += n.a < names_.fluents.size() ? names_.fluents[n.a] : "$f" + std::to_string(n.a);
        if (n.b != kNoHistory) out_ += '@' + std::to_string(n.b);
        return;
      case Op::Param:
        out_ += n.a < names_.params.size() ? names_.params[n.a] : "$p" + std::to_string(n.a);
        return;
      case Op::Neg: {
        out_ += '-';
        const Node& c = pool_.node(child(n.a));
        // A bare numeral after '-' would re-read as a negative constant.
        print(child(n.a), c.op == Op::Const ? kAtom + 1 : kUnary);
        return;
      }
      case Op::Abs: call("abs", {child(n.a)}); return;
      case Op::Min: call("min", {child(n.a), child(n.b)}); return;
      case Op::Max: call("max", {child(n.a), child(n.b)}); return;
      case Op::Add: infix(n, " + ", kAdditive); return;
      case Op::Sub: infix(n, " - ", kAdditive); return;
      case Op::Mul: infix(n, " * ", kMultiplicative); return;
      case Op::Div: infix(n, " / ", kMultiplicative); return;
      case Op::Gauss:
        out_ += "gauss(";
        print(child(n.a), 0);
        out_ += "; ";
        print(child(n.b), 0);
        out_ += ", ";
        print(child(n.c), 0);
        out_ += ')';
        return;
      case Op::Cases:
        out_ += "cases { ";
        for (const Branch& br : pool_.branches(id)) {
          print(br.value, kAdditive);
          out_ += " if ";
          print(br.guard, 0);
          out_ += " ; ";
        }
        print(child(n.c), kAdditive);
        out_ += " }";
        return;
      case Op::Compare:
        print(child(n.a), kAdditive);
        out_ += ' ';
        out_ += to_string(n.cmp);
        out_ += ' ';
        print(child(n.b), kAdditive);
        return;
      case Op::And: infix(n, " and ", kAnd); return;
      case Op::Or: infix(n, " or ", kOr); return;
      case Op::Implies:
        // right associative
        print(child(n.a), kImplies + 1);
        out_ += " implies ";
        print(child(n.b), kImplies);
        return;
      case Op::Not:
        out_ += "not ";
        print(child(n.a), kNot);
        return;
      case Op::True: out_ += "true"; return;
      case Op::False: out_ += "false"; return;
    }
  }

  void infix(const Node& n, const char* op, int prec) {
    print(child(n.a), prec);
    out_ += op;
    print(child(n.b), prec + 1);
  }

  void call(const char* name, std::initializer_list<ExprId> args) {
    out_ += name;
    out_ += '(';
    bool first = true;
    for (ExprId a : args) {
      if (!first) out_ += ", ";
      first = false;
      print(a, 0);
    }
    out_ += ')';
  }

  const ExprPool& pool_;
  const NameContext& names_;
  std::string out_;
};

}  // namespace

std::string print_expr(const ExprPool& pool, ExprId id, const NameContext& names) {
  Printer p(pool, names);
  p.print(id, 0);
  return p.take();
}

}  // namespace belcal

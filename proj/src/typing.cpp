#include "typing.hpp"

namespace belcal::detail {

void Typer::report(const Node& n, ErrorCode code, std::string message) {
  if (diags_) diags_->push_back(Diagnostic{Severity::Error, code, n.span, std::move(message)});
}

bool Typer::coerce_to_sym(ExprId id) {
  const Node& n = pool_.node(id);
  if (n.op != Op::Const || !n.literal_sym) return false;
  if (n.value.is_sym()) return true;
  if (!mutable_pool_) return false;
  Node& m = mutable_pool_->mutable_node(id);
  m.value = Value::sym(*m.literal_sym);
  return true;
}

Ty Typer::want_real(ExprId id) {
  const Ty t = expr(id);
  if (t == Ty::Sym) {
    report(pool_.node(id), ErrorCode::TypeError, "symbolic value used in arithmetic");
    return Ty::Bad;
  }
  return t;
}

Ty Typer::expr(ExprId id) {
  const Node& n = pool_.node(id);
  switch (n.op) {
    case Op::Const:
      return n.value.is_sym() ? Ty::Sym : Ty::Real;
    case Op::Fluent:
      if (n.a >= fluents_.size()) {
        report(n, ErrorCode::UnboundReference, "reference to undeclared fluent");
        return Ty::Bad;
      }
      return fluents_[n.a].domain.finite ? Ty::Sym : Ty::Real;
    case Op::Param:
      if (!action_ || n.a >= action_->arity()) {
        report(n, ErrorCode::UnboundReference, "reference to an unbound parameter");
        return Ty::Bad;
      }
      return action_->param(n.a).domain.finite ? Ty::Sym : Ty::Real;
    case Op::Neg:
    case Op::Abs:
      return want_real(ExprId{n.a}) == Ty::Bad ? Ty::Bad : Ty::Real;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Min:
    case Op::Max: {
      const Ty a = want_real(ExprId{n.a});
      const Ty b = want_real(ExprId{n.b});
      return a == Ty::Bad || b == Ty::Bad ? Ty::Bad : Ty::Real;
    }
    case Op::Gauss: {
      const Ty a = want_real(ExprId{n.a});
      const Ty b = want_real(ExprId{n.b});
      const Ty c = want_real(ExprId{n.c});
      return a == Ty::Bad || b == Ty::Bad || c == Ty::Bad ? Ty::Bad : Ty::Real;
    }
    case Op::Cases: {
      std::vector<ExprId> values;
      for (const Branch& br : pool_.branches(id)) {
        formula(br.guard);
        values.push_back(br.value);
      }
      values.push_back(ExprId{n.c});
      bool any_sym = false;
      bool bad = false;
      std::vector<Ty> types;
      for (ExprId v : values) {
        types.push_back(expr(v));
        any_sym = any_sym || types.back() == Ty::Sym;
        bad = bad || types.back() == Ty::Bad;
      }
      if (bad) return Ty::Bad;
      if (!any_sym) return Ty::Real;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (types[i] == Ty::Real && !coerce_to_sym(values[i])) {
          report(pool_.node(values[i]), ErrorCode::TypeError, "cases branches mix symbols and reals");
          return Ty::Bad;
        }
      }
      return Ty::Sym;
    }
    default:
      report(n, ErrorCode::TypeError, "formula used where an expression is required");
      return Ty::Bad;
  }
}

Ty Typer::formula(ExprId id) {
  const Node& n = pool_.node(id);
  switch (n.op) {
    case Op::True:
    case Op::False:
      return Ty::Bool;
    case Op::Not:
      formula(ExprId{n.a});
      return Ty::Bool;
    case Op::And:
    case Op::Or:
    case Op::Implies:
      formula(ExprId{n.a});
      formula(ExprId{n.b});
      return Ty::Bool;
    case Op::Compare: {
      Ty a = expr(ExprId{n.a});
      Ty b = expr(ExprId{n.b});
      if (a == Ty::Bad || b == Ty::Bad) return Ty::Bool;
      if (n.cmp == CmpOp::Eq || n.cmp == CmpOp::Ne) {
        if (a == Ty::Sym && b == Ty::Real && coerce_to_sym(ExprId{n.b})) b = Ty::Sym;
        if (b == Ty::Sym && a == Ty::Real && coerce_to_sym(ExprId{n.a})) a = Ty::Sym;
        if (a != b) report(n, ErrorCode::TypeError, "comparison between a symbol and a real");
      } else if (a == Ty::Sym || b == Ty::Sym) {
        report(n, ErrorCode::TypeError, "ordering comparison on symbolic values");
      }
      return Ty::Bool;
    }
    default:
      report(n, ErrorCode::TypeError, "expression used where a formula is required");
      return Ty::Bad;
  }
}

}  // namespace belcal::detail

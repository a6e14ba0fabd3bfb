#pragma once

#include <vector>

#include "belcal/error.hpp"
#include "belcal/theory.hpp"

namespace belcal::detail {

enum class Ty { Real, Sym, Bool, Bad };

// Infers expression/formula types against fluent and parameter declarations.
// With a mutable pool, numeric literals that spell a symbol are rewritten to
// symbols where a symbol is expected (e.g. `win = 1` over win : {0, 1}).
class Typer {
 public:
  Typer(ExprPool* mutable_pool, const ExprPool& pool, const std::vector<FluentDecl>& fluents,
        const ActionDecl* action, std::vector<Diagnostic>* diagnostics)
      : mutable_pool_(mutable_pool), pool_(pool), fluents_(fluents), action_(action), diags_(diagnostics) {}

  Ty expr(ExprId id);
  Ty formula(ExprId id);
  // Rewrites a numeric literal into its symbol spelling; false if not possible.
  bool coerce_to_sym(ExprId id);

 private:
  void report(const Node& n, ErrorCode code, std::string message);
  Ty want_real(ExprId id);

  ExprPool* mutable_pool_;
  const ExprPool& pool_;
  const std::vector<FluentDecl>& fluents_;
  const ActionDecl* action_;
  std::vector<Diagnostic>* diags_;
};

}  // namespace belcal::detail

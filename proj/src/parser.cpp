#include "belcal/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "typing.hpp"

namespace belcal {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceSpan span;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::uint32_t line = 1;
  std::size_t line_start = 0;
  std::size_t i = 0;
  auto span_at = [&](std::size_t begin, std::size_t end) {
    return SourceSpan{line, static_cast<std::uint32_t>(begin - line_start + 1), static_cast<std::uint32_t>(begin),
                      static_cast<std::uint32_t>(end - begin)};
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++i;
      ++line;
      line_start = i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    const std::size_t begin = i;
    if (ident_start(c)) {
      while (i < src.size() && ident_char(src[i])) ++i;
      out.push_back({Tok::Ident, std::string(src.substr(begin, i - begin)), span_at(begin, i)});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          i = j;
          while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
        }
      }
      out.push_back({Tok::Number, std::string(src.substr(begin, i - begin)), span_at(begin, i)});
      continue;
    }
    // Typographic operators that show up when formulas are pasted from text.
    struct Typographic {
      const char* utf8;
      const char* ascii;
      Tok kind;
    };
    static constexpr Typographic kUnicode[] = {
        {"\xE2\x88\x92", "-", Tok::Punct},  {"\xE2\x89\xA4", "<=", Tok::Punct}, {"\xE2\x89\xA5", ">=", Tok::Punct},
        {"\xE2\x89\xA0", "!=", Tok::Punct}, {"\xE2\x88\xA7", "and", Tok::Ident}, {"\xE2\x88\xA8", "or", Tok::Ident},
        {"\xC2\xAC", "not", Tok::Ident}};
    bool matched = false;
    for (const Typographic& u : kUnicode) {
      const std::size_t n = std::strlen(u.utf8);
      if (src.substr(i, n) == u.utf8) {
        i += n;
        out.push_back({u.kind, u.ascii, span_at(begin, i)});
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static constexpr const char* kTwo[] = {"<=", ">=", "!=", "->", "=="};
    for (const char* two : kTwo) {
      if (src.substr(i, 2) == two) {
        i += 2;
        out.push_back({Tok::Punct, std::strcmp(two, "==") == 0 ? "=" : two, span_at(begin, i)});
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::strchr("(){}[],;:~'@=<>+-*/", c) != nullptr) {
      ++i;
      out.push_back({Tok::Punct, std::string(1, c), span_at(begin, i)});
      continue;
    }
    throw Error(ErrorCode::SyntaxError, std::string("unexpected character '") + c + "'", span_at(begin, begin + 1));
  }
  SourceSpan end_span{line, static_cast<std::uint32_t>(i - line_start + 1), static_cast<std::uint32_t>(i), 0};
  out.push_back({Tok::End, "", end_span});
  return out;
}

const std::set<std::string, std::less<>> kReserved = {
    "theory", "fluent", "init",  "action", "sensing", "real", "cases",  "if",    "otherwise",
    "and",    "or",     "not",   "implies", "true",   "false", "gauss", "abs",   "min",
    "max",    "likelihood", "poss", "config", "after", "bel",  "knows",  "marginal"};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  // `mutable_symbols` is null for queries: they may only use declared symbols.
  Parser(std::string_view text, const SymbolTable& symbols, SymbolTable* mutable_symbols,
         const std::vector<FluentDecl>& fluents, ExprPool& pool)
      : tokens_(lex(text)), symbols_(symbols), mutable_symbols_(mutable_symbols), fluents_(fluents), pool_(pool) {}

  const std::string& symbol_name(SymbolId s) const { return symbols_.name(s); }

  // -- token helpers --------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    return tokens_[std::min(pos_ + k, tokens_.size() - 1)];
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is(std::string_view text, std::size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind != Tok::End && t.kind != Tok::Number && t.text == text;
  }
  bool accept(std::string_view text) {
    if (!is(text)) return false;
    ++pos_;
    return true;
  }
  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail_expected(std::string_view expected) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw Error(ErrorCode::SyntaxError, "expected " + std::string(expected) + ", found " + found, t.span);
  }
  const Token& expect(std::string_view text) {
    if (!is(text)) fail_expected("'" + std::string(text) + "'");
    return advance();
  }
  const Token& expect_ident(std::string_view what) {
    if (peek().kind != Tok::Ident || kReserved.contains(peek().text)) fail_expected(what);
    return advance();
  }
  double expect_number(bool allow_sign = true) {
    bool neg = false;
    if (allow_sign && accept("-")) neg = true;
    if (peek().kind != Tok::Number) fail_expected("a number");
    const double x = to_double(advance());
    return neg ? -x : x;
  }
  static double to_double(const Token& t) {
    double x = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), x);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size() || !std::isfinite(x)) {
      throw Error(ErrorCode::SyntaxError, "malformed number '" + t.text + "'", t.span);
    }
    return x;
  }

  std::size_t position() const { return pos_; }
  void rewind(std::size_t p) { pos_ = p; }

  void set_action(const ActionDecl* a) { action_ = a; }
  void set_allow_history(bool v) { allow_history_ = v; }

  // -- domains --------------------------------------------------------------

  Domain parse_domain() {
    if (accept("real")) return Domain::reals();
    const Token& open = expect("{");
    std::vector<SymbolId> values;
    std::set<std::string> seen;
    do {
      const Token& t = peek();
      if (t.kind != Tok::Ident && t.kind != Tok::Number) fail_expected("a symbol");
      if (t.kind == Tok::Ident && kReserved.contains(t.text)) fail_expected("a symbol");
      advance();
      if (!seen.insert(t.text).second) {
        throw Error(ErrorCode::DuplicateName, "symbol '" + t.text + "' listed twice in one domain", t.span);
      }
      values.push_back(intern(t));
    } while (accept(","));
    expect("}");
    if (values.empty()) throw Error(ErrorCode::SyntaxError, "empty finite domain", open.span);
    return Domain::of(std::move(values));
  }

  SymbolId intern(const Token& t) {
    if (mutable_symbols_) return mutable_symbols_->intern(t.text);
    if (const SymbolId* s = symbols_.find(t.text)) return *s;
    throw Error(ErrorCode::UnknownIdentifier, "unknown symbol '" + t.text + "'", t.span);
  }

  // -- expressions ----------------------------------------------------------

  ExprId parse_expr() {
    ExprId lhs = parse_term();
    while (is("+") || is("-")) {
      const Token& op = advance();
      ExprId rhs = parse_term();
      lhs = pool_.binary(op.text == "+" ? Op::Add : Op::Sub, lhs, rhs, op.span);
    }
    return lhs;
  }

  ExprId parse_term() {
    ExprId lhs = parse_unary();
    while (is("*") || is("/")) {
      const Token& op = advance();
      ExprId rhs = parse_unary();
      lhs = pool_.binary(op.text == "*" ? Op::Mul : Op::Div, lhs, rhs, op.span);
    }
    return lhs;
  }

  ExprId parse_unary() {
    if (is("-")) {
      const Token& op = advance();
      if (peek().kind == Tok::Number) {
        const Token& num = advance();
        return number_literal(num, true, op.span);
      }
      return pool_.unary(Op::Neg, parse_unary(), op.span);
    }
    return parse_primary();
  }

  ExprId number_literal(const Token& num, bool negate, SourceSpan span) {
    const double x = to_double(num);
    ExprId id = pool_.real(negate ? -x : x, span.valid() ? span : num.span);
    if (!negate) {
      if (const SymbolId* s = symbols_.find(num.text)) pool_.mutable_node(id).literal_sym = *s;
    }
    return id;
  }

  ExprId parse_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      advance();
      return number_literal(t, false, {});
    }
    if (accept("(")) {
      ExprId e = parse_expr();
      expect(")");
      return e;
    }
    if (t.kind != Tok::Ident) fail_expected("an expression");
    if (t.text == "gauss") {
      advance();
      expect("(");
      ExprId arg = parse_expr();
      expect(";");
      ExprId mean = parse_expr();
      expect(",");
      ExprId var = parse_expr();
      expect(")");
      return pool_.gauss(arg, mean, var, t.span);
    }
    if (t.text == "abs") {
      advance();
      expect("(");
      ExprId x = parse_expr();
      expect(")");
      return pool_.unary(Op::Abs, x, t.span);
    }
    if (t.text == "min" || t.text == "max") {
      advance();
      expect("(");
      ExprId x = parse_expr();
      expect(",");
      ExprId y = parse_expr();
      expect(")");
      return pool_.binary(t.text == "min" ? Op::Min : Op::Max, x, y, t.span);
    }
    if (t.text == "cases") return parse_cases();
    if (kReserved.contains(t.text)) fail_expected("an expression");
    advance();
    return resolve_name(t);
  }

  ExprId parse_cases() {
    const Token& kw = advance();
    expect("{");
    std::vector<Branch> branches;
    ExprId otherwise;
    while (true) {
      ExprId value = parse_expr();
      if (accept("if")) {
        ExprId guard = parse_formula();
        branches.push_back({guard, value});
        if (!accept(";")) fail_expected("';' followed by another branch");
        continue;
      }
      accept("otherwise");
      otherwise = value;
      accept(";");
      break;
    }
    expect("}");
    return pool_.cases(branches, otherwise, kw.span);
  }

  ExprId resolve_name(const Token& t) {
    if (is("@")) {
      advance();
      if (!allow_history_) {
        throw Error(ErrorCode::SyntaxError, "history references are only allowed in queries", t.span);
      }
      auto f = find_fluent(t.text);
      if (!f) throw Error(ErrorCode::UnknownIdentifier, "unknown fluent '" + t.text + "'", t.span);
      const Token& k = peek();
      if (k.kind != Tok::Number || k.text.find_first_not_of("0123456789") != std::string::npos) {
        fail_expected("a non-negative integer history index");
      }
      advance();
      const unsigned long idx = std::stoul(k.text);
      if (idx > 1000000) throw Error(ErrorCode::HistoryIndexOutOfRange, "history index too large", k.span);
      if (!max_history_ || idx > max_history_->first) max_history_ = {static_cast<std::uint32_t>(idx), k.span};
      return pool_.fluent(*f, static_cast<std::uint32_t>(idx), t.span);
    }
    if (action_) {
      for (std::size_t i = 0; i < action_->arity(); ++i) {
        if (action_->param(i).name == t.text) return pool_.param(static_cast<std::uint32_t>(i), t.span);
      }
    }
    if (auto f = find_fluent(t.text)) return pool_.fluent(*f, kNoHistory, t.span);
    if (const SymbolId* s = symbols_.find(t.text)) return pool_.constant(Value::sym(*s), t.span);
    throw Error(ErrorCode::UnknownIdentifier, "unknown identifier '" + t.text + "'", t.span);
  }

  std::optional<std::uint32_t> find_fluent(std::string_view name) const {
    for (std::size_t i = 0; i < fluents_.size(); ++i) {
      if (fluents_[i].name == name) return static_cast<std::uint32_t>(i);
    }
    return std::nullopt;
  }

  // -- formulas -------------------------------------------------------------

  ExprId parse_formula() {
    ExprId lhs = parse_or();
    if (is("implies") || is("->")) {
      const Token& op = advance();
      ExprId rhs = parse_formula();
      return pool_.logic(Op::Implies, lhs, rhs, op.span);
    }
    return lhs;
  }

  ExprId parse_or() {
    ExprId lhs = parse_and();
    while (is("or")) {
      const Token& op = advance();
      lhs = pool_.logic(Op::Or, lhs, parse_and(), op.span);
    }
    return lhs;
  }

  ExprId parse_and() {
    ExprId lhs = parse_not();
    while (is("and")) {
      const Token& op = advance();
      lhs = pool_.logic(Op::And, lhs, parse_not(), op.span);
    }
    return lhs;
  }

  ExprId parse_not() {
    if (is("not")) {
      const Token& op = advance();
      return pool_.negation(parse_not(), op.span);
    }
    return parse_atom();
  }

  ExprId parse_atom() {
    const Token& t = peek();
    if (is("true")) {
      advance();
      return pool_.truth(true, t.span);
    }
    if (is("false")) {
      advance();
      return pool_.truth(false, t.span);
    }
    std::optional<Error> formula_error;
    if (is("(")) {
      // Either a parenthesized formula or an expression starting with '('.
      const std::size_t save = pos_;
      try {
        advance();
        ExprId f = parse_formula();
        expect(")");
        if (!is_comparison(peek()) && !is("+") && !is("-") && !is("*") && !is("/")) return f;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SyntaxError) throw;
        formula_error = e;
      }
      pos_ = save;
    }
    if (formula_error) {
      // Report whichever reading got further into the input.
      try {
        return parse_comparison();
      } catch (const Error& e) {
        if (e.code() == ErrorCode::SyntaxError && e.span().offset < formula_error->span().offset) throw *formula_error;
        throw;
      }
    }
    return parse_comparison();
  }

  ExprId parse_comparison() {
    ExprId lhs = parse_expr();
    if (!is_comparison(peek())) fail_expected("a comparison operator");
    const Token& op = advance();
    ExprId rhs = parse_expr();
    return pool_.compare(cmp_of(op.text), lhs, rhs, op.span);
  }

  static bool is_comparison(const Token& t) {
    if (t.kind != Tok::Punct) return false;
    return t.text == "=" || t.text == "!=" || t.text == "<" || t.text == "<=" || t.text == ">" || t.text == ">=";
  }
  static CmpOp cmp_of(std::string_view s) {
    if (s == "=") return CmpOp::Eq;
    if (s == "!=") return CmpOp::Ne;
    if (s == "<") return CmpOp::Lt;
    if (s == "<=") return CmpOp::Le;
    if (s == ">") return CmpOp::Gt;
    return CmpOp::Ge;
  }

  const std::optional<std::pair<std::uint32_t, SourceSpan>>& max_history() const { return max_history_; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const SymbolTable& symbols_;
  SymbolTable* mutable_symbols_;
  const std::vector<FluentDecl>& fluents_;
  ExprPool& pool_;
  const ActionDecl* action_ = nullptr;
  bool allow_history_ = false;
  std::optional<std::pair<std::uint32_t, SourceSpan>> max_history_;
};

void throw_first(const std::vector<Diagnostic>& diags) {
  for (const Diagnostic& d : diags) {
    if (d.severity == Severity::Error) throw Error(d.code, d.message, d.span);
  }
}

// -- theory statements --------------------------------------------------------

std::vector<ParamDecl> parse_params(Parser& p, std::set<std::string>& seen) {
  std::vector<ParamDecl> out;
  if (p.is(")") || p.is("~")) return out;
  do {
    const Token& name = p.expect_ident("a parameter name");
    if (!seen.insert(name.text).second) {
      throw Error(ErrorCode::DuplicateName, "parameter '" + name.text + "' declared twice", name.span);
    }
    Domain d = Domain::reals();
    if (p.accept(":")) d = p.parse_domain();
    out.push_back({name.text, std::move(d), name.span});
  } while (p.accept(","));
  return out;
}

void parse_action(Parser& p, TheorySpec& spec) {
  const Token& name = p.expect_ident("an action name");
  if (spec.find_action(name.text)) {
    throw Error(ErrorCode::DuplicateName, "action '" + name.text + "' declared twice", name.span);
  }
  ActionDecl a;
  a.name = name.text;
  a.span = name.span;
  p.expect("(");
  std::set<std::string> seen;
  a.nominal = parse_params(p, seen);
  const bool noisy = p.accept("~");
  if (noisy) {
    a.actual = parse_params(p, seen);
    if (a.actual.empty()) p.fail_expected("an actual parameter after '~'");
  }
  p.expect(")");
  if (p.accept("sensing")) {
    if (noisy) throw Error(ErrorCode::SyntaxError, "sensing actions take no actual parameters", name.span);
    a.kind = ActionKind::Sensing;
  } else {
    a.kind = noisy ? ActionKind::Noisy : ActionKind::Deterministic;
  }
  p.set_action(&a);
  p.expect("{");
  while (!p.accept("}")) {
    if (p.accept(";")) continue;
    const Token& key = p.peek();
    if (key.kind != Tok::Ident) p.fail_expected("'likelihood', 'poss' or a fluent update");
    if (key.text == "likelihood") {
      p.advance();
      if (a.likelihood.valid()) throw Error(ErrorCode::DuplicateName, "likelihood given twice", key.span);
      p.expect("=");
      a.likelihood = p.parse_expr();
    } else if (key.text == "poss") {
      p.advance();
      if (a.precondition.valid()) throw Error(ErrorCode::DuplicateName, "precondition given twice", key.span);
      p.expect("=");
      a.precondition = p.parse_formula();
    } else {
      p.expect_ident("'likelihood', 'poss' or a fluent update");
      auto f = spec.find_fluent(key.text);
      if (!f) throw Error(ErrorCode::UnknownIdentifier, "unknown fluent '" + key.text + "'", key.span);
      p.expect("'");
      p.expect("=");
      if (a.ssa_for(*f)) throw Error(ErrorCode::DuplicateName, "fluent '" + key.text + "' updated twice", key.span);
      ExprId rhs = p.parse_expr();
      a.ssa.push_back({*f, rhs, key.span});
    }
  }
  p.set_action(nullptr);

  // Literal coercion only; type errors surface through validate().
  detail::Typer typer(&spec.pool, spec.pool, spec.fluents, &a, nullptr);
  for (const SsaEntry& e : a.ssa) {
    if (typer.expr(e.value) == detail::Ty::Real && spec.fluents[e.fluent].domain.finite) typer.coerce_to_sym(e.value);
  }
  if (a.likelihood.valid()) typer.expr(a.likelihood);
  if (a.precondition.valid()) typer.formula(a.precondition);
  spec.actions.push_back(std::move(a));
}

std::string parse_config_key(Parser& p) {
  std::string key = p.expect_ident("a configuration key").text;
  while (p.is("-") && p.peek(1).kind == Tok::Ident) {
    p.advance();
    key += "-" + p.advance().text;
  }
  return key;
}

std::string parse_config_value(Parser& p) {
  std::string value;
  if (p.accept("-")) value = "-";
  const Token& t = p.peek();
  if (t.kind != Tok::Ident && t.kind != Tok::Number) p.fail_expected("a configuration value");
  value += p.advance().text;
  return value;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path);
  return buf.str();
}

TheorySpec load_theory_file(const std::string& path) { return parse_theory(read_text_file(path)); }

TheorySpec parse_theory(std::string_view text) {
  TheorySpec spec;
  spec.source = std::string(text);
  Parser p(text, spec.symbols, &spec.symbols, spec.fluents, spec.pool);
  if (!p.is("theory")) p.fail_expected("'theory'");
  bool named = false;
  while (!p.at_end()) {
    const Token& kw = p.peek();
    if (p.accept("theory")) {
      if (named) throw Error(ErrorCode::DuplicateName, "theory named twice", kw.span);
      spec.name = p.expect_ident("a theory name").text;
      named = true;
    } else if (p.accept("fluent")) {
      const Token& name = p.expect_ident("a fluent name");
      if (spec.find_fluent(name.text)) {
        throw Error(ErrorCode::DuplicateName, "fluent '" + name.text + "' declared twice", name.span);
      }
      p.expect(":");
      Domain d = p.parse_domain();
      spec.fluents.push_back({name.text, std::move(d), name.span});
    } else if (p.accept("init")) {
      if (spec.init_p.valid()) throw Error(ErrorCode::DuplicateName, "initial density given twice", kw.span);
      if (p.is("p") && p.is("=", 1)) {
        p.advance();
        p.advance();
      }
      spec.init_span = kw.span;
      spec.init_p = p.parse_expr();
      detail::Typer typer(&spec.pool, spec.pool, spec.fluents, nullptr, nullptr);
      typer.expr(spec.init_p);
    } else if (p.accept("action")) {
      parse_action(p, spec);
    } else if (p.accept("config")) {
      const Token& at = p.peek();
      const std::string key = parse_config_key(p);
      p.expect("=");
      const std::string value = parse_config_value(p);
      if (!spec.defaults.set(key, value)) {
        throw Error(ErrorCode::ConfigError, "unknown configuration key '" + key + "'", at.span);
      }
    } else {
      p.fail_expected("'fluent', 'init', 'action' or 'config'");
    }
  }
  if (!spec.init_p.valid()) p.fail_expected("an 'init p = ...' declaration");
  return spec;
}

TheoryParse try_parse_theory(std::string_view text) {
  TheoryParse out;
  try {
    out.spec = parse_theory(text);
  } catch (const Error& e) {
    out.diagnostics.push_back({Severity::Error, e.code(), e.span(), e.detail()});
  }
  return out;
}

namespace {

struct RawArg {
  bool negative = false;
  Token token;
};

std::vector<RawArg> parse_raw_args(Parser& p, std::size_t& split) {
  std::vector<RawArg> out;
  split = std::string::npos;
  if (p.is(")")) return out;
  while (true) {
    RawArg a;
    if (p.accept("-")) a.negative = true;
    const Token& t = p.peek();
    if (t.kind != Tok::Ident && t.kind != Tok::Number) p.fail_expected("an argument");
    if (a.negative && t.kind != Tok::Number) p.fail_expected("a number after '-'");
    a.token = p.advance();
    out.push_back(std::move(a));
    if (p.accept(",")) continue;
    if (split == std::string::npos && p.accept("~")) {
      split = out.size();
      continue;
    }
    break;
  }
  return out;
}

Value convert_arg(const Parser& p, const RawArg& arg, const ParamDecl& param, const std::string& action) {
  const Token& t = arg.token;
  if (param.domain.finite) {
    if (!arg.negative) {
      for (SymbolId s : param.domain.values) {
        if (p.symbol_name(s) == t.text) return Value::sym(s);
      }
    }
    throw Error(ErrorCode::DomainMismatch,
                "argument '" + std::string(arg.negative ? "-" : "") + t.text + "' is not in the domain of " + action +
                    "." + param.name,
                t.span);
  }
  if (t.kind != Tok::Number) {
    throw Error(ErrorCode::DomainMismatch,
                "symbol '" + t.text + "' given for real parameter " + action + "." + param.name, t.span);
  }
  const double x = Parser::to_double(t);
  return Value::real(arg.negative ? -x : x);
}

GroundAction parse_ground_action(Parser& p, const TheorySpec& spec) {
  const Token& name = p.expect_ident("an action name");
  auto idx = spec.find_action(name.text);
  if (!idx) throw Error(ErrorCode::UnknownIdentifier, "unknown action '" + name.text + "'", name.span);
  const ActionDecl& decl = spec.actions[*idx];
  std::vector<RawArg> raw;
  std::size_t split = std::string::npos;
  if (p.accept("(")) {
    raw = parse_raw_args(p, split);
    p.expect(")");
  }
  const std::size_t n_nom = decl.nominal.size();
  const std::size_t n_act = decl.actual.size();
  bool with_actual = false;
  if (split != std::string::npos) {
    if (split != n_nom || raw.size() - split != n_act || n_act == 0) {
      throw Error(ErrorCode::ArityMismatch,
                  decl.name + " takes " + std::to_string(n_nom) + " nominal and " + std::to_string(n_act) +
                      " actual arguments",
                  name.span);
    }
    with_actual = true;
  } else if (raw.size() == n_nom) {
    with_actual = false;
  } else if (n_act > 0 && raw.size() == n_nom + n_act) {
    with_actual = true;
  } else {
    throw Error(ErrorCode::ArityMismatch,
                decl.name + " expects " + std::to_string(n_nom) + " argument(s), got " + std::to_string(raw.size()),
                name.span);
  }
  GroundAction g;
  g.action = *idx;
  g.span = name.span;
  for (std::size_t i = 0; i < n_nom; ++i) g.nominal.push_back(convert_arg(p, raw[i], decl.nominal[i], decl.name));
  if (with_actual) {
    std::vector<Value> actual;
    for (std::size_t i = 0; i < n_act; ++i) {
      actual.push_back(convert_arg(p, raw[n_nom + i], decl.actual[i], decl.name));
    }
    g.actual = std::move(actual);
  }
  return g;
}

void parse_query_option(Parser& p, Query& q) {
  const Token& at = p.peek();
  const std::string key = parse_config_key(p);
  p.expect("=");
  if (key == "bins") {
    const Token& t = p.peek();
    if (t.kind != Tok::Number || t.text.find_first_not_of("0123456789") != std::string::npos) {
      p.fail_expected("a positive integer bin count");
    }
    p.advance();
    const unsigned long n = std::stoul(t.text);
    if (n == 0 || n > 10000000) throw Error(ErrorCode::ConfigError, "bins must be in 1..10000000", t.span);
    q.bins = static_cast<std::uint32_t>(n);
    return;
  }
  if (key == "range") {
    const double lo = p.expect_number();
    p.expect(",");
    const double hi = p.expect_number();
    if (!(lo < hi)) throw Error(ErrorCode::ConfigError, "range needs lo < hi", at.span);
    q.range_lo = lo;
    q.range_hi = hi;
    return;
  }
  const std::string value = parse_config_value(p);
  bool known = false;
  try {
    known = q.overrides.set(key, value);
  } catch (const Error& e) {
    throw Error(e.code(), e.detail(), at.span);
  }
  if (!known) throw Error(ErrorCode::ConfigError, "unknown query option '" + key + "'", at.span);
}

}  // namespace

Query parse_query(const TheorySpec& spec, std::string_view text) {
  Query q;
  q.text = std::string(text);
  Parser p(text, spec.symbols, nullptr, spec.fluents, q.pool);
  p.set_allow_history(true);
  const Token& kind = p.peek();
  if (p.accept("bel")) {
    q.kind = QueryKind::Bel;
  } else if (p.accept("knows")) {
    q.kind = QueryKind::Knows;
  } else if (p.accept("marginal")) {
    q.kind = QueryKind::Marginal;
  } else {
    p.fail_expected("'bel', 'knows' or 'marginal'");
  }
  if (q.kind == QueryKind::Marginal) {
    const Token& f = p.expect_ident("a fluent name");
    auto idx = spec.find_fluent(f.text);
    if (!idx) throw Error(ErrorCode::UnknownIdentifier, "unknown fluent '" + f.text + "'", f.span);
    q.marginal_fluent = *idx;
  } else {
    q.formula = p.parse_formula();
    std::vector<Diagnostic> diags;
    detail::Typer typer(&q.pool, q.pool, spec.fluents, nullptr, &diags);
    typer.formula(q.formula);
    throw_first(diags);
  }
  if (p.accept("after")) {
    p.expect("[");
    if (!p.is("]")) {
      do {
        q.alpha.push_back(parse_ground_action(p, spec));
      } while (p.accept(","));
    }
    p.expect("]");
  }
  while (!p.at_end()) {
    if (p.peek().kind != Tok::Ident) p.fail_expected("'after' or a key=value option");
    parse_query_option(p, q);
  }
  if (q.kind != QueryKind::Marginal && (q.bins || q.range_lo)) {
    throw Error(ErrorCode::ConfigError, "bins/range only apply to marginal queries", kind.span);
  }
  if (const auto& h = p.max_history(); h && h->first > q.alpha.size()) {
    throw Error(ErrorCode::HistoryIndexOutOfRange,
                "history index " + std::to_string(h->first) + " exceeds the " + std::to_string(q.alpha.size()) +
                    " action(s) of the query",
                h->second);
  }
  return q;
}

std::vector<Query> parse_query_file(const TheorySpec& spec, std::string_view text) {
  std::vector<Query> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    const std::size_t hash = line.find('#');
    std::string_view body = line.substr(0, hash);
    const auto first = body.find_first_not_of(" \t\r");
    if (first != std::string_view::npos) {
      const auto last = body.find_last_not_of(" \t\r");
      try {
        out.push_back(parse_query(spec, body.substr(first, last - first + 1)));
      } catch (const Error& e) {
        SourceSpan span = e.span();
        span.line = static_cast<std::uint32_t>(line_no);
        span.column += static_cast<std::uint32_t>(first);
        span.offset += static_cast<std::uint32_t>(start + first);
        throw Error(e.code(), e.detail(), span);
      }
    }
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string print_domain(const Domain& d, const SymbolTable& symbols) {
  if (!d.finite) return "real";
  std::string out = "{ ";
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (i) out += ", ";
    out += symbols.name(d.values[i]);
  }
  return out + " }";
}

std::string print_params(const std::vector<ParamDecl>& ps, const SymbolTable& symbols) {
  std::string out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ", ";
    out += ps[i].name + ": " + print_domain(ps[i].domain, symbols);
  }
  return out;
}

void print_config(std::ostringstream& os, const ConfigOverrides& c) {
  if (c.backend) os << "config backend = " << to_string(*c.backend) << "\n";
  if (c.mc_samples) os << "config samples = " << *c.mc_samples << "\n";
  if (c.seed) os << "config seed = " << *c.seed << "\n";
  if (c.quad_points_per_dim) os << "config grid = " << *c.quad_points_per_dim << "\n";
  if (c.gauss_truncation_sigmas) os << "config trunc-sigmas = " << format_real(*c.gauss_truncation_sigmas) << "\n";
  if (c.max_quad_dims) os << "config max-dims = " << *c.max_quad_dims << "\n";
  if (c.equality_epsilon) os << "config eps = " << format_real(*c.equality_epsilon) << "\n";
  if (c.max_quad_nodes) os << "config max-nodes = " << *c.max_quad_nodes << "\n";
  if (c.atom_threshold) os << "config atom-threshold = " << format_real(*c.atom_threshold) << "\n";
  if (c.threads) os << "config threads = " << *c.threads << "\n";
}

}  // namespace

std::string print_theory(const TheorySpec& spec) {
  std::ostringstream os;
  const std::vector<std::string> fluent_names = spec.fluent_names();
  os << "theory " << spec.name << "\n";
  for (const FluentDecl& f : spec.fluents) os << "fluent " << f.name << " : " << print_domain(f.domain, spec.symbols) << "\n";
  NameContext names{fluent_names, {}, &spec.symbols};
  os << "init p = " << print_expr(spec.pool, spec.init_p, names) << "\n";
  for (const ActionDecl& a : spec.actions) {
    const std::vector<std::string> params = a.param_names();
    NameContext an{fluent_names, params, &spec.symbols};
    os << "action " << a.name << "(" << print_params(a.nominal, spec.symbols);
    if (!a.actual.empty()) os << " ~ " << print_params(a.actual, spec.symbols);
    os << ")";
    if (a.kind == ActionKind::Sensing) os << " sensing";
    os << " {";
    for (const SsaEntry& e : a.ssa) {
      os << "\n  " << spec.fluents[e.fluent].name << "' = " << print_expr(spec.pool, e.value, an);
    }
    if (a.likelihood.valid()) os << "\n  likelihood = " << print_expr(spec.pool, a.likelihood, an);
    if (a.precondition.valid()) os << "\n  poss = " << print_expr(spec.pool, a.precondition, an);
    os << "\n}\n";
  }
  print_config(os, spec.defaults);
  return os.str();
}

std::string print_formula(const TheorySpec& spec, const Query& q) {
  const std::vector<std::string> fluent_names = spec.fluent_names();
  NameContext names{fluent_names, {}, &spec.symbols};
  if (q.kind == QueryKind::Marginal) return spec.fluents.at(q.marginal_fluent).name;
  return print_expr(q.pool, q.formula, names);
}

}  // namespace belcal

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace belcal {

struct SymbolId {
  std::uint32_t index = 0;
  friend bool operator==(SymbolId, SymbolId) = default;
};

// Interns the symbolic constants of finite domains. Two symbols with the same
// spelling are the same symbol, whichever domain declared them.
class SymbolTable {
 public:
  SymbolId intern(std::string_view name);
  const SymbolId* find(std::string_view name) const;
  const std::string& name(SymbolId id) const { return names_.at(id.index); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, SymbolId> ids_;
};

// A fluent or parameter value: a finite machine real or a symbol.
class Value {
 public:
  enum class Kind : std::uint8_t { Real, Sym };

  Value() = default;
  static Value real(double x) {
    Value v;
    v.kind_ = Kind::Real;
    v.real_ = x;
    return v;
  }
  static Value sym(SymbolId s) {
    Value v;
    v.kind_ = Kind::Sym;
    v.sym_ = s;
    return v;
  }

  Kind kind() const { return kind_; }
  bool is_real() const { return kind_ == Kind::Real; }
  bool is_sym() const { return kind_ == Kind::Sym; }
  double as_real() const { return real_; }
  SymbolId as_sym() const { return sym_; }

  // Bitwise identity for reals (so -0.0 != 0.0 here); symbol identity otherwise.
  bool identical(const Value& other) const;

 private:
  Kind kind_ = Kind::Real;
  double real_ = 0.0;
  SymbolId sym_{};
};

// Either the reals or a non-empty, duplicate-free list of symbols.
struct Domain {
  bool finite = false;
  std::vector<SymbolId> values;

  static Domain reals() { return {}; }
  static Domain of(std::vector<SymbolId> syms) { return {true, std::move(syms)}; }
  bool contains(const Value& v) const;
  friend bool operator==(const Domain&, const Domain&) = default;
};

std::string format_value(const Value& v, const SymbolTable& symbols);
// Shortest round-trippable decimal form.
std::string format_real(double x);

// One value per declared fluent, in declaration order. A world point stands
// for exactly one initial situation.
class WorldPoint {
 public:
  WorldPoint() = default;
  explicit WorldPoint(std::vector<Value> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  const Value& operator[](std::size_t i) const { return values_[i]; }
  Value& operator[](std::size_t i) { return values_[i]; }
  const std::vector<Value>& values() const { return values_; }
  void resize(std::size_t n) { values_.resize(n); }

  bool identical(const WorldPoint& other) const;

 private:
  std::vector<Value> values_;
};

}  // namespace belcal

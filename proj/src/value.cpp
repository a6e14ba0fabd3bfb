#include "belcal/value.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>

namespace belcal {

SymbolId SymbolTable::intern(std::string_view name) {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  SymbolId id{static_cast<std::uint32_t>(names_.size())};
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

const SymbolId* SymbolTable::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  return it == ids_.end() ? nullptr : &it->second;
}

bool Value::identical(const Value& other) const {
  if (kind_ != other.kind_) return false;
  if (kind_ == Kind::Sym) return sym_ == other.sym_;
  return std::bit_cast<std::uint64_t>(real_) == std::bit_cast<std::uint64_t>(other.real_);
}

bool Domain::contains(const Value& v) const {
  if (!finite) return v.is_real();
  if (!v.is_sym()) return false;
  return std::find(values.begin(), values.end(), v.as_sym()) != values.end();
}

std::string format_real(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

std::string format_value(const Value& v, const SymbolTable& symbols) {
  if (v.is_sym()) return symbols.name(v.as_sym());
  return format_real(v.as_real());
}

bool WorldPoint::identical(const WorldPoint& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!values_[i].identical(other.values_[i])) return false;
  }
  return true;
}

}  // namespace belcal

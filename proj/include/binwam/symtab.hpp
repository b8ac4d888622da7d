#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "binwam/cell.hpp"

namespace binwam {

// Process-wide bidirectional map between atom/functor names and the symbol
// numbers packed into FUN cells. Symbol numbers are stable for the lifetime
// of a session; the table only grows.
class SymbolTable {
 public:
  SymbolTable() = default;

  std::uint64_t intern(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    std::uint64_t id = names_.size();
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
  }

  const std::string& name(std::uint64_t id) const { return names_.at(id); }

  Cell atom(std::string_view name) { return Cell::fun(intern(name), 0); }
  Cell functor(std::string_view name, std::uint32_t arity) {
    return Cell::fun(intern(name), arity);
  }

  // "name/arity" for diagnostics and disassembly.
  std::string functor_name(Cell f) const {
    return names_.at(f.symbol()) + "/" + std::to_string(f.arity());
  }

  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint64_t> ids_;
};

}  // namespace binwam

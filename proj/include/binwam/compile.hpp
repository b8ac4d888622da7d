#pragma once

#include <optional>

#include "binwam/binarize.hpp"
#include "binwam/instr.hpp"
#include "binwam/symtab.hpp"

namespace binwam {

struct CompiledClause {
  Code code;                          // clause body code, no chain prefix
  Cell functor;                       // binarized predicate functor
  std::optional<Word> first_arg_key;  // principal functor of first head arg
};

constexpr std::uint16_t kMaxRegisters = 255;

CompiledClause compile_clause(const BinaryClause& b, SymbolTable& syms,
                              bool term_compression);

}  // namespace binwam

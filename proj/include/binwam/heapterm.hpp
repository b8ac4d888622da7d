#pragma once

#include <cstddef>
#include <stdexcept>
#include <unordered_map>

#include "binwam/cell.hpp"
#include "binwam/store.hpp"
#include "binwam/symtab.hpp"
#include "binwam/term.hpp"

namespace binwam {

// A reference outside the store can only come from a corrupted term; the
// engine that trips on one aborts with an error answer.
struct TermCorruption : std::runtime_error {
  TermCorruption() : std::runtime_error("corrupt term reference") {}
};

// Result of dereferencing: the final cell plus its heap address when it is
// heap-resident (an unbound variable or the FUN cell of a compound).
struct Deref {
  Cell cell;
  std::size_t addr = 0;
  bool unbound = false;

  bool is_struct() const { return cell.is_struct(); }
};

Deref deref(const HeapStore& heap, Cell c);

// Representative cell for argument slot `addr+i` of the structure at `addr`.
// A compressed (inline) subterm in the slot is reached through a reference
// to the slot itself, so callers never see a raw arity>0 FUN cell by value.
Cell arg_cell(const HeapStore& heap, std::size_t struct_addr, std::uint32_t i);
Cell slot_cell(const HeapStore& heap, std::size_t slot_addr);

// Unification with conditional trailing: bindings of variables older than
// `barrier` are trailed. On failure every binding made by this call is
// undone, including untrailed ones.
bool unify(HeapStore& heap, Trail& trail, std::size_t barrier, Cell a, Cell b);

void bind(HeapStore& heap, Trail& trail, std::size_t barrier, std::size_t addr,
          Cell value);

// Write a term tree onto the heap. With `compress` set, a compound last
// argument is laid out inline after its parent ("last argument overlapping")
// and a proper-list terminator costs a reference cell plus a '[]' cell.
Cell build_term(HeapStore& heap, SymbolTable& syms, const Term& t,
                bool compress,
                std::unordered_map<std::int64_t, std::size_t>& var_addrs);
Cell build_term(HeapStore& heap, SymbolTable& syms, const Term& t,
                bool compress);

// Decompress a heap term back into a tree; unbound variables become tree
// variables named _G0, _G1, ... in traversal order.
Term extract_term(const HeapStore& heap, const SymbolTable& syms, Cell root);

// Deep copy of the dereferenced term into another store with fresh variables
// (sharing preserved through `var_map`); compression is re-applied in `dst`
// when `compress` is set.
Cell copy_across(const HeapStore& src, HeapStore& dst, Cell root,
                 bool compress,
                 std::unordered_map<std::size_t, std::size_t>& var_map);
Cell copy_across(const HeapStore& src, HeapStore& dst, Cell root,
                 bool compress);

}  // namespace binwam

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binwam/cell.hpp"
#include "binwam/symtab.hpp"

namespace binwam {

enum class Op : std::uint8_t {
  // Head unification / term construction
  GetStructure,    // a: reg, w: functor or immediate cell
  UnifyVariable,   // a: reg
  UnifyValue,      // a: reg
  PutStructure,    // a: reg, w: functor or immediate cell
  PutVariable,     // a: reg (fresh heap variable)
  WriteVariable,   // a: reg
  WriteValue,      // a: reg
  MoveRegister,    // a <- b

  // Control
  Execute,         // w: functor of the binarized callee
  Proceed,         // dispatch the continuation in A1 (true/1 entry)
  NonDet,          // a: arity staged for the following TryMeElse
  TryMeElse,       // p1: alternative address
  RetryMeElse,     // p1: alternative address
  TrustMe,
  Switch,          // w: own predicate functor; dict-driven first-arg dispatch
  JumpIf,          // w: own functor, w2: first clause functor, p1/p2: targets

  // Cut
  PushCut,
  PutCut,          // a: reg receiving the saved cutB as an INT
  GetCut,          // a: reg holding the saved cutB

  // Inline guard builtins
  ArithLt, ArithGt, ArithLe, ArithGe, ArithEq, ArithNe,  // a ? b
  ArithIs,         // a: target reg, b: expression reg, c: 1 = fresh target
  UnifyRegs,       // general unification of two registers (=/2, head repeats)
  TermEq, TermNe,  // ==/2, \==/2
  TypeVar, TypeNonvar, TypeAtom, TypeInteger,  // a: reg
  FunctorTest,     // '$functor'(a, b, c)

  // Fused forms installed by the load-time compression pass
  UnifyVarVar, UnifyVarVal, UnifyValVar, UnifyValVal,     // a, b
  WriteVarVar, WriteVarVal, WriteValVar, WriteValVal,     // a, b
  GetUnifyVarVar, GetUnifyVarVal, GetUnifyValVar, GetUnifyValVal,  // s,w,a,b
  PutWriteVarVar, PutWriteVarVal, PutWriteValVar, PutWriteValVal,  // s,w,a,b
  MoveRegX2,       // a <- b, c <- d
  ExecSwitch,      // w: callee functor
  ExecJumpIf,      // w: callee, w2: first clause functor, p1/p2: targets

  // Native predicate stubs
  Builtin,         // a: builtin id, b: register count
};

enum class BuiltinId : std::uint16_t {
  Fail,
  Call,          // call/2 .. call/8 (register count distinguishes)
  NewEngine,     // new_engine/4
  Get,           // get/3
  Stop,          // stop/2
  Return,        // return/2
  ToEngine,      // to_engine/3
  FromEngine,    // from_engine/2
  LoadEngine,    // load_engine/4
  HeapTop,       // '$heap_top'/2
  Between,       // between/4: the one nondeterministic builtin
  BetweenRetry,  // resume point stored in between's choice frame
};

struct Instruction {
  Op op;
  std::uint16_t a = 0, b = 0, c = 0, d = 0;  // registers / small operands
  Word w = 0, w2 = 0;                        // functor or immediate cells
  std::uint32_t p1 = 0, p2 = 0;              // code addresses
};

using Code = std::vector<Instruction>;

std::string disassemble(const Instruction& ins, const SymbolTable& syms);
std::string disassemble(const Code& code, std::size_t from, std::size_t to,
                        const SymbolTable& syms);

}  // namespace binwam

#include "binwam/instr.hpp"

#include <sstream>

namespace binwam {

namespace {

std::string reg(std::uint16_t r) { return "X" + std::to_string(r); }

std::string operand_cell(Word w, const SymbolTable& syms) {
  Cell c(w);
  if (c.is_fun()) return syms.functor_name(c);
  if (c.is_int()) return std::to_string(c.int_value());
  return "?";
}

std::string callee(Word w, const SymbolTable& syms) {
  Cell c(w);
  return syms.name(c.symbol()) + "/" + std::to_string(c.arity());
}

}  // namespace

std::string disassemble(const Instruction& i, const SymbolTable& syms) {
  std::ostringstream o;
  switch (i.op) {
    case Op::GetStructure:
      o << "GET_STRUCTURE " << reg(i.a) << ", " << operand_cell(i.w, syms);
      break;
    case Op::UnifyVariable:
      o << "UNIFY_VARIABLE " << reg(i.a);
      break;
    case Op::UnifyValue:
      o << "UNIFY_VALUE " << reg(i.a);
      break;
    case Op::PutStructure:
      o << "PUT_STRUCTURE " << reg(i.a) << "<-" << operand_cell(i.w, syms);
      break;
    case Op::PutVariable:
      o << "PUT_VARIABLE " << reg(i.a);
      break;
    case Op::WriteVariable:
      o << "WRITE_VARIABLE " << reg(i.a);
      break;
    case Op::WriteValue:
      o << "WRITE_VALUE " << reg(i.a);
      break;
    case Op::MoveRegister:
      o << "MOVE_REG " << reg(i.a) << "<-" << reg(i.b);
      break;
    case Op::Execute:
      o << "EXECUTE " << callee(i.w, syms);
      break;
    case Op::Proceed:
      o << "PROCEED";
      break;
    case Op::NonDet:
      o << "NONDET " << i.a;
      break;
    case Op::TryMeElse:
      o << "TRY_ME_ELSE @" << i.p1;
      break;
    case Op::RetryMeElse:
      o << "RETRY_ME_ELSE @" << i.p1;
      break;
    case Op::TrustMe:
      o << "TRUST_ME";
      break;
    case Op::Switch:
      o << "SWITCH " << callee(i.w, syms);
      break;
    case Op::JumpIf:
      o << "JUMP_IF " << operand_cell(i.w2, syms) << " @" << i.p1 << " @"
        << i.p2;
      break;
    case Op::PushCut:
      o << "PUSH_CUT";
      break;
    case Op::PutCut:
      o << "PUT_CUT " << reg(i.a);
      break;
    case Op::GetCut:
      o << "GET_CUT " << reg(i.a);
      break;
    case Op::ArithLt:
      o << "ARITH_LT " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::ArithGt:
      o << "ARITH_GT " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::ArithLe:
      o << "ARITH_LE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::ArithGe:
      o << "ARITH_GE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::ArithEq:
      o << "ARITH_EQ " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::ArithNe:
      o << "ARITH_NE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::ArithIs:
      o << "ARITH_IS " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::UnifyRegs:
      o << "UNIFY_REGS " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::TermEq:
      o << "TERM_EQ " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::TermNe:
      o << "TERM_NE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::TypeVar:
      o << "TYPE_VAR " << reg(i.a);
      break;
    case Op::TypeNonvar:
      o << "TYPE_NONVAR " << reg(i.a);
      break;
    case Op::TypeAtom:
      o << "TYPE_ATOM " << reg(i.a);
      break;
    case Op::TypeInteger:
      o << "TYPE_INTEGER " << reg(i.a);
      break;
    case Op::FunctorTest:
      o << "FUNCTOR_TEST " << reg(i.a) << ", " << reg(i.b) << ", " << reg(i.c);
      break;
    case Op::UnifyVarVar:
      o << "UNIFY_VARIABLE_VARIABLE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::UnifyVarVal:
      o << "UNIFY_VARIABLE_VALUE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::UnifyValVar:
      o << "UNIFY_VALUE_VARIABLE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::UnifyValVal:
      o << "UNIFY_VALUE_VALUE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::WriteVarVar:
      o << "WRITE_VARIABLE_VARIABLE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::WriteVarVal:
      o << "WRITE_VARIABLE_VALUE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::WriteValVar:
      o << "WRITE_VALUE_VARIABLE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::WriteValVal:
      o << "WRITE_VALUE_VALUE " << reg(i.a) << ", " << reg(i.b);
      break;
    case Op::GetUnifyVarVar:
      o << "GET_UNIFY_VARIABLE_VARIABLE " << reg(i.a) << ", "
        << operand_cell(i.w, syms) << ", " << reg(i.b) << ", " << reg(i.c);
      break;
    case Op::GetUnifyVarVal:
      o << "GET_UNIFY_VARIABLE_VALUE " << reg(i.a) << ", "
        << operand_cell(i.w, syms) << ", " << reg(i.b) << ", " << reg(i.c);
      break;
    case Op::GetUnifyValVar:
      o << "GET_UNIFY_VALUE_VARIABLE " << reg(i.a) << ", "
        << operand_cell(i.w, syms) << ", " << reg(i.b) << ", " << reg(i.c);
      break;
    case Op::GetUnifyValVal:
      o << "GET_UNIFY_VALUE_VALUE " << reg(i.a) << ", "
        << operand_cell(i.w, syms) << ", " << reg(i.b) << ", " << reg(i.c);
      break;
    case Op::PutWriteVarVar:
      o << "PUT_WRITE_VARIABLE_VARIABLE " << reg(i.a) << "<-"
        << operand_cell(i.w, syms) << ", " << reg(i.b) << "," << reg(i.c);
      break;
    case Op::PutWriteVarVal:
      o << "PUT_WRITE_VARIABLE_VALUE " << reg(i.a) << "<-"
        << operand_cell(i.w, syms) << ", " << reg(i.b) << "," << reg(i.c);
      break;
    case Op::PutWriteValVar:
      o << "PUT_WRITE_VALUE_VARIABLE " << reg(i.a) << "<-"
        << operand_cell(i.w, syms) << ", " << reg(i.b) << "," << reg(i.c);
      break;
    case Op::PutWriteValVal:
      o << "PUT_WRITE_VALUE_VALUE " << reg(i.a) << "<-"
        << operand_cell(i.w, syms) << ", " << reg(i.b) << "," << reg(i.c);
      break;
    case Op::MoveRegX2:
      o << "MOVE_REGx2 " << reg(i.a) << "<-" << reg(i.b) << ", " << reg(i.c)
        << "<-" << reg(i.d);
      break;
    case Op::ExecSwitch:
      o << "EXEC_SWITCH " << callee(i.w, syms);
      break;
    case Op::ExecJumpIf:
      o << "EXEC_JUMP_IF " << callee(i.w, syms);
      break;
    case Op::Builtin:
      o << "BUILTIN #" << i.a << "/" << i.b;
      break;
  }
  return o.str();
}

std::string disassemble(const Code& code, std::size_t from, std::size_t to,
                        const SymbolTable& syms) {
  std::ostringstream o;
  for (std::size_t i = from; i < to; ++i)
    o << disassemble(code[i], syms) << "\n";
  return o.str();
}

}  // namespace binwam

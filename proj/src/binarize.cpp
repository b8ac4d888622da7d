#include "binwam/binarize.hpp"

#include <deque>

namespace binwam {

namespace {

void flatten_conj(const Term& t, std::vector<Term>& out) {
  if (t->is_fun() && t->name == "," && t->args.size() == 2) {
    flatten_conj(t->args[0], out);
    flatten_conj(t->args[1], out);
    return;
  }
  out.push_back(t);
}

bool is_cut(const Term& g) { return g->is_atom() && g->name == "!"; }

Term conj_of(const std::vector<Term>& goals) {
  if (goals.empty()) return mk_atom("true");
  Term t = goals.back();
  for (std::size_t i = goals.size() - 1; i-- > 0;)
    t = mk_fun(",", {goals[i], t});
  return t;
}

}  // namespace

bool is_inline_builtin(const Term& goal) {
  if (!goal->is_fun()) return false;
  const std::string& n = goal->name;
  std::size_t a = goal->args.size();
  if (a == 2)
    return n == ">" || n == "<" || n == ">=" || n == "=<" || n == "=:=" ||
           n == "=\\=" || n == "is" || n == "=" || n == "==" || n == "\\==";
  if (a == 1)
    return n == "var" || n == "nonvar" || n == "atom" || n == "integer";
  if (a == 3) return n == "$functor";
  return false;
}

SourceClause to_source_clause(const ReadClause& rc) {
  SourceClause c;
  c.var_names = rc.var_names;
  const Term& t = rc.term;
  if (t->is_fun() && t->name == ":-" && t->args.size() == 2) {
    c.head = t->args[0];
    flatten_conj(t->args[1], c.body);
  } else {
    c.head = t;
  }
  if (!c.head->is_callable())
    throw CompileError("clause head is not callable");
  return c;
}

namespace {

struct Normalizer {
  std::vector<SourceClause>& aux_out;
  int& aux_counter;
  std::int64_t& var_counter;

  Term goal(const Term& g) {
    if (g->is_var()) return mk_fun("call", {g});
    if (g->is_int()) return mk_fun("call", {g});
    if (g->is_fun() && g->name == ";" && g->args.size() == 2) {
      const Term& lhs = g->args[0];
      if (lhs->is_fun() && lhs->name == "->" && lhs->args.size() == 2)
        return make_aux({lhs->args[0], mk_atom("!"), lhs->args[1]},
                        {g->args[1]}, g);
      return make_aux({g->args[0]}, {g->args[1]}, g);
    }
    if (g->is_fun() && g->name == "->" && g->args.size() == 2)
      return make_aux({g->args[0], mk_atom("!"), g->args[1]},
                      {mk_atom("fail")}, g);
    return g;
  }

  // Replace the construct by a call to a fresh predicate closed over the
  // construct's variables; its two clauses are queued for normalization.
  Term make_aux(std::vector<Term> first_body, std::vector<Term> second_body,
                const Term& original) {
    std::vector<Term> vars = collect_vars(original);
    std::string name = "$aux" + std::to_string(aux_counter++);
    Term head = vars.empty() ? mk_atom(name) : mk_fun(name, vars);
    aux_out.push_back(SourceClause{head, std::move(first_body), {}});
    aux_out.push_back(SourceClause{head, std::move(second_body), {}});
    return head;
  }
};

}  // namespace

SourceClause normalize(const SourceClause& c, std::vector<SourceClause>& aux_out,
                       int& aux_counter, std::int64_t& var_counter) {
  if (!c.head->is_callable()) throw CompileError("clause head is not callable");
  Normalizer n{aux_out, aux_counter, var_counter};
  SourceClause out;
  out.head = c.head;
  out.var_names = c.var_names;
  if (c.body.empty()) {
    out.body.push_back(mk_atom("true"));
    return out;
  }
  for (const Term& g : c.body) {
    // Nested conjunctions may reappear from parenthesized sources.
    std::vector<Term> flat;
    flatten_conj(g, flat);
    for (const Term& f : flat) out.body.push_back(n.goal(f));
  }
  return out;
}

GuardSplit split_guard(const SourceClause& c, std::int64_t& var_counter) {
  GuardSplit s;
  std::size_t i = 0;
  while (i < c.body.size() && is_inline_builtin(c.body[i]))
    s.guard.push_back(c.body[i++]);
  std::vector<Term> remaining(c.body.begin() + i, c.body.end());
  std::size_t cuts = 0;
  for (const Term& g : remaining)
    if (is_cut(g)) ++cuts;
  if (cuts == 1 && !remaining.empty() && is_cut(remaining[0])) {
    s.cutmode = CutMode::PushCut;
    remaining.erase(remaining.begin());
    s.rest = std::move(remaining);
    return s;
  }
  if (cuts > 0) {
    s.cutmode = CutMode::PutGetCut;
    // Synthetic variables get negative ids so they never collide with
    // reader-assigned ones.
    s.cut_var = mk_var(-(var_counter++), "");
    for (Term& g : remaining)
      if (is_cut(g)) g = mk_fun("$cut", {s.cut_var});
  }
  s.rest = std::move(remaining);
  return s;
}

namespace {

Term add_cont(const Term& goal, const Term& cont) {
  if (goal->is_atom() && goal->name == "true") return mk_fun("true", {cont});
  std::vector<Term> args = goal->args;
  args.push_back(cont);
  return mk_fun(goal->name, std::move(args));
}

}  // namespace

BinaryClause binarize(const SourceClause& c, std::int64_t& var_counter) {
  GuardSplit s = split_guard(c, var_counter);
  BinaryClause b;
  b.guard = std::move(s.guard);
  b.cutmode = s.cutmode;
  b.cut_var = s.cut_var;
  Term cont = mk_var(-(var_counter++), "Cont");
  b.head = add_cont(c.head, cont);
  Term chain = cont;
  for (std::size_t i = s.rest.size(); i-- > 0;) {
    const Term& g = s.rest[i];
    if (!g->is_callable())
      throw CompileError("body goal is not callable");
    chain = add_cont(g, chain);
  }
  b.body = s.rest.empty() ? mk_fun("true", {cont}) : chain;
  return b;
}

std::vector<BinaryClause> binarize_clause(const ReadClause& rc,
                                          int& aux_counter,
                                          std::int64_t& var_counter) {
  std::vector<BinaryClause> out;
  std::deque<SourceClause> work{to_source_clause(rc)};
  while (!work.empty()) {
    SourceClause c = std::move(work.front());
    work.pop_front();
    std::vector<SourceClause> aux;
    SourceClause n = normalize(c, aux, aux_counter, var_counter);
    for (auto& a : aux) work.push_back(std::move(a));
    out.push_back(binarize(n, var_counter));
  }
  return out;
}

Term binary_clause_term(const BinaryClause& b) {
  std::vector<Term> body_goals = b.guard;
  if (b.cutmode == CutMode::PushCut) body_goals.push_back(mk_atom("!"));
  body_goals.push_back(b.body);
  return mk_fun(":-", {b.head, conj_of(body_goals)});
}

}  // namespace binwam

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace binwam {

// Source-level term trees, produced by the reader and consumed by the
// binarizer, the compiler and the test oracle. Variable identity is the
// integer id; the name is only kept for printing.
struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
  enum class Kind { Var, Int, Fun };

  Kind kind;
  std::int64_t num = 0;        // Int
  std::string name;            // Fun: functor name; Var: display name
  std::vector<Term> args;      // Fun
  std::int64_t var_id = 0;     // Var

  bool is_var() const { return kind == Kind::Var; }
  bool is_int() const { return kind == Kind::Int; }
  bool is_fun() const { return kind == Kind::Fun; }
  bool is_atom() const { return kind == Kind::Fun && args.empty(); }
  bool is_callable() const { return kind == Kind::Fun; }
  std::size_t arity() const { return args.size(); }
};

inline Term mk_var(std::int64_t id, std::string name = "") {
  auto n = std::make_shared<TermNode>();
  n->kind = TermNode::Kind::Var;
  n->var_id = id;
  n->name = std::move(name);
  return n;
}

inline Term mk_int(std::int64_t v) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermNode::Kind::Int;
  n->num = v;
  return n;
}

inline Term mk_fun(std::string name, std::vector<Term> args) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermNode::Kind::Fun;
  n->name = std::move(name);
  n->args = std::move(args);
  return n;
}

inline Term mk_atom(std::string name) { return mk_fun(std::move(name), {}); }

inline Term mk_list(const std::vector<Term>& items, Term tail = nullptr) {
  Term t = tail ? tail : mk_atom("[]");
  for (auto it = items.rbegin(); it != items.rend(); ++it)
    t = mk_fun(".", {*it, t});
  return t;
}

// Structural equality up to a bijective renaming of variables.
inline bool alpha_equal(const Term& a, const Term& b,
                        std::map<std::int64_t, std::int64_t>& fwd,
                        std::map<std::int64_t, std::int64_t>& bwd) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermNode::Kind::Var: {
      auto f = fwd.find(a->var_id);
      auto g = bwd.find(b->var_id);
      if (f == fwd.end() && g == bwd.end()) {
        fwd[a->var_id] = b->var_id;
        bwd[b->var_id] = a->var_id;
        return true;
      }
      return f != fwd.end() && g != bwd.end() && f->second == b->var_id &&
             g->second == a->var_id;
    }
    case TermNode::Kind::Int:
      return a->num == b->num;
    case TermNode::Kind::Fun: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!alpha_equal(a->args[i], b->args[i], fwd, bwd)) return false;
      return true;
    }
  }
  return false;
}

inline bool alpha_equal(const Term& a, const Term& b) {
  std::map<std::int64_t, std::int64_t> fwd, bwd;
  return alpha_equal(a, b, fwd, bwd);
}

// Collect distinct variables in first-occurrence order.
inline void collect_vars(const Term& t, std::vector<Term>& out,
                         std::vector<std::int64_t>& seen) {
  if (t->is_var()) {
    for (auto id : seen)
      if (id == t->var_id) return;
    seen.push_back(t->var_id);
    out.push_back(t);
    return;
  }
  for (const auto& a : t->args) collect_vars(a, out, seen);
}

inline std::vector<Term> collect_vars(const Term& t) {
  std::vector<Term> out;
  std::vector<std::int64_t> seen;
  collect_vars(t, out, seen);
  return out;
}

}  // namespace binwam

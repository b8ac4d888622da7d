#include "binwam/heapterm.hpp"

#include <cassert>
#include <vector>

namespace binwam {

Deref deref(const HeapStore& heap, Cell c) {
  while (c.is_var()) {
    std::size_t a = c.ref();
    if (a >= heap.top()) throw TermCorruption();
    Cell next = heap[a];
    if (next.is_var() && next.ref() == a) return {next, a, true};
    if (next.is_struct()) return {next, a, false};
    c = next;
  }
  // Immediate INT or atom; arity>0 FUN cells are only reached via references.
  return {c, 0, false};
}

Cell slot_cell(const HeapStore& heap, std::size_t slot_addr) {
  Cell c = heap[slot_addr];
  if (c.is_struct()) return Cell::var(slot_addr);  // inline compressed subterm
  return c;
}

Cell arg_cell(const HeapStore& heap, std::size_t struct_addr, std::uint32_t i) {
  return slot_cell(heap, struct_addr + i);
}

void bind(HeapStore& heap, Trail& trail, std::size_t barrier, std::size_t addr,
          Cell value) {
  heap[addr] = value;
  if (addr < barrier) trail.push_binding(addr);
}

bool unify(HeapStore& heap, Trail& trail, std::size_t barrier, Cell a, Cell b) {
  std::vector<std::pair<Cell, Cell>> work{{a, b}};
  std::vector<std::size_t> bound;
  std::size_t trail_mark = trail.top();

  auto do_bind = [&](std::size_t addr, Cell value) {
    bind(heap, trail, barrier, addr, value);
    bound.push_back(addr);
  };
  auto fail = [&]() {
    for (auto it = bound.rbegin(); it != bound.rend(); ++it)
      heap[*it] = Cell::var(*it);
    trail.truncate(trail_mark);
    return false;
  };

  while (!work.empty()) {
    auto [x, y] = work.back();
    work.pop_back();
    Deref dx = deref(heap, x);
    Deref dy = deref(heap, y);
    if (dx.unbound && dy.unbound) {
      if (dx.addr == dy.addr) continue;
      // The younger variable points to the older one.
      if (dx.addr < dy.addr)
        do_bind(dy.addr, Cell::var(dx.addr));
      else
        do_bind(dx.addr, Cell::var(dy.addr));
      continue;
    }
    if (dx.unbound) {
      do_bind(dx.addr, dy.is_struct() ? Cell::var(dy.addr) : dy.cell);
      continue;
    }
    if (dy.unbound) {
      do_bind(dy.addr, dx.is_struct() ? Cell::var(dx.addr) : dx.cell);
      continue;
    }
    if (dx.cell.raw() != dy.cell.raw()) return fail();
    if (dx.is_struct()) {
      if (dx.addr == dy.addr) continue;
      std::uint32_t n = dx.cell.arity();
      for (std::uint32_t i = n; i >= 1; --i)
        work.emplace_back(arg_cell(heap, dx.addr, i),
                          arg_cell(heap, dy.addr, i));
    }
  }
  return true;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(HeapStore& heap, SymbolTable& syms, bool compress,
              std::unordered_map<std::int64_t, std::size_t>& vars)
      : heap_(heap), syms_(syms), compress_(compress), vars_(vars) {
    nil_ = syms_.atom("[]");
    cons_ = syms_.functor(".", 2);
  }

  Cell build(const Term& t) {
    switch (t->kind) {
      case TermNode::Kind::Int:
        return Cell::integer(t->num);
      case TermNode::Kind::Var: {
        auto it = vars_.find(t->var_id);
        if (it != vars_.end()) return Cell::var(it->second);
        std::size_t a = heap_.push_var();
        vars_.emplace(t->var_id, a);
        return Cell::var(a);
      }
      case TermNode::Kind::Fun: {
        if (t->args.empty()) return syms_.atom(t->name);
        return compress_ ? build_spine(t) : build_plain(t);
      }
    }
    return Cell();
  }

 private:
  // One cell per slot; every compound argument lives elsewhere and is
  // reached through a reference.
  Cell build_plain(const Term& t) {
    std::uint32_t n = static_cast<std::uint32_t>(t->args.size());
    std::vector<Cell> pre(n);
    for (std::uint32_t i = 0; i < n; ++i)
      if (t->args[i]->is_fun() && !t->args[i]->args.empty())
        pre[i] = build_plain_or_atom(t->args[i]);
    std::size_t f = heap_.push(syms_.functor(t->name, n));
    for (std::uint32_t i = 0; i < n; ++i) push_slot(t->args[i], pre[i]);
    return Cell::var(f);
  }

  Cell build_plain_or_atom(const Term& t) {
    return t->args.empty() ? syms_.atom(t->name) : build_plain(t);
  }

  // Compressed: the chain of compound last arguments is emitted as one
  // contiguous run; side arguments are built first, below it.
  Cell build_spine(const Term& t) {
    std::vector<Term> spine{t};
    while (true) {
      const Term& last = spine.back()->args.back();
      if (last->is_fun() && !last->args.empty())
        spine.push_back(last);
      else
        break;
    }
    std::vector<std::vector<Cell>> side(spine.size());
    for (std::size_t j = 0; j < spine.size(); ++j) {
      const auto& args = spine[j]->args;
      side[j].resize(args.size());
      for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i]->is_fun() && !args[i]->args.empty())
          side[j][i] = build(args[i]);
    }
    std::size_t root = heap_.top();
    for (std::size_t j = 0; j < spine.size(); ++j) {
      const auto& args = spine[j]->args;
      Cell f = syms_.functor(spine[j]->name,
                             static_cast<std::uint32_t>(args.size()));
      heap_.push(f);
      for (std::size_t i = 0; i + 1 < args.size(); ++i)
        push_slot(args[i], side[j][i]);
      if (j + 1 < spine.size()) continue;  // inline functor fills last slot
      const Term& last = args.back();
      if (f.raw() == cons_.raw() && last->is_fun() && last->args.empty() &&
          last->name == "[]") {
        // List terminator: a reference cell plus the '[]' cell.
        std::size_t slot = heap_.push(Cell());
        heap_[slot] = Cell::var(heap_.top());
        heap_.push(nil_);
      } else {
        push_slot(last, Cell());
      }
    }
    return Cell::var(root);
  }

  void push_slot(const Term& arg, Cell prebuilt) {
    switch (arg->kind) {
      case TermNode::Kind::Int:
        heap_.push(Cell::integer(arg->num));
        return;
      case TermNode::Kind::Var: {
        auto it = vars_.find(arg->var_id);
        if (it != vars_.end()) {
          heap_.push(Cell::var(it->second));
        } else {
          std::size_t a = heap_.push_var();
          vars_.emplace(arg->var_id, a);
        }
        return;
      }
      case TermNode::Kind::Fun:
        if (arg->args.empty())
          heap_.push(syms_.atom(arg->name));
        else
          heap_.push(prebuilt);
        return;
    }
  }

  HeapStore& heap_;
  SymbolTable& syms_;
  bool compress_;
  std::unordered_map<std::int64_t, std::size_t>& vars_;
  Cell nil_, cons_;
};

}  // namespace

Cell build_term(HeapStore& heap, SymbolTable& syms, const Term& t,
                bool compress,
                std::unordered_map<std::int64_t, std::size_t>& var_addrs) {
  if (t->is_fun() && !t->args.empty() &&
      static_cast<std::uint32_t>(t->args.size()) > kMaxArity)
    throw std::length_error("arity above representation limit");
  return TreeBuilder(heap, syms, compress, var_addrs).build(t);
}

Cell build_term(HeapStore& heap, SymbolTable& syms, const Term& t,
                bool compress) {
  std::unordered_map<std::int64_t, std::size_t> vars;
  return build_term(heap, syms, t, compress, vars);
}

namespace {

struct Extractor {
  const HeapStore& heap;
  const SymbolTable& syms;
  std::unordered_map<std::size_t, Term> vars;
  std::int64_t next_var = 0;

  Term walk(Cell c) {
    Deref d = deref(heap, c);
    if (d.unbound) {
      auto it = vars.find(d.addr);
      if (it != vars.end()) return it->second;
      Term v = mk_var(next_var, "_G" + std::to_string(next_var));
      ++next_var;
      vars.emplace(d.addr, v);
      return v;
    }
    if (d.cell.is_int()) return mk_int(d.cell.int_value());
    if (d.cell.is_atom()) return mk_atom(syms.name(d.cell.symbol()));
    std::uint32_t n = d.cell.arity();
    std::vector<Term> args;
    args.reserve(n);
    for (std::uint32_t i = 1; i <= n; ++i)
      args.push_back(walk(arg_cell(heap, d.addr, i)));
    return mk_fun(syms.name(d.cell.symbol()), std::move(args));
  }
};

struct Copier {
  const HeapStore& src;
  HeapStore& dst;
  bool compress;
  std::unordered_map<std::size_t, std::size_t>& vars;

  Cell copy(Cell c) {
    Deref d = deref(src, c);
    if (d.unbound) {
      auto it = vars.find(d.addr);
      if (it != vars.end()) return Cell::var(it->second);
      std::size_t a = dst.push_var();
      vars.emplace(d.addr, a);
      return Cell::var(a);
    }
    if (!d.is_struct()) return d.cell;
    return compress ? copy_spine(d) : copy_plain(d);
  }

  Cell copy_plain(Deref d) {
    std::uint32_t n = d.cell.arity();
    std::vector<Cell> pre(n);
    for (std::uint32_t i = 1; i <= n; ++i) {
      Deref a = deref(src, arg_cell(src, d.addr, i));
      if (a.is_struct()) pre[i - 1] = copy_plain(a);
    }
    std::size_t f = dst.push(d.cell);
    for (std::uint32_t i = 1; i <= n; ++i)
      push_slot(arg_cell(src, d.addr, i), pre[i - 1]);
    return Cell::var(f);
  }

  Cell copy_spine(Deref d) {
    std::vector<Deref> spine{d};
    while (true) {
      Deref last =
          deref(src, arg_cell(src, spine.back().addr, spine.back().cell.arity()));
      if (last.is_struct())
        spine.push_back(last);
      else
        break;
    }
    std::vector<std::vector<Cell>> side(spine.size());
    for (std::size_t j = 0; j < spine.size(); ++j) {
      std::uint32_t n = spine[j].cell.arity();
      side[j].resize(n);
      for (std::uint32_t i = 1; i < n; ++i) {
        Deref a = deref(src, arg_cell(src, spine[j].addr, i));
        if (a.is_struct()) side[j][i - 1] = copy(Cell::var(a.addr));
      }
    }
    std::size_t root = dst.top();
    for (std::size_t j = 0; j < spine.size(); ++j) {
      std::uint32_t n = spine[j].cell.arity();
      dst.push(spine[j].cell);
      for (std::uint32_t i = 1; i < n; ++i)
        push_slot(arg_cell(src, spine[j].addr, i), side[j][i - 1]);
      if (j + 1 == spine.size())
        push_slot(arg_cell(src, spine[j].addr, n), Cell());
    }
    return Cell::var(root);
  }

  void push_slot(Cell src_arg, Cell prebuilt) {
    Deref a = deref(src, src_arg);
    if (a.unbound) {
      auto it = vars.find(a.addr);
      if (it != vars.end()) {
        dst.push(Cell::var(it->second));
      } else {
        std::size_t at = dst.push_var();
        vars.emplace(a.addr, at);
      }
      return;
    }
    if (a.is_struct()) {
      dst.push(prebuilt);
      return;
    }
    dst.push(a.cell);
  }
};

}  // namespace

Term extract_term(const HeapStore& heap, const SymbolTable& syms, Cell root) {
  Extractor e{heap, syms, {}, 0};
  return e.walk(root);
}

Cell copy_across(const HeapStore& src, HeapStore& dst, Cell root, bool compress,
                 std::unordered_map<std::size_t, std::size_t>& var_map) {
  Copier c{src, dst, compress, var_map};
  return c.copy(root);
}

Cell copy_across(const HeapStore& src, HeapStore& dst, Cell root,
                 bool compress) {
  std::unordered_map<std::size_t, std::size_t> vars;
  return copy_across(src, dst, root, compress, vars);
}

}  // namespace binwam

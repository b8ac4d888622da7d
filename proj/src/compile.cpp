#include "binwam/compile.hpp"

#include <deque>
#include <map>
#include <unordered_map>

namespace binwam {

namespace {

class ClauseCompiler {
 public:
  ClauseCompiler(const BinaryClause& b, SymbolTable& syms, bool compress)
      : b_(b), syms_(syms), compress_(compress) {}

  CompiledClause run() {
    std::uint32_t n = static_cast<std::uint32_t>(b_.head->args.size());
    if (n > kMaxRegisters)
      throw CompileError("predicate arity exceeds the register file");
    next_temp_ = static_cast<std::uint16_t>(n + 1);
    compile_head();
    for (const Term& g : b_.guard) compile_guard(g);
    if (b_.cutmode == CutMode::PushCut) emit({Op::PushCut});
    if (b_.cutmode == CutMode::PutGetCut) {
      std::uint16_t r = alloc_temp();
      emit({Op::PutCut, r});
      regs_[b_.cut_var->var_id] = r;
    }
    compile_body();

    CompiledClause out;
    out.code = std::move(code_);
    out.functor = syms_.functor(b_.head->name, n);
    if (n >= 1) out.first_arg_key = principal_functor(b_.head->args[0]);
    return out;
  }

 private:
  void emit(Instruction i) { code_.push_back(i); }

  std::uint16_t alloc_temp() {
    if (next_temp_ > kMaxRegisters)
      throw CompileError("register pressure exceeds the register file");
    return next_temp_++;
  }

  std::optional<Word> principal_functor(const Term& t) {
    switch (t->kind) {
      case TermNode::Kind::Var:
        return std::nullopt;
      case TermNode::Kind::Int:
        return Cell::integer(t->num).raw();
      case TermNode::Kind::Fun:
        return syms_
            .functor(t->name, static_cast<std::uint32_t>(t->args.size()))
            .raw();
    }
    return std::nullopt;
  }

  Cell immediate(const Term& t) {
    if (t->is_int()) return Cell::integer(t->num);
    return syms_.atom(t->name);
  }

  // ---- head ----

  void compile_head() {
    const auto& args = b_.head->args;
    for (std::uint16_t i = 1; i <= args.size(); ++i) {
      const Term& a = args[i - 1];
      switch (a->kind) {
        case TermNode::Kind::Var: {
          auto it = regs_.find(a->var_id);
          if (it == regs_.end())
            regs_[a->var_id] = i;
          else
            emit({Op::UnifyRegs, i, it->second});
          break;
        }
        case TermNode::Kind::Int:
          emit({Op::GetStructure, i, 0, 0, 0, immediate(a).raw()});
          break;
        case TermNode::Kind::Fun:
          if (a->args.empty())
            emit({Op::GetStructure, i, 0, 0, 0, immediate(a).raw()});
          else
            compile_head_struct(i, a, i);
          break;
      }
    }
  }

  void compile_head_struct(std::uint16_t r, const Term& s,
                           std::uint16_t inplace_arg) {
    std::deque<std::pair<std::uint16_t, Term>> queue{{r, s}};
    bool depth1 = true;
    while (!queue.empty()) {
      auto [creg, cur] = queue.front();
      queue.pop_front();
      // Constant arguments need their registers loaded before the stream.
      std::vector<std::uint16_t> const_regs(cur->args.size(), 0);
      for (std::size_t i = 0; i < cur->args.size(); ++i) {
        const Term& a = cur->args[i];
        if (a->is_int() || a->is_atom()) {
          std::uint16_t t = const_reg(immediate(a));
          const_regs[i] = t;
        }
      }
      Instruction get{Op::GetStructure, creg};
      get.w = syms_
                  .functor(cur->name,
                           static_cast<std::uint32_t>(cur->args.size()))
                  .raw();
      emit(get);
      for (std::size_t i = 0; i < cur->args.size(); ++i) {
        const Term& a = cur->args[i];
        switch (a->kind) {
          case TermNode::Kind::Var: {
            auto it = regs_.find(a->var_id);
            if (it != regs_.end()) {
              emit({Op::UnifyValue, it->second});
            } else {
              std::uint16_t t = head_var_target(a, depth1, inplace_arg);
              regs_[a->var_id] = t;
              emit({Op::UnifyVariable, t});
            }
            break;
          }
          case TermNode::Kind::Int:
            emit({Op::UnifyValue, const_regs[i]});
            break;
          case TermNode::Kind::Fun:
            if (a->args.empty()) {
              emit({Op::UnifyValue, const_regs[i]});
            } else {
              std::uint16_t t = alloc_temp();
              emit({Op::UnifyVariable, t});
              queue.emplace_back(t, a);
            }
            break;
        }
      }
      depth1 = false;
    }
  }

  // A variable first seen inside head argument i whose body position is also
  // i can live in register i: the argument register is dead after the GET.
  std::uint16_t head_var_target(const Term& v, bool depth1,
                                std::uint16_t inplace_arg) {
    if (depth1 && b_.body->is_fun() && inplace_arg <= b_.body->args.size()) {
      const Term& ba = b_.body->args[inplace_arg - 1];
      if (ba->is_var() && ba->var_id == v->var_id) return inplace_arg;
    }
    return alloc_temp();
  }

  std::uint16_t const_reg(Cell imm) {
    auto it = const_regs_.find(imm.raw());
    if (it != const_regs_.end()) return it->second;
    std::uint16_t t = alloc_temp();
    emit({Op::PutStructure, t, 0, 0, 0, imm.raw()});
    const_regs_.emplace(imm.raw(), t);
    return t;
  }

  // ---- guards ----

  void compile_guard(const Term& g) {
    const std::string& n = g->name;
    if (n == "is" && g->args.size() == 2) {
      std::uint16_t re = operand(g->args[1]);
      const Term& lhs = g->args[0];
      if (lhs->is_var() && !regs_.count(lhs->var_id)) {
        std::uint16_t t = alloc_temp();
        regs_[lhs->var_id] = t;
        emit({Op::ArithIs, t, re, 1});
      } else {
        emit({Op::ArithIs, operand(lhs), re, 0});
      }
      return;
    }
    if (n == "=" && g->args.size() == 2) {
      const Term &l = g->args[0], &r = g->args[1];
      if (l->is_var() && !regs_.count(l->var_id)) {
        regs_[l->var_id] = operand(r);
        return;
      }
      if (r->is_var() && !regs_.count(r->var_id)) {
        regs_[r->var_id] = operand(l);
        return;
      }
      emit({Op::UnifyRegs, operand(l), operand(r)});
      return;
    }
    if (g->args.size() == 2) {
      Op op;
      if (n == "<")
        op = Op::ArithLt;
      else if (n == ">")
        op = Op::ArithGt;
      else if (n == "=<")
        op = Op::ArithLe;
      else if (n == ">=")
        op = Op::ArithGe;
      else if (n == "=:=")
        op = Op::ArithEq;
      else if (n == "=\\=")
        op = Op::ArithNe;
      else if (n == "==")
        op = Op::TermEq;
      else if (n == "\\==")
        op = Op::TermNe;
      else
        throw CompileError("unknown guard builtin " + n);
      std::uint16_t ra = operand(g->args[0]);
      std::uint16_t rb = operand(g->args[1]);
      emit({op, ra, rb});
      return;
    }
    if (g->args.size() == 1) {
      Op op;
      if (n == "var")
        op = Op::TypeVar;
      else if (n == "nonvar")
        op = Op::TypeNonvar;
      else if (n == "atom")
        op = Op::TypeAtom;
      else if (n == "integer")
        op = Op::TypeInteger;
      else
        throw CompileError("unknown guard builtin " + n);
      emit({op, operand(g->args[0])});
      return;
    }
    if (n == "$functor" && g->args.size() == 3) {
      std::uint16_t ra = operand(g->args[0]);
      std::uint16_t rb = operand(g->args[1]);
      std::uint16_t rc = operand(g->args[2]);
      emit({Op::FunctorTest, ra, rb, rc});
      return;
    }
    throw CompileError("unknown guard builtin " + n);
  }

  // Register holding the value of a term, materializing as needed.
  std::uint16_t operand(const Term& t) {
    switch (t->kind) {
      case TermNode::Kind::Var: {
        auto it = regs_.find(t->var_id);
        if (it != regs_.end()) return it->second;
        std::uint16_t r = alloc_temp();
        emit({Op::PutVariable, r});
        regs_[t->var_id] = r;
        return r;
      }
      case TermNode::Kind::Int:
        return const_reg(immediate(t));
      case TermNode::Kind::Fun:
        if (t->args.empty()) return const_reg(immediate(t));
        return build_struct(t);
    }
    return 0;
  }

  // ---- body term construction ----

  std::uint16_t build_struct(const Term& t) {
    return compress_ ? build_spine(t) : build_plain(t);
  }

  std::uint16_t build_plain(const Term& t) {
    std::vector<std::uint16_t> pre(t->args.size(), 0);
    for (std::size_t i = 0; i < t->args.size(); ++i)
      if (t->args[i]->is_fun() && !t->args[i]->args.empty())
        pre[i] = build_plain(t->args[i]);
    prepare_consts(t);
    std::uint16_t r = alloc_temp();
    Instruction put{Op::PutStructure, r};
    put.w =
        syms_.functor(t->name, static_cast<std::uint32_t>(t->args.size())).raw();
    emit(put);
    for (std::size_t i = 0; i < t->args.size(); ++i)
      write_slot(t->args[i], pre[i]);
    return r;
  }

  std::uint16_t build_spine(const Term& t) {
    std::vector<Term> spine{t};
    while (true) {
      const Term& last = spine.back()->args.back();
      if (last->is_fun() && !last->args.empty())
        spine.push_back(last);
      else
        break;
    }
    // Side structures and constant registers are set up before the spine so
    // its heap cells stay contiguous.
    std::vector<std::vector<std::uint16_t>> side(spine.size());
    for (std::size_t j = 0; j < spine.size(); ++j) {
      const auto& args = spine[j]->args;
      side[j].resize(args.size(), 0);
      for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i]->is_fun() && !args[i]->args.empty())
          side[j][i] = build_spine(args[i]);
      prepare_consts(spine[j]);
    }
    std::uint16_t root = 0;
    for (std::size_t j = 0; j < spine.size(); ++j) {
      const auto& args = spine[j]->args;
      std::uint16_t r = alloc_temp();
      if (j == 0) root = r;
      Instruction put{Op::PutStructure, r};
      put.w = syms_
                  .functor(spine[j]->name,
                           static_cast<std::uint32_t>(args.size()))
                  .raw();
      emit(put);
      for (std::size_t i = 0; i + 1 < args.size(); ++i)
        write_slot(args[i], side[j][i]);
      if (j + 1 == spine.size()) write_slot(args.back(), 0);
    }
    return root;
  }

  void prepare_consts(const Term& t) {
    for (const Term& a : t->args)
      if (a->is_int() || a->is_atom()) const_reg(immediate(a));
  }

  void write_slot(const Term& a, std::uint16_t prebuilt) {
    switch (a->kind) {
      case TermNode::Kind::Var: {
        auto it = regs_.find(a->var_id);
        if (it != regs_.end()) {
          emit({Op::WriteValue, it->second});
        } else {
          std::uint16_t t = alloc_temp();
          regs_[a->var_id] = t;
          emit({Op::WriteVariable, t});
        }
        break;
      }
      case TermNode::Kind::Int:
        emit({Op::WriteValue, const_reg(immediate(a))});
        break;
      case TermNode::Kind::Fun:
        if (a->args.empty())
          emit({Op::WriteValue, const_reg(immediate(a))});
        else
          emit({Op::WriteValue, prebuilt});
        break;
    }
  }

  // ---- body argument staging ----

  struct ArgSource {
    enum class Kind { InReg, Imm } kind;
    std::uint16_t reg = 0;
    Word imm = 0;
  };

  void compile_body() {
    const Term& g = b_.body;
    std::uint32_t m = static_cast<std::uint32_t>(g->args.size());
    if (m > kMaxRegisters) throw CompileError("goal arity exceeds registers");
    std::vector<ArgSource> src(m);
    // Structure arguments first: building them materializes the variables
    // they share with top-level arguments.
    for (std::uint32_t j = 0; j < m; ++j) {
      const Term& a = g->args[j];
      if (a->is_fun() && !a->args.empty())
        src[j] = {ArgSource::Kind::InReg, build_struct(a), 0};
    }
    for (std::uint32_t j = 0; j < m; ++j) {
      const Term& a = g->args[j];
      switch (a->kind) {
        case TermNode::Kind::Var: {
          auto it = regs_.find(a->var_id);
          std::uint16_t r;
          if (it != regs_.end()) {
            r = it->second;
          } else {
            r = alloc_temp();
            emit({Op::PutVariable, r});
            regs_[a->var_id] = r;
          }
          src[j] = {ArgSource::Kind::InReg, r, 0};
          break;
        }
        case TermNode::Kind::Int:
          src[j] = {ArgSource::Kind::Imm, 0, immediate(a).raw()};
          break;
        case TermNode::Kind::Fun:
          if (a->args.empty())
            src[j] = {ArgSource::Kind::Imm, 0, immediate(a).raw()};
          break;
      }
    }
    emit_moves(src);
    Instruction ex{Op::Execute};
    ex.w = syms_.functor(g->name, m).raw();
    emit(ex);
  }

  void emit_moves(const std::vector<ArgSource>& src) {
    // Register-to-register moves first (cycle-safe), then immediate loads
    // and fresh variables, which only write their target.
    std::vector<std::pair<std::uint16_t, std::uint16_t>> pending;
    for (std::uint16_t j = 0; j < src.size(); ++j)
      if (src[j].kind == ArgSource::Kind::InReg &&
          src[j].reg != static_cast<std::uint16_t>(j + 1))
        pending.emplace_back(static_cast<std::uint16_t>(j + 1), src[j].reg);
    while (!pending.empty()) {
      bool progressed = false;
      for (std::size_t k = 0; k < pending.size(); ++k) {
        auto [tgt, s] = pending[k];
        bool tgt_is_source = false;
        for (std::size_t l = 0; l < pending.size(); ++l)
          if (l != k && pending[l].second == tgt) tgt_is_source = true;
        if (!tgt_is_source) {
          emit({Op::MoveRegister, tgt, s});
          pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(k));
          progressed = true;
          break;
        }
      }
      if (!progressed) {
        // Break a cycle through a scratch register.
        std::uint16_t scratch = alloc_temp();
        auto [tgt, s] = pending.front();
        emit({Op::MoveRegister, scratch, s});
        for (auto& p : pending)
          if (p.second == s) p.second = scratch;
      }
    }
    for (std::uint16_t j = 0; j < src.size(); ++j) {
      std::uint16_t tgt = static_cast<std::uint16_t>(j + 1);
      if (src[j].kind == ArgSource::Kind::Imm)
        emit({Op::PutStructure, tgt, 0, 0, 0, src[j].imm});
    }
  }

  const BinaryClause& b_;
  SymbolTable& syms_;
  bool compress_;
  Code code_;
  std::unordered_map<std::int64_t, std::uint16_t> regs_;
  std::map<Word, std::uint16_t> const_regs_;
  std::uint16_t next_temp_ = 1;
};

}  // namespace

CompiledClause compile_clause(const BinaryClause& b, SymbolTable& syms,
                              bool term_compression) {
  return ClauseCompiler(b, syms, term_compression).run();
}

}  // namespace binwam

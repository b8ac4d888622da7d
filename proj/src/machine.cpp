#include "binwam/machine.hpp"

#include <iostream>

#include "binwam/session.hpp"

namespace binwam {

namespace {

std::int64_t isqrt(std::int64_t n) {
  if (n < 2) return n;
  std::int64_t x = n, y = (x + 1) / 2;
  while (y < x) {
    x = y;
    y = (x + n / x) / 2;
  }
  return x;
}

}  // namespace

Engine::Engine(Session& sess, std::uint64_t handle, bool root)
    : sess_(sess), handle_(handle), root_(root) {}

Engine::~Engine() { dispose_children(); }

void Engine::load(const HeapStore& src, Cell pattern, Cell goal) {
  heap.reset();
  trail.reset();
  or_stack_.clear();
  regs_.fill(Cell());
  mailbox_.reset();
  stats_ = EngineStats{};
  bool compress = sess_.flags.term_compression;
  std::unordered_map<std::size_t, std::size_t> vmap;
  pattern_ = copy_across(src, heap, pattern, compress, vmap);
  Cell g = copy_across(src, heap, goal, compress, vmap);

  // Arm the initial dispatch: the goal with the atom `true` as continuation.
  Deref d = deref(heap, g);
  std::uint32_t n = d.cell.is_atom() ? 0 : d.cell.arity();
  std::vector<Cell> args;
  for (std::uint32_t i = 1; i <= n; ++i)
    args.push_back(arg_cell(heap, d.addr, i));
  std::size_t f = heap.push(Cell::fun(d.cell.symbol(), n + 1));
  for (Cell a : args) heap.push(a);
  heap.push(sess_.true_atom);
  initial_goal_ = Cell::var(f);

  h0_ = heap.top();
  compact_watermark_ = heap.top() * 2 + 16;
  cut_b_ = 0;
  p_ = 0;
  status_ = EngineStatus::Fresh;
}

void Engine::restore_initial() {
  std::size_t k = 0;
  while (trail.top() > k) {
    const TrailEntry& t = trail[trail.top() - 1];
    if (t.kind == TrailEntry::Kind::Binding)
      heap[t.value] = Cell::var(t.value);
    else
      sess_.dispose_engine(t.value);
    trail.pop();
  }
  heap.truncate(h0_);
  or_stack_.clear();
}

void Engine::note_high_water() {
  if (heap.high_water() > stats_.heap_high_water)
    stats_.heap_high_water = heap.high_water();
}

void Engine::dispose_children() {
  while (trail.top() > 0) {
    const TrailEntry& t = trail[trail.top() - 1];
    if (t.kind == TrailEntry::Kind::EngineRef) sess_.dispose_engine(t.value);
    trail.pop();
  }
}

void Engine::stop() {
  dispose_children();
  status_ = EngineStatus::Stopped;
  heap.reset();
  trail.reset();
  or_stack_.clear();
  mailbox_.reset();
}

void Engine::mailbox_put(const HeapStore& src, Cell term) {
  mailbox_ = std::make_unique<Mailbox>();
  mailbox_->root = copy_across(src, mailbox_->store, term,
                               sess_.flags.term_compression);
}

Cell Engine::mailbox_take() {
  Cell r = copy_across(mailbox_->store, heap, mailbox_->root,
                       sess_.flags.term_compression);
  mailbox_.reset();
  return r;
}

// ---------------------------------------------------------------------------
// The decode-execute loop. One Interpreter drives one resume() of one engine;
// nested engines run through their own interpreters (get/2 recursion).
// ---------------------------------------------------------------------------

class Interpreter {
 public:
  explicit Interpreter(Engine& e) : e_(e), s_(e.sess_) {}

  Outcome drive(EngineStatus from) {
    switch (from) {
      case EngineStatus::Fresh:
        if (!dispatch_cont(e_.initial_goal_)) return take_outcome();
        break;
      case EngineStatus::AtAnswer:
        if (!backtrack()) return {Outcome::Kind::Failed};
        break;
      case EngineStatus::Yielded:
        if (!dispatch_cont(e_.resume_cont_)) return take_outcome();
        break;
      default:
        return error(mk1("state_error", atom("engine")));
    }
    return loop();
  }

 private:
  HeapStore& heap() { return e_.heap; }
  Trail& trail() { return e_.trail; }
  Cell& reg(std::uint16_t i) { return e_.regs_[i]; }

  std::size_t barrier() const {
    return e_.or_stack_.empty() ? e_.h0_ : e_.or_stack_.back().saved_h;
  }

  Outcome take_outcome() {
    Outcome o = *done_;
    done_.reset();
    return o;
  }

  // ---- term helpers (cells in this engine's heap) ----

  Cell atom(const char* n) { return s_.syms.atom(n); }

  Cell mk1(const char* f, Cell a) {
    std::size_t p = heap().push(s_.syms.functor(f, 1));
    heap().push(a);
    return Cell::var(p);
  }

  Cell mk2(const char* f, Cell a, Cell b) {
    std::size_t p = heap().push(s_.syms.functor(f, 2));
    heap().push(a);
    heap().push(b);
    return Cell::var(p);
  }

  Cell functor_indicator(Cell f) {
    return mk2("/", Cell::fun(f.symbol(), 0),
               Cell::integer(static_cast<std::int64_t>(f.arity())));
  }

  Outcome error(Cell t) { return {Outcome::Kind::Error, t}; }

  bool err(Cell t) {
    done_ = Outcome{Outcome::Kind::Error, t};
    return false;
  }

  bool err_existence(Cell functor) {
    return err(mk1("existence_error", functor_indicator(functor)));
  }

  // ---- control ----

  bool dispatch_functor(Word w) {
    const PredicateEntry* pe = s_.find_predicate(w);
    if (!pe) return err_existence(Cell(w));
    e_.cut_b_ = e_.or_stack_.size();
    e_.p_ = pe->addr;
    return true;
  }

  bool dispatch_cont(Cell c) {
    c = e_.maybe_compact_at_dispatch(c);
    Deref d = deref(heap(), c);
    if (d.unbound) return err(atom("instantiation_error"));
    if (d.cell.is_int())
      return err(mk2("type_error", atom("callable"), d.cell));
    if (d.cell.is_atom()) {
      if (d.cell == s_.true_atom) {
        done_ = Outcome{Outcome::Kind::Answer};
        return false;
      }
      return err(mk2("type_error", atom("callable"), d.cell));
    }
    const PredicateEntry* pe = s_.find_predicate(d.cell.raw());
    if (!pe) return err_existence(d.cell);
    std::uint32_t n = d.cell.arity();
    for (std::uint32_t i = 1; i <= n; ++i)
      reg(static_cast<std::uint16_t>(i)) = arg_cell(heap(), d.addr, i);
    e_.cut_b_ = e_.or_stack_.size();
    e_.p_ = pe->addr;
    return true;
  }

  bool backtrack() {
    if (e_.or_stack_.empty()) return false;
    ChoiceFrame& f = e_.or_stack_.back();
    heap().truncate(f.saved_h);
    untrail(f.saved_tr);
    for (std::size_t i = 0; i < f.args.size(); ++i)
      e_.regs_[i + 1] = f.args[i];
    e_.cut_b_ = e_.or_stack_.size() - 1;
    e_.p_ = f.next;
    return true;
  }

  void untrail(std::size_t n) {
    while (trail().top() > n) {
      const TrailEntry& t = trail()[trail().top() - 1];
      if (t.kind == TrailEntry::Kind::Binding)
        heap()[t.value] = Cell::var(t.value);
      else
        s_.dispose_engine(t.value);
      trail().pop();
    }
  }

  void trim_choices(std::size_t k) {
    if (e_.or_stack_.size() > k) e_.or_stack_.resize(k);
  }

  // ---- arithmetic ----

  bool eval(Cell c, std::int64_t& out) {
    Deref d = deref(heap(), c);
    if (d.unbound) return err(atom("instantiation_error"));
    if (d.cell.is_int()) {
      out = d.cell.int_value();
      return true;
    }
    if (d.cell.is_atom())
      return err(mk2("type_error", atom("evaluable"),
                     functor_indicator(d.cell)));
    const std::string& n = s_.syms.name(d.cell.symbol());
    std::uint32_t ar = d.cell.arity();
    if (ar == 2) {
      std::int64_t x, y;
      if (!eval(arg_cell(heap(), d.addr, 1), x)) return false;
      if (!eval(arg_cell(heap(), d.addr, 2), y)) return false;
      std::int64_t r = 0;
      if (n == "+") {
        if (__builtin_add_overflow(x, y, &r)) return overflow();
      } else if (n == "-") {
        if (__builtin_sub_overflow(x, y, &r)) return overflow();
      } else if (n == "*") {
        if (__builtin_mul_overflow(x, y, &r)) return overflow();
      } else if (n == "//") {
        if (y == 0) return err(mk1("evaluation_error", atom("zero_divisor")));
        r = x / y;
      } else if (n == "mod") {
        if (y == 0) return err(mk1("evaluation_error", atom("zero_divisor")));
        r = x % y;
        if (r != 0 && ((r < 0) != (y < 0))) r += y;
      } else if (n == "min") {
        r = x < y ? x : y;
      } else if (n == "max") {
        r = x > y ? x : y;
      } else {
        return err(mk2("type_error", atom("evaluable"),
                       functor_indicator(d.cell)));
      }
      if (r > kIntMax || r < kIntMin) return overflow();
      out = r;
      return true;
    }
    if (ar == 1) {
      std::int64_t x;
      if (!eval(arg_cell(heap(), d.addr, 1), x)) return false;
      if (n == "-") {
        out = -x;
        return true;
      }
      if (n == "+" || n == "integer") {
        out = x;
        return true;
      }
      if (n == "abs") {
        out = x < 0 ? -x : x;
        return true;
      }
      if (n == "sqrt") {
        if (x < 0) return err(mk1("evaluation_error", atom("undefined")));
        out = isqrt(x);
        return true;
      }
    }
    return err(mk2("type_error", atom("evaluable"), functor_indicator(d.cell)));
  }

  bool overflow() { return err(mk1("evaluation_error", atom("int_overflow"))); }

  // Structural identity without binding (==/2).
  bool term_identical(Cell a, Cell b) {
    Deref x = deref(heap(), a), y = deref(heap(), b);
    if (x.unbound || y.unbound) return x.unbound && y.unbound && x.addr == y.addr;
    if (x.cell.raw() != y.cell.raw()) return false;
    if (!x.is_struct()) return true;
    if (x.addr == y.addr) return true;
    for (std::uint32_t i = 1; i <= x.cell.arity(); ++i)
      if (!term_identical(arg_cell(heap(), x.addr, i),
                          arg_cell(heap(), y.addr, i)))
        return false;
    return true;
  }

  bool unify_cells(Cell a, Cell b) {
    return unify(heap(), trail(), barrier(), a, b);
  }

  // ---- main loop ----

  Outcome loop() {
    for (;;) {
      if (done_) return take_outcome();
      if (heap().top() > s_.flags.heap_limit)
        return error(mk1("resource_error", atom("heap")));
      const Instruction& I = s_.code[e_.p_];
      ++e_.stats_.instructions;
      ++s_.stats.instructions;
      if (s_.flags.trace)
        std::cerr << "[e" << e_.handle_ << " @" << e_.p_ << "] "
                  << disassemble(I, s_.syms) << "\n";
      bool ok = step(I);
      if (done_) return take_outcome();
      if (!ok && !backtrack()) return {Outcome::Kind::Failed};
    }
  }

  bool step(const Instruction& I) {
    switch (I.op) {
      case Op::GetStructure:
        ++e_.p_;
        return get_structure(I.a, I.w);
      case Op::UnifyVariable:
        ++e_.p_;
        unify_variable(I.a);
        return true;
      case Op::UnifyValue:
        ++e_.p_;
        return unify_value(I.a);
      case Op::PutStructure:
        ++e_.p_;
        put_structure(I.a, I.w);
        return true;
      case Op::PutVariable:
      case Op::WriteVariable:
        ++e_.p_;
        reg(I.a) = Cell::var(heap().push_var());
        return true;
      case Op::WriteValue:
        ++e_.p_;
        heap().push(reg(I.a));
        return true;
      case Op::MoveRegister:
        ++e_.p_;
        reg(I.a) = reg(I.b);
        return true;
      case Op::Execute:
        return dispatch_functor(I.w);
      case Op::Proceed:
        return dispatch_cont(reg(1));
      case Op::NonDet:
        pending_arity_ = I.a;
        ++e_.p_;
        return true;
      case Op::TryMeElse:
        push_frame(I.p1);
        ++e_.p_;
        return true;
      case Op::RetryMeElse:
        e_.or_stack_.back().next = I.p1;
        ++e_.p_;
        return true;
      case Op::TrustMe:
        e_.or_stack_.pop_back();
        ++e_.p_;
        return true;
      case Op::Switch:
        return do_switch(I.w);
      case Op::JumpIf:
        return do_jump_if(I.w2, I.p1, I.p2);
      case Op::PushCut:
        trim_choices(e_.cut_b_);
        ++e_.p_;
        return true;
      case Op::PutCut:
        reg(I.a) = Cell::integer(static_cast<std::int64_t>(e_.cut_b_));
        ++e_.p_;
        return true;
      case Op::GetCut: {
        Deref d = deref(heap(), reg(I.a));
        if (!d.cell.is_int()) return err(mk1("state_error", atom("cut")));
        trim_choices(static_cast<std::size_t>(d.cell.int_value()));
        ++e_.p_;
        return true;
      }
      case Op::ArithLt:
      case Op::ArithGt:
      case Op::ArithLe:
      case Op::ArithGe:
      case Op::ArithEq:
      case Op::ArithNe: {
        std::int64_t x, y;
        if (!eval(reg(I.a), x) || !eval(reg(I.b), y)) return false;
        ++e_.p_;
        switch (I.op) {
          case Op::ArithLt: return x < y;
          case Op::ArithGt: return x > y;
          case Op::ArithLe: return x <= y;
          case Op::ArithGe: return x >= y;
          case Op::ArithEq: return x == y;
          default: return x != y;
        }
      }
      case Op::ArithIs: {
        std::int64_t v;
        if (!eval(reg(I.b), v)) return false;
        ++e_.p_;
        if (I.c) {
          reg(I.a) = Cell::integer(v);
          return true;
        }
        return unify_cells(reg(I.a), Cell::integer(v));
      }
      case Op::UnifyRegs:
        ++e_.p_;
        return unify_cells(reg(I.a), reg(I.b));
      case Op::TermEq:
        ++e_.p_;
        return term_identical(reg(I.a), reg(I.b));
      case Op::TermNe:
        ++e_.p_;
        return !term_identical(reg(I.a), reg(I.b));
      case Op::TypeVar:
      case Op::TypeNonvar:
      case Op::TypeAtom:
      case Op::TypeInteger: {
        Deref d = deref(heap(), reg(I.a));
        ++e_.p_;
        switch (I.op) {
          case Op::TypeVar: return d.unbound;
          case Op::TypeNonvar: return !d.unbound;
          case Op::TypeAtom: return !d.unbound && d.cell.is_atom();
          default: return !d.unbound && d.cell.is_int();
        }
      }
      case Op::FunctorTest: {
        Deref d = deref(heap(), reg(I.a));
        if (d.unbound) return err(atom("instantiation_error"));
        ++e_.p_;
        Cell name, arity;
        if (d.is_struct()) {
          name = Cell::fun(d.cell.symbol(), 0);
          arity = Cell::integer(d.cell.arity());
        } else {
          name = d.cell;
          arity = Cell::integer(0);
        }
        return unify_cells(reg(I.b), name) && unify_cells(reg(I.c), arity);
      }

      case Op::UnifyVarVar:
        ++e_.p_;
        unify_variable(I.a);
        unify_variable(I.b);
        return true;
      case Op::UnifyVarVal:
        ++e_.p_;
        unify_variable(I.a);
        return unify_value(I.b);
      case Op::UnifyValVar:
        ++e_.p_;
        if (!unify_value(I.a)) return false;
        unify_variable(I.b);
        return true;
      case Op::UnifyValVal:
        ++e_.p_;
        return unify_value(I.a) && unify_value(I.b);
      case Op::WriteVarVar:
        ++e_.p_;
        write_variable(I.a);
        write_variable(I.b);
        return true;
      case Op::WriteVarVal:
        ++e_.p_;
        write_variable(I.a);
        return write_value(I.b);
      case Op::WriteValVar:
        ++e_.p_;
        if (!write_value(I.a)) return false;
        write_variable(I.b);
        return true;
      case Op::WriteValVal:
        ++e_.p_;
        return write_value(I.a) && write_value(I.b);
      case Op::GetUnifyVarVar:
        ++e_.p_;
        if (!get_structure(I.a, I.w)) return false;
        unify_variable(I.b);
        unify_variable(I.c);
        return true;
      case Op::GetUnifyVarVal:
        ++e_.p_;
        if (!get_structure(I.a, I.w)) return false;
        unify_variable(I.b);
        return unify_value(I.c);
      case Op::GetUnifyValVar:
        ++e_.p_;
        if (!get_structure(I.a, I.w) || !unify_value(I.b)) return false;
        unify_variable(I.c);
        return true;
      case Op::GetUnifyValVal:
        ++e_.p_;
        return get_structure(I.a, I.w) && unify_value(I.b) &&
               unify_value(I.c);
      case Op::PutWriteVarVar:
        ++e_.p_;
        put_structure(I.a, I.w);
        write_variable(I.b);
        write_variable(I.c);
        return true;
      case Op::PutWriteVarVal:
        ++e_.p_;
        put_structure(I.a, I.w);
        write_variable(I.b);
        return write_value(I.c);
      case Op::PutWriteValVar:
        ++e_.p_;
        put_structure(I.a, I.w);
        if (!write_value(I.b)) return false;
        write_variable(I.c);
        return true;
      case Op::PutWriteValVal:
        ++e_.p_;
        put_structure(I.a, I.w);
        return write_value(I.b) && write_value(I.c);
      case Op::MoveRegX2:
        ++e_.p_;
        reg(I.a) = reg(I.b);
        reg(I.c) = reg(I.d);
        return true;
      case Op::ExecSwitch: {
        const PredicateEntry* pe = s_.find_predicate(I.w);
        if (!pe) return err_existence(Cell(I.w));
        e_.cut_b_ = e_.or_stack_.size();
        if (s_.code[pe->addr].op != Op::Switch) {
          e_.p_ = pe->addr;
          return true;
        }
        Deref d = deref(heap(), reg(1));
        if (d.unbound) {
          e_.p_ = pe->addr + 1;
          return true;
        }
        auto v = s_.dict.get(I.w, d.cell.raw());
        if (!v) return false;
        e_.p_ = static_cast<std::size_t>(*v);
        return true;
      }
      case Op::ExecJumpIf: {
        const PredicateEntry* pe = s_.find_predicate(I.w);
        if (!pe) return err_existence(Cell(I.w));
        e_.cut_b_ = e_.or_stack_.size();
        const Instruction& J = s_.code[pe->addr];
        if (J.op != Op::JumpIf) {
          e_.p_ = pe->addr;
          return true;
        }
        Deref d = deref(heap(), reg(1));
        if (d.unbound)
          e_.p_ = pe->addr + 1;
        else
          e_.p_ = d.cell.raw() == J.w2 ? J.p1 : J.p2;
        return true;
      }
      case Op::Builtin:
        return builtin(static_cast<BuiltinId>(I.a), I.b);
    }
    return err(mk1("state_error", atom("bad_opcode")));
  }

  // ---- unification micro-steps shared by plain and fused opcodes ----

  bool get_structure(std::uint16_t r, Word w) {
    Cell wc(w);
    Deref d = deref(heap(), reg(r));
    if (wc.is_struct()) {
      if (d.unbound) {
        std::size_t f = heap().push(wc);
        bind(heap(), trail(), barrier(), d.addr, Cell::var(f));
        write_mode_ = true;
        return true;
      }
      if (d.is_struct() && d.cell.raw() == w) {
        s_ptr_ = d.addr + 1;
        write_mode_ = false;
        return true;
      }
      return false;
    }
    if (d.unbound) {
      bind(heap(), trail(), barrier(), d.addr, wc);
      return true;
    }
    return d.cell.raw() == w;
  }

  void unify_variable(std::uint16_t r) {
    if (write_mode_)
      reg(r) = Cell::var(heap().push_var());
    else
      reg(r) = slot_cell(heap(), s_ptr_++);
  }

  bool unify_value(std::uint16_t r) {
    if (write_mode_) {
      heap().push(reg(r));
      return true;
    }
    return unify_cells(reg(r), slot_cell(heap(), s_ptr_++));
  }

  void put_structure(std::uint16_t r, Word w) {
    Cell wc(w);
    if (wc.is_struct()) {
      std::size_t f = heap().push(wc);
      reg(r) = Cell::var(f);
    } else {
      reg(r) = wc;
    }
  }

  void write_variable(std::uint16_t r) {
    reg(r) = Cell::var(heap().push_var());
  }

  bool write_value(std::uint16_t r) {
    heap().push(reg(r));
    return true;
  }

  void push_frame(std::uint32_t alternative) {
    ChoiceFrame f;
    f.next = alternative;
    f.saved_h = heap().top();
    f.saved_tr = trail().top();
    f.args.assign(e_.regs_.begin() + 1, e_.regs_.begin() + 1 + pending_arity_);
    e_.or_stack_.push_back(std::move(f));
    ++e_.stats_.choice_points;
    ++s_.stats.choice_points;
  }

  bool do_switch(Word own) {
    Deref d = deref(heap(), reg(1));
    if (d.unbound) {
      ++e_.p_;
      return true;
    }
    auto v = s_.dict.get(own, d.cell.raw());
    if (!v) return false;
    e_.p_ = static_cast<std::size_t>(*v);
    return true;
  }

  bool do_jump_if(Word key, std::uint32_t p1, std::uint32_t p2) {
    Deref d = deref(heap(), reg(1));
    if (d.unbound) {
      ++e_.p_;
      return true;
    }
    e_.p_ = d.cell.raw() == key ? p1 : p2;
    return true;
  }

  // ---- native builtins ----

  bool builtin(BuiltinId id, std::uint16_t nregs) {
    switch (id) {
      case BuiltinId::Fail:
        return false;
      case BuiltinId::Call:
        return bi_call(nregs);
      case BuiltinId::NewEngine:
        return bi_new_engine();
      case BuiltinId::Get:
        return bi_get();
      case BuiltinId::Stop:
        return bi_stop();
      case BuiltinId::Return:
        return bi_return();
      case BuiltinId::ToEngine:
        return bi_to_engine();
      case BuiltinId::FromEngine:
        return bi_from_engine();
      case BuiltinId::LoadEngine:
        return bi_load_engine();
      case BuiltinId::HeapTop: {
        Cell v = Cell::integer(static_cast<std::int64_t>(heap().top()));
        if (!unify_cells(reg(1), v)) return false;
        return dispatch_cont(reg(2));
      }
      case BuiltinId::Between:
        return bi_between();
      case BuiltinId::BetweenRetry:
        return bi_between_retry();
    }
    return err(mk1("state_error", atom("bad_builtin")));
  }

  // between/3 binds its output to successive integers by reusing one choice
  // frame; no heap is consumed per step.
  bool bi_between() {
    std::int64_t lo, hi;
    if (!eval(reg(1), lo) || !eval(reg(2), hi)) return false;
    Cell cont = reg(4);
    Deref x = deref(heap(), reg(3));
    if (!x.unbound) {
      if (!x.cell.is_int()) return false;
      std::int64_t v = x.cell.int_value();
      if (v < lo || v > hi) return false;
      return dispatch_cont(cont);
    }
    if (lo > hi) return false;
    if (lo < hi) {
      ChoiceFrame f;
      f.next = s_.between_retry_addr;
      f.saved_h = heap().top();
      f.saved_tr = trail().top();
      f.args = {Cell::integer(lo + 1), Cell::integer(hi), Cell::var(x.addr),
                cont};
      e_.or_stack_.push_back(std::move(f));
      ++e_.stats_.choice_points;
      ++s_.stats.choice_points;
    }
    bind(heap(), trail(), barrier(), x.addr, Cell::integer(lo));
    return dispatch_cont(cont);
  }

  bool bi_between_retry() {
    std::int64_t cur = deref(heap(), reg(1)).cell.int_value();
    std::int64_t hi = deref(heap(), reg(2)).cell.int_value();
    Cell xref = reg(3), cont = reg(4);
    if (cur < hi)
      e_.or_stack_.back().args[0] = Cell::integer(cur + 1);
    else
      e_.or_stack_.pop_back();
    Deref x = deref(heap(), xref);
    bind(heap(), trail(), barrier(), x.addr, Cell::integer(cur));
    return dispatch_cont(cont);
  }

  bool bi_call(std::uint16_t nregs) {
    Deref g = deref(heap(), reg(1));
    if (g.unbound) return err(atom("instantiation_error"));
    if (g.cell.is_int())
      return err(mk2("type_error", atom("callable"), g.cell));
    std::uint16_t extras = static_cast<std::uint16_t>(nregs - 2);
    std::vector<Cell> xs(extras);
    for (std::uint16_t i = 0; i < extras; ++i) xs[i] = reg(i + 2);
    Cell cont = reg(nregs);
    std::uint32_t m = g.cell.is_atom() ? 0 : g.cell.arity();
    std::uint32_t target_arity = m + extras + 1;
    if (target_arity > kMaxRegisters)
      return err_existence(Cell::fun(g.cell.symbol(), target_arity));
    std::vector<Cell> gargs(m);
    for (std::uint32_t i = 1; i <= m; ++i)
      gargs[i - 1] = arg_cell(heap(), g.addr, i);
    for (std::uint32_t i = 0; i < m; ++i)
      reg(static_cast<std::uint16_t>(i + 1)) = gargs[i];
    for (std::uint16_t i = 0; i < extras; ++i)
      reg(static_cast<std::uint16_t>(m + 1 + i)) = xs[i];
    reg(static_cast<std::uint16_t>(target_arity)) = cont;
    return dispatch_functor(Cell::fun(g.cell.symbol(), target_arity).raw());
  }

  bool check_callable(Cell goal) {
    Deref g = deref(heap(), goal);
    if (g.unbound) return err(atom("instantiation_error"));
    if (g.cell.is_int())
      return err(mk2("type_error", atom("callable"), g.cell));
    return true;
  }

  bool bi_new_engine() {
    Cell pattern = reg(1), goal = reg(2), out = reg(3), cont = reg(4);
    if (!check_callable(goal)) return false;
    Engine* ne = s_.create_engine();
    ne->load(heap(), pattern, goal);
    trail().push_engine(ne->handle());
    if (!unify_cells(out, Cell::integer(
                              static_cast<std::int64_t>(ne->handle()))))
      return false;
    return dispatch_cont(cont);
  }

  Engine* engine_arg(Cell h, bool allow_stopped, bool& failed) {
    failed = true;
    Deref d = deref(heap(), h);
    if (d.unbound) {
      err(atom("instantiation_error"));
      return nullptr;
    }
    if (!d.cell.is_int()) {
      err(mk2("type_error", atom("engine"), d.cell));
      return nullptr;
    }
    Engine* t = s_.find_engine(static_cast<std::uint64_t>(d.cell.int_value()));
    if (!t || (!allow_stopped && t->status() == EngineStatus::Stopped)) {
      err(mk1("existence_error", atom("engine")));
      return nullptr;
    }
    failed = false;
    return t;
  }

  bool bi_get() {
    Cell out = reg(2), cont = reg(3);
    bool bad;
    Engine* t = engine_arg(reg(1), false, bad);
    if (bad) return false;
    if (t->status() == EngineStatus::Running)
      return err(mk1("protocol_error", atom("engine_busy")));
    Cell ans;
    if (t->status() == EngineStatus::Done) {
      ans = atom("no");
    } else {
      Outcome o = t->resume();
      switch (o.kind) {
        case Outcome::Kind::Answer: {
          Cell inst = copy_across(t->heap, heap(), t->pattern_cell(),
                                  s_.flags.term_compression);
          ans = mk1("the", inst);
          break;
        }
        case Outcome::Kind::Returned: {
          Cell inst =
              copy_across(t->heap, heap(), o.cell, s_.flags.term_compression);
          ans = mk1("the", inst);
          break;
        }
        case Outcome::Kind::Failed:
          ans = atom("no");
          break;
        case Outcome::Kind::Error: {
          Cell inst =
              copy_across(t->heap, heap(), o.cell, s_.flags.term_compression);
          ans = mk1("the", mk1("exception", inst));
          break;
        }
      }
    }
    if (!unify_cells(out, ans)) return false;
    return dispatch_cont(cont);
  }

  bool bi_stop() {
    Deref d = deref(heap(), reg(1));
    if (d.cell.is_int()) {
      Engine* t =
          s_.find_engine(static_cast<std::uint64_t>(d.cell.int_value()));
      if (t && t->status() != EngineStatus::Stopped &&
          t->status() != EngineStatus::Running)
        t->stop();
    }
    return dispatch_cont(reg(2));
  }

  bool bi_return() {
    e_.resume_cont_ = reg(2);
    Cell value = reg(1);
    if (e_.or_stack_.empty()) value = e_.compact_at_return(value);
    done_ = Outcome{Outcome::Kind::Returned, value};
    return false;
  }

  bool bi_to_engine() {
    Cell term = reg(2), cont = reg(3);
    bool bad;
    Engine* t = engine_arg(reg(1), false, bad);
    if (bad) return false;
    if (t->mailbox_full())
      return err(mk1("protocol_error", atom("mailbox_full")));
    t->mailbox_put(heap(), term);
    return dispatch_cont(cont);
  }

  bool bi_from_engine() {
    if (!e_.mailbox_full())
      return err(mk1("protocol_error", atom("mailbox_empty")));
    Cell msg = e_.mailbox_take();
    if (!unify_cells(reg(1), msg)) return false;
    return dispatch_cont(reg(2));
  }

  bool bi_load_engine() {
    Cell pattern = reg(2), goal = reg(3), cont = reg(4);
    bool bad;
    Engine* t = engine_arg(reg(1), true, bad);
    if (bad) return false;
    if (t->status() != EngineStatus::Stopped &&
        t->status() != EngineStatus::Done)
      return err(mk1("state_error", atom("engine_active")));
    if (!check_callable(goal)) return false;
    t->load(heap(), pattern, goal);
    return dispatch_cont(cont);
  }

  Engine& e_;
  Session& s_;
  std::optional<Outcome> done_;
  bool write_mode_ = false;
  std::size_t s_ptr_ = 0;
  std::uint16_t pending_arity_ = 0;
};

Outcome Engine::resume() {
  if (status_ == EngineStatus::Done || status_ == EngineStatus::Stopped)
    return {Outcome::Kind::Failed};
  EngineStatus from = status_;
  status_ = EngineStatus::Running;
  Interpreter in(*this);
  Outcome o;
  try {
    o = in.drive(from);
  } catch (const TermCorruption&) {
    std::size_t p = heap.push(sess_.syms.functor("state_error", 1));
    heap.push(sess_.syms.atom("corrupt_term"));
    o = {Outcome::Kind::Error, Cell::var(p)};
  }
  switch (o.kind) {
    case Outcome::Kind::Answer:
      status_ = EngineStatus::AtAnswer;
      break;
    case Outcome::Kind::Returned:
      status_ = EngineStatus::Yielded;
      break;
    case Outcome::Kind::Failed:
      restore_initial();
      status_ = EngineStatus::Done;
      break;
    case Outcome::Kind::Error:
      status_ = EngineStatus::Done;
      break;
  }
  note_high_water();
  return o;
}

// With an empty OR-stack no backtracking can reach the current heap, so a
// live-copy rooted at the answer pattern plus `roots` drops every dead cell
// and binding. This is what keeps infinitely yielding (or infinitely
// recursing) engines in bounded space.
std::vector<Cell> Engine::compact_live(std::vector<Cell> roots) {
  note_high_water();
  bool compress = sess_.flags.term_compression;
  HeapStore fresh;
  std::unordered_map<std::size_t, std::size_t> vmap;
  pattern_ = copy_across(heap, fresh, pattern_, compress, vmap);
  for (Cell& r : roots) r = copy_across(heap, fresh, r, compress, vmap);

  std::vector<std::uint64_t> live;
  for (std::size_t i = 0; i < trail.top(); ++i) {
    const TrailEntry& t = trail[i];
    if (t.kind != TrailEntry::Kind::EngineRef) continue;
    Engine* c = sess_.find_engine(t.value);
    if (!c) continue;
    if (c->status() == EngineStatus::Stopped ||
        c->status() == EngineStatus::Done)
      sess_.dispose_engine(t.value);
    else
      live.push_back(t.value);
  }
  trail.reset();
  for (std::uint64_t h : live) trail.push_engine(h);

  heap = std::move(fresh);
  h0_ = heap.top();
  compact_watermark_ = heap.top() * 2 + 16;
  regs_.fill(Cell());
  return roots;
}

Cell Engine::compact_at_return(Cell value) {
  auto moved = compact_live({resume_cont_, value});
  resume_cont_ = moved[0];
  return moved[1];
}

// Continuation dispatch is a quiescent point: the machine state is exactly
// the pattern plus the continuation about to run. Gated by a watermark so
// copying stays amortized.
Cell Engine::maybe_compact_at_dispatch(Cell cont) {
  if (!or_stack_.empty() || heap.top() <= compact_watermark_) return cont;
  resume_cont_ = Cell();
  return compact_live({cont})[0];
}

}  // namespace binwam

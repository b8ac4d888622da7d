#include "binwam/session.hpp"

#include <fstream>
#include <sstream>

#include "binwam/writer.hpp"
#include "kernel_source.hpp"

namespace binwam {

Session::Session(Flags f, const std::optional<std::string>& kernel_override)
    : flags(f) {
  def_key_ = syms.atom("$def").raw();
  true_atom = syms.atom("true");
  true_functor = syms.functor("true", 1);
  cons_functor = syms.functor(".", 2);
  nil_atom = syms.atom("[]");
  boot(kernel_override);
}

void Session::register_native(const std::string& name, std::uint32_t arity,
                              Code stub) {
  Cell f = syms.functor(name, arity);
  PredicateEntry pe;
  pe.functor = f;
  pe.cls = PredClass::Native;
  pe.addr = static_cast<std::uint32_t>(code.size());
  pe.clause_count = 0;
  pe.mark = Mark::Kernel;
  for (const Instruction& i : stub) code.push_back(i);
  pe.code_end = static_cast<std::uint32_t>(code.size());
  preds_.push_back(pe);
  dict.put(f.raw(), def_key_, preds_.size() - 1, Mark::Kernel);
}

void Session::boot(const std::optional<std::string>& kernel_override) {
  register_native("true", 1, {{Op::Proceed}});
  register_native("fail", 1, {{Op::Builtin, (std::uint16_t)BuiltinId::Fail, 1}});
  register_native("$cut", 2,
                  {{Op::GetCut, 1}, {Op::MoveRegister, 1, 2}, {Op::Proceed}});
  for (std::uint16_t n = 2; n <= 8; ++n)
    register_native("call", n,
                    {{Op::Builtin, (std::uint16_t)BuiltinId::Call, n}});
  register_native("new_engine", 4,
                  {{Op::Builtin, (std::uint16_t)BuiltinId::NewEngine, 4}});
  register_native("get", 3, {{Op::Builtin, (std::uint16_t)BuiltinId::Get, 3}});
  register_native("stop", 2,
                  {{Op::Builtin, (std::uint16_t)BuiltinId::Stop, 2}});
  register_native("return", 2,
                  {{Op::Builtin, (std::uint16_t)BuiltinId::Return, 2}});
  register_native("to_engine", 3,
                  {{Op::Builtin, (std::uint16_t)BuiltinId::ToEngine, 3}});
  register_native("from_engine", 2,
                  {{Op::Builtin, (std::uint16_t)BuiltinId::FromEngine, 2}});
  register_native("load_engine", 4,
                  {{Op::Builtin, (std::uint16_t)BuiltinId::LoadEngine, 4}});
  register_native("$heap_top", 2,
                  {{Op::Builtin, (std::uint16_t)BuiltinId::HeapTop, 2}});
  register_native("between", 4,
                  {{Op::Builtin, (std::uint16_t)BuiltinId::Between, 4}});
  between_retry_addr = static_cast<std::uint32_t>(code.size());
  code.push_back({Op::Builtin, (std::uint16_t)BuiltinId::BetweenRetry, 4});

  consult_text(kernel_override ? *kernel_override : kKernelSource,
               Mark::Kernel);
  dict.seal();
}

const PredicateEntry* Session::find_predicate(Word functor) const {
  auto v = dict.get(functor, def_key_);
  if (!v) return nullptr;
  return &preds_[static_cast<std::size_t>(*v)];
}

void Session::consult_text(const std::string& source, Mark mark) {
  auto clauses = parse_program(source);
  std::vector<std::pair<Cell, std::vector<CompiledClause>>> groups;
  std::unordered_map<Word, std::size_t> index;
  for (const ReadClause& rc : clauses) {
    for (const BinaryClause& bc :
         binarize_clause(rc, aux_counter_, var_counter_)) {
      CompiledClause cc = compile_clause(bc, syms, flags.term_compression);
      Word w = cc.functor.raw();
      auto it = index.find(w);
      if (it == index.end()) {
        index.emplace(w, groups.size());
        groups.push_back({cc.functor, {}});
        it = index.find(w);
      }
      groups[it->second].second.push_back(std::move(cc));
    }
  }
  for (auto& g : groups) load_predicate(g.first, std::move(g.second), mark);
  if (flags.instr_compression) fuse_calls();
}

void Session::consult_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  consult_text(buf.str(), Mark::User);
}

void Session::load_predicate(Cell functor,
                             std::vector<CompiledClause> clauses, Mark mark) {
  if (const PredicateEntry* old = find_predicate(functor.raw())) {
    if (old->mark == Mark::Kernel)
      throw ProtectionError("redefinition of kernel predicate " +
                            syms.functor_name(functor));
    throw CompileError("redefinition of predicate " +
                       syms.functor_name(functor));
  }
  if (flags.instr_compression)
    for (auto& c : clauses) fuse_clause(c.code);

  PredClass cls;
  if (clauses.size() == 1) {
    cls = PredClass::Single;
  } else {
    bool det = true;
    for (std::size_t i = 0; i < clauses.size() && det; ++i) {
      if (!clauses[i].first_arg_key) det = false;
      for (std::size_t j = 0; j < i && det; ++j)
        if (*clauses[i].first_arg_key == *clauses[j].first_arg_key)
          det = false;
    }
    cls = det ? PredClass::Deterministic : PredClass::Nondeterministic;
  }

  std::uint32_t base = static_cast<std::uint32_t>(code.size());
  std::uint16_t arity = static_cast<std::uint16_t>(functor.arity());
  std::vector<std::uint32_t> clause_addr(clauses.size());

  if (cls == PredClass::Single) {
    clause_addr[0] = base;
    for (const Instruction& i : clauses[0].code) code.push_back(i);
  } else if (cls == PredClass::Deterministic && clauses.size() == 2) {
    // JUMP_IF, then a try chain for the unbound-first-argument case.
    std::uint32_t c1 = base + 3;
    std::uint32_t trust = c1 + static_cast<std::uint32_t>(clauses[0].code.size());
    std::uint32_t c2 = trust + 1;
    Instruction j{Op::JumpIf};
    j.w = functor.raw();
    j.w2 = *clauses[0].first_arg_key;
    j.p1 = c1;
    j.p2 = c2;
    code.push_back(j);
    code.push_back({Op::NonDet, arity});
    Instruction t{Op::TryMeElse};
    t.p1 = trust;
    code.push_back(t);
    for (const Instruction& i : clauses[0].code) code.push_back(i);
    code.push_back({Op::TrustMe});
    for (const Instruction& i : clauses[1].code) code.push_back(i);
    clause_addr[0] = c1;
    clause_addr[1] = c2;
  } else {
    // Optional SWITCH, then NONDET + TRY_ME_ELSE / RETRY_ME_ELSE / TRUST_ME.
    bool switched = cls == PredClass::Deterministic;
    std::uint32_t pos = base + (switched ? 1 : 0);
    std::vector<std::uint32_t> chain_at(clauses.size());
    for (std::size_t k = 0; k < clauses.size(); ++k) {
      chain_at[k] = pos;
      pos += (k == 0 ? 2 : 1) + static_cast<std::uint32_t>(clauses[k].code.size());
      clause_addr[k] = chain_at[k] + (k == 0 ? 2 : 1);
    }
    if (switched) {
      Instruction sw{Op::Switch};
      sw.w = functor.raw();
      code.push_back(sw);
    }
    for (std::size_t k = 0; k < clauses.size(); ++k) {
      if (k == 0) {
        code.push_back({Op::NonDet, arity});
        Instruction t{Op::TryMeElse};
        t.p1 = chain_at[1];
        code.push_back(t);
      } else if (k + 1 < clauses.size()) {
        Instruction r{Op::RetryMeElse};
        r.p1 = chain_at[k + 1];
        code.push_back(r);
      } else {
        code.push_back({Op::TrustMe});
      }
      for (const Instruction& i : clauses[k].code) code.push_back(i);
    }
  }

  if (cls == PredClass::Deterministic) {
    for (std::size_t k = 0; k < clauses.size(); ++k)
      dict.put(functor.raw(), *clauses[k].first_arg_key, clause_addr[k], mark);
  }

  PredicateEntry pe;
  pe.functor = functor;
  pe.cls = cls;
  pe.addr = base;
  pe.code_end = static_cast<std::uint32_t>(code.size());
  pe.clause_count = static_cast<std::uint32_t>(clauses.size());
  pe.mark = mark;
  preds_.push_back(pe);
  dict.put(functor.raw(), def_key_, preds_.size() - 1, mark);
}

namespace {

bool is_unify(Op op) { return op == Op::UnifyVariable || op == Op::UnifyValue; }
bool is_write(Op op) { return op == Op::WriteVariable || op == Op::WriteValue; }

Op fuse_pair(Op first, Op second, bool get_put) {
  bool a = first == Op::UnifyVariable || first == Op::WriteVariable;
  bool b = second == Op::UnifyVariable || second == Op::WriteVariable;
  bool unify = is_unify(first);
  if (get_put) {
    if (unify)
      return a ? (b ? Op::GetUnifyVarVar : Op::GetUnifyVarVal)
               : (b ? Op::GetUnifyValVar : Op::GetUnifyValVal);
    return a ? (b ? Op::PutWriteVarVar : Op::PutWriteVarVal)
             : (b ? Op::PutWriteValVar : Op::PutWriteValVal);
  }
  if (unify)
    return a ? (b ? Op::UnifyVarVar : Op::UnifyVarVal)
             : (b ? Op::UnifyValVar : Op::UnifyValVal);
  return a ? (b ? Op::WriteVarVar : Op::WriteVarVal)
           : (b ? Op::WriteValVar : Op::WriteValVal);
}

}  // namespace

// One left-to-right pass: UNIFY/WRITE pairs collapse, a GET_STRUCTURE or
// PUT_STRUCTURE absorbs its first two stream instructions when the pair does
// not touch the structure register, and MOVE_REGISTER pairs collapse.
void Session::fuse_clause(Code& c) const {
  Code out;
  std::size_t i = 0;
  auto stream_pair = [&](std::size_t k, bool unify) {
    if (k + 1 >= c.size()) return false;
    return unify ? (is_unify(c[k].op) && is_unify(c[k + 1].op))
                 : (is_write(c[k].op) && is_write(c[k + 1].op));
  };
  while (i < c.size()) {
    const Instruction& I = c[i];
    if ((I.op == Op::GetStructure || I.op == Op::PutStructure) &&
        Cell(I.w).is_struct() &&
        stream_pair(i + 1, I.op == Op::GetStructure) &&
        c[i + 1].a != I.a && c[i + 2].a != I.a) {
      Instruction f{fuse_pair(c[i + 1].op, c[i + 2].op, true)};
      f.a = I.a;
      f.w = I.w;
      f.b = c[i + 1].a;
      f.c = c[i + 2].a;
      out.push_back(f);
      i += 3;
      continue;
    }
    if (stream_pair(i, true) || stream_pair(i, false)) {
      Instruction f{fuse_pair(c[i].op, c[i + 1].op, false)};
      f.a = c[i].a;
      f.b = c[i + 1].a;
      out.push_back(f);
      i += 2;
      continue;
    }
    if (I.op == Op::MoveRegister && i + 1 < c.size() &&
        c[i + 1].op == Op::MoveRegister) {
      Instruction f{Op::MoveRegX2};
      f.a = I.a;
      f.b = I.b;
      f.c = c[i + 1].a;
      f.d = c[i + 1].b;
      out.push_back(f);
      i += 2;
      continue;
    }
    out.push_back(I);
    ++i;
  }
  c = std::move(out);
}

// Cross-procedure compression: an EXECUTE whose target starts with SWITCH or
// JUMP_IF becomes the fused dispatch, which also avoids dereferencing the
// first argument twice.
void Session::fuse_calls() {
  for (Instruction& I : code) {
    if (I.op != Op::Execute) continue;
    const PredicateEntry* pe = find_predicate(I.w);
    if (!pe) continue;
    Op entry = code[pe->addr].op;
    if (entry == Op::Switch)
      I.op = Op::ExecSwitch;
    else if (entry == Op::JumpIf)
      I.op = Op::ExecJumpIf;
  }
}

Engine* Session::create_engine() {
  std::uint64_t h = next_handle_++;
  auto e = std::make_unique<Engine>(*this, h, false);
  Engine* p = e.get();
  registry_.emplace(h, std::move(e));
  return p;
}

Engine* Session::find_engine(std::uint64_t handle) {
  auto it = registry_.find(handle);
  return it == registry_.end() ? nullptr : it->second.get();
}

void Session::dispose_engine(std::uint64_t handle) {
  auto it = registry_.find(handle);
  if (it == registry_.end()) return;
  std::unique_ptr<Engine> dead = std::move(it->second);
  registry_.erase(it);
  // dead's destructor disposes its own children here.
}

std::string Session::dump_predicate(const std::string& name,
                                    std::uint32_t arity) {
  Cell f = syms.functor(name, arity);
  const PredicateEntry* pe = find_predicate(f.raw());
  if (!pe) return "";
  std::ostringstream o;
  o << syms.functor_name(f) << ":\n";
  for (std::uint32_t i = pe->addr; i < pe->code_end; ++i)
    o << disassemble(code[i], syms) << "\n";
  return o.str();
}

std::string Session::dump_binarized(const std::string& source) {
  auto clauses = parse_program(source);
  std::ostringstream o;
  int aux = 0;
  std::int64_t vc = 1;
  for (const ReadClause& rc : clauses)
    for (const BinaryClause& bc : binarize_clause(rc, aux, vc))
      o << write_term(binary_clause_term(bc)) << ".\n";
  return o.str();
}

// ---------------------------------------------------------------------------

RootQuery::RootQuery(Session& sess, const std::string& goal_text)
    : sess_(sess) {
  Reader r(goal_text + " .");
  ReadClause rc = r.read_clause();
  if (!rc.term->is_callable()) throw QueryError("type_error(callable)");
  std::vector<Term> vars;
  for (auto& [name, v] : rc.var_names) {
    names_.push_back(name);
    vars.push_back(v);
  }
  Term pattern = vars.empty() ? mk_atom("$ans") : mk_fun("$ans", vars);

  HeapStore scratch;
  std::unordered_map<std::int64_t, std::size_t> vmap;
  Cell p = build_term(scratch, sess.syms, pattern,
                      sess.flags.term_compression, vmap);
  Cell g = build_term(scratch, sess.syms, rc.term,
                      sess.flags.term_compression, vmap);
  engine_ = std::make_unique<Engine>(sess, 0, true);
  engine_->load(scratch, p, g);
}

RootQuery::~RootQuery() = default;

std::optional<RootQuery::Answer> RootQuery::next() {
  Outcome o = engine_->resume();
  switch (o.kind) {
    case Outcome::Kind::Answer: {
      Term inst =
          extract_term(engine_->heap, sess_.syms, engine_->pattern_cell());
      Answer a;
      a.canonical = write_term(inst);
      for (std::size_t i = 0; i < names_.size(); ++i)
        a.bindings.emplace_back(names_[i], write_term(inst->args[i]));
      return a;
    }
    case Outcome::Kind::Failed:
      return std::nullopt;
    case Outcome::Kind::Error:
      throw QueryError(
          write_term(extract_term(engine_->heap, sess_.syms, o.cell)));
    case Outcome::Kind::Returned: {
      Term t = extract_term(engine_->heap, sess_.syms, o.cell);
      if (t->is_fun() && t->name == "exception" && t->args.size() == 1)
        throw QueryError(write_term(t->args[0]));
      throw QueryError("protocol_error(return_outside_engine)");
    }
  }
  return std::nullopt;
}

std::vector<RootQuery::Answer> run_query(Session& sess, const std::string& goal,
                                         std::size_t max_answers) {
  RootQuery q(sess, goal);
  std::vector<RootQuery::Answer> out;
  while (out.size() < max_answers) {
    auto a = q.next();
    if (!a) break;
    out.push_back(std::move(*a));
  }
  return out;
}

}  // namespace binwam

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "binwam/binarize.hpp"
#include "binwam/compile.hpp"
#include "binwam/dict.hpp"
#include "binwam/instr.hpp"
#include "binwam/machine.hpp"
#include "binwam/symtab.hpp"
#include "binwam/term.hpp"

namespace binwam {

struct Flags {
  bool term_compression = true;
  bool instr_compression = true;
  bool trace = false;
  std::size_t heap_limit = std::size_t{1} << 24;
};

enum class PredClass { Single, Deterministic, Nondeterministic, Native };

struct PredicateEntry {
  Cell functor;
  PredClass cls;
  std::uint32_t addr;
  std::uint32_t code_end;
  std::uint32_t clause_count;
  Mark mark;
};

struct SessionStats {
  std::uint64_t instructions = 0;
  std::uint64_t choice_points = 0;
};

// The shared program image plus the engine registry: symbol table, two-key
// dictionary, linked code and predicate entries. Loading happens only while
// no engine runs; everything here is read-only during execution except the
// registry and counters.
class Session {
 public:
  explicit Session(Flags flags = {},
                   const std::optional<std::string>& kernel_override = {});

  void consult_text(const std::string& source, Mark mark = Mark::User);
  void consult_file(const std::string& path);

  const PredicateEntry* find_predicate(Word functor) const;

  // Engine registry. The root engine of a query lives outside it.
  Engine* create_engine();
  Engine* find_engine(std::uint64_t handle);
  void dispose_engine(std::uint64_t handle);
  std::size_t live_engines() const { return registry_.size(); }

  std::string dump_predicate(const std::string& name, std::uint32_t arity);
  std::string dump_binarized(const std::string& source);

  SymbolTable syms;
  Dictionary dict;
  Code code;
  Flags flags;
  SessionStats stats;

  Cell true_functor, cons_functor, nil_atom, true_atom;
  std::uint32_t between_retry_addr = 0;

 private:
  void register_native(const std::string& name, std::uint32_t arity,
                       Code stub);
  void boot(const std::optional<std::string>& kernel_override);
  void load_predicate(Cell functor, std::vector<CompiledClause> clauses,
                      Mark mark);
  void fuse_clause(Code& c) const;
  void fuse_calls();

  Word def_key_ = 0;  // second dictionary key for predicate entries
  std::vector<PredicateEntry> preds_;
  std::unordered_map<std::uint64_t, std::unique_ptr<Engine>> registry_;
  std::uint64_t next_handle_ = 1;
  int aux_counter_ = 0;
  std::int64_t var_counter_ = 1;
};

// Drives one query in a fresh root engine and iterates its answers.
class RootQuery {
 public:
  RootQuery(Session& sess, const std::string& goal_text);
  ~RootQuery();

  struct Answer {
    std::vector<std::pair<std::string, std::string>> bindings;
    std::string canonical;  // the whole answer instance, one term
  };

  // Next answer; nullopt when exhausted. Errors raise QueryError.
  std::optional<Answer> next();

  Engine& engine() { return *engine_; }
  const std::vector<std::string>& var_names() const { return names_; }

 private:
  Session& sess_;
  std::unique_ptr<Engine> engine_;
  std::vector<std::string> names_;
};

struct QueryError : std::runtime_error {
  explicit QueryError(const std::string& term_text)
      : std::runtime_error(term_text) {}
};

// Convenience used across the test suites: all answers as binding maps,
// optionally capped.
std::vector<RootQuery::Answer> run_query(Session& sess,
                                         const std::string& goal,
                                         std::size_t max_answers = SIZE_MAX);

}  // namespace binwam

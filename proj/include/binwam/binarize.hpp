#pragma once

#include <string>
#include <vector>

#include "binwam/reader.hpp"
#include "binwam/term.hpp"

namespace binwam {

// A clause split into head and body goals (facts have an empty body until
// normalize gives them the body `true`).
struct SourceClause {
  Term head;
  std::vector<Term> body;
  std::vector<std::pair<std::string, Term>> var_names;
};

enum class CutMode { None, PushCut, PutGetCut };

// A clause after continuation threading: head with the continuation as an
// extra last argument, a prefix of inline-compilable guard goals, and one
// chained body goal.
struct BinaryClause {
  Term head;
  std::vector<Term> guard;
  CutMode cutmode = CutMode::None;
  Term cut_var;  // set when cutmode == PutGetCut
  Term body;
};

struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_inline_builtin(const Term& goal);

// Split a raw ':-'/2 (or fact) term into head and flattened body goals.
SourceClause to_source_clause(const ReadClause& rc);

// Facts gain the body `true`; variable body goals are wrapped in call/1;
// disjunctions and if-then-else become fresh auxiliary predicates whose
// clauses are appended to `aux_out`.
SourceClause normalize(const SourceClause& c, std::vector<SourceClause>& aux_out,
                       int& aux_counter, std::int64_t& var_counter);

struct GuardSplit {
  std::vector<Term> guard;
  std::vector<Term> rest;
  CutMode cutmode = CutMode::None;
  Term cut_var;
};

GuardSplit split_guard(const SourceClause& c, std::int64_t& var_counter);

BinaryClause binarize(const SourceClause& c, std::int64_t& var_counter);

// Whole pipeline for one clause; auxiliary clauses are recursively binarized
// and appended.
std::vector<BinaryClause> binarize_clause(const ReadClause& rc,
                                          int& aux_counter,
                                          std::int64_t& var_counter);

// (head :- body) as a printable term, for dumps and golden tests.
Term binary_clause_term(const BinaryClause& b);

}  // namespace binwam

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "binwam/term.hpp"

namespace binwam {

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("syntax error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line, col;
};

// One parsed clause: the raw term (a ':-'/2 term or a bare head) plus the
// named variables of the clause in first-occurrence order.
struct ReadClause {
  Term term;
  std::vector<std::pair<std::string, Term>> var_names;
};

class Reader {
 public:
  explicit Reader(std::string text);

  // Next clause, or nullopt at end of input.
  bool at_end();
  ReadClause read_clause();

  std::vector<ReadClause> read_all();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Convenience wrappers for single terms/programs.
Term parse_term(const std::string& text);
ReadClause parse_clause(const std::string& text);
std::vector<ReadClause> parse_program(const std::string& text);

}  // namespace binwam

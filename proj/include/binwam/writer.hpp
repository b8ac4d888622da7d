#pragma once

#include <string>

#include "binwam/term.hpp"

namespace binwam {

// Canonical printer. Output re-parses to an alpha-equivalent term: lists in
// bracket sugar, table operators in infix/prefix form, atoms quoted only
// when required. Unnamed variables print as _G<n>, numbered per call in
// traversal order.
std::string write_term(const Term& t);

bool atom_needs_quotes(const std::string& name);

}  // namespace binwam

#include "binwam/writer.hpp"

#include <cctype>
#include <sstream>
#include <unordered_map>

#include "binwam/ops.hpp"

namespace binwam {

namespace {

bool is_symbol_char(char c) {
  static const std::string chars = "+-*/\\^<>=~:.?@#&";
  return chars.find(c) != std::string::npos;
}

bool all_symbol_chars(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_symbol_char(c)) return false;
  return true;
}

bool plain_atom(const std::string& s) {
  if (s.empty()) return false;
  if (std::islower(static_cast<unsigned char>(s[0])) || s[0] == '$') {
    for (char c : s)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' &&
          c != '$')
        return false;
    return s != "$";
  }
  return false;
}

class Writer {
 public:
  std::string write(const Term& t) {
    std::ostringstream out;
    emit(out, t, 1200);
    return out.str();
  }

 private:
  void emit(std::ostringstream& out, const Term& t, int max_prec) {
    switch (t->kind) {
      case TermNode::Kind::Int:
        out << t->num;
        return;
      case TermNode::Kind::Var:
        out << var_name(t);
        return;
      case TermNode::Kind::Fun:
        emit_fun(out, t, max_prec);
        return;
    }
  }

  void emit_fun(std::ostringstream& out, const Term& t, int max_prec) {
    if (t->args.empty()) {
      out << atom_text(t->name);
      return;
    }
    if (t->name == "." && t->args.size() == 2) {
      emit_list(out, t);
      return;
    }
    if (t->args.size() == 2) {
      if (auto op = infix_op(t->name)) {
        bool paren = op->prec > max_prec;
        int lp = op->type == OpType::Yfx ? op->prec : op->prec - 1;
        int rp = op->type == OpType::Xfy ? op->prec : op->prec - 1;
        std::ostringstream ls, rs;
        emit(ls, t->args[0], lp);
        emit(rs, t->args[1], rp);
        std::string left = ls.str(), right = rs.str();
        if (paren) out << '(';
        if (t->name == ",") {
          out << left << ',' << right;
        } else if (all_symbol_chars(t->name) || t->name == ";") {
          // Avoid gluing adjacent symbol characters into one token.
          bool lsp = !left.empty() && is_symbol_char(left.back());
          bool rsp = !right.empty() && (is_symbol_char(right[0]) ||
                                        (right[0] == '-' && right.size() > 1));
          out << left << (lsp ? " " : "") << t->name << (rsp ? " " : "")
              << right;
        } else {
          out << left << ' ' << t->name << ' ' << right;
        }
        if (paren) out << ')';
        return;
      }
    }
    if (t->args.size() == 1) {
      if (auto op = prefix_op(t->name)) {
        bool paren = op->prec > max_prec;
        if (paren) out << '(';
        out << t->name;
        // Keep "-(2)" distinct from the integer literal -2.
        std::ostringstream sub;
        emit(sub, t->args[0], op->prec);
        std::string s = sub.str();
        if (!s.empty() &&
            (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-'))
          out << ' ';
        out << s;
        if (paren) out << ')';
        return;
      }
    }
    out << atom_text(t->name) << '(';
    for (std::size_t i = 0; i < t->args.size(); ++i) {
      if (i) out << ',';
      emit(out, t->args[i], 999);
    }
    out << ')';
  }

  void emit_list(std::ostringstream& out, Term t) {
    out << '[';
    bool first = true;
    while (true) {
      if (!first) out << ',';
      first = false;
      emit(out, t->args[0], 999);
      const Term& tail = t->args[1];
      if (tail->is_fun() && tail->name == "." && tail->args.size() == 2) {
        t = tail;
        continue;
      }
      if (tail->is_atom() && tail->name == "[]") break;
      out << '|';
      emit(out, tail, 999);
      break;
    }
    out << ']';
  }

  std::string var_name(const Term& t) {
    if (!t->name.empty()) return t->name;
    auto it = anon_.find(t->var_id);
    if (it != anon_.end()) return it->second;
    std::string n = "_G" + std::to_string(next_anon_++);
    anon_.emplace(t->var_id, n);
    return n;
  }

  std::string atom_text(const std::string& name) {
    if (name == "[]" || name == "!" || name == ";" || name == "{}") return name;
    if (plain_atom(name)) return name;
    if (all_symbol_chars(name) && name != "." && name != ",") return name;
    std::string q = "'";
    for (char c : name) {
      if (c == '\'' || c == '\\') q += '\\';
      q += c;
    }
    q += '\'';
    return q;
  }

  std::unordered_map<std::int64_t, std::string> anon_;
  int next_anon_ = 0;
};

}  // namespace

bool atom_needs_quotes(const std::string& name) {
  if (name == "[]" || name == "!" || name == ";" || name == "{}") return false;
  return !plain_atom(name) && !(all_symbol_chars(name) && name != ".");
}

std::string write_term(const Term& t) { return Writer().write(t); }

}  // namespace binwam

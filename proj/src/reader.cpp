#include "binwam/reader.hpp"

#include <cctype>
#include <cstdlib>

#include "binwam/cell.hpp"
#include "binwam/ops.hpp"

namespace binwam {

namespace {

enum class Tk {
  Atom,
  Var,
  Int,
  LParen,       // '(' preceded by whitespace
  LParenGlued,  // '(' glued to the previous atom: functor application
  RParen,
  LBracket,
  RBracket,
  Comma,
  Bar,
  End,  // clause-terminating '.'
  Eof,
};

struct Token {
  Tk kind;
  std::string text;
  std::int64_t num = 0;
  int line = 1, col = 1;
};

bool symbol_char(char c) {
  static const std::string chars = "+-*/\\^<>=~:.?@#&";
  return chars.find(c) != std::string::npos;
}

class Lexer {
 public:
  explicit Lexer(std::string text) : text_(std::move(text)) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  [[noreturn]] void error(const std::string& msg) {
    throw ParseError(line_, col_, msg);
  }

  char cur() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char at(std::size_t off) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }

  void bump() {
    if (cur() == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_layout(bool& saw_space) {
    while (true) {
      char c = cur();
      if (c == '%') {
        while (cur() && cur() != '\n') bump();
        saw_space = true;
      } else if (c == '/' && at(1) == '*') {
        int l = line_, co = col_;
        bump();
        bump();
        while (!(cur() == '*' && at(1) == '/')) {
          if (!cur()) throw ParseError(l, co, "unterminated block comment");
          bump();
        }
        bump();
        bump();
        saw_space = true;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
        saw_space = true;
      } else {
        break;
      }
    }
  }

  void advance() {
    bool saw_space = false;
    skip_layout(saw_space);
    Token t;
    t.line = line_;
    t.col = col_;
    char c = cur();
    if (!c) {
      t.kind = Tk::Eof;
      tok_ = t;
      return;
    }
    if (c == '(') {
      bump();
      bool glued = !saw_space && (prev_ == Tk::Atom || prev_ == Tk::Var);
      t.kind = glued ? Tk::LParenGlued : Tk::LParen;
      finish(t);
      return;
    }
    if (c == ')') {
      bump();
      t.kind = Tk::RParen;
      finish(t);
      return;
    }
    if (c == '[') {
      bump();
      if (cur() == ']') {
        bump();
        t.kind = Tk::Atom;
        t.text = "[]";
        finish(t);
        return;
      }
      t.kind = Tk::LBracket;
      finish(t);
      return;
    }
    if (c == ']') {
      bump();
      t.kind = Tk::RBracket;
      finish(t);
      return;
    }
    if (c == ',') {
      bump();
      t.kind = Tk::Comma;
      t.text = ",";
      finish(t);
      return;
    }
    if (c == '|') {
      bump();
      t.kind = Tk::Bar;
      finish(t);
      return;
    }
    if (c == '!' || c == ';') {
      bump();
      t.kind = Tk::Atom;
      t.text = std::string(1, c);
      finish(t);
      return;
    }
    if (c == '\'') {
      bump();
      std::string s;
      while (true) {
        char d = cur();
        if (!d) error("unterminated quoted atom");
        if (d == '\\') {
          bump();
          char e = cur();
          if (e == 'n')
            s += '\n';
          else if (e == 't')
            s += '\t';
          else if (e == '\\' || e == '\'')
            s += e;
          else
            error("unsupported escape");
          bump();
          continue;
        }
        if (d == '\'') {
          bump();
          if (cur() == '\'') {  // doubled quote
            s += '\'';
            bump();
            continue;
          }
          break;
        }
        s += d;
        bump();
      }
      t.kind = Tk::Atom;
      t.text = s;
      finish(t);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_int(t, false);
      finish(t);
      return;
    }
    if (c == '-' && std::isdigit(static_cast<unsigned char>(at(1))) &&
        neg_literal_position()) {
      bump();
      lex_int(t, true);
      finish(t);
      return;
    }
    if (std::islower(static_cast<unsigned char>(c)) || c == '$') {
      std::string s;
      while (std::isalnum(static_cast<unsigned char>(cur())) ||
             cur() == '_' || cur() == '$') {
        s += cur();
        bump();
      }
      t.kind = Tk::Atom;
      t.text = s;
      finish(t);
      return;
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '_') {
        s += cur();
        bump();
      }
      t.kind = Tk::Var;
      t.text = s;
      finish(t);
      return;
    }
    if (symbol_char(c)) {
      // A '.' followed by layout or end of input terminates the clause.
      if (c == '.' && (at(1) == '\0' || at(1) == '%' ||
                       std::isspace(static_cast<unsigned char>(at(1))))) {
        bump();
        t.kind = Tk::End;
        finish(t);
        return;
      }
      std::string s;
      while (symbol_char(cur())) {
        if (cur() == '.' && (at(1) == '\0' || at(1) == '%' ||
                             std::isspace(static_cast<unsigned char>(at(1)))))
          break;
        s += cur();
        bump();
      }
      t.kind = Tk::Atom;
      t.text = s;
      finish(t);
      return;
    }
    error(std::string("unexpected character '") + c + "'");
  }

  void lex_int(Token& t, bool neg) {
    std::uint64_t v = 0;
    while (std::isdigit(static_cast<unsigned char>(cur()))) {
      v = v * 10 + static_cast<std::uint64_t>(cur() - '0');
      if (v > static_cast<std::uint64_t>(kIntMax) + 1)
        error("integer literal out of range");
      bump();
    }
    std::int64_t sv = neg ? -static_cast<std::int64_t>(v)
                          : static_cast<std::int64_t>(v);
    if (sv > kIntMax || sv < kIntMin) error("integer literal out of range");
    t.kind = Tk::Int;
    t.num = sv;
  }

  // "X-1" is subtraction, "p(-1)" a negative literal: a '-' starts a literal
  // only when the previous token cannot end an operand.
  bool neg_literal_position() const {
    switch (prev_) {
      case Tk::Atom:
        return infix_op(prev_text_).has_value() || prev_text_ == "(";
      case Tk::Var:
      case Tk::Int:
      case Tk::RParen:
      case Tk::RBracket:
        return false;
      default:
        return true;
    }
  }

  void finish(Token& t) {
    prev_ = t.kind;
    prev_text_ = t.text;
    tok_ = t;
  }

  std::string text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Tk prev_ = Tk::Eof;
  std::string prev_text_;
  Token tok_;
};

}  // namespace

struct Reader::Impl {
  Lexer lex;
  std::int64_t next_var_id = 0;
  // Per-clause variable scope.
  std::map<std::string, Term> scope;
  std::vector<std::pair<std::string, Term>> order;

  explicit Impl(std::string text) : lex(std::move(text)) {}

  [[noreturn]] void error(const std::string& msg) {
    throw ParseError(lex.peek().line, lex.peek().col, msg);
  }

  Term variable(const std::string& name) {
    if (name == "_") return mk_var(next_var_id++, "_");
    auto it = scope.find(name);
    if (it != scope.end()) return it->second;
    Term v = mk_var(next_var_id++, name);
    scope.emplace(name, v);
    order.emplace_back(name, v);
    return v;
  }

  bool token_starts_term(const Token& t) {
    switch (t.kind) {
      case Tk::Atom:
      case Tk::Var:
      case Tk::Int:
      case Tk::LParen:
      case Tk::LParenGlued:
      case Tk::LBracket:
        return true;
      default:
        return false;
    }
  }

  Term parse(int max_prec) {
    Term left = parse_primary(max_prec);
    while (true) {
      const Token& t = lex.peek();
      std::string opname;
      if (t.kind == Tk::Comma)
        opname = ",";
      else if (t.kind == Tk::Atom)
        opname = t.text;
      else
        break;
      auto op = infix_op(opname);
      if (!op || op->prec > max_prec) break;
      lex.take();
      int rp = op->type == OpType::Xfy ? op->prec : op->prec - 1;
      Term right = parse(rp);
      left = mk_fun(opname, {left, right});
    }
    return left;
  }

  Term parse_primary(int max_prec) {
    Token t = lex.take();
    switch (t.kind) {
      case Tk::Int:
        return mk_int(t.num);
      case Tk::Var: {
        Term v = variable(t.text);
        return v;
      }
      case Tk::LParen:
      case Tk::LParenGlued: {
        Term inner = parse(1200);
        expect(Tk::RParen, ")");
        return inner;
      }
      case Tk::LBracket:
        return parse_list();
      case Tk::Atom: {
        if (lex.peek().kind == Tk::LParenGlued) {
          lex.take();
          std::vector<Term> args;
          args.push_back(parse(999));
          while (lex.peek().kind == Tk::Comma) {
            lex.take();
            args.push_back(parse(999));
          }
          expect(Tk::RParen, ")");
          return mk_fun(t.text, std::move(args));
        }
        if (auto op = prefix_op(t.text)) {
          if (op->prec <= max_prec && token_starts_term(lex.peek())) {
            Term arg = parse(op->prec);
            return mk_fun(t.text, {arg});
          }
        }
        return mk_atom(t.text);
      }
      default:
        throw ParseError(t.line, t.col, "expected a term");
    }
  }

  Term parse_list() {
    std::vector<Term> items;
    items.push_back(parse(999));
    while (lex.peek().kind == Tk::Comma) {
      lex.take();
      items.push_back(parse(999));
    }
    Term tail = mk_atom("[]");
    if (lex.peek().kind == Tk::Bar) {
      lex.take();
      tail = parse(999);
    }
    expect(Tk::RBracket, "]");
    return mk_list(items, tail);
  }

  void expect(Tk k, const std::string& what) {
    Token t = lex.take();
    if (t.kind != k)
      throw ParseError(t.line, t.col, "expected '" + what + "'");
  }

  ReadClause read_clause() {
    scope.clear();
    order.clear();
    Term t = parse(1200);
    expect(Tk::End, ".");
    return ReadClause{t, order};
  }
};

Reader::Reader(std::string text)
    : impl_(std::make_shared<Impl>(std::move(text))) {}

bool Reader::at_end() { return impl_->lex.peek().kind == Tk::Eof; }

ReadClause Reader::read_clause() { return impl_->read_clause(); }

std::vector<ReadClause> Reader::read_all() {
  std::vector<ReadClause> out;
  while (!at_end()) out.push_back(read_clause());
  return out;
}

Term parse_term(const std::string& text) {
  Reader r(text + " .");
  return r.read_clause().term;
}

ReadClause parse_clause(const std::string& text) {
  Reader r(text);
  return r.read_clause();
}

std::vector<ReadClause> parse_program(const std::string& text) {
  Reader r(text);
  return r.read_all();
}

}  // namespace binwam

#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>

namespace binwam {

using Word = std::uint64_t;

// One machine word per cell, tag in the low 2 bits:
//
//   <heap index>            00   VAR  reference (self-reference = unbound)
//   <signed immediate>      01   INT  small integer
//   <symbol:48><arity:12>   10   FUN  functor / atom (arity 0)
//
// A functor fits in one word, so functor comparison is word equality.
// Compound terms never appear "by value" in registers or argument slots
// except as the inline head of a compressed last argument; everywhere else
// they are reached through a VAR reference to their FUN cell.
enum class Tag : std::uint8_t { Var = 0, Int = 1, Fun = 2 };

constexpr std::int64_t kIntMax = (std::int64_t{1} << 60) - 1;
constexpr std::int64_t kIntMin = -(std::int64_t{1} << 60);
constexpr std::uint32_t kMaxArity = 4095;

class Cell {
 public:
  Cell() : word_(0) {}
  explicit Cell(Word raw) : word_(raw) {}

  static Cell var(std::size_t heap_index) {
    return Cell((static_cast<Word>(heap_index) << 2) | 0u);
  }
  static Cell integer(std::int64_t v) {
    assert(v >= kIntMin && v <= kIntMax);
    return Cell((static_cast<Word>(v) << 2) | 1u);
  }
  static Cell fun(std::uint64_t symbol, std::uint32_t arity) {
    assert(arity <= kMaxArity);
    assert(symbol < (std::uint64_t{1} << 48));
    return Cell((symbol << 14) | (static_cast<Word>(arity) << 2) | 2u);
  }

  Tag tag() const { return static_cast<Tag>(word_ & 3u); }
  bool is_var() const { return tag() == Tag::Var; }
  bool is_int() const { return tag() == Tag::Int; }
  bool is_fun() const { return tag() == Tag::Fun; }
  bool is_atom() const { return is_fun() && arity() == 0; }
  bool is_struct() const { return is_fun() && arity() > 0; }

  std::size_t ref() const {
    assert(is_var());
    return static_cast<std::size_t>(word_ >> 2);
  }
  std::int64_t int_value() const {
    assert(is_int());
    return static_cast<std::int64_t>(word_) >> 2;
  }
  std::uint64_t symbol() const {
    assert(is_fun());
    return word_ >> 14;
  }
  std::uint32_t arity() const {
    assert(is_fun());
    return static_cast<std::uint32_t>((word_ >> 2) & 0xfffu);
  }

  Word raw() const { return word_; }
  bool operator==(const Cell& o) const { return word_ == o.word_; }
  bool operator!=(const Cell& o) const { return word_ != o.word_; }

 private:
  Word word_;
};

}  // namespace binwam

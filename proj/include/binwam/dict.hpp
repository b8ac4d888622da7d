#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "binwam/cell.hpp"

namespace binwam {

struct ProtectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Mark : std::uint8_t { Kernel, User };

// Global two-key hash table: <functor word, functor word> -> value word with
// a per-entry mark byte. Kernel entries are immutable once the table is
// sealed. Open addressing, power-of-two capacity, multiplicative hashing.
class Dictionary {
 public:
  Dictionary() { rehash(1024); }

  void put(Word k1, Word k2, Word value, Mark mark);
  std::optional<Word> get(Word k1, Word k2) const;

  void seal() { sealed_ = true; }
  bool sealed() const { return sealed_; }

  // Drop every user-marked entry in one sweep.
  void clear_user();

  std::size_t size() const { return count_; }

 private:
  struct Entry {
    Word k1 = 0, k2 = 0, value = 0;
    Mark mark = Mark::User;
    bool used = false;
  };

  static std::uint64_t rotl(std::uint64_t x, int r) {
    return (x << r) | (x >> (64 - r));
  }
  static std::uint64_t hash(Word k1, Word k2) {
    std::uint64_t h = k1 ^ rotl(k2, 32);
    h *= 0x9e3779b97f4a7c15ull;
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 32;
    return h;
  }

  void rehash(std::size_t capacity);

  std::vector<Entry> slots_;
  std::size_t count_ = 0;
  bool sealed_ = false;
};

}  // namespace binwam

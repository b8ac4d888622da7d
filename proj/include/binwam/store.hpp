#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "binwam/cell.hpp"

namespace binwam {

// Growable heap of cells. Backtracking shrinks it back to a saved top, so
// cell addresses are plain indices and never relocate while live.
class HeapStore {
 public:
  HeapStore() { cells_.reserve(4096); }

  std::size_t top() const { return cells_.size(); }
  std::size_t high_water() const { return high_water_; }

  Cell& operator[](std::size_t i) { return cells_[i]; }
  const Cell& operator[](std::size_t i) const { return cells_[i]; }

  std::size_t push(Cell c) {
    cells_.push_back(c);
    if (cells_.size() > high_water_) high_water_ = cells_.size();
    return cells_.size() - 1;
  }

  // Fresh unbound variable: a cell referring to itself.
  std::size_t push_var() {
    std::size_t a = cells_.size();
    return push(Cell::var(a));
  }

  void truncate(std::size_t new_top) { cells_.resize(new_top); }

  void reset() {
    cells_.clear();
    cells_.shrink_to_fit();
    cells_.reserve(4096);
    high_water_ = 0;
  }

 private:
  std::vector<Cell> cells_;
  std::size_t high_water_ = 0;
};

// Trail of undoable events: variable bindings to reset on backtracking, and
// engine registrations to dispose of when the creator unwinds past them.
struct TrailEntry {
  enum class Kind : std::uint8_t { Binding, EngineRef };
  Kind kind;
  std::uint64_t value;  // heap address or engine handle
};

class Trail {
 public:
  std::size_t top() const { return entries_.size(); }
  const TrailEntry& operator[](std::size_t i) const { return entries_[i]; }

  void push_binding(std::size_t addr) {
    entries_.push_back({TrailEntry::Kind::Binding, addr});
  }
  void push_engine(std::uint64_t handle) {
    entries_.push_back({TrailEntry::Kind::EngineRef, handle});
  }
  void pop() { entries_.pop_back(); }
  void truncate(std::size_t n) { entries_.resize(n); }
  void reset() {
    entries_.clear();
    entries_.shrink_to_fit();
  }

 private:
  std::vector<TrailEntry> entries_;
};

}  // namespace binwam

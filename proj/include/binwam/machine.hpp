#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "binwam/heapterm.hpp"
#include "binwam/instr.hpp"
#include "binwam/store.hpp"

namespace binwam {

class Session;

// One OR-stack record: enough to restart the next clause. Frame length
// follows from the predicate arity, so no links between frames are needed.
struct ChoiceFrame {
  std::uint32_t next;
  std::size_t saved_h;
  std::size_t saved_tr;
  std::vector<Cell> args;
};

struct Outcome {
  enum class Kind { Answer, Returned, Failed, Error };
  Kind kind = Kind::Failed;
  Cell cell{};  // Returned: yielded term; Error: error term
};

enum class EngineStatus { Fresh, Running, AtAnswer, Yielded, Done, Stopped };

struct EngineStats {
  std::uint64_t instructions = 0;
  std::uint64_t choice_points = 0;
  std::size_t heap_high_water = 0;
};

// A complete machine state: registers, private heap, trail and OR-stack,
// plus the interactor surface (status, mailbox, answer pattern). All engines
// share the session's code area, dictionary and symbol table.
class Engine {
 public:
  Engine(Session& sess, std::uint64_t handle, bool root);
  ~Engine();

  // Copies pattern and goal (sharing preserved) from `src` and arms the
  // engine; no computation happens here.
  void load(const HeapStore& src, Cell pattern, Cell goal);

  // Runs until the next answer, yield, failure or error.
  Outcome resume();

  void stop();
  void dispose_children();

  std::uint64_t handle() const { return handle_; }
  EngineStatus status() const { return status_; }
  void set_status(EngineStatus s) { status_ = s; }
  Cell pattern_cell() const { return pattern_; }
  const EngineStats& stats() const { return stats_; }

  HeapStore heap;
  Trail trail;

  bool mailbox_full() const { return mailbox_ != nullptr; }
  void mailbox_put(const HeapStore& src, Cell term);
  Cell mailbox_take();  // copies into own heap and clears the slot

 private:
  friend class Interpreter;

  struct Mailbox {
    HeapStore store;
    Cell root;
  };

  void restore_initial();
  void note_high_water();
  // Live-copy of the engine state at a quiescent point (empty OR-stack):
  // everything reachable from pattern_ and `roots` survives, dead bindings
  // and trail entries are dropped. Returns the moved roots.
  std::vector<Cell> compact_live(std::vector<Cell> roots);
  Cell compact_at_return(Cell value);
  Cell maybe_compact_at_dispatch(Cell cont);

  Session& sess_;
  std::uint64_t handle_;
  bool root_;
  EngineStatus status_ = EngineStatus::Stopped;

  std::vector<ChoiceFrame> or_stack_;
  std::array<Cell, 257> regs_{};
  std::size_t p_ = 0;
  std::size_t cut_b_ = 0;
  std::size_t h0_ = 0;

  Cell pattern_{};
  Cell initial_goal_{};
  Cell resume_cont_{};
  std::size_t compact_watermark_ = 0;
  std::unique_ptr<Mailbox> mailbox_;
  EngineStats stats_;
};

}  // namespace binwam

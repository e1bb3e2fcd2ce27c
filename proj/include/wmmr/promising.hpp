#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wmmr/ast.hpp"

namespace wmmr {

// ------------------------------------------------------------------- memory

struct Message {
  LocId loc = -1;  // -1 for ini, which writes 0 to every location
  Value val = 0;
  Tid tid = 0;
  bool is_ini() const { return loc < 0; }
  bool writes(LocId x) const { return loc < 0 || loc == x; }
  bool operator==(const Message& o) const { return loc == o.loc && val == o.val && tid == o.tid; }
  bool operator<(const Message& o) const {
    return loc != o.loc ? loc < o.loc : (val != o.val ? val < o.val : tid < o.tid);
  }
};

using Memory = std::vector<Message>;

Memory initial_memory();
constexpr int kMaxMemory = 63;  // promise sets are 64-bit masks

// ------------------------------------------------------------- thread state

struct RegVal {
  Value val = 0;
  Timestamp view = 0;
  bool operator==(const RegVal& o) const { return val == o.val && view == o.view; }
};

struct TState {
  std::uint64_t prom = 0;          // bit t set iff t is an open promise
  std::vector<Timestamp> coh;      // per location
  std::vector<RegVal> regs;        // per register slot of the owning thread
  Timestamp v_read = 0;
  Timestamp v_wOld = 0;
  Timestamp v_wNew = 0;
  Timestamp v_C = 0;

  bool operator==(const TState& o) const;
  std::size_t hash() const;
  std::set<Timestamp> promises() const;
};

// ------------------------------------------------------------ compiled code

struct CodeNode {
  enum class Kind { End, Atomic, Branch };
  Kind kind = Kind::End;
  Stmt stmt;      // Atomic
  int next = -1;  // Atomic successor, or first Branch alternative
  int alt = -1;   // second Branch alternative
};

// A thread's elaborated program as a DAG of atomic statements; pc 0 is the end.
struct ThreadCode {
  Tid tid = 0;
  std::vector<CodeNode> nodes;
  int entry = 0;
  std::vector<RegId> regs;  // registers of this thread
  std::vector<int> slot;    // RegId -> slot in TState::regs, -1 for other threads
  int loc_count = 0;

  bool can_finish(int pc) const;
  // Atomic nodes reachable from pc through branch nodes only.
  std::vector<int> frontier(int pc) const;
};

ThreadCode compile_thread(const LitmusTest& test, Tid tid);
std::vector<ThreadCode> compile_threads(const LitmusTest& test);

TState initial_tstate(const ThreadCode& code);

// ---------------------------------------------------------------- labels

struct StepLabel {
  enum class Kind { Prm, Rd, Ff, Fnc, Lst, Asm };
  Kind kind = Kind::Fnc;
  Tid tid = 0;
  LocId loc = -1;
  Value val = 0;
  Timestamp t = -1;
  RegId reg = -1;
  Expr expr;
  bool operator==(const StepLabel& o) const;
};

std::string label_text(const LitmusTest& test, const StepLabel& l);

struct ThreadConfig {
  int pc = 0;
  TState ts;
};

struct Successor {
  StepLabel label;
  ThreadConfig next;
  Memory memory;
};

// Value of an expression with its view.
RegVal expeval(const Expr& e, const ThreadCode& code, const TState& ts);

// All successors of one thread: Promise (values from `promise_values`, locations
// the thread may store to), Read, Fulfill, Fence, Register, Assume. Choices are
// resolved as part of the step that follows them.
std::vector<Successor> thread_step(const ThreadCode& code, const ThreadConfig& cfg, const Memory& memory,
                                   const std::set<Value>& promise_values, bool allow_promise = true);

// Non-promise successors only; memory is unchanged. Appends to `out`.
void local_steps(const ThreadCode& code, const ThreadConfig& cfg, const Memory& memory,
                 std::vector<std::pair<StepLabel, ThreadConfig>>& out);

// Non-promise successors of the atomic statement at `node`.
void node_steps(const ThreadCode& code, int node, const TState& ts, const Memory& memory,
                std::vector<std::pair<StepLabel, ThreadConfig>>& out);

// Some tau-local run reaches an empty promise set.
bool certifiable(const ThreadCode& code, const ThreadConfig& cfg, const Memory& memory);

// ----------------------------------------------------------- exploration

struct Bounds {
  int unroll = 2;
  int max_memory = -1;          // -1: number of stores after elaboration
  long long max_states = -1;    // -1: WMMR_MAX_STATES or unlimited
  bool parallel = true;         // OpenMP over candidate memories
  bool check_monotonicity = true;
};

long long default_max_states();

struct Trace {
  Memory memory;                 // final memory
  std::vector<StepLabel> steps;  // promises first, then per-thread steps
};

std::string trace_text(const LitmusTest& test, const Trace& trace);

struct FinalState {
  std::vector<Value> regs;      // indexed by RegId
  std::vector<Value> memory;    // last write per location
  bool operator<(const FinalState& o) const {
    return regs != o.regs ? regs < o.regs : memory < o.memory;
  }
  bool operator==(const FinalState& o) const { return regs == o.regs && memory == o.memory; }
};

struct ExploreStats {
  long long memories = 0;
  long long states = 0;
  long long transitions = 0;
  long long monotonicity_violations = 0;
};

struct ExploreResult {
  std::map<FinalState, Trace> finals;  // one witness trace per final state
  bool bounded_incomplete = false;
  ExploreStats stats;

  std::set<std::vector<Value>> valuations() const;
};

// Promises-first exploration on an elaborated test.
ExploreResult explore(const LitmusTest& test, const Bounds& bounds);
ExploreResult explore_serial(const LitmusTest& test, const Bounds& bounds);

// Interleaves promises and program steps freely, certifying after every step.
ExploreResult explore_unrestricted(const LitmusTest& test, const Bounds& bounds);

bool satisfies(const Outcome& o, const FinalState& f);

// "a=1 b=0 | x=1 y=1"
std::string state_text(const LitmusTest& test, const FinalState& f);

enum class Verdict { Reachable, Unreachable, BoundedUnknown };
const char* verdict_name(Verdict v);

struct OpVerdict {
  Verdict verdict = Verdict::Unreachable;
  std::optional<FinalState> state;
  std::optional<Trace> witness;
};

OpVerdict check_outcome(const ExploreResult& results, const Outcome& outcome);

// Replays a witness trace step by step through thread_step and returns the
// final state, or nullopt if some step is not a legal transition or the run
// does not end with every thread finished and every promise fulfilled.
std::optional<FinalState> replay_trace(const LitmusTest& test, const Trace& trace);

bool views_monotone(const TState& before, const TState& after);

}  // namespace wmmr

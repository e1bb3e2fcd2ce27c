#pragma once

#include <set>
#include <string>
#include <vector>

#include "wmmr/event_structure.hpp"
#include "wmmr/promising.hpp"

namespace wmmr {

// Decisive reads and writes of one thread, as bitsets over event ids.
struct ThreadPriors {
  boost::dynamic_bitset<> fnc;  // prFnc
  boost::dynamic_bitset<> bar;  // prBar over all registers of the thread
  boost::dynamic_bitset<> tst;  // prTst
  std::map<RegId, boost::dynamic_bitset<>> bar_reg;  // prBar_a
  std::map<LocId, boost::dynamic_bitset<>> bar_loc;  // before some bar of the thread on x
};

ThreadPriors thread_priors(const EventStructure& es, const Closure& before, Tid tid);

enum class PriorKind { Fnc, BarReg, BarThread, BarLoc, Tst };

// One prior set as a sorted id list. `tid` is used by every kind; `reg` by
// BarReg; `loc` by BarLoc.
std::vector<EventId> priors(const EventStructure& es, PriorKind kind, Tid tid, RegId reg = -1, LocId loc = -1);

// psi: event id -> timestamp; -1 on events that are not memory events.
using Psi = std::vector<Timestamp>;

// Every psi satisfying the five consistency conditions, up to `cap` of them.
std::vector<Psi> enumerate_psi(const EventStructure& es, const Memory& memory, std::size_t cap = 1u << 16);

// Independent re-check of the five conditions; `why` receives the first failure.
bool check_psi(const EventStructure& es, const Memory& memory, const Psi& psi, std::string* why = nullptr);

// Value of a register in `es` (0 without a bar on it).
Value register_value(const EventStructure& es, RegId a);
// Value of an expression over register values of `es`.
Value expr_value(const EventStructure& es, const Expr& e);

// Thread state denoted by (es, psi, memory) for thread `tid` of `test`.
// Register slots follow test.regs_of(tid).
TState views_from(const LitmusTest& test, const EventStructure& es, const Psi& psi, const Memory& memory, Tid tid);

// Some psi makes views_from agree with `states` (one per thread, in tid order).
bool matches(const LitmusTest& test, const EventStructure& es, const std::vector<TState>& states,
             const Memory& memory);

// Memory built from a linearization: one message per fulfill (or read) event in
// order, after ini. Also returns the matching psi.
std::pair<Memory, Psi> canonical_memory(const EventStructure& es, const std::vector<EventId>& order);

// Final states denoted by a conflict-free configuration structure: one per
// linearization (up to `cap`), with every promise set required to be empty.
std::set<FinalState> final_states(const LitmusTest& test, const EventStructure& es, std::size_t cap = 4096);

}  // namespace wmmr

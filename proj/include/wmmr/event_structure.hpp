#pragma once

#include <boost/dynamic_bitset.hpp>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wmmr/ast.hpp"

namespace wmmr {

using EventId = int;
using LocSet = std::uint64_t;  // bit x set iff location x is restricted
constexpr EventId kStar = -1;  // empty slot of a composite event

inline LocSet loc_bit(LocId x) { return LocSet{1} << x; }

struct Action {
  enum class Kind { Ini, Prm, Ff, BarLoc, BarExp, Fnc, Tst };
  Kind kind = Kind::Ini;
  Tid tid = 0;        // Prm: promising thread; Ff: fulfilling thread; others: owner
  LocId loc = -1;     // Prm, Ff, BarLoc
  Value val = 0;      // Prm, Ff
  RegId reg = -1;     // BarLoc, BarExp
  Expr expr;          // BarExp, Tst
  Timestamp ts = -1;  // optional annotation (outlines built from traces)

  bool is_ini() const { return kind == Kind::Ini; }
  bool is_read() const { return kind == Kind::Prm; }
  bool is_ff() const { return kind == Kind::Ff; }
  bool is_bar() const { return kind == Kind::BarLoc || kind == Kind::BarExp; }
  // Reads, fulfills and ini: the events that get timestamps.
  bool is_memory() const { return kind == Kind::Ini || kind == Kind::Prm || kind == Kind::Ff; }
  // Member of Act^x; ini counts for every location.
  bool in_act(LocId x) const { return kind == Kind::Ini || ((kind == Kind::Prm || kind == Kind::Ff) && loc == x); }
  bool same_action(const Action& o) const;  // ignores ts
  bool complements(const Action& o) const;  // prm vs ff with equal (tid, loc, val)
};

Action ini_action();
Action prm_action(Tid promiser, LocId x, Value v);
Action ff_action(Tid tid, LocId x, Value v);
Action bar_loc_action(Tid tid, RegId a, LocId x);
Action bar_exp_action(Tid tid, RegId a, Expr e);
Action fnc_action(Tid tid);
Action tst_action(Tid tid, Expr e);

std::string action_text(const LitmusTest& test, const Action& a);

// Flow event structure with location restrictions. Event ids are dense indices.
// Local structures are built in flow order, so every predecessor has a smaller id.
struct EventStructure {
  std::vector<Action> label;
  std::vector<std::vector<EventId>> pred;          // direct flow predecessors, sorted
  std::map<std::pair<EventId, EventId>, LocSet> lambda;  // non-empty restrictions only
  std::vector<std::pair<EventId, EventId>> conflict;     // unordered pairs, first < second
  std::vector<std::vector<EventId>> tuple;          // composite events: slot ids or kStar

  int size() const { return static_cast<int>(label.size()); }
  bool flows(EventId d, EventId e) const;
  LocSet restriction(EventId d, EventId e) const;
  EventId ini() const;
  bool is_composite() const { return !tuple.empty(); }
  EventId add(const Action& a, std::vector<EventId> preds);
  // Canonical text; equal strings mean equal structures (same ids).
  std::string key() const;
};

using Closure = std::vector<boost::dynamic_bitset<>>;

// before[e] holds every d with d ->+ e. Handles cyclic flow.
Closure flow_closure(const EventStructure& es);

EventStructure ini_structure();

// Flow-maximal events among those satisfying `match`.
template <class Pred>
std::vector<EventId> maximal(const EventStructure& es, const Closure& before, Pred match) {
  std::vector<EventId> cand;
  for (EventId e = 0; e < es.size(); ++e)
    if (match(es.label[static_cast<std::size_t>(e)])) cand.push_back(e);
  std::vector<EventId> out;
  for (EventId e : cand) {
    bool dominated = false;
    for (EventId f : cand)
      if (f != e && before[static_cast<std::size_t>(f)].test(static_cast<std::size_t>(e))) {
        dominated = true;
        break;
      }
    if (!dominated) out.push_back(e);
  }
  return out;
}

// Action patterns for `last`.
struct Pattern {
  enum class Kind { Ini, ActLoc, FfLoc, FfOrIniLoc, Fnc, Tst, Bar, AnyBar, BarOnLoc };
  Kind kind = Kind::Ini;
  Tid tid = 0;    // Fnc, Tst (0: any thread)
  LocId loc = -1;
  RegId reg = -1;
  bool matches(const Action& a) const;
  static Pattern act(LocId x) { return {Kind::ActLoc, 0, x, -1}; }
  static Pattern ff_on(LocId x) { return {Kind::FfLoc, 0, x, -1}; }
  static Pattern ff_or_ini(LocId x) { return {Kind::FfOrIniLoc, 0, x, -1}; }
  static Pattern fnc(Tid t) { return {Kind::Fnc, t, -1, -1}; }
  static Pattern tst(Tid t) { return {Kind::Tst, t, -1, -1}; }
  static Pattern bar(RegId a) { return {Kind::Bar, 0, -1, a}; }
  static Pattern bar_on(LocId x) { return {Kind::BarOnLoc, 0, x, -1}; }
};

// Last events per pattern: for each pattern, its flow-maximal matching events.
// `bar(.,.)` patterns should be expanded per register by the caller.
std::vector<EventId> last(const EventStructure& es, const Closure& before, const std::vector<Pattern>& patterns);
std::vector<EventId> last(const EventStructure& es, const std::vector<Pattern>& patterns);

// The unique flow-last event of a pattern, or nullopt when there is none or
// when several events are maximal.
std::optional<EventId> unique_last(const EventStructure& es, const Closure& before, const Pattern& p);

// Registers with a bar event in `es` (optionally restricted to one thread).
std::vector<RegId> barred_registers(const EventStructure& es, Tid tid = 0);

// The plus-operations on conflict-free local structures of thread `tid`.
EventStructure plus_ff(const EventStructure& es, Tid tid, LocId x, Value v, Timestamp ts = -1);
EventStructure plus_ff_reg(const EventStructure& es, Tid tid, RegId a, LocId x, Value v, Timestamp ts = -1);
EventStructure plus_bar_loc(const EventStructure& es, Tid tid, RegId a, LocId x);
EventStructure plus_bar_exp(const EventStructure& es, Tid tid, RegId a, const Expr& e);
EventStructure plus_fnc(const EventStructure& es, Tid tid);
EventStructure plus_tst(const EventStructure& es, Tid tid, const Expr& b);

enum class ChainMode {
  Flow,       // chain events flow after the last fence, bars and fulfills on their location
  Restricted  // chain events flow after the last event on their location only
};

// Appends a sequential chain of reads (in chain order). Returns the new
// structure; the chain's events get ids size()..size()+n-1.
EventStructure append_read_chain(const EventStructure& es, const std::vector<Action>& chain,
                                 ChainMode mode = ChainMode::Flow);

enum class RestrictMode {
  Repaired,  // restrict every target, flow-related to e or not (default)
  Literal    // only direct flow edges from e
};

// rstr: add x to the restriction between e and every event of
// (prFnc_tau cap Ff_tau) cup prBar_tau cup Ff^x_tau.
EventStructure restrict(const EventStructure& es, EventId e, LocId x, Tid tid,
                        RestrictMode mode = RestrictMode::Repaired);

// Parallel composition of conflict-free local structures (slot i = thread i+1).
EventStructure parallel_compose(const std::vector<EventStructure>& locals);

// The part of the composition spanned by the given composite events (flow,
// restrictions, conflicts and labels as in the full composition).
EventStructure compose_tuples(const std::vector<EventStructure>& locals,
                              const std::vector<std::vector<EventId>>& tuples);

// Configuration check on an arbitrary structure: conflict-free, acyclic and
// every predecessor either present or replaced by a conflicting member.
bool is_configuration(const EventStructure& es, const std::vector<EventId>& C);

// The structure restricted to the events of C (renumbered in C's order).
EventStructure sub_structure(const EventStructure& es, const std::vector<EventId>& C);

struct InterferenceFree {
  std::vector<EventId> config;  // composite event ids, sorted
  std::vector<EventId> order;   // memory events of config, ini first
};

// Memory events of a conflict-free structure in an order extending flow and
// honoring every restriction, if one exists. Restrictions are conditional:
// d ~L~> f forbids an event on L strictly between d and f when d comes first.
std::optional<std::vector<EventId>> linearize(const EventStructure& es);

// All such orders, up to `cap` of them.
std::vector<std::vector<EventId>> all_linearizations(const EventStructure& es, std::size_t cap);

// First interference-free configuration in a fixed enumeration order.
std::optional<InterferenceFree> find_interference_free(const EventStructure& composition,
                                                       const std::vector<EventStructure>& locals);

// The same search without building the full composition.
struct LocalWitness {
  std::vector<std::vector<EventId>> tuples;  // the configuration's composite events
  EventStructure config;                     // compose_tuples(locals, tuples)
  std::vector<EventId> order;                // memory events of `config`, ini first
};

// Calls `visit` on every interference-free configuration (one linearization
// each) in enumeration order until it returns false.
void for_each_interference_free(const std::vector<EventStructure>& locals,
                                const std::function<bool(const LocalWitness&)>& visit);
std::optional<LocalWitness> interference_free_witness(const std::vector<EventStructure>& locals);

// Independent re-check of the three interference-freedom conditions for a
// configuration and linearization.
bool check_interference_free(const EventStructure& composition, const std::vector<EventStructure>& locals,
                             const InterferenceFree& w, std::string* why = nullptr);

// Graphviz text. `highlight` marks configuration members.
std::string to_dot(const LitmusTest& test, const EventStructure& es, const std::vector<EventId>& highlight = {});

// One-line text such as "ini -> ff(1,x,1); ini -{x}-> prm(2,y,1)".
std::string es_text(const LitmusTest& test, const EventStructure& es);

}  // namespace wmmr

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wmmr/assertion.hpp"
#include "wmmr/event_structure.hpp"
#include "wmmr/promising.hpp"

namespace wmmr {

// A candidate promise another thread may have made: prm(promiser, loc, val).
struct ReadOption {
  Tid promiser = 0;
  LocId loc = -1;
  Value val = 0;
  bool operator<(const ReadOption& o) const {
    return promiser != o.promiser ? promiser < o.promiser : (loc != o.loc ? loc < o.loc : val < o.val);
  }
  bool operator==(const ReadOption& o) const { return promiser == o.promiser && loc == o.loc && val == o.val; }
};

// Stores of the other threads, each paired with every value it may write.
std::vector<ReadOption> read_menu(const LitmusTest& test, Tid tid);

enum class Rule { Write, WriteR, Fence, ReadEx, ReadNew, Registers, Assume };
const char* rule_name(Rule r);

struct ProofStep {
  Stmt stmt;                  // the atomic statement
  Rule rule = Rule::Write;
  EventId from = -1;          // ReadEx: the event read from
  std::vector<Action> chain;  // ReadNew: the appended reads
  EventStructure post;
};

struct ProofOutline {
  Tid tid = 0;
  std::vector<ProofStep> steps;  // the first pre-assertion is Ini
  const EventStructure& final() const;
};

// Rule variants. The default is the printed rule set with every location
// restriction applied; Restricted chains order each read-chain event after the
// last event on its location only and restrict it like an existing read.
struct Calculus {
  RestrictMode restrict_mode = RestrictMode::Repaired;
  ChainMode chains = ChainMode::Flow;
};

// Post-assertion of PR-ReadNew for `reg := x` with the given chain.
EventStructure read_new_post(const EventStructure& pre, const std::vector<Action>& chain, Tid tid, RegId reg, LocId x,
                             const Calculus& calculus = {});

struct ProofBounds {
  int unroll = 2;
  std::size_t max_outlines = 200000;     // per thread
  std::size_t max_tuples = 2000000;      // synchronisable outline tuples
  std::size_t max_linearizations = 65536;  // per configuration
  bool parallel = true;
  Calculus calculus;
};

// Bounds with max_outlines and max_tuples lowered to WMMR_MAX_STATES when set.
ProofBounds default_proof_bounds();

struct OutlineSet {
  std::vector<ProofOutline> outlines;  // distinct final structures, in discovery order
  bool truncated = false;
};

// Every local proof outline of thread `tid` of an elaborated test whose
// reads come from `menu`, one per distinct final assertion.
OutlineSet derive_outlines(const LitmusTest& test, Tid tid, const std::vector<ReadOption>& menu,
                           const ProofBounds& bounds);

// Re-derives each step from its pre-assertion and statement and checks that the
// statements form a complete path through the thread's program.
bool check_outline(const LitmusTest& test, const ProofOutline& outline, std::string* why = nullptr,
                   const Calculus& calculus = {});

std::string render_outline(const LitmusTest& test, const ProofOutline& outline);

struct ProofWitness {
  std::vector<ProofOutline> outlines;  // one per thread
  LocalWitness config;                 // interference-free configuration
  FinalState state;
};

struct ProofStats {
  std::vector<std::size_t> outlines;  // per thread
  std::size_t tuples = 0;
  std::size_t configurations = 0;
};

struct ProofResult {
  Verdict verdict = Verdict::Unreachable;
  std::optional<ProofWitness> witness;
  std::set<FinalState> finals;  // filled by proof_final_states
  bool bounded_incomplete = false;
  ProofStats stats;
};

// Decides the test's outcome. Stops at the first satisfying witness in
// enumeration order (outline tuples sorted by total event count).
ProofResult check_reachable(const LitmusTest& test, const ProofBounds& bounds);

// Every final state derivable within the bounds; verdict refers to the outcome.
ProofResult proof_final_states(const LitmusTest& test, const ProofBounds& bounds);

// Independent re-check: outlines rule by rule, the configuration conditions on
// the full composition, psi conditions and views for the canonical memory, and
// the reported final state.
bool revalidate(const LitmusTest& test, const ProofWitness& w, std::string* why = nullptr,
                const Calculus& calculus = {});

// Per-thread outlines following an accepted promises-first trace, with
// timestamp-annotated read and fulfill labels. Throws std::invalid_argument on
// traces that are not promises-first or that do not fit the program.
// Under restricted chains a read of a timestamp without an event becomes a
// one-event chain and every other read uses PR-ReadEx.
std::vector<ProofOutline> outline_from_trace(const LitmusTest& test, const Trace& trace,
                                             const Calculus& calculus = {});

// The configuration that pairs events by their timestamp annotations, ordered
// by timestamp.
std::optional<LocalWitness> timestamp_configuration(const std::vector<EventStructure>& locals);

std::string render_witness(const LitmusTest& test, const ProofWitness& w);

}  // namespace wmmr

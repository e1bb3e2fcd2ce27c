#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "wmmr/litmus.hpp"
#include "wmmr/proof.hpp"

namespace wmmr {

namespace {

// Label counts used to filter outline tuples before composing them.
struct Profile {
  std::map<std::pair<LocId, Value>, int> ffs;
  std::map<ReadOption, int> reads;
  int events = 0;
};

Profile profile_of(const EventStructure& es) {
  Profile p;
  p.events = es.size();
  for (const Action& a : es.label) {
    if (a.is_ff()) ++p.ffs[{a.loc, a.val}];
    if (a.is_read()) ++p.reads[{a.tid, a.loc, a.val}];
  }
  return p;
}

// Every read of `reader` from thread `owner` has a distinct matching fulfill.
bool feeds(const Profile& reader, const Profile& owner, Tid owner_tid) {
  for (const auto& [o, n] : reader.reads) {
    if (o.promiser != owner_tid) continue;
    auto it = owner.ffs.find({o.loc, o.val});
    if (it == owner.ffs.end() || it->second < n) return false;
  }
  return true;
}

bool state_for(const LitmusTest& test, const EventStructure& config, const std::vector<EventId>& order,
               FinalState& out) {
  auto [memory, psi] = canonical_memory(config, order);
  out.regs.assign(test.registers.size(), 0);
  for (const auto& th : test.threads) {
    TState ts = views_from(test, config, psi, memory, th.tid);
    if (ts.prom != 0) return false;
    auto regs = test.regs_of(th.tid);
    for (std::size_t s = 0; s < regs.size(); ++s) out.regs[static_cast<std::size_t>(regs[s])] = ts.regs[s].val;
  }
  out.memory.assign(test.locations.size(), 0);
  for (std::size_t t = 1; t < memory.size(); ++t) out.memory[static_cast<std::size_t>(memory[t].loc)] = memory[t].val;
  return true;
}

struct TupleResult {
  std::optional<ProofWitness> witness;  // first satisfying, in enumeration order
  std::set<FinalState> finals;
  std::size_t configurations = 0;
  bool capped = false;
};

TupleResult check_tuple(const LitmusTest& test, const std::vector<const ProofOutline*>& outlines,
                        const ProofBounds& bounds, bool all) {
  TupleResult r;
  std::vector<EventStructure> locals;
  for (const auto* o : outlines) locals.push_back(o->final());
  bool memory_matters = all || test.outcome.mentions_memory();
  for_each_interference_free(locals, [&](const LocalWitness& w) {
    ++r.configurations;
    std::vector<std::vector<EventId>> orders;
    if (memory_matters) {
      orders = all_linearizations(w.config, bounds.max_linearizations);
      if (orders.size() >= bounds.max_linearizations) r.capped = true;
    } else {
      orders.push_back(w.order);
    }
    for (const auto& order : orders) {
      FinalState fs;
      if (!state_for(test, w.config, order, fs)) continue;
      if (!r.witness && satisfies(test.outcome, fs)) {
        ProofWitness pw;
        for (const auto* o : outlines) pw.outlines.push_back(*o);
        pw.config = w;
        pw.config.order = order;
        pw.state = fs;
        r.witness = std::move(pw);
        if (!all) return false;
      }
      if (all) r.finals.insert(fs);
    }
    return true;
  });
  return r;
}

ProofResult prove(const LitmusTest& test, const ProofBounds& bounds, bool all) {
  ProofResult res;
  std::size_t n = test.threads.size();
  std::vector<OutlineSet> sets(n);
  std::vector<std::vector<Profile>> profiles(n);
  for (std::size_t i = 0; i < n; ++i) {
    Tid tid = static_cast<Tid>(i + 1);
    sets[i] = derive_outlines(test, tid, read_menu(test, tid), bounds);
    if (sets[i].truncated) res.bounded_incomplete = true;
    for (const auto& o : sets[i].outlines) profiles[i].push_back(profile_of(o.final()));
    res.stats.outlines.push_back(sets[i].outlines.size());
  }

  // Synchronisable tuples, depth first in outline order.
  std::vector<std::vector<int>> tuples;
  std::vector<int> pick(n, 0);
  bool full = false;
  std::function<void(std::size_t)> choose = [&](std::size_t i) {
    if (full) return;
    if (i == n) {
      if (tuples.size() >= bounds.max_tuples) {
        full = true;
        return;
      }
      tuples.push_back(pick);
      return;
    }
    for (int k = 0; k < static_cast<int>(sets[i].outlines.size()); ++k) {
      const Profile& p = profiles[i][static_cast<std::size_t>(k)];
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) {
        const Profile& q = profiles[j][static_cast<std::size_t>(pick[j])];
        ok = feeds(p, q, static_cast<Tid>(j + 1)) && feeds(q, p, static_cast<Tid>(i + 1));
      }
      // reads from threads that do not exist
      for (const auto& [o, c] : p.reads)
        if (o.promiser < 1 || o.promiser > static_cast<Tid>(n)) ok = false;
      if (!ok) continue;
      pick[i] = k;
      choose(i + 1);
      if (full) return;
    }
  };
  choose(0);
  if (full) res.bounded_incomplete = true;
  std::vector<int> total(tuples.size(), 0);
  for (std::size_t t = 0; t < tuples.size(); ++t)
    for (std::size_t i = 0; i < n; ++i) total[t] += profiles[i][static_cast<std::size_t>(tuples[t][i])].events;
  std::vector<std::size_t> order(tuples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return total[a] < total[b]; });
  res.stats.tuples = tuples.size();

  constexpr std::size_t kChunk = 256;
  for (std::size_t base = 0; base < order.size(); base += kChunk) {
    std::size_t len = std::min(kChunk, order.size() - base);
    std::vector<TupleResult> results(len);
    auto run = [&](std::size_t k) {
      const auto& tup = tuples[order[base + k]];
      std::vector<const ProofOutline*> outs;
      for (std::size_t i = 0; i < n; ++i) outs.push_back(&sets[i].outlines[static_cast<std::size_t>(tup[i])]);
      results[k] = check_tuple(test, outs, bounds, all);
    };
    long long slen = static_cast<long long>(len);
#ifdef WMMR_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (bounds.parallel)
#endif
    for (long long k = 0; k < slen; ++k) run(static_cast<std::size_t>(k));
    bool done = false;
    for (auto& r : results) {
      res.stats.configurations += r.configurations;
      if (r.capped) res.bounded_incomplete = true;
      if (!res.witness && r.witness) {
        res.witness = std::move(r.witness);
        if (!all) {
          done = true;
          break;
        }
      }
      res.finals.insert(r.finals.begin(), r.finals.end());
    }
    if (done) break;
  }
  if (res.witness) res.verdict = Verdict::Reachable;
  else res.verdict = res.bounded_incomplete ? Verdict::BoundedUnknown : Verdict::Unreachable;
  return res;
}

}  // namespace

ProofResult check_reachable(const LitmusTest& test, const ProofBounds& bounds) { return prove(test, bounds, false); }

ProofResult proof_final_states(const LitmusTest& test, const ProofBounds& bounds) { return prove(test, bounds, true); }

// ------------------------------------------------------------ re-checking

bool revalidate(const LitmusTest& test, const ProofWitness& w, std::string* why, const Calculus& calculus) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (w.outlines.size() != test.threads.size()) return fail("one outline per thread expected");
  std::vector<EventStructure> locals;
  for (std::size_t i = 0; i < w.outlines.size(); ++i) {
    if (w.outlines[i].tid != static_cast<Tid>(i + 1)) return fail("outlines out of thread order");
    std::string reason;
    if (!check_outline(test, w.outlines[i], &reason, calculus)) return fail(reason);
    locals.push_back(w.outlines[i].final());
  }
  EventStructure config = compose_tuples(locals, w.config.tuples);
  if (config.key() != w.config.config.key()) return fail("configuration does not match its tuples");
  EventStructure composition = parallel_compose(locals);
  std::map<std::vector<EventId>, EventId> id;
  for (EventId c = 0; c < composition.size(); ++c) id[composition.tuple[static_cast<std::size_t>(c)]] = c;
  InterferenceFree iw;
  for (const auto& t : w.config.tuples) {
    auto it = id.find(t);
    if (it == id.end()) return fail("configuration event is not an event of the composition");
    iw.config.push_back(it->second);
  }
  for (EventId e : w.config.order) {
    if (e < 0 || e >= config.size()) return fail("order refers to unknown events");
    iw.order.push_back(id.at(w.config.tuples[static_cast<std::size_t>(e)]));
  }
  std::sort(iw.config.begin(), iw.config.end());
  std::string reason;
  if (!check_interference_free(composition, locals, iw, &reason)) return fail(reason);
  auto [memory, psi] = canonical_memory(config, w.config.order);
  if (!check_psi(config, memory, psi, &reason)) return fail("psi: " + reason);
  FinalState fs;
  if (!state_for(test, config, w.config.order, fs)) return fail("open promises in the final state");
  if (!(fs == w.state)) return fail("final state differs from the reported one");
  if (!satisfies(test.outcome, fs)) return fail("final state does not satisfy the outcome");
  return true;
}

// ---------------------------------------------------- traces to outlines

namespace {

// The statements executed by one thread's steps, found by replaying them.
bool match_path(const ThreadCode& code, const ThreadConfig& cfg, const Memory& memory,
                const std::vector<StepLabel>& steps, std::size_t k, std::vector<Stmt>& path) {
  if (k == steps.size()) return code.can_finish(cfg.pc) && cfg.ts.prom == 0;
  for (int n : code.frontier(cfg.pc)) {
    std::vector<std::pair<StepLabel, ThreadConfig>> succ;
    node_steps(code, n, cfg.ts, memory, succ);
    for (const auto& [label, next] : succ) {
      if (!(label == steps[k])) continue;
      path.push_back(code.nodes[static_cast<std::size_t>(n)].stmt);
      if (match_path(code, next, memory, steps, k + 1, path)) return true;
      path.pop_back();
    }
  }
  return false;
}

Timestamp ts_of(const Action& a) { return a.is_ini() ? 0 : a.ts; }

}  // namespace

std::vector<ProofOutline> outline_from_trace(const LitmusTest& test, const Trace& trace, const Calculus& calculus) {
  auto bad = [](const std::string& m) { throw std::invalid_argument("trace: " + m); };
  std::size_t promises = 0;
  while (promises < trace.steps.size() && trace.steps[promises].kind == StepLabel::Kind::Prm) ++promises;
  for (std::size_t i = promises; i < trace.steps.size(); ++i)
    if (trace.steps[i].kind == StepLabel::Kind::Prm) bad("promise after a program step");
  if (promises + 1 != trace.memory.size()) bad("memory does not consist of the promises");
  for (std::size_t i = 0; i < promises; ++i) {
    const StepLabel& l = trace.steps[i];
    const Message& m = trace.memory[i + 1];
    if (m.loc != l.loc || m.val != l.val || m.tid != l.tid) bad("promise does not match memory");
  }
  auto codes = compile_threads(test);
  std::vector<ProofOutline> out;
  for (const auto& code : codes) {
    Tid tid = code.tid;
    std::vector<StepLabel> steps;
    for (std::size_t i = promises; i < trace.steps.size(); ++i)
      if (trace.steps[i].tid == tid) steps.push_back(trace.steps[i]);
    ThreadConfig cfg{code.entry, initial_tstate(code)};
    for (std::size_t t = 1; t < trace.memory.size(); ++t)
      if (trace.memory[t].tid == tid) cfg.ts.prom |= std::uint64_t{1} << t;
    std::vector<Stmt> path;
    if (!match_path(code, cfg, trace.memory, steps, 0, path)) bad("steps of thread " + std::to_string(tid) + " do not fit the program");
    std::set<Timestamp> own;
    for (const auto& l : steps)
      if (l.kind == StepLabel::Kind::Ff) own.insert(l.t);

    ProofOutline o;
    o.tid = tid;
    EventStructure es = ini_structure();
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const StepLabel& l = steps[k];
      const Stmt& s = path[k];
      ProofStep st;
      st.stmt = s;
      switch (l.kind) {
        case StepLabel::Kind::Fnc:
          st.rule = Rule::Fence;
          st.post = plus_fnc(es, tid);
          break;
        case StepLabel::Kind::Lst:
          st.rule = Rule::Registers;
          st.post = plus_bar_exp(es, tid, s->reg, s->expr);
          break;
        case StepLabel::Kind::Asm:
          if (expr_value(es, s->expr) == 0) bad("assumption false in the constructed assertion");
          st.rule = Rule::Assume;
          st.post = plus_tst(es, tid, s->expr);
          break;
        case StepLabel::Kind::Ff:
          if (s->rv.is_reg) {
            if (register_value(es, s->rv.reg) != l.val) bad("register value differs from the stored value");
            st.rule = Rule::WriteR;
            st.post = plus_ff_reg(es, tid, s->rv.reg, l.loc, l.val, l.t);
          } else {
            st.rule = Rule::Write;
            st.post = plus_ff(es, tid, l.loc, l.val, l.t);
          }
          break;
        case StepLabel::Kind::Rd: {
          // Timestamps read from now on (not own writes), up to this one.
          std::set<Timestamp> upcoming;
          for (std::size_t j = k; j < steps.size(); ++j)
            if (steps[j].kind == StepLabel::Kind::Rd && steps[j].t != 0 && !own.count(steps[j].t) && steps[j].t <= l.t)
              upcoming.insert(steps[j].t);
          std::set<Timestamp> present;
          for (const Action& a : es.label)
            if (a.is_memory()) present.insert(ts_of(a));
          std::vector<Timestamp> missing;
          for (Timestamp t : upcoming)
            if (!present.count(t)) missing.push_back(t);
          bool restricted = calculus.chains == ChainMode::Restricted;
          if (restricted) {
            missing.clear();
            if (l.t != 0 && !own.count(l.t) && !present.count(l.t)) missing.push_back(l.t);
          }
          if (missing.empty()) {
            auto e = unique_last(es, flow_closure(es), Pattern::act(l.loc));
            if (!e || ts_of(es.label[static_cast<std::size_t>(*e)]) != l.t) bad("read-from event is not last");
            st.rule = Rule::ReadEx;
            st.from = *e;
            st.post = restrict(plus_bar_loc(es, tid, s->reg, l.loc), *e, l.loc, tid, calculus.restrict_mode);
          } else {
            if (missing.back() != l.t) bad("timestamps not closed");
            for (Timestamp t : missing) {
              const Message& m = trace.memory[static_cast<std::size_t>(t)];
              if (m.tid == tid) bad("reads an own unfulfilled promise");
              Action a = prm_action(m.tid, m.loc, m.val);
              a.ts = t;
              st.chain.push_back(a);
            }
            st.rule = Rule::ReadNew;
            st.post = read_new_post(es, st.chain, tid, s->reg, l.loc, calculus);
          }
          break;
        }
        case StepLabel::Kind::Prm: break;
      }
      es = st.post;
      o.steps.push_back(std::move(st));
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::optional<LocalWitness> timestamp_configuration(const std::vector<EventStructure>& locals) {
  std::size_t n = locals.size();
  LocalWitness w;
  std::vector<EventId> ini(n);
  for (std::size_t i = 0; i < n; ++i) ini[i] = locals[i].ini();
  w.tuples.push_back(ini);
  std::map<Timestamp, std::size_t> at;  // timestamp -> tuple
  for (std::size_t i = 0; i < n; ++i)
    for (EventId e = 0; e < locals[i].size(); ++e) {
      const Action& a = locals[i].label[static_cast<std::size_t>(e)];
      if (a.is_ini() || a.is_read()) continue;
      std::vector<EventId> t(n, kStar);
      t[i] = e;
      if (a.is_ff()) {
        if (a.ts < 0 || at.count(a.ts)) return std::nullopt;
        at[a.ts] = w.tuples.size();
      }
      w.tuples.push_back(t);
    }
  for (std::size_t i = 0; i < n; ++i)
    for (EventId e = 0; e < locals[i].size(); ++e) {
      const Action& a = locals[i].label[static_cast<std::size_t>(e)];
      if (!a.is_read()) continue;
      auto it = at.find(a.ts);
      if (it == at.end()) return std::nullopt;
      auto& slot = w.tuples[it->second][i];
      if (slot != kStar) return std::nullopt;
      slot = e;
    }
  w.config = compose_tuples(locals, w.tuples);
  w.order.push_back(0);
  for (const auto& [t, c] : at) w.order.push_back(static_cast<EventId>(c));
  return w;
}

std::string render_witness(const LitmusTest& test, const ProofWitness& w) {
  std::ostringstream os;
  for (const auto& o : w.outlines) os << render_outline(test, o);
  os << "configuration:\n  " << es_text(test, w.config.config) << "\n";
  os << "order:";
  for (EventId e : w.config.order) os << " " << action_text(test, w.config.config.label[static_cast<std::size_t>(e)]);
  os << "\nfinal: " << state_text(test, w.state) << "\n";
  return os.str();
}

}  // namespace wmmr

#include <boost/container_hash/hash.hpp>
#include <unordered_map>
#include <unordered_set>

#include "wmmr/litmus.hpp"
#include "wmmr/promising.hpp"

namespace wmmr {

namespace {

struct Global {
  std::vector<ThreadConfig> cfgs;
  Memory memory;
  bool operator==(const Global& o) const {
    if (!(memory == o.memory) || cfgs.size() != o.cfgs.size()) return false;
    for (std::size_t i = 0; i < cfgs.size(); ++i)
      if (cfgs[i].pc != o.cfgs[i].pc || !(cfgs[i].ts == o.cfgs[i].ts)) return false;
    return true;
  }
};

std::size_t hash_memory(const Memory& m) {
  std::size_t h = 0;
  for (const auto& msg : m) {
    boost::hash_combine(h, msg.loc);
    boost::hash_combine(h, msg.val);
    boost::hash_combine(h, msg.tid);
  }
  return h;
}

struct GlobalHash {
  std::size_t operator()(const Global& g) const {
    std::size_t h = hash_memory(g.memory);
    for (const auto& c : g.cfgs) {
      boost::hash_combine(h, c.pc);
      boost::hash_combine(h, c.ts.hash());
    }
    return h;
  }
};

struct CertKey {
  Tid tid;
  int pc;
  TState ts;
  Memory memory;
  bool operator==(const CertKey& o) const {
    return tid == o.tid && pc == o.pc && ts == o.ts && memory == o.memory;
  }
};

struct CertKeyHash {
  std::size_t operator()(const CertKey& k) const {
    std::size_t h = hash_memory(k.memory);
    boost::hash_combine(h, k.tid);
    boost::hash_combine(h, k.pc);
    boost::hash_combine(h, k.ts.hash());
    return h;
  }
};

struct Scheduler {
  const LitmusTest& test;
  std::vector<ThreadCode> codes;
  std::set<Value> universe;
  int limit;
  long long max_states;
  bool check_monotonicity;
  ExploreResult out;
  std::unordered_set<Global, GlobalHash> seen;
  std::unordered_map<CertKey, bool, CertKeyHash> cert;
  std::vector<StepLabel> path;
  bool stop = false;

  bool certified(const ThreadCode& code, const ThreadConfig& c, const Memory& m) {
    CertKey k{code.tid, c.pc, c.ts, m};
    auto it = cert.find(k);
    if (it != cert.end()) return it->second;
    bool ok = certifiable(code, c, m);
    cert.emplace(std::move(k), ok);
    return ok;
  }

  void record(const Global& g) {
    FinalState fs;
    fs.regs.assign(test.registers.size(), 0);
    for (std::size_t k = 0; k < codes.size(); ++k) {
      if (!codes[k].can_finish(g.cfgs[k].pc) || g.cfgs[k].ts.prom != 0) return;
      for (std::size_t s = 0; s < codes[k].regs.size(); ++s)
        fs.regs[static_cast<std::size_t>(codes[k].regs[s])] = g.cfgs[k].ts.regs[s].val;
    }
    fs.memory.assign(test.locations.size(), 0);
    for (std::size_t t = 1; t < g.memory.size(); ++t) fs.memory[static_cast<std::size_t>(g.memory[t].loc)] = g.memory[t].val;
    if (!out.finals.count(fs)) out.finals.emplace(std::move(fs), Trace{g.memory, path});
  }

  void run(const Global& g) {
    if (stop || !seen.insert(g).second) return;
    ++out.stats.states;
    if (max_states > 0 && out.stats.states > max_states) {
      out.bounded_incomplete = true;
      stop = true;
      return;
    }
    record(g);
    bool may_promise = static_cast<int>(g.memory.size()) <= limit;
    for (std::size_t k = 0; k < codes.size(); ++k) {
      for (auto& s : thread_step(codes[k], g.cfgs[k], g.memory, universe, may_promise)) {
        ++out.stats.transitions;
        if (!certified(codes[k], s.next, s.memory)) continue;
        if (check_monotonicity && !views_monotone(g.cfgs[k].ts, s.next.ts)) ++out.stats.monotonicity_violations;
        Global n = g;
        n.cfgs[k] = std::move(s.next);
        n.memory = std::move(s.memory);
        path.push_back(s.label);
        run(n);
        path.pop_back();
      }
    }
  }
};

}  // namespace

ExploreResult explore_unrestricted(const LitmusTest& test, const Bounds& bounds) {
  for (const auto& th : test.threads)
    if (has_iterate(th.body)) throw std::invalid_argument("explore expects an elaborated test");
  Scheduler s{test, compile_threads(test), value_universe(test), 0, 0, bounds.check_monotonicity, {}, {}, {}, {}};
  s.limit = std::min(bounds.max_memory >= 0 ? bounds.max_memory : count_stores(test), kMaxMemory);
  s.max_states = bounds.max_states > 0 ? bounds.max_states : default_max_states();
  Global g;
  g.memory = initial_memory();
  for (const auto& c : s.codes) g.cfgs.push_back({c.entry, initial_tstate(c)});
  s.run(g);
  s.out.stats.memories = 0;
  return std::move(s.out);
}

}  // namespace wmmr

#include <algorithm>
#include <atomic>
#include <boost/container_hash/hash.hpp>
#include <unordered_set>

#include "wmmr/litmus.hpp"
#include "wmmr/promising.hpp"

#ifdef WMMR_HAVE_OPENMP
#include <omp.h>
#endif

namespace wmmr {

namespace {

// Values each location receives along one path of a thread, in program order.
using StorePlan = std::vector<std::vector<Value>>;

void collect_plans(const ThreadCode& code, int pc, StorePlan& cur, const std::set<Value>& universe,
                   std::set<StorePlan>& out) {
  const CodeNode& n = code.nodes[static_cast<std::size_t>(pc)];
  switch (n.kind) {
    case CodeNode::Kind::End:
      out.insert(cur);
      return;
    case CodeNode::Kind::Branch:
      collect_plans(code, n.next, cur, universe, out);
      collect_plans(code, n.alt, cur, universe, out);
      return;
    case CodeNode::Kind::Atomic:
      break;
  }
  if (n.stmt->kind != StmtKind::Store) {
    collect_plans(code, n.next, cur, universe, out);
    return;
  }
  auto& seq = cur[static_cast<std::size_t>(n.stmt->loc)];
  auto go = [&](Value v) {
    seq.push_back(v);
    collect_plans(code, n.next, cur, universe, out);
    seq.pop_back();
  };
  if (n.stmt->rv.is_reg) {
    for (Value v : universe) go(v);
  } else {
    go(n.stmt->rv.value);
  }
}

struct Queue {
  Tid tid;
  LocId loc;
  const std::vector<Value>* values;
};

struct ThreadFinals {
  // final register valuation of the thread (by slot) -> witness steps
  std::map<std::vector<Value>, std::vector<StepLabel>> runs;
};

struct MemoryResult {
  bool ok = false;
  std::vector<ThreadFinals> threads;
  long long states = 0;
  long long transitions = 0;
  long long violations = 0;
};

struct LocalKey {
  int pc;
  TState ts;
  bool operator==(const LocalKey& o) const { return pc == o.pc && ts == o.ts; }
};

struct LocalKeyHash {
  std::size_t operator()(const LocalKey& k) const {
    std::size_t h = k.ts.hash();
    boost::hash_combine(h, k.pc);
    return h;
  }
};

struct LocalSearch {
  const ThreadCode& code;
  const Memory& memory;
  bool check_monotonicity;
  ThreadFinals& finals;
  MemoryResult& stats;
  std::unordered_set<LocalKey, LocalKeyHash> seen;
  std::vector<StepLabel> path;

  void run(const ThreadConfig& cfg) {
    if (!seen.insert({cfg.pc, cfg.ts}).second) return;
    ++stats.states;
    if (cfg.ts.prom == 0 && code.can_finish(cfg.pc)) {
      std::vector<Value> vals;
      for (const auto& r : cfg.ts.regs) vals.push_back(r.val);
      finals.runs.emplace(std::move(vals), path);
    }
    std::vector<std::pair<StepLabel, ThreadConfig>> succ;
    local_steps(code, cfg, memory, succ);
    for (const auto& [l, c] : succ) {
      ++stats.transitions;
      if (check_monotonicity && !views_monotone(cfg.ts, c.ts)) ++stats.violations;
      path.push_back(l);
      run(c);
      path.pop_back();
    }
  }
};

MemoryResult process_memory(const std::vector<ThreadCode>& codes, const Memory& memory, bool check_monotonicity) {
  MemoryResult res;
  res.threads.resize(codes.size());
  for (std::size_t k = 0; k < codes.size(); ++k) {
    const ThreadCode& code = codes[k];
    ThreadConfig start{code.entry, initial_tstate(code)};
    for (std::size_t t = 1; t < memory.size(); ++t)
      if (memory[t].tid == code.tid) start.ts.prom |= std::uint64_t{1} << t;
    LocalSearch s{code, memory, check_monotonicity, res.threads[k], res, {}, {}};
    s.run(start);
    if (res.threads[k].runs.empty()) return res;
  }
  res.ok = true;
  return res;
}

void merge_memory(const LitmusTest& test, const std::vector<ThreadCode>& codes, const Memory& memory,
                  const MemoryResult& mr, ExploreResult& out) {
  out.stats.states += mr.states;
  out.stats.transitions += mr.transitions;
  out.stats.monotonicity_violations += mr.violations;
  if (!mr.ok) return;
  std::vector<Value> last(test.locations.size(), 0);
  for (std::size_t t = 1; t < memory.size(); ++t) last[static_cast<std::size_t>(memory[t].loc)] = memory[t].val;
  std::vector<StepLabel> promises;
  for (std::size_t t = 1; t < memory.size(); ++t) {
    StepLabel l;
    l.kind = StepLabel::Kind::Prm;
    l.tid = memory[t].tid;
    l.loc = memory[t].loc;
    l.val = memory[t].val;
    l.t = static_cast<Timestamp>(t);
    promises.push_back(l);
  }
  // Threads are independent once memory is fixed: take the product.
  std::vector<std::map<std::vector<Value>, std::vector<StepLabel>>::const_iterator> it;
  for (const auto& tf : mr.threads) it.push_back(tf.runs.begin());
  while (true) {
    FinalState fs;
    fs.regs.assign(test.registers.size(), 0);
    fs.memory = last;
    for (std::size_t k = 0; k < codes.size(); ++k)
      for (std::size_t s = 0; s < codes[k].regs.size(); ++s)
        fs.regs[static_cast<std::size_t>(codes[k].regs[s])] = it[k]->first[s];
    if (!out.finals.count(fs)) {
      Trace tr;
      tr.memory = memory;
      tr.steps = promises;
      for (std::size_t k = 0; k < codes.size(); ++k) tr.steps.insert(tr.steps.end(), it[k]->second.begin(), it[k]->second.end());
      out.finals.emplace(std::move(fs), std::move(tr));
    }
    std::size_t k = 0;
    for (; k < it.size(); ++k) {
      if (++it[k] != mr.threads[k].runs.end()) break;
      it[k] = mr.threads[k].runs.begin();
    }
    if (k == it.size()) break;
  }
}

constexpr std::size_t kChunk = 2048;

ExploreResult explore_impl(const LitmusTest& test, const Bounds& bounds, bool parallel) {
  for (const auto& th : test.threads)
    if (has_iterate(th.body)) throw std::invalid_argument("explore expects an elaborated test");
  ExploreResult out;
  auto codes = compile_threads(test);
  std::set<Value> universe = value_universe(test);
  int limit = bounds.max_memory >= 0 ? bounds.max_memory : count_stores(test);
  limit = std::min(limit, kMaxMemory);
  long long max_states = bounds.max_states > 0 ? bounds.max_states : default_max_states();

  std::vector<std::vector<StorePlan>> plans;
  for (const auto& code : codes) {
    std::set<StorePlan> ps;
    StorePlan cur(test.locations.size());
    collect_plans(code, code.entry, cur, universe, ps);
    plans.emplace_back(ps.begin(), ps.end());
  }

  bool stop = false;
  std::vector<std::size_t> pick(codes.size(), 0);
  std::vector<Memory> batch;
  auto flush = [&] {
    std::vector<MemoryResult> results(batch.size());
#ifdef WMMR_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
#endif
    for (std::size_t i = 0; i < batch.size(); ++i) results[i] = process_memory(codes, batch[i], bounds.check_monotonicity);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      merge_memory(test, codes, batch[i], results[i], out);
      if (max_states > 0 && out.stats.states > max_states) {
        out.bounded_incomplete = true;
        stop = true;
        break;
      }
    }
    batch.clear();
  };
  (void)parallel;

  while (!stop) {
    std::vector<Queue> queues;
    for (std::size_t k = 0; k < codes.size(); ++k) {
      const StorePlan& p = plans[k][pick[k]];
      for (std::size_t x = 0; x < p.size(); ++x)
        if (!p[x].empty()) queues.push_back({codes[k].tid, static_cast<LocId>(x), &p[x]});
    }
    std::vector<int> order;
    for (std::size_t q = 0; q < queues.size(); ++q) order.insert(order.end(), queues[q].values->size(), static_cast<int>(q));
    if (static_cast<int>(order.size()) > limit) {
      out.bounded_incomplete = true;
    } else {
      // Each distinct permutation of the queue multiset is one interleaving.
      do {
        Memory m = initial_memory();
        std::vector<std::size_t> pos(queues.size(), 0);
        for (int q : order) {
          const Queue& qu = queues[static_cast<std::size_t>(q)];
          m.push_back(Message{qu.loc, (*qu.values)[pos[static_cast<std::size_t>(q)]++], qu.tid});
        }
        batch.push_back(std::move(m));
        ++out.stats.memories;
        if (batch.size() >= kChunk) flush();
      } while (!stop && std::next_permutation(order.begin(), order.end()));
      if (!stop) flush();
    }
    std::size_t k = 0;
    for (; k < pick.size(); ++k) {
      if (++pick[k] < plans[k].size()) break;
      pick[k] = 0;
    }
    if (k == pick.size()) break;
  }
  return out;
}

}  // namespace

ExploreResult explore(const LitmusTest& test, const Bounds& bounds) {
  return explore_impl(test, bounds, bounds.parallel);
}

ExploreResult explore_serial(const LitmusTest& test, const Bounds& bounds) {
  return explore_impl(test, bounds, false);
}

}  // namespace wmmr

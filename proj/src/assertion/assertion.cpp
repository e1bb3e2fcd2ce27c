#include <algorithm>
#include <functional>
#include <numeric>

#include "wmmr/assertion.hpp"

namespace wmmr {

namespace {

boost::dynamic_bitset<> memory_before(const EventStructure& es, const Closure& before,
                                      const std::vector<EventId>& targets) {
  boost::dynamic_bitset<> out(static_cast<std::size_t>(es.size()));
  for (EventId t : targets) out |= before[static_cast<std::size_t>(t)];
  for (EventId e = 0; e < es.size(); ++e)
    if (!es.label[static_cast<std::size_t>(e)].is_memory()) out.reset(static_cast<std::size_t>(e));
  return out;
}

std::vector<EventId> bits_to_ids(const boost::dynamic_bitset<>& b) {
  std::vector<EventId> out;
  for (auto i = b.find_first(); i != boost::dynamic_bitset<>::npos; i = b.find_next(i))
    out.push_back(static_cast<EventId>(i));
  return out;
}

Value eval_with(const Expr& e, const std::function<Value(RegId)>& reg) {
  switch (e->kind) {
    case ExprNode::Kind::Const: return e->value;
    case ExprNode::Kind::Reg: return reg(e->reg);
    case ExprNode::Kind::Unary: return apply_op(Op::Not, eval_with(e->lhs, reg), 0);
    case ExprNode::Kind::Binary: return apply_op(e->op, eval_with(e->lhs, reg), eval_with(e->rhs, reg));
  }
  return 0;
}

Value bar_value(const EventStructure& es, const Closure& before, EventId b) {
  const Action& a = es.label[static_cast<std::size_t>(b)];
  const auto& preds = es.pred[static_cast<std::size_t>(b)];
  if (a.kind == Action::Kind::BarLoc) {
    // The read or write the bar took its value from: the flow-latest direct
    // predecessor on the bar's location.
    EventId src = -1;
    for (EventId d : preds) {
      if (!es.label[static_cast<std::size_t>(d)].in_act(a.loc)) continue;
      if (src < 0 || before[static_cast<std::size_t>(d)].test(static_cast<std::size_t>(src))) src = d;
    }
    if (src < 0) return 0;
    const Action& s = es.label[static_cast<std::size_t>(src)];
    return s.is_ini() ? 0 : s.val;
  }
  return eval_with(a.expr, [&](RegId r) -> Value {
    for (EventId d : preds) {
      const Action& p = es.label[static_cast<std::size_t>(d)];
      if (p.is_bar() && p.reg == r) return bar_value(es, before, d);
    }
    return 0;
  });
}

Value register_value_c(const EventStructure& es, const Closure& before, RegId r) {
  auto m = maximal(es, before, [&](const Action& a) { return a.is_bar() && a.reg == r; });
  if (m.empty()) return 0;
  return bar_value(es, before, m.back());
}

}  // namespace

ThreadPriors thread_priors(const EventStructure& es, const Closure& before, Tid tid) {
  ThreadPriors p;
  std::size_t n = static_cast<std::size_t>(es.size());
  p.fnc = memory_before(es, before, maximal(es, before, [&](const Action& a) {
                          return a.kind == Action::Kind::Fnc && a.tid == tid;
                        }));
  p.tst = memory_before(es, before, maximal(es, before, [&](const Action& a) {
                          return a.kind == Action::Kind::Tst && a.tid == tid;
                        }));
  p.bar.resize(n);
  for (RegId r : barred_registers(es, tid)) {
    auto b = memory_before(es, before, maximal(es, before, [&](const Action& a) { return a.is_bar() && a.reg == r; }));
    p.bar |= b;
    p.bar_reg.emplace(r, std::move(b));
  }
  std::map<LocId, std::vector<EventId>> bars_on;
  for (EventId e = 0; e < es.size(); ++e) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (a.kind == Action::Kind::BarLoc && a.tid == tid) bars_on[a.loc].push_back(e);
  }
  for (const auto& [x, ids] : bars_on) p.bar_loc.emplace(x, memory_before(es, before, ids));
  return p;
}

std::vector<EventId> priors(const EventStructure& es, PriorKind kind, Tid tid, RegId reg, LocId loc) {
  Closure before = flow_closure(es);
  ThreadPriors p = thread_priors(es, before, tid);
  switch (kind) {
    case PriorKind::Fnc: return bits_to_ids(p.fnc);
    case PriorKind::Tst: return bits_to_ids(p.tst);
    case PriorKind::BarThread: return bits_to_ids(p.bar);
    case PriorKind::BarReg: {
      auto it = p.bar_reg.find(reg);
      return it == p.bar_reg.end() ? std::vector<EventId>{} : bits_to_ids(it->second);
    }
    case PriorKind::BarLoc: {
      auto it = p.bar_loc.find(loc);
      return it == p.bar_loc.end() ? std::vector<EventId>{} : bits_to_ids(it->second);
    }
  }
  return {};
}

Value register_value(const EventStructure& es, RegId a) { return register_value_c(es, flow_closure(es), a); }

Value expr_value(const EventStructure& es, const Expr& e) {
  Closure before = flow_closure(es);
  return eval_with(e, [&](RegId r) { return register_value_c(es, before, r); });
}

// ------------------------------------------------------------------- psi

namespace {

bool message_matches(const Action& a, const Message& m) {
  return !m.is_ini() && m.loc == a.loc && m.val == a.val && m.tid == a.tid;
}

// Conditional restrictions: when psi(d) < psi(f), nothing on L in between.
bool restrictions_hold(const EventStructure& es, const Memory& memory, const Psi& psi) {
  for (const auto& [k, L] : es.lambda) {
    Timestamp lo = psi[static_cast<std::size_t>(k.first)];
    Timestamp hi = psi[static_cast<std::size_t>(k.second)];
    if (lo < 0 || hi < 0 || lo >= hi) continue;
    for (Timestamp t = lo + 1; t < hi; ++t)
      if (L & loc_bit(memory[static_cast<std::size_t>(t)].loc)) return false;
  }
  return true;
}

bool consecutive(const EventStructure& es, const Memory& memory, const Psi& psi) {
  std::vector<char> ff_ts(memory.size(), 0);
  for (EventId e = 0; e < es.size(); ++e)
    if (es.label[static_cast<std::size_t>(e)].is_ff()) ff_ts[static_cast<std::size_t>(psi[static_cast<std::size_t>(e)])] = 1;
  for (EventId e = 0; e < es.size(); ++e) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (!a.is_ff()) continue;
    for (Timestamp t = 1; t < psi[static_cast<std::size_t>(e)]; ++t) {
      const Message& m = memory[static_cast<std::size_t>(t)];
      if (m.tid == a.tid && m.loc == a.loc && !ff_ts[static_cast<std::size_t>(t)]) {
        // t must be psi of a fulfill of the same thread
        bool found = false;
        for (EventId d = 0; d < es.size() && !found; ++d) {
          const Action& b = es.label[static_cast<std::size_t>(d)];
          found = b.is_ff() && b.tid == a.tid && psi[static_cast<std::size_t>(d)] == t;
        }
        if (!found) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<Psi> enumerate_psi(const EventStructure& es, const Memory& memory, std::size_t cap) {
  Closure before = flow_closure(es);
  std::vector<EventId> order;
  for (EventId e = 0; e < es.size(); ++e)
    if (es.label[static_cast<std::size_t>(e)].is_memory()) order.push_back(e);
  std::stable_sort(order.begin(), order.end(), [&](EventId a, EventId b) {
    return before[static_cast<std::size_t>(a)].count() < before[static_cast<std::size_t>(b)].count();
  });
  std::vector<Psi> out;
  Psi psi(static_cast<std::size_t>(es.size()), -1);
  std::vector<char> used(memory.size(), 0);
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (out.size() >= cap) return;
    if (i == order.size()) {
      if (restrictions_hold(es, memory, psi) && consecutive(es, memory, psi)) out.push_back(psi);
      return;
    }
    EventId e = order[i];
    const Action& a = es.label[static_cast<std::size_t>(e)];
    auto try_t = [&](Timestamp t) {
      for (EventId d : order) {
        Timestamp pd = psi[static_cast<std::size_t>(d)];
        if (pd >= 0 && before[static_cast<std::size_t>(e)].test(static_cast<std::size_t>(d)) && pd >= t) return;
      }
      psi[static_cast<std::size_t>(e)] = t;
      used[static_cast<std::size_t>(t)] = 1;
      go(i + 1);
      used[static_cast<std::size_t>(t)] = 0;
      psi[static_cast<std::size_t>(e)] = -1;
    };
    if (a.is_ini()) {
      if (!used[0]) try_t(0);
      return;
    }
    for (Timestamp t = 1; t < static_cast<Timestamp>(memory.size()); ++t)
      if (!used[static_cast<std::size_t>(t)] && message_matches(a, memory[static_cast<std::size_t>(t)])) try_t(t);
  };
  go(0);
  return out;
}

bool check_psi(const EventStructure& es, const Memory& memory, const Psi& psi, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (psi.size() != static_cast<std::size_t>(es.size())) return fail("psi has the wrong size");
  std::vector<EventId> dom;
  for (EventId e = 0; e < es.size(); ++e) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    Timestamp t = psi[static_cast<std::size_t>(e)];
    if (!a.is_memory()) {
      if (t != -1) return fail("psi defined on a non-memory event");
      continue;
    }
    if (t < 0 || t >= static_cast<Timestamp>(memory.size())) return fail("psi is not total on memory events");
    dom.push_back(e);
  }
  // (1) initializes at zero
  for (EventId e : dom) {
    bool ini = es.label[static_cast<std::size_t>(e)].is_ini();
    if (ini != (psi[static_cast<std::size_t>(e)] == 0)) return fail("ini must be the only event at timestamp 0");
  }
  // injectivity
  for (EventId a : dom)
    for (EventId b : dom)
      if (a < b && psi[static_cast<std::size_t>(a)] == psi[static_cast<std::size_t>(b)]) return fail("psi is not injective");
  // (3) preserves content
  for (EventId e : dom) {
    Timestamp t = psi[static_cast<std::size_t>(e)];
    if (t == 0) continue;
    const Message& m = memory[static_cast<std::size_t>(t)];
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (a.loc != m.loc || a.val != m.val || a.tid != m.tid) return fail("content of event differs from memory");
  }
  // (2) consecutive per thread
  for (EventId e : dom) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (!a.is_ff()) continue;
    for (Timestamp t = 1; t < psi[static_cast<std::size_t>(e)]; ++t) {
      const Message& m = memory[static_cast<std::size_t>(t)];
      if (m.tid != a.tid || m.loc != a.loc) continue;
      bool covered = false;
      for (EventId d : dom) {
        const Action& b = es.label[static_cast<std::size_t>(d)];
        if (b.is_ff() && b.tid == a.tid && psi[static_cast<std::size_t>(d)] == t) covered = true;
      }
      if (!covered) return fail("fulfills are not consecutive");
    }
  }
  // (4) preserves flows, via a fresh transitive closure restricted to paths
  Closure before = flow_closure(es);
  for (EventId d : dom)
    for (EventId e : dom)
      if (before[static_cast<std::size_t>(e)].test(static_cast<std::size_t>(d)) &&
          psi[static_cast<std::size_t>(d)] >= psi[static_cast<std::size_t>(e)])
        return fail("flow order not preserved");
  // (5) preserves memory constraints
  for (const auto& [k, L] : es.lambda) {
    auto [d, f] = k;
    if (!es.label[static_cast<std::size_t>(d)].is_memory() || !es.label[static_cast<std::size_t>(f)].is_memory()) continue;
    for (Timestamp t = psi[static_cast<std::size_t>(d)] + 1; t < psi[static_cast<std::size_t>(f)]; ++t)
      if ((L >> memory[static_cast<std::size_t>(t)].loc) & 1u) return fail("write to a restricted location in between");
  }
  return true;
}

// ----------------------------------------------------------------- views

TState views_from(const LitmusTest& test, const EventStructure& es, const Psi& psi, const Memory& memory, Tid tid) {
  Closure before = flow_closure(es);
  ThreadPriors pr = thread_priors(es, before, tid);
  auto join = [&](const boost::dynamic_bitset<>& set) {
    Timestamp v = 0;
    for (auto i = set.find_first(); i != boost::dynamic_bitset<>::npos; i = set.find_next(i)) v = std::max(v, psi[i]);
    return v;
  };
  std::size_t n = static_cast<std::size_t>(es.size());
  boost::dynamic_bitset<> ff(n);
  for (EventId e = 0; e < es.size(); ++e) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (a.is_ff() && a.tid == tid) ff.set(static_cast<std::size_t>(e));
  }
  TState ts;
  ts.v_C = join(pr.tst);
  ts.v_wOld = join(ff);
  ts.v_wNew = join(pr.fnc & (ff | pr.bar));
  ts.v_read = join((pr.fnc & ff) | pr.bar);
  ts.coh.assign(test.locations.size(), 0);
  for (EventId e = 0; e < es.size(); ++e) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (a.is_ff() && a.tid == tid)
      ts.coh[static_cast<std::size_t>(a.loc)] = std::max(ts.coh[static_cast<std::size_t>(a.loc)], psi[static_cast<std::size_t>(e)]);
  }
  for (const auto& [x, set] : pr.bar_loc)
    ts.coh[static_cast<std::size_t>(x)] = std::max(ts.coh[static_cast<std::size_t>(x)], join(set));
  for (RegId r : test.regs_of(tid)) {
    auto it = pr.bar_reg.find(r);
    Timestamp v = it == pr.bar_reg.end() ? 0 : join(it->second);
    ts.regs.push_back({register_value_c(es, before, r), v});
  }
  std::vector<char> fulfilled(memory.size(), 0);
  for (auto i = ff.find_first(); i != boost::dynamic_bitset<>::npos; i = ff.find_next(i))
    fulfilled[static_cast<std::size_t>(psi[i])] = 1;
  for (std::size_t t = 1; t < memory.size(); ++t)
    if (memory[t].tid == tid && !fulfilled[t]) ts.prom |= std::uint64_t{1} << t;
  return ts;
}

bool matches(const LitmusTest& test, const EventStructure& es, const std::vector<TState>& states,
             const Memory& memory) {
  for (const Psi& psi : enumerate_psi(es, memory)) {
    bool all = true;
    for (std::size_t k = 0; k < states.size() && all; ++k)
      all = views_from(test, es, psi, memory, static_cast<Tid>(k + 1)) == states[k];
    if (all) return true;
  }
  return false;
}

std::pair<Memory, Psi> canonical_memory(const EventStructure& es, const std::vector<EventId>& order) {
  Memory m = initial_memory();
  Psi psi(static_cast<std::size_t>(es.size()), -1);
  for (EventId e : order) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (a.is_ini()) {
      psi[static_cast<std::size_t>(e)] = 0;
      continue;
    }
    psi[static_cast<std::size_t>(e)] = static_cast<Timestamp>(m.size());
    m.push_back(Message{a.loc, a.val, a.tid});
  }
  return {m, psi};
}

std::set<FinalState> final_states(const LitmusTest& test, const EventStructure& es, std::size_t cap) {
  std::set<FinalState> out;
  for (const auto& order : all_linearizations(es, cap)) {
    auto [memory, psi] = canonical_memory(es, order);
    FinalState fs;
    fs.regs.assign(test.registers.size(), 0);
    bool ok = true;
    for (const auto& th : test.threads) {
      TState ts = views_from(test, es, psi, memory, th.tid);
      if (ts.prom != 0) {
        ok = false;
        break;
      }
      auto regs = test.regs_of(th.tid);
      for (std::size_t s = 0; s < regs.size(); ++s) fs.regs[static_cast<std::size_t>(regs[s])] = ts.regs[s].val;
    }
    if (!ok) continue;
    fs.memory.assign(test.locations.size(), 0);
    for (std::size_t t = 1; t < memory.size(); ++t) fs.memory[static_cast<std::size_t>(memory[t].loc)] = memory[t].val;
    out.insert(std::move(fs));
  }
  return out;
}

}  // namespace wmmr

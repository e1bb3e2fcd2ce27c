#include <algorithm>
#include <boost/container_hash/hash.hpp>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "wmmr/litmus.hpp"
#include "wmmr/promising.hpp"

namespace wmmr {

Memory initial_memory() { return Memory{Message{}}; }

bool TState::operator==(const TState& o) const {
  return prom == o.prom && coh == o.coh && regs == o.regs && v_read == o.v_read && v_wOld == o.v_wOld &&
         v_wNew == o.v_wNew && v_C == o.v_C;
}

std::size_t TState::hash() const {
  std::size_t h = std::hash<std::uint64_t>()(prom);
  for (Timestamp c : coh) boost::hash_combine(h, c);
  for (const auto& r : regs) {
    boost::hash_combine(h, r.val);
    boost::hash_combine(h, r.view);
  }
  boost::hash_combine(h, v_read);
  boost::hash_combine(h, v_wOld);
  boost::hash_combine(h, v_wNew);
  boost::hash_combine(h, v_C);
  return h;
}

std::set<Timestamp> TState::promises() const {
  std::set<Timestamp> out;
  for (int t = 0; t < 64; ++t)
    if (prom >> t & 1u) out.insert(t);
  return out;
}

// ------------------------------------------------------------------ code

namespace {

int compile_rec(const Stmt& s, int next, std::vector<CodeNode>& nodes) {
  switch (s->kind) {
    case StmtKind::Skip:
      return next;
    case StmtKind::Seq:
      return compile_rec(s->first, compile_rec(s->second, next, nodes), nodes);
    case StmtKind::Choice: {
      int b = compile_rec(s->second, next, nodes);
      int a = compile_rec(s->first, next, nodes);
      CodeNode n;
      n.kind = CodeNode::Kind::Branch;
      n.next = a;
      n.alt = b;
      nodes.push_back(n);
      return static_cast<int>(nodes.size() - 1);
    }
    case StmtKind::Iterate:
      throw std::invalid_argument("program must be elaborated before compilation");
    default: {
      CodeNode n;
      n.kind = CodeNode::Kind::Atomic;
      n.stmt = s;
      n.next = next;
      nodes.push_back(n);
      return static_cast<int>(nodes.size() - 1);
    }
  }
}

}  // namespace

ThreadCode compile_thread(const LitmusTest& test, Tid tid) {
  ThreadCode code;
  code.tid = tid;
  code.nodes.push_back(CodeNode{});  // pc 0: end
  code.entry = compile_rec(test.threads.at(static_cast<std::size_t>(tid - 1)).body, 0, code.nodes);
  code.regs = test.regs_of(tid);
  code.slot.assign(test.registers.size(), -1);
  for (std::size_t i = 0; i < code.regs.size(); ++i) code.slot[static_cast<std::size_t>(code.regs[i])] = static_cast<int>(i);
  code.loc_count = static_cast<int>(test.locations.size());
  return code;
}

std::vector<ThreadCode> compile_threads(const LitmusTest& test) {
  std::vector<ThreadCode> out;
  for (const auto& th : test.threads) out.push_back(compile_thread(test, th.tid));
  return out;
}

bool ThreadCode::can_finish(int pc) const {
  const CodeNode& n = nodes[static_cast<std::size_t>(pc)];
  if (n.kind == CodeNode::Kind::End) return true;
  if (n.kind == CodeNode::Kind::Branch) return can_finish(n.next) || can_finish(n.alt);
  return false;
}

std::vector<int> ThreadCode::frontier(int pc) const {
  std::vector<int> out;
  std::vector<int> stack{pc};
  while (!stack.empty()) {
    int p = stack.back();
    stack.pop_back();
    const CodeNode& n = nodes[static_cast<std::size_t>(p)];
    if (n.kind == CodeNode::Kind::Branch) {
      stack.push_back(n.alt);
      stack.push_back(n.next);
    } else if (n.kind == CodeNode::Kind::Atomic) {
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
  }
  return out;
}

TState initial_tstate(const ThreadCode& code) {
  TState ts;
  ts.coh.assign(static_cast<std::size_t>(code.loc_count), 0);
  ts.regs.assign(code.regs.size(), RegVal{});
  return ts;
}

// ---------------------------------------------------------------- labels

bool StepLabel::operator==(const StepLabel& o) const {
  return kind == o.kind && tid == o.tid && loc == o.loc && val == o.val && t == o.t && reg == o.reg &&
         expr_equal(expr, o.expr);
}

std::string label_text(const LitmusTest& test, const StepLabel& l) {
  std::ostringstream os;
  os << l.tid << ": ";
  switch (l.kind) {
    case StepLabel::Kind::Prm:
      os << "prm(" << test.locations.at(l.loc) << "," << l.val << ")@t=" << l.t;
      break;
    case StepLabel::Kind::Rd:
      os << "rd(" << test.locations.at(l.loc) << "," << l.val << ")@t=" << l.t;
      break;
    case StepLabel::Kind::Ff:
      os << "ff(" << test.locations.at(l.loc) << "," << l.val << ")@t=" << l.t;
      break;
    case StepLabel::Kind::Fnc:
      os << "fnc";
      break;
    case StepLabel::Kind::Lst:
      os << "lst(" << test.registers.at(l.reg).name << "," << print_expr(test, l.expr) << ")";
      break;
    case StepLabel::Kind::Asm:
      os << "asm(" << print_expr(test, l.expr) << ")";
      break;
  }
  return os.str();
}

std::string trace_text(const LitmusTest& test, const Trace& trace) {
  std::ostringstream os;
  for (const auto& s : trace.steps) os << label_text(test, s) << "\n";
  return os.str();
}

// ----------------------------------------------------------------- steps

RegVal expeval(const Expr& e, const ThreadCode& code, const TState& ts) {
  switch (e->kind) {
    case ExprNode::Kind::Const:
      return {e->value, 0};
    case ExprNode::Kind::Reg: {
      int s = code.slot.at(static_cast<std::size_t>(e->reg));
      if (s < 0) throw std::logic_error("register of another thread in expression");
      return ts.regs[static_cast<std::size_t>(s)];
    }
    case ExprNode::Kind::Unary: {
      RegVal a = expeval(e->lhs, code, ts);
      return {apply_op(Op::Not, a.val, 0), a.view};
    }
    case ExprNode::Kind::Binary: {
      RegVal a = expeval(e->lhs, code, ts);
      RegVal b = expeval(e->rhs, code, ts);
      return {apply_op(e->op, a.val, b.val), std::max(a.view, b.view)};
    }
  }
  return {};
}

namespace {

RegVal operand_value(const Operand& rv, const ThreadCode& code, const TState& ts) {
  if (!rv.is_reg) return {rv.value, 0};
  return ts.regs[static_cast<std::size_t>(code.slot.at(static_cast<std::size_t>(rv.reg)))];
}

// Successors of one atomic statement without promises.
void atomic_steps(const ThreadCode& code, int node, const TState& ts, const Memory& memory,
                  std::vector<std::pair<StepLabel, ThreadConfig>>& out) {
  const CodeNode& n = code.nodes[static_cast<std::size_t>(node)];
  const StmtNode& s = *n.stmt;
  StepLabel l;
  l.tid = code.tid;
  switch (s.kind) {
    case StmtKind::Load: {
      LocId x = s.loc;
      Timestamp bound = std::max(ts.v_read, ts.coh[static_cast<std::size_t>(x)]);
      int mlen = static_cast<int>(memory.size());
      // The newest x-write at or below the bound, plus every x-write above it.
      Timestamp last = 0;
      for (Timestamp t = std::min(bound, mlen - 1); t > 0; --t)
        if (memory[static_cast<std::size_t>(t)].loc == x) {
          last = t;
          break;
        }
      auto emit = [&](Timestamp t) {
        const Message& m = memory[static_cast<std::size_t>(t)];
        Timestamp post = std::max(ts.v_read, t);
        ThreadConfig c{n.next, ts};
        c.ts.regs[static_cast<std::size_t>(code.slot[static_cast<std::size_t>(s.reg)])] = {m.val, post};
        c.ts.coh[static_cast<std::size_t>(x)] = std::max(ts.coh[static_cast<std::size_t>(x)], post);
        c.ts.v_read = post;
        StepLabel r = l;
        r.kind = StepLabel::Kind::Rd;
        r.loc = x;
        r.val = m.val;
        r.t = t;
        r.reg = s.reg;
        out.emplace_back(r, std::move(c));
      };
      emit(last);
      for (Timestamp t = bound + 1; t < mlen; ++t)
        if (memory[static_cast<std::size_t>(t)].loc == x) emit(t);
      return;
    }
    case StmtKind::Store: {
      RegVal v = operand_value(s.rv, code, ts);
      Timestamp lower = std::max({ts.v_wNew, ts.v_C, ts.coh[static_cast<std::size_t>(s.loc)], v.view});
      for (Timestamp t = lower + 1; t < static_cast<Timestamp>(memory.size()); ++t) {
        if (!(ts.prom >> t & 1u)) continue;
        const Message& m = memory[static_cast<std::size_t>(t)];
        if (m.loc != s.loc || m.val != v.val || m.tid != code.tid) continue;
        ThreadConfig c{n.next, ts};
        c.ts.prom &= ~(std::uint64_t{1} << t);
        c.ts.coh[static_cast<std::size_t>(s.loc)] = t;
        c.ts.v_wOld = std::max(ts.v_wOld, t);
        StepLabel f = l;
        f.kind = StepLabel::Kind::Ff;
        f.loc = s.loc;
        f.val = v.val;
        f.t = t;
        out.emplace_back(f, std::move(c));
      }
      return;
    }
    case StmtKind::Assign: {
      RegVal v = expeval(s.expr, code, ts);
      ThreadConfig c{n.next, ts};
      RegVal& dst = c.ts.regs[static_cast<std::size_t>(code.slot[static_cast<std::size_t>(s.reg)])];
      dst = {v.val, std::max(dst.view, v.view)};
      StepLabel a = l;
      a.kind = StepLabel::Kind::Lst;
      a.reg = s.reg;
      a.expr = s.expr;
      out.emplace_back(a, std::move(c));
      return;
    }
    case StmtKind::Dmb: {
      ThreadConfig c{n.next, ts};
      Timestamp v = std::max(ts.v_read, ts.v_wOld);
      c.ts.v_read = v;
      c.ts.v_wNew = v;
      StepLabel f = l;
      f.kind = StepLabel::Kind::Fnc;
      out.emplace_back(f, std::move(c));
      return;
    }
    case StmtKind::Asm: {
      RegVal v = expeval(s.expr, code, ts);
      if (v.val == 0) return;
      ThreadConfig c{n.next, ts};
      c.ts.v_C = std::max(ts.v_C, v.view);
      StepLabel a = l;
      a.kind = StepLabel::Kind::Asm;
      a.expr = s.expr;
      out.emplace_back(a, std::move(c));
      return;
    }
    default:
      throw std::logic_error("non-atomic statement in compiled code");
  }
}

// (location, value) pairs a thread could ever fulfill.
std::vector<std::pair<LocId, Value>> promise_candidates(const ThreadCode& code, const std::set<Value>& values) {
  std::set<std::pair<LocId, Value>> out;
  for (const auto& n : code.nodes) {
    if (n.kind != CodeNode::Kind::Atomic || n.stmt->kind != StmtKind::Store) continue;
    if (n.stmt->rv.is_reg) {
      for (Value v : values) out.insert({n.stmt->loc, v});
    } else {
      out.insert({n.stmt->loc, n.stmt->rv.value});
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace

void node_steps(const ThreadCode& code, int node, const TState& ts, const Memory& memory,
                std::vector<std::pair<StepLabel, ThreadConfig>>& out) {
  atomic_steps(code, node, ts, memory, out);
}

void local_steps(const ThreadCode& code, const ThreadConfig& cfg, const Memory& memory,
                 std::vector<std::pair<StepLabel, ThreadConfig>>& out) {
  for (int node : code.frontier(cfg.pc)) atomic_steps(code, node, cfg.ts, memory, out);
}

std::vector<Successor> thread_step(const ThreadCode& code, const ThreadConfig& cfg, const Memory& memory,
                                   const std::set<Value>& promise_values, bool allow_promise) {
  std::vector<Successor> out;
  std::vector<std::pair<StepLabel, ThreadConfig>> local;
  local_steps(code, cfg, memory, local);
  for (auto& [l, c] : local) out.push_back({l, std::move(c), memory});
  if (allow_promise && static_cast<int>(memory.size()) <= kMaxMemory) {
    for (auto [x, v] : promise_candidates(code, promise_values)) {
      Successor s;
      s.memory = memory;
      Timestamp t = static_cast<Timestamp>(memory.size());
      s.memory.push_back(Message{x, v, code.tid});
      s.next = cfg;
      s.next.ts.prom |= std::uint64_t{1} << t;
      s.label.kind = StepLabel::Kind::Prm;
      s.label.tid = code.tid;
      s.label.loc = x;
      s.label.val = v;
      s.label.t = t;
      out.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------- certification

namespace {

struct CertKey {
  int pc;
  TState ts;
  Memory memory;
  bool operator==(const CertKey& o) const { return pc == o.pc && ts == o.ts && memory == o.memory; }
};

struct CertKeyHash {
  std::size_t operator()(const CertKey& k) const {
    std::size_t h = k.ts.hash();
    boost::hash_combine(h, k.pc);
    for (const auto& m : k.memory) {
      boost::hash_combine(h, m.loc);
      boost::hash_combine(h, m.val);
      boost::hash_combine(h, m.tid);
    }
    return h;
  }
};

bool certify_rec(const ThreadCode& code, const ThreadConfig& cfg, const Memory& memory,
                 std::unordered_map<CertKey, bool, CertKeyHash>& memo) {
  if (cfg.ts.prom == 0) return true;
  CertKey key{cfg.pc, cfg.ts, memory};
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  memo[key] = false;
  bool ok = false;
  std::vector<std::pair<StepLabel, ThreadConfig>> succ;
  local_steps(code, cfg, memory, succ);
  for (const auto& [l, c] : succ) {
    if (certify_rec(code, c, memory, memo)) {
      ok = true;
      break;
    }
  }
  // A store with no matching promise: promise at the end of memory and fulfil
  // right away. Any other placement of a fresh promise is no easier to fulfil.
  if (!ok && static_cast<int>(memory.size()) <= kMaxMemory) {
    for (int node : code.frontier(cfg.pc)) {
      const CodeNode& n = code.nodes[static_cast<std::size_t>(node)];
      if (n.stmt->kind != StmtKind::Store) continue;
      RegVal v = operand_value(n.stmt->rv, code, cfg.ts);
      Memory ext = memory;
      Timestamp t = static_cast<Timestamp>(ext.size());
      ext.push_back(Message{n.stmt->loc, v.val, code.tid});
      ThreadConfig c{n.next, cfg.ts};
      c.ts.coh[static_cast<std::size_t>(n.stmt->loc)] = t;
      c.ts.v_wOld = std::max(c.ts.v_wOld, t);
      if (certify_rec(code, c, ext, memo)) {
        ok = true;
        break;
      }
    }
  }
  memo[key] = ok;
  return ok;
}

}  // namespace

bool certifiable(const ThreadCode& code, const ThreadConfig& cfg, const Memory& memory) {
  std::unordered_map<CertKey, bool, CertKeyHash> memo;
  return certify_rec(code, cfg, memory, memo);
}

// ---------------------------------------------------------------- misc

bool views_monotone(const TState& a, const TState& b) {
  if (b.v_read < a.v_read || b.v_wOld < a.v_wOld || b.v_wNew < a.v_wNew || b.v_C < a.v_C) return false;
  for (std::size_t x = 0; x < a.coh.size(); ++x)
    if (b.coh[x] < a.coh[x]) return false;
  for (std::size_t r = 0; r < a.regs.size(); ++r)
    if (b.regs[r].view < a.regs[r].view) return false;
  // v_a <= v_read is an invariant of every reachable state.
  for (const auto& r : b.regs)
    if (r.view > b.v_read) return false;
  return true;
}

bool satisfies(const Outcome& o, const FinalState& f) {
  for (const auto& a : o.atoms) {
    if (a.kind == OutcomeAtom::Kind::Reg) {
      if (f.regs.at(static_cast<std::size_t>(a.id)) != a.value) return false;
    } else {
      if (f.memory.at(static_cast<std::size_t>(a.id)) != a.value) return false;
    }
  }
  return true;
}

std::string state_text(const LitmusTest& test, const FinalState& f) {
  std::ostringstream os;
  for (std::size_t r = 0; r < f.regs.size(); ++r) os << (r ? " " : "") << test.registers[r].name << "=" << f.regs[r];
  os << " |";
  for (std::size_t x = 0; x < f.memory.size(); ++x) os << " " << test.locations[x] << "=" << f.memory[x];
  return os.str();
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Reachable: return "reachable";
    case Verdict::Unreachable: return "unreachable";
    case Verdict::BoundedUnknown: return "bounded-unknown";
  }
  return "?";
}

OpVerdict check_outcome(const ExploreResult& results, const Outcome& outcome) {
  OpVerdict v;
  for (const auto& [state, trace] : results.finals) {
    if (satisfies(outcome, state)) {
      v.verdict = Verdict::Reachable;
      v.state = state;
      v.witness = trace;
      return v;
    }
  }
  v.verdict = results.bounded_incomplete ? Verdict::BoundedUnknown : Verdict::Unreachable;
  return v;
}

std::set<std::vector<Value>> ExploreResult::valuations() const {
  std::set<std::vector<Value>> out;
  for (const auto& [s, t] : finals) out.insert(s.regs);
  return out;
}

long long default_max_states() {
  if (const char* env = std::getenv("WMMR_MAX_STATES")) {
    try {
      long long v = std::stoll(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return -1;
}

// ----------------------------------------------------------------- replay

namespace {

struct ReplayState {
  std::vector<ThreadConfig> cfgs;
  Memory memory;
};

bool replay_rec(const LitmusTest& test, const std::vector<ThreadCode>& codes, const Trace& trace, std::size_t i,
                const ReplayState& st, const std::set<Value>& universe, FinalState& out) {
  if (i == trace.steps.size()) {
    for (std::size_t k = 0; k < codes.size(); ++k)
      if (!codes[k].can_finish(st.cfgs[k].pc) || st.cfgs[k].ts.prom != 0) return false;
    if (!(st.memory == trace.memory)) return false;
    out.regs.assign(test.registers.size(), 0);
    for (std::size_t k = 0; k < codes.size(); ++k)
      for (std::size_t s = 0; s < codes[k].regs.size(); ++s)
        out.regs[static_cast<std::size_t>(codes[k].regs[s])] = st.cfgs[k].ts.regs[s].val;
    out.memory.assign(test.locations.size(), 0);
    for (std::size_t t = 1; t < st.memory.size(); ++t) out.memory[static_cast<std::size_t>(st.memory[t].loc)] = st.memory[t].val;
    return true;
  }
  const StepLabel& want = trace.steps[i];
  std::size_t k = static_cast<std::size_t>(want.tid - 1);
  if (k >= codes.size()) return false;
  std::set<Value> pv = universe;
  if (want.kind == StepLabel::Kind::Prm) pv.insert(want.val);
  for (auto& succ : thread_step(codes[k], st.cfgs[k], st.memory, pv, want.kind == StepLabel::Kind::Prm)) {
    if (!(succ.label == want)) continue;
    ReplayState next = st;
    next.cfgs[k] = succ.next;
    next.memory = succ.memory;
    if (replay_rec(test, codes, trace, i + 1, next, universe, out)) return true;
  }
  return false;
}

}  // namespace

std::optional<FinalState> replay_trace(const LitmusTest& test, const Trace& trace) {
  auto codes = compile_threads(test);
  ReplayState st;
  st.memory = initial_memory();
  for (const auto& c : codes) st.cfgs.push_back({c.entry, initial_tstate(c)});
  std::set<Value> values;
  for (const auto& s : trace.steps)
    if (s.kind == StepLabel::Kind::Prm) values.insert(s.val);
  FinalState out;
  if (replay_rec(test, codes, trace, 0, st, values, out)) return out;
  return std::nullopt;
}

}  // namespace wmmr

#include <algorithm>
#include <set>
#include <sstream>

#include "wmmr/assertion.hpp"
#include "wmmr/event_structure.hpp"
#include "wmmr/litmus.hpp"

namespace wmmr {

// ---------------------------------------------------------------- actions

bool Action::same_action(const Action& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Ini: return true;
    case Kind::Prm:
    case Kind::Ff: return tid == o.tid && loc == o.loc && val == o.val;
    case Kind::BarLoc: return tid == o.tid && reg == o.reg && loc == o.loc;
    case Kind::BarExp: return tid == o.tid && reg == o.reg && expr_equal(expr, o.expr);
    case Kind::Fnc: return tid == o.tid;
    case Kind::Tst: return tid == o.tid && expr_equal(expr, o.expr);
  }
  return false;
}

bool Action::complements(const Action& o) const {
  bool kinds = (kind == Kind::Prm && o.kind == Kind::Ff) || (kind == Kind::Ff && o.kind == Kind::Prm);
  return kinds && tid == o.tid && loc == o.loc && val == o.val;
}

Action ini_action() { return Action{}; }

Action prm_action(Tid promiser, LocId x, Value v) {
  Action a;
  a.kind = Action::Kind::Prm;
  a.tid = promiser;
  a.loc = x;
  a.val = v;
  return a;
}

Action ff_action(Tid tid, LocId x, Value v) {
  Action a = prm_action(tid, x, v);
  a.kind = Action::Kind::Ff;
  return a;
}

Action bar_loc_action(Tid tid, RegId r, LocId x) {
  Action a;
  a.kind = Action::Kind::BarLoc;
  a.tid = tid;
  a.reg = r;
  a.loc = x;
  return a;
}

Action bar_exp_action(Tid tid, RegId r, Expr e) {
  Action a;
  a.kind = Action::Kind::BarExp;
  a.tid = tid;
  a.reg = r;
  a.expr = std::move(e);
  return a;
}

Action fnc_action(Tid tid) {
  Action a;
  a.kind = Action::Kind::Fnc;
  a.tid = tid;
  return a;
}

Action tst_action(Tid tid, Expr e) {
  Action a;
  a.kind = Action::Kind::Tst;
  a.tid = tid;
  a.expr = std::move(e);
  return a;
}

std::string action_text(const LitmusTest& test, const Action& a) {
  std::ostringstream os;
  switch (a.kind) {
    case Action::Kind::Ini: os << "ini"; break;
    case Action::Kind::Prm: os << "prm(" << a.tid << "," << test.locations.at(a.loc) << "," << a.val << ")"; break;
    case Action::Kind::Ff: os << "ff(" << a.tid << "," << test.locations.at(a.loc) << "," << a.val << ")"; break;
    case Action::Kind::BarLoc:
      os << "bar(" << test.registers.at(a.reg).name << "," << test.locations.at(a.loc) << ")";
      break;
    case Action::Kind::BarExp:
      os << "bar(" << test.registers.at(a.reg).name << "," << print_expr(test, a.expr) << ")";
      break;
    case Action::Kind::Fnc: os << "fnc" << a.tid; break;
    case Action::Kind::Tst: os << "tst" << a.tid << "(" << print_expr(test, a.expr) << ")"; break;
  }
  if (a.ts >= 0) os << "@" << a.ts;
  return os.str();
}

// -------------------------------------------------------------- structure

bool EventStructure::flows(EventId d, EventId e) const {
  const auto& p = pred[static_cast<std::size_t>(e)];
  return std::binary_search(p.begin(), p.end(), d);
}

LocSet EventStructure::restriction(EventId d, EventId e) const {
  auto it = lambda.find({d, e});
  return it == lambda.end() ? 0 : it->second;
}

EventId EventStructure::ini() const {
  for (EventId e = 0; e < size(); ++e)
    if (label[static_cast<std::size_t>(e)].is_ini()) return e;
  return -1;
}

EventId EventStructure::add(const Action& a, std::vector<EventId> preds) {
  std::sort(preds.begin(), preds.end());
  preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
  label.push_back(a);
  pred.push_back(std::move(preds));
  return size() - 1;
}

std::string EventStructure::key() const {
  std::ostringstream os;
  for (EventId e = 0; e < size(); ++e) {
    const Action& a = label[static_cast<std::size_t>(e)];
    os << static_cast<int>(a.kind) << ',' << a.tid << ',' << a.loc << ',' << a.val << ',' << a.reg << ',' << a.ts;
    if (a.expr) os << ',' << static_cast<const void*>(a.expr.get());
    os << '<';
    for (EventId d : pred[static_cast<std::size_t>(e)]) os << d << ' ';
    os << ';';
  }
  for (const auto& [k, v] : lambda) os << k.first << '-' << k.second << ':' << v << ';';
  return os.str();
}

Closure flow_closure(const EventStructure& es) {
  std::size_t n = static_cast<std::size_t>(es.size());
  Closure before(n, boost::dynamic_bitset<>(n));
  bool acyclic_by_id = true;
  for (std::size_t e = 0; e < n && acyclic_by_id; ++e)
    for (EventId d : es.pred[e])
      if (static_cast<std::size_t>(d) >= e) {
        acyclic_by_id = false;
        break;
      }
  if (acyclic_by_id) {
    for (std::size_t e = 0; e < n; ++e)
      for (EventId d : es.pred[e]) {
        before[e].set(static_cast<std::size_t>(d));
        before[e] |= before[static_cast<std::size_t>(d)];
      }
    return before;
  }
  // General case: reverse search from every event.
  for (std::size_t e = 0; e < n; ++e) {
    std::vector<EventId> stack(es.pred[e].begin(), es.pred[e].end());
    while (!stack.empty()) {
      std::size_t d = static_cast<std::size_t>(stack.back());
      stack.pop_back();
      if (before[e].test(d)) continue;
      before[e].set(d);
      for (EventId p : es.pred[d]) stack.push_back(p);
    }
  }
  return before;
}

EventStructure ini_structure() {
  EventStructure es;
  es.add(ini_action(), {});
  return es;
}

// ------------------------------------------------------------------ last

bool Pattern::matches(const Action& a) const {
  switch (kind) {
    case Kind::Ini: return a.is_ini();
    case Kind::ActLoc: return a.in_act(loc);
    case Kind::FfLoc: return a.is_ff() && a.loc == loc;
    case Kind::FfOrIniLoc: return a.is_ini() || (a.is_ff() && a.loc == loc);
    case Kind::Fnc: return a.kind == Action::Kind::Fnc && (tid == 0 || a.tid == tid);
    case Kind::Tst: return a.kind == Action::Kind::Tst && (tid == 0 || a.tid == tid);
    case Kind::Bar: return a.is_bar() && a.reg == reg;
    case Kind::AnyBar: return a.is_bar();
    case Kind::BarOnLoc: return a.kind == Action::Kind::BarLoc && a.loc == loc;
  }
  return false;
}

std::vector<EventId> last(const EventStructure& es, const Closure& before, const std::vector<Pattern>& patterns) {
  std::vector<EventId> out;
  for (const auto& p : patterns) {
    auto m = maximal(es, before, [&](const Action& a) { return p.matches(a); });
    out.insert(out.end(), m.begin(), m.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<EventId> last(const EventStructure& es, const std::vector<Pattern>& patterns) {
  return last(es, flow_closure(es), patterns);
}

std::optional<EventId> unique_last(const EventStructure& es, const Closure& before, const Pattern& p) {
  auto m = maximal(es, before, [&](const Action& a) { return p.matches(a); });
  if (m.size() != 1) return std::nullopt;
  return m.front();
}

std::vector<RegId> barred_registers(const EventStructure& es, Tid tid) {
  std::set<RegId> regs;
  for (const auto& a : es.label)
    if (a.is_bar() && (tid == 0 || a.tid == tid)) regs.insert(a.reg);
  return {regs.begin(), regs.end()};
}

// -------------------------------------------------------- plus-operations

namespace {

std::vector<Pattern> all_bars(const EventStructure& es, Tid tid) {
  std::vector<Pattern> ps;
  for (RegId r : barred_registers(es, tid)) ps.push_back(Pattern::bar(r));
  return ps;
}

std::set<LocId> mentioned_locations(const EventStructure& es) {
  std::set<LocId> out;
  for (const auto& a : es.label)
    if (a.is_read() || a.is_ff()) out.insert(a.loc);
  return out;
}

EventStructure with_event(const EventStructure& es, const Action& a, const std::vector<Pattern>& from) {
  EventStructure out = es;
  out.add(a, last(es, from));
  return out;
}

}  // namespace

EventStructure plus_ff(const EventStructure& es, Tid tid, LocId x, Value v, Timestamp ts) {
  Action a = ff_action(tid, x, v);
  a.ts = ts;
  return with_event(es, a, {Pattern::act(x), Pattern::fnc(tid), Pattern::tst(tid)});
}

EventStructure plus_ff_reg(const EventStructure& es, Tid tid, RegId r, LocId x, Value v, Timestamp ts) {
  Action a = ff_action(tid, x, v);
  a.ts = ts;
  return with_event(es, a, {Pattern::act(x), Pattern::fnc(tid), Pattern::tst(tid), Pattern::bar(r)});
}

EventStructure plus_bar_loc(const EventStructure& es, Tid tid, RegId r, LocId x) {
  std::vector<Pattern> from{Pattern::act(x), Pattern::fnc(tid)};
  auto bars = all_bars(es, tid);
  from.insert(from.end(), bars.begin(), bars.end());
  return with_event(es, bar_loc_action(tid, r, x), from);
}

EventStructure plus_bar_exp(const EventStructure& es, Tid tid, RegId r, const Expr& e) {
  std::set<RegId> regs;
  collect_regs(e, regs);
  regs.insert(r);
  std::vector<Pattern> from;
  for (RegId b : regs) from.push_back(Pattern::bar(b));
  return with_event(es, bar_exp_action(tid, r, e), from);
}

EventStructure plus_fnc(const EventStructure& es, Tid tid) {
  std::vector<Pattern> from{Pattern{}, Pattern::fnc(tid)};
  for (LocId x : mentioned_locations(es)) from.push_back(Pattern::act(x));
  auto bars = all_bars(es, tid);
  from.insert(from.end(), bars.begin(), bars.end());
  return with_event(es, fnc_action(tid), from);
}

EventStructure plus_tst(const EventStructure& es, Tid tid, const Expr& b) {
  std::set<RegId> regs;
  collect_regs(b, regs);
  std::vector<Pattern> from;
  for (RegId r : regs) from.push_back(Pattern::bar(r));
  return with_event(es, tst_action(tid, b), from);
}

EventStructure append_read_chain(const EventStructure& es, const std::vector<Action>& chain, ChainMode mode) {
  EventStructure out = es;
  if (chain.empty()) return out;
  Closure before = flow_closure(es);
  std::vector<EventId> base;
  if (mode == ChainMode::Flow) {
    std::vector<Pattern> common{Pattern::fnc(0)};
    auto bars = all_bars(es, 0);
    common.insert(common.end(), bars.begin(), bars.end());
    base = last(es, before, common);
  }
  EventId prev = -1;
  for (const auto& a : chain) {
    if (!a.is_read()) throw std::invalid_argument("read chains contain only promise reads");
    std::vector<EventId> preds = base;
    Pattern p = mode == ChainMode::Flow ? Pattern::ff_or_ini(a.loc) : Pattern::act(a.loc);
    auto on_loc = maximal(es, before, [&](const Action& b) { return p.matches(b); });
    preds.insert(preds.end(), on_loc.begin(), on_loc.end());
    if (prev >= 0) preds.push_back(prev);
    prev = out.add(a, preds);
  }
  return out;
}

EventStructure restrict(const EventStructure& es, EventId e, LocId x, Tid tid, RestrictMode mode) {
  EventStructure out = es;
  Closure before = flow_closure(es);
  ThreadPriors pr = thread_priors(es, before, tid);
  for (EventId f = 0; f < es.size(); ++f) {
    if (f == e) continue;
    const Action& a = es.label[static_cast<std::size_t>(f)];
    std::size_t fi = static_cast<std::size_t>(f);
    bool own_ff = a.is_ff() && a.tid == tid;
    bool target = (pr.fnc.test(fi) && own_ff) || pr.bar.test(fi) || (own_ff && a.loc == x);
    if (!target) continue;
    if (mode == RestrictMode::Literal) {
      if (!es.flows(e, f)) continue;
    } else {
      if (before[static_cast<std::size_t>(e)].test(fi)) continue;  // f ->+ e: always earlier
    }
    out.lambda[{e, f}] |= loc_bit(x);
  }
  return out;
}

}  // namespace wmmr

#include <algorithm>

#include "common.hpp"
#include "doctest.h"
#include "wmmr/assertion.hpp"
#include "wmmr/proof.hpp"

using namespace wmmr;

namespace {

const char* kViewsSrc =
    "test F\nlocations: x y z w\n"
    "thread 1:\n  y := 1\n  a := y\n  b := x\n  z := 3\n"
    "thread 2:\n  w := 1\n  w := 2\n  w := 3\n  w := 4\n  w := 5\n  w := 7\n  w := 8\n"
    "exists ()\n";

// ini -{x}-> ff(1,y,1) -> bar(a,y) -> bar(b,x), ini -> bar(b,x)
struct ViewsCase {
  LitmusTest t = elaborate(parse_litmus(kViewsSrc), 2);
  LocId x = 0, y = 1, z = 2, w = 3;
  RegId a = *t.find_reg("a"), b = *t.find_reg("b");
  EventStructure es;
  Memory m;

  ViewsCase() {
    es = plus_ff(ini_structure(), 1, y, 1);
    auto from_y = unique_last(es, flow_closure(es), Pattern::act(y));
    es = restrict(plus_bar_loc(es, 1, a, y), *from_y, y, 1);
    auto from_x = unique_last(es, flow_closure(es), Pattern::act(x));
    es = restrict(plus_bar_loc(es, 1, b, x), *from_x, x, 1);
    m = initial_memory();
    for (Value v = 1; v <= 5; ++v) m.push_back({w, v, 2});
    m.push_back({y, 1, 1});
    m.push_back({w, 7, 2});
    m.push_back({w, 8, 2});
    m.push_back({z, 3, 1});
  }
};

EventId find(const EventStructure& es, Action::Kind k, LocId loc = -1) {
  for (EventId e = 0; e < es.size(); ++e) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (a.kind == k && (loc < 0 || a.loc == loc)) return e;
  }
  return -1;
}

// Outline of `tid` whose only read is the given value from `loc`.
EventStructure reading(const LitmusTest& t, Tid tid, LocId loc, Value v) {
  auto set = derive_outlines(t, tid, read_menu(t, tid), default_proof_bounds());
  for (const auto& o : set.outlines) {
    std::vector<Action> reads;
    for (const auto& a : o.final().label)
      if (a.is_read()) reads.push_back(a);
    if (reads.size() == 1 && reads[0].loc == loc && reads[0].val == v) return o.final();
  }
  FAIL("no outline reads the value");
  return {};
}

// Outline of `tid` without reads.
EventStructure no_reads(const LitmusTest& t, Tid tid) {
  auto set = derive_outlines(t, tid, read_menu(t, tid), default_proof_bounds());
  for (const auto& o : set.outlines) {
    const auto& l = o.final().label;
    if (std::none_of(l.begin(), l.end(), [](const Action& a) { return a.is_read(); })) return o.final();
  }
  FAIL("every outline reads");
  return {};
}

// Composite events of the ini tuple, the given sync events, and every lifted
// event whose local event is not synchronised.
std::vector<EventId> saturate(const EventStructure& comp, const std::vector<EventId>& syncs) {
  std::set<std::pair<std::size_t, EventId>> used;
  for (EventId s : syncs)
    for (std::size_t i = 0; i < comp.tuple[static_cast<std::size_t>(s)].size(); ++i)
      if (comp.tuple[static_cast<std::size_t>(s)][i] != kStar) used.insert({i, comp.tuple[static_cast<std::size_t>(s)][i]});
  std::vector<EventId> C;
  for (EventId c = 0; c < comp.size(); ++c) {
    const auto& tup = comp.tuple[static_cast<std::size_t>(c)];
    int filled = 0;
    bool blocked = false;
    for (std::size_t i = 0; i < tup.size(); ++i)
      if (tup[i] != kStar) {
        ++filled;
        if (used.count({i, tup[i]})) blocked = true;
      }
    bool is_sync = std::find(syncs.begin(), syncs.end(), c) != syncs.end();
    if (comp.label[static_cast<std::size_t>(c)].is_ini() || is_sync || (filled == 1 && !blocked && !comp.label[static_cast<std::size_t>(c)].is_read()))
      C.push_back(c);
  }
  std::sort(C.begin(), C.end());
  C.erase(std::unique(C.begin(), C.end()), C.end());
  return C;
}

std::vector<EventId> sync_events(const EventStructure& comp) {
  std::vector<EventId> out;
  for (EventId c = 0; c < comp.size(); ++c) {
    const auto& tup = comp.tuple[static_cast<std::size_t>(c)];
    int filled = static_cast<int>(std::count_if(tup.begin(), tup.end(), [](EventId e) { return e != kStar; }));
    if (filled > 1 && comp.label[static_cast<std::size_t>(c)].is_ff()) out.push_back(c);
  }
  return out;
}

bool in_conflict(const EventStructure& es, EventId a, EventId b) {
  auto p = std::minmax(a, b);
  return std::find(es.conflict.begin(), es.conflict.end(), std::make_pair(p.first, p.second)) != es.conflict.end();
}

}  // namespace

TEST_CASE("ini structure") {
  EventStructure ini = ini_structure();
  CHECK(ini.size() == 1);
  CHECK(ini.lambda.empty());
  CHECK(ini.pred[0].empty());
  CHECK(last(ini, {Pattern{}}) == std::vector<EventId>{0});
  CHECK(last(ini, {Pattern::fnc(1)}).empty());
  CHECK(last(ini, {Pattern::ff_on(0)}).empty());
  CHECK(is_configuration(ini, {0}));
}

TEST_CASE("last skips bars") {
  EventStructure es = plus_bar_loc(append_read_chain(ini_structure(), {prm_action(2, 1, 1)}), 1, 0, 1);
  CHECK(last(es, {Pattern::act(1)}) == std::vector<EventId>{1});
}

TEST_CASE("last fulfill in LB thread 1") {
  LitmusTest t = corpus_test("LB");
  EventStructure es = reading(t, 1, *t.find_loc("y"), 1);
  auto l = last(es, {Pattern::ff_on(*t.find_loc("x"))});
  REQUIRE(l.size() == 1);
  CHECK(es.label[static_cast<std::size_t>(l[0])] .is_ff());
}

TEST_CASE("plus operations") {
  EventStructure a = plus_ff(ini_structure(), 1, 0, 5);
  CHECK(a.pred[1] == std::vector<EventId>{0});
  EventStructure b = plus_ff(a, 1, 1, 1);
  CHECK(b.pred[2] == std::vector<EventId>{0});

  EventStructure c = plus_bar_loc(append_read_chain(ini_structure(), {prm_action(2, 1, 1)}), 1, 0, 1);
  EventStructure d = plus_fnc(c, 1);
  CHECK(d.flows(2, 3));
  CHECK(flow_closure(d)[3].test(1));
}

TEST_CASE("read chains") {
  EventStructure es = append_read_chain(ini_structure(), {prm_action(1, 0, 5), prm_action(1, 1, 1)});
  REQUIRE(es.size() == 3);
  CHECK(es.flows(0, 1));
  CHECK(es.flows(1, 2));
  CHECK(append_read_chain(es, {}).key() == es.key());

  EventStructure f = plus_ff(ini_structure(), 1, 0, 5);
  EventStructure g = append_read_chain(f, {prm_action(2, 0, 7)});
  CHECK(g.flows(1, 2));
}

TEST_CASE("restriction on the read edge") {
  EventStructure es = plus_bar_loc(append_read_chain(ini_structure(), {prm_action(1, 1, 1)}), 2, 0, 1);
  EventStructure r = restrict(es, 0, 0, 2);
  CHECK(r.restriction(0, 1) == loc_bit(0));
  CHECK(restrict(r, 0, 0, 2).key() == r.key());
  CHECK(restrict(ini_structure(), 0, 0, 1).key() == ini_structure().key());
}

TEST_CASE("composition of one structure") {
  LitmusTest t = corpus_test("LB");
  EventStructure local = reading(t, 1, *t.find_loc("y"), 1);
  EventStructure comp = parallel_compose({local});
  REQUIRE(comp.size() == local.size());
  for (EventId e = 0; e < comp.size(); ++e) {
    CHECK(comp.label[static_cast<std::size_t>(e)].same_action(local.label[static_cast<std::size_t>(comp.tuple[static_cast<std::size_t>(e)][0])]));
    for (EventId d = 0; d < comp.size(); ++d)
      CHECK(comp.flows(d, e) == local.flows(comp.tuple[static_cast<std::size_t>(d)][0], comp.tuple[static_cast<std::size_t>(e)][0]));
  }
}

TEST_CASE("LB composition") {
  LitmusTest t = corpus_test("LB");
  LocId x = *t.find_loc("x"), y = *t.find_loc("y");
  std::vector<EventStructure> locals{reading(t, 1, y, 1), reading(t, 2, x, 1)};
  EventStructure comp = parallel_compose(locals);
  auto syncs = sync_events(comp);
  REQUIRE(syncs.size() == 2);
  for (EventId s : syncs) {
    int conflicts = 0;
    for (EventId c = 0; c < comp.size(); ++c)
      if (c != s && in_conflict(comp, s, c)) ++conflicts;
    CHECK(conflicts >= 2);
  }
  auto C = saturate(comp, syncs);
  CHECK(is_configuration(comp, C));
  CHECK(find_interference_free(comp, locals));

  // a sync event together with its own lifted fulfill
  EventId s = syncs[0];
  for (EventId c = 0; c < comp.size(); ++c)
    if (in_conflict(comp, s, c)) {
      auto bad = C;
      bad.push_back(c);
      std::sort(bad.begin(), bad.end());
      CHECK_FALSE(is_configuration(comp, bad));
      break;
    }
  CHECK(is_configuration(comp, {comp.ini()}));
}

TEST_CASE("LB+dmb composition has a cycle") {
  LitmusTest t = corpus_test("LB+dmb");
  LocId x = *t.find_loc("x"), y = *t.find_loc("y");
  std::vector<EventStructure> locals{reading(t, 1, y, 1), reading(t, 2, x, 1)};
  EventStructure comp = parallel_compose(locals);
  auto syncs = sync_events(comp);
  REQUIRE(syncs.size() == 2);
  CHECK_FALSE(is_configuration(comp, saturate(comp, syncs)));
  CHECK_FALSE(find_interference_free(comp, locals));
}

TEST_CASE("MP+dmb composition") {
  LitmusTest t = corpus_test("MP+dmb");
  LocId y = *t.find_loc("y");
  std::vector<EventStructure> locals{no_reads(t, 1), reading(t, 2, y, 1)};
  EventStructure comp = parallel_compose(locals);
  auto syncs = sync_events(comp);
  REQUIRE(syncs.size() == 1);
  CHECK(comp.label[static_cast<std::size_t>(syncs[0])].loc == y);
  CHECK(check_reachable(t, default_proof_bounds()).verdict == Verdict::Unreachable);
}

TEST_CASE("priors") {
  ViewsCase f;
  EventId ff_y = find(f.es, Action::Kind::Ff, f.y);
  CHECK(priors(f.es, PriorKind::BarReg, 1, f.a) == std::vector<EventId>{0, ff_y});
  CHECK(priors(f.es, PriorKind::Fnc, 1).empty());
  CHECK(priors(f.es, PriorKind::Tst, 1).empty());
}

TEST_CASE("structure shape") {
  ViewsCase f;
  EventId ff_y = find(f.es, Action::Kind::Ff, f.y);
  EventId bar_a = 2, bar_b = 3;
  CHECK(f.es.restriction(0, ff_y) == loc_bit(f.x));
  CHECK(f.es.flows(ff_y, bar_a));
  CHECK(f.es.flows(bar_a, bar_b));
  CHECK(f.es.flows(0, bar_b));
}

TEST_CASE("psi") {
  CHECK(enumerate_psi(ini_structure(), initial_memory()) == std::vector<Psi>{{0}});
  ViewsCase f;
  auto psis = enumerate_psi(f.es, f.m);
  REQUIRE(psis.size() == 1);
  CHECK(psis[0][0] == 0);
  CHECK(psis[0][static_cast<std::size_t>(find(f.es, Action::Kind::Ff, f.y))] == 6);
  CHECK(check_psi(f.es, f.m, psis[0]));

  Memory bad = f.m;
  bad[3] = {f.x, 2, 2};
  CHECK(enumerate_psi(f.es, bad).empty());
}

TEST_CASE("views") {
  ViewsCase f;
  auto psis = enumerate_psi(f.es, f.m);
  REQUIRE(psis.size() == 1);
  TState ts = views_from(f.t, f.es, psis[0], f.m, 1);
  CHECK(ts.promises() == std::set<Timestamp>{9});
  CHECK(ts.v_C == 0);
  CHECK(ts.v_wNew == 0);
  CHECK(ts.coh[static_cast<std::size_t>(f.z)] == 0);
  CHECK(ts.regs[0].view == 6);
  CHECK(ts.regs[1].view == 6);
  CHECK(ts.coh[static_cast<std::size_t>(f.y)] == 6);
  CHECK(ts.coh[static_cast<std::size_t>(f.x)] == 6);
  CHECK(ts.v_wOld == 6);
  CHECK(ts.v_read == 6);

  TState other = views_from(f.t, f.es, psis[0], f.m, 2);
  CHECK(other.promises() == std::set<Timestamp>{1, 2, 3, 4, 5, 7, 8});

  ThreadCode c1 = compile_thread(f.t, 1), c2 = compile_thread(f.t, 2);
  CHECK(matches(f.t, f.es, {ts, other}, f.m));
  TState no_prom = ts;
  no_prom.prom = 0;
  CHECK_FALSE(matches(f.t, f.es, {no_prom, other}, f.m));

  CHECK(matches(f.t, ini_structure(), {initial_tstate(c1), initial_tstate(c2)}, initial_memory()));
  CHECK(views_from(f.t, ini_structure(), {0}, initial_memory(), 1) == initial_tstate(c1));
}

TEST_CASE("views after a read") {
  LitmusTest t = elaborate(parse_litmus("test V\nlocations: y\nthread 1:\n  y := 1\nthread 2:\n  a := y\nexists ()\n"), 2);
  EventStructure es = plus_bar_loc(append_read_chain(ini_structure(), {prm_action(1, 0, 1)}), 2, 0, 0);
  Memory m = initial_memory();
  m.push_back({0, 1, 1});
  TState ts = views_from(t, es, {0, 1, -1}, m, 2);
  CHECK(ts.regs[0] == RegVal{1, 1});
  CHECK(ts.v_read == 1);
}

TEST_CASE("final states of witness configurations") {
  for (const char* name : {"MP", "WRC", "LB"}) {
    LitmusTest t = corpus_test(name);
    ProofResult r = check_reachable(t, default_proof_bounds());
    REQUIRE_MESSAGE(r.witness, name);
    auto states = final_states(t, r.witness->config.config);
    bool hit = std::any_of(states.begin(), states.end(), [&](const FinalState& s) { return satisfies(t.outcome, s); });
    CHECK_MESSAGE(hit, name);
  }
}

TEST_CASE("linearizations respect restrictions") {
  // d -{x}-> f forbids an x-event between them
  EventStructure es = ini_structure();
  EventId d = es.add(ff_action(1, 1, 1), {0});
  EventId f = es.add(ff_action(1, 1, 2), {d});
  EventId mid = es.add(ff_action(2, 0, 1), {0});
  es.lambda[{d, f}] = loc_bit(0);
  auto all = all_linearizations(es, 100);
  CHECK(all.size() == 2);
  for (const auto& o : all) {
    auto pos = [&](EventId e) { return std::find(o.begin(), o.end(), e) - o.begin(); };
    bool between = pos(d) < pos(mid) && pos(mid) < pos(f);
    CHECK_FALSE(between);
  }
}

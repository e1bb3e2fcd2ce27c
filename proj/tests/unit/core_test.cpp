#include <random>

#include "common.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "wmmr/crosscheck.hpp"
#include "wmmr/promising.hpp"

using namespace wmmr;

namespace {

std::set<oracle::State> op_states(const LitmusTest& t) {
  std::set<oracle::State> out;
  for (const auto& [s, tr] : explore(t, Bounds{}).finals) out.insert({s.regs, s.memory});
  return out;
}

LitmusTest parse_elab(const std::string& src) { return elaborate(parse_litmus(src), 2); }

ThreadConfig only(const std::vector<Successor>& succ, StepLabel::Kind k) {
  const Successor* hit = nullptr;
  for (const auto& s : succ)
    if (s.label.kind == k) {
      REQUIRE(hit == nullptr);
      hit = &s;
    }
  REQUIRE(hit != nullptr);
  return hit->next;
}

}  // namespace

TEST_CASE("initial state") {
  LitmusTest t = corpus_test("LB");
  CHECK(initial_memory().size() == 1);
  for (const auto& code : compile_threads(t)) {
    TState ts = initial_tstate(code);
    CHECK(ts.prom == 0);
    for (const auto& r : ts.regs) CHECK(r == RegVal{0, 0});
    CHECK(ts.v_read == 0);
  }
}

TEST_CASE("expeval joins views") {
  LitmusTest t = parse_elab("test E\nlocations: x\nthread 1:\n  a := x\n  b := x\nexists ()\n");
  ThreadCode code = compile_thread(t, 1);
  TState ts = initial_tstate(code);
  RegId a = *t.find_reg("a"), b = *t.find_reg("b");
  ts.regs[static_cast<std::size_t>(code.slot[static_cast<std::size_t>(a)])] = {2, 3};
  ts.regs[static_cast<std::size_t>(code.slot[static_cast<std::size_t>(b)])] = {1, 7};
  CHECK(expeval(make_const(5), code, ts) == RegVal{5, 0});
  CHECK(expeval(make_reg(a), code, ts) == RegVal{2, 3});
  CHECK(expeval(make_binary(Op::Add, make_reg(a), make_reg(b)), code, ts) == RegVal{3, 7});
}

TEST_CASE("read from ini") {
  LitmusTest t = parse_elab("test R\nlocations: y\nthread 1:\n  a := y\nexists ()\n");
  ThreadCode code = compile_thread(t, 1);
  ThreadConfig cfg{code.entry, initial_tstate(code)};
  auto succ = thread_step(code, cfg, initial_memory(), {0}, false);
  REQUIRE(succ.size() == 1);
  CHECK(succ[0].label.kind == StepLabel::Kind::Rd);
  CHECK(succ[0].label.t == 0);
  CHECK(succ[0].next.ts.regs[0] == RegVal{0, 0});
}

TEST_CASE("fulfill") {
  LitmusTest t = parse_elab("test F\nlocations: x\nthread 1:\n  x := 1\nexists ()\n");
  ThreadCode code = compile_thread(t, 1);
  ThreadConfig cfg{code.entry, initial_tstate(code)};
  cfg.ts.prom = 1u << 1;
  Memory m = initial_memory();
  m.push_back({0, 1, 1});
  ThreadConfig next = only(thread_step(code, cfg, m, {0, 1}, false), StepLabel::Kind::Ff);
  CHECK(next.ts.coh[0] == 1);
  CHECK(next.ts.v_wOld == 1);
  CHECK(next.ts.prom == 0);
}

TEST_CASE("fence") {
  LitmusTest t = parse_elab("test D\nlocations: x\nthread 1:\n  dmb\nexists ()\n");
  ThreadCode code = compile_thread(t, 1);
  ThreadConfig cfg{code.entry, initial_tstate(code)};
  cfg.ts.v_read = 2;
  cfg.ts.v_wOld = 6;
  ThreadConfig next = only(thread_step(code, cfg, initial_memory(), {0}, false), StepLabel::Kind::Fnc);
  CHECK(next.ts.v_read == 6);
  CHECK(next.ts.v_wNew == 6);
}

TEST_CASE("certification") {
  LitmusTest skip = parse_elab("test S\nlocations: x\nthread 1:\n  skip\nexists ()\n");
  ThreadCode sc = compile_thread(skip, 1);
  ThreadConfig done{sc.entry, initial_tstate(sc)};
  CHECK(certifiable(sc, done, initial_memory()));
  Memory m = initial_memory();
  m.push_back({0, 1, 1});
  done.ts.prom = 1u << 1;
  CHECK_FALSE(certifiable(sc, done, m));

  LitmusTest lb = corpus_test("LB");
  ThreadCode c1 = compile_thread(lb, 1);
  ThreadConfig p{c1.entry, initial_tstate(c1)};
  p.ts.prom = 1u << 1;
  Memory mx = initial_memory();
  mx.push_back({*lb.find_loc("x"), 1, 1});
  CHECK(certifiable(c1, p, mx));
}

TEST_CASE("corpus verdicts") {
  struct Row {
    const char* name;
    Verdict v;
  };
  for (Row r : {Row{"LB", Verdict::Reachable}, Row{"LB+dmb", Verdict::Unreachable}, Row{"MP", Verdict::Reachable},
                Row{"MP+dmb", Verdict::Unreachable}, Row{"SB", Verdict::Reachable}, Row{"IRIW", Verdict::Unreachable},
                Row{"WRC", Verdict::Reachable}, Row{"RRC", Verdict::Unreachable}}) {
    LitmusTest t = corpus_test(r.name);
    ExploreResult res = explore(t, Bounds{});
    CHECK_MESSAGE(check_outcome(res, t.outcome).verdict == r.v, r.name);
    CHECK_FALSE(res.bounded_incomplete);
    CHECK(res.stats.monotonicity_violations == 0);
  }
}

TEST_CASE("empty result set is unreachable") {
  LitmusTest t = corpus_test("LB");
  CHECK(check_outcome(ExploreResult{}, t.outcome).verdict == Verdict::Unreachable);
}

TEST_CASE("SB against the brute-force oracle") {
  LitmusTest t = corpus_test("SB");
  auto expected = oracle::final_states(t);
  CHECK(op_states(t) == expected);
  std::set<std::vector<Value>> regs;
  for (const auto& s : expected) regs.insert(s.first);
  CHECK(regs == std::set<std::vector<Value>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
}

TEST_CASE("straight-line corpus against the oracle") {
  for (const char* name : {"LB", "LB+dmb", "MP", "MP+dmb", "WRC", "RRC", "IRIW"}) {
    LitmusTest t = corpus_test(name);
    CHECK_MESSAGE(op_states(t) == oracle::final_states(t), name);
  }
}

TEST_CASE("random straight-line programs against the oracle") {
  std::mt19937_64 rng(7);
  Shape shape;
  shape.assume = false;
  shape.register_ops = false;
  shape.choice = false;
  for (int i = 0; i < 60; ++i) {
    LitmusTest t = parse_elab(random_program(rng, shape, "r" + std::to_string(i)));
    INFO(print_litmus(t));
    CHECK(op_states(t) == oracle::final_states(t));
  }
}

TEST_CASE("serial and parallel exploration agree") {
  for (const char* name : {"SB", "WRC", "IRIW"}) {
    LitmusTest t = corpus_test(name);
    CHECK_MESSAGE(explore(t, Bounds{}).valuations() == explore_serial(t, Bounds{}).valuations(), name);
  }
}

TEST_CASE("witness traces replay") {
  for (const char* name : {"LB", "MP", "SB", "WRC"}) {
    LitmusTest t = corpus_test(name);
    auto v = check_outcome(explore(t, Bounds{}), t.outcome);
    REQUIRE(v.witness);
    auto s = replay_trace(t, *v.witness);
    REQUIRE(s);
    CHECK(*s == *v.state);
  }
}

TEST_CASE("tampered trace does not replay") {
  LitmusTest t = corpus_test("MP");
  auto v = check_outcome(explore(t, Bounds{}), t.outcome);
  REQUIRE(v.witness);
  Trace tr = *v.witness;
  for (auto& l : tr.steps)
    if (l.kind == StepLabel::Kind::Rd && l.val == 1) l.val = 7;
  CHECK_FALSE(replay_trace(t, tr));
}

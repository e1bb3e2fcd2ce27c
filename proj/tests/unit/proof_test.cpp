#include <algorithm>

#include "common.hpp"
#include "doctest.h"
#include "wmmr/assertion.hpp"
#include "wmmr/crosscheck.hpp"
#include "wmmr/proof.hpp"

using namespace wmmr;

namespace {

std::vector<Action::Kind> kinds(const EventStructure& es) {
  std::vector<Action::Kind> out;
  for (const auto& a : es.label) out.push_back(a.kind);
  return out;
}

std::set<FinalState> op_finals(const LitmusTest& t) {
  std::set<FinalState> out;
  for (const auto& [s, tr] : explore(t, Bounds{}).finals) out.insert(s);
  return out;
}

// A thread that reads its own store and then an older value of another
// location; the outcome needs both.
const char* kOwnRead =
    "test own_read\nlocations: x y\n"
    "thread 1:\n  y := 2\n  x := 2\n  a := y\n"
    "thread 2:\n  x := 1\n  b := x\n  c := y\n  y := 1\n"
    "thread 3:\n  x := 1\n  d := y\n  y := 1\n  e := x\n"
    "exists (a=2 /\\ b=1 /\\ c=2 /\\ d=2 /\\ e=2 /\\ x=1 /\\ y=1)\n";

}  // namespace

TEST_CASE("LB thread 1 outline") {
  LitmusTest t = corpus_test("LB");
  LocId x = *t.find_loc("x"), y = *t.find_loc("y");
  auto set = derive_outlines(t, 1, read_menu(t, 1), default_proof_bounds());
  bool found = false;
  for (const auto& o : set.outlines) {
    const EventStructure& es = o.final();
    if (kinds(es) != std::vector<Action::Kind>{Action::Kind::Ini, Action::Kind::Prm, Action::Kind::BarLoc, Action::Kind::Ff})
      continue;
    if (!es.label[1].same_action(prm_action(2, y, 1)) || !es.label[3].same_action(ff_action(1, x, 1))) continue;
    CHECK(es.flows(0, 1));
    CHECK(es.flows(1, 2));
    CHECK(es.pred[3] == std::vector<EventId>{0});
    found = true;
  }
  CHECK(found);
}

TEST_CASE("MP reader uses a two-read chain") {
  LitmusTest t = corpus_test("MP");
  auto set = derive_outlines(t, 2, read_menu(t, 2), default_proof_bounds());
  bool found = false;
  for (const auto& o : set.outlines) {
    if (o.steps.size() != 2 || o.steps[0].rule != Rule::ReadNew || o.steps[0].chain.size() != 2) continue;
    CHECK(o.steps[1].rule == Rule::ReadEx);
    CHECK(o.steps[0].chain[0].loc == *t.find_loc("x"));
    CHECK(o.steps[0].chain[0].val == 5);
    CHECK(check_outline(t, o));
    found = true;
  }
  CHECK(found);
}

TEST_CASE("skip has the trivial outline") {
  LitmusTest t = elaborate(parse_litmus("test S\nlocations: x\nthread 1:\n  skip\nexists ()\n"), 2);
  auto set = derive_outlines(t, 1, read_menu(t, 1), default_proof_bounds());
  REQUIRE(set.outlines.size() == 1);
  CHECK(set.outlines[0].final().key() == ini_structure().key());
}

TEST_CASE("corpus verdicts and witnesses") {
  struct Row {
    const char* name;
    Verdict v;
  };
  for (Row r : {Row{"LB", Verdict::Reachable}, Row{"LB+dmb", Verdict::Unreachable}, Row{"MP", Verdict::Reachable},
                Row{"MP+dmb", Verdict::Unreachable}, Row{"SB", Verdict::Reachable}, Row{"IRIW", Verdict::Unreachable},
                Row{"WRC", Verdict::Reachable}, Row{"RRC", Verdict::Unreachable}}) {
    LitmusTest t = corpus_test(r.name);
    ProofResult res = check_reachable(t, default_proof_bounds());
    CHECK_MESSAGE(res.verdict == r.v, r.name);
    if (res.witness) {
      std::string why;
      CHECK_MESSAGE(revalidate(t, *res.witness, &why), r.name, why);
      CHECK(satisfies(t.outcome, res.witness->state));
    }
  }
}

TEST_CASE("corpus final-state sets match the operational engine") {
  for (const char* name : {"LB", "LB+dmb", "MP", "MP+dmb", "SB", "WRC", "RRC", "IRIW"}) {
    LitmusTest t = corpus_test(name);
    CHECK_MESSAGE(proof_final_states(t, default_proof_bounds()).finals == op_finals(t), name);
  }
}

TEST_CASE("revalidation rejects tampering") {
  LitmusTest t = corpus_test("LB");
  ProofResult res = check_reachable(t, default_proof_bounds());
  REQUIRE(res.witness);
  ProofWitness w = *res.witness;
  w.state.regs[0] = 7;
  CHECK_FALSE(revalidate(t, w));

  w = *res.witness;
  std::reverse(w.config.order.begin(), w.config.order.end());
  CHECK_FALSE(revalidate(t, w));

  w = *res.witness;
  w.outlines[0].steps.back().rule = Rule::Fence;
  std::string why;
  CHECK_FALSE(revalidate(t, w, &why));
  CHECK_FALSE(why.empty());
}

TEST_CASE("outline checker rejects unfinished programs") {
  LitmusTest t = corpus_test("LB");
  auto set = derive_outlines(t, 1, read_menu(t, 1), default_proof_bounds());
  REQUIRE_FALSE(set.outlines.empty());
  ProofOutline o = set.outlines[0];
  o.steps.pop_back();
  std::string why;
  CHECK_FALSE(check_outline(t, o, &why));
  CHECK(why.find("not finished") != std::string::npos);
}

TEST_CASE("outlines from traces") {
  for (const char* name : {"LB", "MP", "SB", "WRC"}) {
    LitmusTest t = corpus_test(name);
    auto v = check_outcome(explore(t, Bounds{}), t.outcome);
    REQUIRE(v.witness);
    auto outlines = outline_from_trace(t, *v.witness);
    std::vector<EventStructure> locals;
    for (const auto& o : outlines) {
      std::string why;
      CHECK_MESSAGE(check_outline(t, o, &why), why);
      locals.push_back(o.final());
    }
    auto w = timestamp_configuration(locals);
    REQUIRE_MESSAGE(w, name);
    CHECK(final_states(t, w->config).count(*v.state));
  }
}

TEST_CASE("single store trace") {
  LitmusTest t = elaborate(parse_litmus("test W\nlocations: x\nthread 1:\n  x := 1\nexists ()\n"), 2);
  auto r = explore(t, Bounds{});
  REQUIRE(r.finals.size() == 1);
  auto outlines = outline_from_trace(t, r.finals.begin()->second);
  REQUIRE(outlines.size() == 1);
  const EventStructure& es = outlines[0].final();
  REQUIRE(es.size() == 2);
  CHECK(es.label[1].same_action(ff_action(1, 0, 1)));
  CHECK(es.label[1].ts == 1);
  CHECK(es.flows(0, 1));
}

TEST_CASE("MP trace gives an ordered read chain") {
  LitmusTest t = corpus_test("MP");
  LocId x = *t.find_loc("x"), y = *t.find_loc("y");
  RegId a = *t.find_reg("a"), b = *t.find_reg("b");
  for (const auto& [s, tr] : explore(t, Bounds{}).finals) {
    if (s.regs[static_cast<std::size_t>(a)] != 1 || s.regs[static_cast<std::size_t>(b)] != 5) continue;
    auto outlines = outline_from_trace(t, tr);
    const ProofStep& first = outlines[1].steps[0];
    REQUIRE(first.rule == Rule::ReadNew);
    REQUIRE(first.chain.size() == 2);
    CHECK(first.chain[0].loc == x);
    CHECK(first.chain[1].loc == y);
    CHECK(first.chain[0].ts < first.chain[1].ts);
    CHECK(outlines[1].steps[1].rule == Rule::ReadEx);
  }
}

// Restricting only direct flow edges loses the constraint between x := 1 and
// b := x once a read of y sits in between.
TEST_CASE("literal restriction is unsound") {
  LitmusTest t = elaborate(parse_litmus("test R\nlocations: x y\n"
                                        "thread 1:\n  x := 1\n  a := y\n  b := x\n"
                                        "thread 2:\n  c := x\n  dmb\n  y := 1\n"
                                        "thread 3:\n  d := x\n  x := 2\n"
                                        "exists (a=1 /\\ b=1 /\\ c=2 /\\ d=1)\n"),
                           2);
  auto ops = op_finals(t);
  bool op_reach = std::any_of(ops.begin(), ops.end(), [&](const FinalState& s) { return satisfies(t.outcome, s); });
  CHECK_FALSE(op_reach);
  ProofBounds repaired = default_proof_bounds();
  CHECK(check_reachable(t, repaired).verdict == Verdict::Unreachable);
  ProofBounds literal = repaired;
  literal.calculus.restrict_mode = RestrictMode::Literal;
  CHECK(check_reachable(t, literal).verdict == Verdict::Reachable);
}

TEST_CASE("own reads followed by older reads") {
  LitmusTest t = elaborate(parse_litmus(kOwnRead), 2);
  auto ops = op_finals(t);
  CHECK(std::any_of(ops.begin(), ops.end(), [&](const FinalState& s) { return satisfies(t.outcome, s); }));

  // The flow-based read chain cannot place the older read of y after the own
  // read of x, so the default rules miss the outcome.
  CHECK(check_reachable(t, default_proof_bounds()).verdict == Verdict::Unreachable);

  ProofBounds pb = default_proof_bounds();
  pb.calculus.chains = ChainMode::Restricted;
  ProofResult r = check_reachable(t, pb);
  REQUIRE(r.verdict == Verdict::Reachable);
  std::string why;
  CHECK_MESSAGE(revalidate(t, *r.witness, &why, pb.calculus), why);
  CHECK(proof_final_states(t, pb).finals == ops);
}

TEST_CASE("default rules never exceed the operational states") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 25; ++i) {
    LitmusTest t = elaborate(parse_litmus(random_program(rng, Shape{}, "p" + std::to_string(i))), 2);
    auto proof = proof_final_states(t, default_proof_bounds()).finals;
    auto ops = op_finals(t);
    INFO(print_litmus(t));
    CHECK(std::includes(ops.begin(), ops.end(), proof.begin(), proof.end()));
  }
}

TEST_CASE("restricted chains agree with the operational states") {
  ProofBounds pb = default_proof_bounds();
  pb.calculus.chains = ChainMode::Restricted;
  CrosscheckReport r = crosscheck(5, 25, Shape{}, Bounds{}, pb);
  CHECK(r.ok());
  CHECK(r.bounded == 0);
}

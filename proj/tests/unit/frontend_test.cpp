#include <functional>
#include <map>

#include "common.hpp"
#include "doctest.h"

using namespace wmmr;

namespace {

const char* kLB =
    "test LB\n"
    "locations: x y\n"
    "thread 1:\n  a := y\n  x := 1\n"
    "thread 2:\n  b := x\n  y := 1\n"
    "exists (a=1 /\\ b=1)\n"
    "expected: reachable\n";

int count_atomic(const Stmt& s) {
  if (s->kind == StmtKind::Seq) return count_atomic(s->first) + count_atomic(s->second);
  return s->kind == StmtKind::Skip ? 0 : 1;
}

}  // namespace

TEST_CASE("parse LB") {
  LitmusTest t = parse_litmus(kLB);
  CHECK(t.name == "LB");
  REQUIRE(t.thread_count() == 2);
  CHECK(count_atomic(t.threads[0].body) == 2);
  CHECK(count_atomic(t.threads[1].body) == 2);
  CHECK(t.outcome.atoms.size() == 2);
  CHECK(t.expected == Expected::Reachable);
  CHECK(t.threads[0].body->first->kind == StmtKind::Load);
  CHECK(t.threads[0].body->second->kind == StmtKind::Store);
}

TEST_CASE("printer round trip") {
  for (const char* name : {"LB", "LB+dmb", "MP", "MP+dmb", "SB", "IRIW", "WRC", "RRC"}) {
    LitmusTest t = load_litmus_file(corpus_path(name));
    CHECK_MESSAGE(same_test(parse_litmus(print_litmus(t)), t), name);
  }
}

TEST_CASE("skip body") {
  LitmusTest t = parse_litmus("test S\nlocations: x\nthread 1:\n  skip\nexists ()\n");
  REQUIRE(t.thread_count() == 1);
  CHECK(t.threads[0].body->kind == StmtKind::Skip);
}

TEST_CASE("malformed store value") {
  const char* src = "test E\nlocations: x\nthread 1:\n  x := ;\nexists ()\n";
  try {
    parse_litmus(src);
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.pos().line == 4);
    CHECK(e.pos().column == 8);
  }
}

TEST_CASE("names outside the locations line are registers") {
  LitmusTest t = parse_litmus("test E\nlocations: x\nthread 1:\n  z := 1\nexists ()\n");
  CHECK(t.find_reg("z"));
  CHECK(t.threads[0].body->kind == StmtKind::Assign);
  CHECK_THROWS_AS(parse_litmus("test E\nlocations: x\nthread 1:\n  a := x\n  x := a + x\nexists ()\n"), ParseError);
}

TEST_CASE("elaborate iterate") {
  Stmt body = make_store(0, Operand{false, -1, 1});
  Stmt loop = make_iterate(body);
  CHECK(elaborate_stmt(loop, 0)->kind == StmtKind::Skip);
  Stmt two = elaborate_stmt(loop, 2);
  REQUIRE(two->kind == StmtKind::Choice);
  CHECK(two->first->kind == StmtKind::Skip);
  REQUIRE(two->second->kind == StmtKind::Choice);
  CHECK(stmt_equal(two->second->first, body));
  CHECK(stmt_equal(two->second->second, make_seq(body, body)));
}

TEST_CASE("elaborate conditional") {
  LitmusTest t = parse_litmus(
      "test C\nlocations: x\nthread 1:\n  a := x\n  if a == 1 then\n    x := 2\n  else\n    x := 3\n  end\nexists ()\n");
  LitmusTest e = elaborate(t, 2);
  Stmt c = e.threads[0].body->second;
  REQUIRE(c->kind == StmtKind::Choice);
  REQUIRE(c->first->kind == StmtKind::Seq);
  CHECK(c->first->first->kind == StmtKind::Asm);
  CHECK(c->second->first->kind == StmtKind::Asm);
  CHECK(c->second->first->expr->op == Op::Not);
}

TEST_CASE("value universe of LB and MP") {
  CHECK(value_universe(corpus_test("LB")) == std::set<Value>{0, 1});
  CHECK(value_universe(corpus_test("MP")) == std::set<Value>{0, 1, 5});
}

// Oracle: with one iteration, b reads ini or thread 2's store, so a is b + 1.
TEST_CASE("value universe with arithmetic") {
  LitmusTest src = parse_litmus(
      "test A\nlocations: x\nthread 1:\n  loop\n    b := x\n    a := b + 1\n  end\nthread 2:\n  x := 1\nexists ()\n");
  std::set<Value> oracle{0};
  for (Value b : {0, 1}) {
    oracle.insert(b);
    oracle.insert(b + 1);
  }
  std::set<Value> u = value_universe(elaborate(src, 1));
  for (Value v : oracle) CHECK_MESSAGE(u.count(v), v);
}

#include <map>

#include "wmmr/litmus.hpp"

namespace wmmr {

namespace {

Stmt power(const Stmt& s, int n) {
  if (n == 0) return make_skip();
  if (n == 1) return s;
  return make_seq(s, power(s, n - 1));
}

}  // namespace

Stmt elaborate_stmt(const Stmt& s, int unroll) {
  switch (s->kind) {
    case StmtKind::Seq:
      return with_pos(make_seq(elaborate_stmt(s->first, unroll), elaborate_stmt(s->second, unroll)), s->pos);
    case StmtKind::Choice:
      return with_pos(make_choice(elaborate_stmt(s->first, unroll), elaborate_stmt(s->second, unroll)), s->pos);
    case StmtKind::Iterate: {
      Stmt body = elaborate_stmt(s->first, unroll);
      Stmt acc = power(body, unroll);
      for (int n = unroll - 1; n >= 0; --n) acc = make_choice(power(body, n), acc);
      return acc;
    }
    default:
      return s;
  }
}

LitmusTest elaborate(const LitmusTest& test, int unroll) {
  if (unroll < 0) throw std::invalid_argument("unroll must be non-negative");
  LitmusTest out = test;
  for (auto& th : out.threads) th.body = elaborate_stmt(th.body, unroll);
  return out;
}

int count_stores(const Stmt& s) {
  if (!s) return 0;
  if (s->kind == StmtKind::Store) return 1;
  return count_stores(s->first) + count_stores(s->second);
}

int count_stores(const LitmusTest& test) {
  int n = 0;
  for (const auto& th : test.threads) n += count_stores(th.body);
  return n;
}

namespace {

struct UniverseBuilder {
  const LitmusTest& test;
  std::size_t cap;
  std::vector<std::set<Value>> regs;
  std::vector<std::set<Value>> locs;
  std::set<Value> constants{0};
  bool changed = false;

  void add(std::set<Value>& dst, Value v) {
    if (dst.insert(v).second) {
      changed = true;
      if (dst.size() > cap)
        throw UniverseOverflow("value universe overflow: more than " + std::to_string(cap) + " distinct values");
    }
  }

  void collect_constants(const Expr& e) {
    if (!e) return;
    if (e->kind == ExprNode::Kind::Const) constants.insert(e->value);
    collect_constants(e->lhs);
    collect_constants(e->rhs);
  }

  void collect_constants(const Stmt& s) {
    if (!s) return;
    if (s->kind == StmtKind::Store && !s->rv.is_reg) constants.insert(s->rv.value);
    collect_constants(s->expr);
    collect_constants(s->first);
    collect_constants(s->second);
  }

  int count_atomic(const Stmt& s) {
    if (!s) return 0;
    switch (s->kind) {
      case StmtKind::Seq:
      case StmtKind::Choice:
      case StmtKind::Iterate:
        return count_atomic(s->first) + count_atomic(s->second);
      case StmtKind::Skip:
        return 0;
      default:
        return 1;
    }
  }

  // All values of e when each register ranges over its current value set.
  std::set<Value> eval_all(const Expr& e) {
    switch (e->kind) {
      case ExprNode::Kind::Const:
        return {e->value};
      case ExprNode::Kind::Reg:
        return regs[e->reg];
      case ExprNode::Kind::Unary: {
        std::set<Value> out;
        for (Value v : eval_all(e->lhs)) out.insert(apply_op(Op::Not, v, 0));
        return out;
      }
      case ExprNode::Kind::Binary: {
        std::set<Value> out;
        auto ls = eval_all(e->lhs);
        auto rs = eval_all(e->rhs);
        for (Value a : ls)
          for (Value b : rs) {
            try {
              out.insert(apply_op(e->op, a, b));
            } catch (const std::overflow_error&) {
              throw UniverseOverflow("value universe overflow: 64-bit arithmetic overflow");
            }
            if (out.size() > cap)
              throw UniverseOverflow("value universe overflow: more than " + std::to_string(cap) +
                                     " distinct values");
          }
        return out;
      }
    }
    return {};
  }

  void round(const Stmt& s) {
    if (!s) return;
    switch (s->kind) {
      case StmtKind::Load:
        for (Value v : std::set<Value>(locs[s->loc])) add(regs[s->reg], v);
        return;
      case StmtKind::Store:
        if (s->rv.is_reg) {
          for (Value v : std::set<Value>(regs[s->rv.reg])) add(locs[s->loc], v);
        } else {
          add(locs[s->loc], s->rv.value);
        }
        return;
      case StmtKind::Assign:
        for (Value v : eval_all(s->expr)) add(regs[s->reg], v);
        return;
      default:
        round(s->first);
        round(s->second);
        return;
    }
  }

  std::set<Value> run() {
    regs.assign(test.registers.size(), {0});
    locs.assign(test.locations.size(), {0});
    int atomic = 0;
    for (const auto& th : test.threads) {
      if (has_iterate(th.body)) throw std::invalid_argument("value_universe expects an elaborated test");
      collect_constants(th.body);
      atomic += count_atomic(th.body);
    }
    // Every execution runs each statement occurrence at most once, so `atomic`
    // rounds cover every value computed along any execution.
    for (int i = 0; i <= atomic; ++i) {
      changed = false;
      for (const auto& th : test.threads) round(th.body);
      if (!changed) break;
    }
    std::set<Value> out = constants;
    for (const auto& r : regs) out.insert(r.begin(), r.end());
    for (const auto& l : locs) out.insert(l.begin(), l.end());
    if (out.size() > cap)
      throw UniverseOverflow("value universe overflow: more than " + std::to_string(cap) + " distinct values");
    return out;
  }
};

}  // namespace

std::set<Value> value_universe(const LitmusTest& test, std::size_t cap) {
  UniverseBuilder b{test, cap, {}, {}};
  return b.run();
}

}  // namespace wmmr

#include "wmmr/ast.hpp"

namespace wmmr {

Expr make_const(Value v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Const;
  n->value = v;
  return n;
}

Expr make_reg(RegId r) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Reg;
  n->reg = r;
  return n;
}

Expr make_binary(Op op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

Expr make_not(Expr e) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Unary;
  n->op = Op::Not;
  n->lhs = std::move(e);
  return n;
}

bool is_boolean_op(Op op) {
  return op != Op::Add && op != Op::Sub && op != Op::Mul;
}

Value apply_op(Op op, Value a, Value b) {
  Value r = 0;
  switch (op) {
    case Op::Add:
      if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in +");
      return r;
    case Op::Sub:
      if (__builtin_sub_overflow(a, b, &r)) throw std::overflow_error("integer overflow in -");
      return r;
    case Op::Mul:
      if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in *");
      return r;
    case Op::Eq: return a == b;
    case Op::Ne: return a != b;
    case Op::Lt: return a < b;
    case Op::Le: return a <= b;
    case Op::And: return (a != 0) && (b != 0);
    case Op::Or: return (a != 0) || (b != 0);
    case Op::Not: return a == 0;
  }
  return 0;
}

void collect_regs(const Expr& e, std::set<RegId>& out) {
  if (!e) return;
  if (e->kind == ExprNode::Kind::Reg) out.insert(e->reg);
  collect_regs(e->lhs, out);
  collect_regs(e->rhs, out);
}

int expr_compare(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return 0;
  if (!a) return -1;
  if (!b) return 1;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  switch (a->kind) {
    case ExprNode::Kind::Const:
      return a->value == b->value ? 0 : (a->value < b->value ? -1 : 1);
    case ExprNode::Kind::Reg:
      return a->reg == b->reg ? 0 : (a->reg < b->reg ? -1 : 1);
    case ExprNode::Kind::Unary:
    case ExprNode::Kind::Binary:
      if (a->op != b->op) return a->op < b->op ? -1 : 1;
      if (int c = expr_compare(a->lhs, b->lhs)) return c;
      return expr_compare(a->rhs, b->rhs);
  }
  return 0;
}

bool expr_equal(const Expr& a, const Expr& b) { return expr_compare(a, b) == 0; }

namespace {

Stmt node(StmtKind k) {
  auto n = std::make_shared<StmtNode>();
  n->kind = k;
  return n;
}

}  // namespace

Stmt make_skip() { return node(StmtKind::Skip); }

Stmt make_load(RegId r, LocId x) {
  auto n = std::make_shared<StmtNode>();
  n->kind = StmtKind::Load;
  n->reg = r;
  n->loc = x;
  return n;
}

Stmt make_store(LocId x, Operand rv) {
  auto n = std::make_shared<StmtNode>();
  n->kind = StmtKind::Store;
  n->loc = x;
  n->rv = rv;
  return n;
}

Stmt make_assign(RegId r, Expr e) {
  auto n = std::make_shared<StmtNode>();
  n->kind = StmtKind::Assign;
  n->reg = r;
  n->expr = std::move(e);
  return n;
}

Stmt make_dmb() { return node(StmtKind::Dmb); }

Stmt make_asm(Expr b) {
  auto n = std::make_shared<StmtNode>();
  n->kind = StmtKind::Asm;
  n->expr = std::move(b);
  return n;
}

Stmt make_seq(Stmt a, Stmt b) {
  auto n = std::make_shared<StmtNode>();
  n->kind = StmtKind::Seq;
  n->first = std::move(a);
  n->second = std::move(b);
  return n;
}

Stmt make_choice(Stmt a, Stmt b) {
  auto n = std::make_shared<StmtNode>();
  n->kind = StmtKind::Choice;
  n->first = std::move(a);
  n->second = std::move(b);
  return n;
}

Stmt make_iterate(Stmt a) {
  auto n = std::make_shared<StmtNode>();
  n->kind = StmtKind::Iterate;
  n->first = std::move(a);
  return n;
}

Stmt with_pos(Stmt s, SourcePos pos) {
  auto n = std::make_shared<StmtNode>(*s);
  n->pos = pos;
  return n;
}

bool stmt_equal(const Stmt& a, const Stmt& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case StmtKind::Skip:
    case StmtKind::Dmb:
      return true;
    case StmtKind::Load:
      return a->reg == b->reg && a->loc == b->loc;
    case StmtKind::Store:
      return a->loc == b->loc && a->rv.is_reg == b->rv.is_reg &&
             (a->rv.is_reg ? a->rv.reg == b->rv.reg : a->rv.value == b->rv.value);
    case StmtKind::Assign:
      return a->reg == b->reg && expr_equal(a->expr, b->expr);
    case StmtKind::Asm:
      return expr_equal(a->expr, b->expr);
    case StmtKind::Seq:
    case StmtKind::Choice:
      return stmt_equal(a->first, b->first) && stmt_equal(a->second, b->second);
    case StmtKind::Iterate:
      return stmt_equal(a->first, b->first);
  }
  return false;
}

bool has_iterate(const Stmt& s) {
  if (!s) return false;
  if (s->kind == StmtKind::Iterate) return true;
  return has_iterate(s->first) || has_iterate(s->second);
}

bool Outcome::mentions_memory() const {
  for (const auto& a : atoms)
    if (a.kind == OutcomeAtom::Kind::Loc) return true;
  return false;
}

std::vector<RegId> LitmusTest::regs_of(Tid tid) const {
  std::vector<RegId> out;
  for (RegId r = 0; r < static_cast<RegId>(registers.size()); ++r)
    if (registers[r].tid == tid) out.push_back(r);
  return out;
}

std::optional<RegId> LitmusTest::find_reg(const std::string& name) const {
  for (RegId r = 0; r < static_cast<RegId>(registers.size()); ++r)
    if (registers[r].name == name) return r;
  return std::nullopt;
}

std::optional<LocId> LitmusTest::find_loc(const std::string& name) const {
  for (LocId x = 0; x < static_cast<LocId>(locations.size()); ++x)
    if (locations[x] == name) return x;
  return std::nullopt;
}

const char* expected_name(Expected e) {
  switch (e) {
    case Expected::Reachable: return "reachable";
    case Expected::Unreachable: return "unreachable";
    case Expected::Unspecified: return "unspecified";
  }
  return "unspecified";
}

}  // namespace wmmr

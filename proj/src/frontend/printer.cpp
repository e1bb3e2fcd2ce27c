#include <sstream>

#include "wmmr/litmus.hpp"

namespace wmmr {

namespace {

int prec(const Expr& e) {
  if (e->kind == ExprNode::Kind::Const) return e->value < 0 ? 6 : 7;
  if (e->kind == ExprNode::Kind::Reg) return 7;
  switch (e->op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Not: return 3;
    case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: return 4;
    case Op::Add: case Op::Sub: return 5;
    case Op::Mul: return 6;
  }
  return 7;
}

const char* op_text(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Eq: return "=";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::And: return "/\\";
    case Op::Or: return "\\/";
    case Op::Not: return "!";
  }
  return "?";
}

void print_expr_rec(const LitmusTest& t, const Expr& e, std::ostream& os) {
  switch (e->kind) {
    case ExprNode::Kind::Const:
      os << e->value;
      return;
    case ExprNode::Kind::Reg:
      os << t.registers.at(e->reg).name;
      return;
    case ExprNode::Kind::Unary: {
      os << "!";
      bool paren = prec(e->lhs) < 3;
      if (paren) os << "(";
      print_expr_rec(t, e->lhs, os);
      if (paren) os << ")";
      return;
    }
    case ExprNode::Kind::Binary: {
      int p = prec(e);
      bool cmp = p == 4;
      bool lp = prec(e->lhs) < p || (cmp && prec(e->lhs) == p);
      bool rp = prec(e->rhs) <= p;
      if (lp) os << "(";
      print_expr_rec(t, e->lhs, os);
      if (lp) os << ")";
      os << " " << op_text(e->op) << " ";
      if (rp) os << "(";
      print_expr_rec(t, e->rhs, os);
      if (rp) os << ")";
      return;
    }
  }
}

void flatten_seq(const Stmt& s, std::vector<Stmt>& out) {
  if (s->kind == StmtKind::Seq) {
    flatten_seq(s->first, out);
    flatten_seq(s->second, out);
  } else {
    out.push_back(s);
  }
}

void print_stmt_rec(const LitmusTest& t, const Stmt& s, int indent, std::ostream& os) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  switch (s->kind) {
    case StmtKind::Skip: os << pad << "skip\n"; return;
    case StmtKind::Dmb: os << pad << "dmb\n"; return;
    case StmtKind::Load:
      os << pad << t.registers.at(s->reg).name << " := " << t.locations.at(s->loc) << "\n";
      return;
    case StmtKind::Store:
      os << pad << t.locations.at(s->loc) << " := ";
      if (s->rv.is_reg) os << t.registers.at(s->rv.reg).name;
      else os << s->rv.value;
      os << "\n";
      return;
    case StmtKind::Assign:
      os << pad << t.registers.at(s->reg).name << " := ";
      print_expr_rec(t, s->expr, os);
      os << "\n";
      return;
    case StmtKind::Asm:
      os << pad << "assume ";
      print_expr_rec(t, s->expr, os);
      os << "\n";
      return;
    case StmtKind::Seq: {
      std::vector<Stmt> parts;
      flatten_seq(s, parts);
      for (const auto& p : parts) print_stmt_rec(t, p, indent, os);
      return;
    }
    case StmtKind::Choice: {
      os << pad << "choose\n";
      print_stmt_rec(t, s->first, indent + 2, os);
      Stmt rest = s->second;
      while (rest->kind == StmtKind::Choice) {
        os << pad << "or\n";
        print_stmt_rec(t, rest->first, indent + 2, os);
        rest = rest->second;
      }
      os << pad << "or\n";
      print_stmt_rec(t, rest, indent + 2, os);
      os << pad << "end\n";
      return;
    }
    case StmtKind::Iterate:
      os << pad << "loop\n";
      print_stmt_rec(t, s->first, indent + 2, os);
      os << pad << "end\n";
      return;
  }
}

bool seq_equal(const Stmt& a, const Stmt& b);

bool stmt_equal_assoc(const Stmt& a, const Stmt& b) {
  if (a->kind == StmtKind::Seq || b->kind == StmtKind::Seq) return seq_equal(a, b);
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case StmtKind::Choice:
      return stmt_equal_assoc(a->first, b->first) && stmt_equal_assoc(a->second, b->second);
    case StmtKind::Iterate:
      return stmt_equal_assoc(a->first, b->first);
    default:
      return stmt_equal(a, b);
  }
}

bool seq_equal(const Stmt& a, const Stmt& b) {
  std::vector<Stmt> xs, ys;
  flatten_seq(a, xs);
  flatten_seq(b, ys);
  if (xs.size() != ys.size()) return false;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!stmt_equal_assoc(xs[i], ys[i])) return false;
  return true;
}

}  // namespace

std::string print_expr(const LitmusTest& test, const Expr& e) {
  std::ostringstream os;
  print_expr_rec(test, e, os);
  return os.str();
}

std::string print_stmt(const LitmusTest& test, const Stmt& s, int indent) {
  std::ostringstream os;
  print_stmt_rec(test, s, indent, os);
  return os.str();
}

std::string print_outcome(const LitmusTest& test, const Outcome& o) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < o.atoms.size(); ++i) {
    if (i) os << " /\\ ";
    const auto& a = o.atoms[i];
    if (a.kind == OutcomeAtom::Kind::Reg) os << test.registers.at(a.id).name;
    else os << "[" << test.locations.at(a.id) << "]";
    os << "=" << a.value;
  }
  os << ")";
  return os.str();
}

std::string print_litmus(const LitmusTest& test) {
  std::ostringstream os;
  os << "test " << test.name << "\n";
  os << "locations:";
  for (const auto& x : test.locations) os << " " << x;
  os << "\n";
  for (const auto& th : test.threads) {
    os << "thread " << th.tid << ":\n";
    print_stmt_rec(test, th.body, 2, os);
  }
  os << "exists " << print_outcome(test, test.outcome) << "\n";
  if (test.expected != Expected::Unspecified) os << "expected: " << expected_name(test.expected) << "\n";
  return os.str();
}

bool same_test(const LitmusTest& a, const LitmusTest& b) {
  if (a.name != b.name || a.locations != b.locations || a.expected != b.expected) return false;
  if (a.registers.size() != b.registers.size() || a.threads.size() != b.threads.size()) return false;
  for (std::size_t i = 0; i < a.registers.size(); ++i)
    if (a.registers[i].name != b.registers[i].name || a.registers[i].tid != b.registers[i].tid) return false;
  for (std::size_t i = 0; i < a.threads.size(); ++i)
    if (a.threads[i].tid != b.threads[i].tid || !stmt_equal_assoc(a.threads[i].body, b.threads[i].body)) return false;
  if (a.outcome.atoms.size() != b.outcome.atoms.size()) return false;
  for (std::size_t i = 0; i < a.outcome.atoms.size(); ++i) {
    const auto& x = a.outcome.atoms[i];
    const auto& y = b.outcome.atoms[i];
    if (x.kind != y.kind || x.id != y.id || x.value != y.value) return false;
  }
  return true;
}

}  // namespace wmmr

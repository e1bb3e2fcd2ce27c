#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace wmmr {

using Value = std::int64_t;
using Timestamp = int;
using Tid = int;    // 1-based thread id
using LocId = int;  // index into LitmusTest::locations
using RegId = int;  // index into LitmusTest::registers

struct SourcePos {
  int line = 0;
  int column = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, SourcePos pos)
      : std::runtime_error("line " + std::to_string(pos.line) + ", column " +
                           std::to_string(pos.column) + ": " + msg),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

// ---------------------------------------------------------------- expressions

enum class Op { Add, Sub, Mul, Eq, Ne, Lt, Le, And, Or, Not };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Const, Reg, Unary, Binary };
  Kind kind = Kind::Const;
  Value value = 0;
  RegId reg = -1;
  Op op = Op::Add;
  Expr lhs;
  Expr rhs;
};

Expr make_const(Value v);
Expr make_reg(RegId r);
Expr make_binary(Op op, Expr lhs, Expr rhs);
Expr make_not(Expr e);

bool is_boolean_op(Op op);
Value apply_op(Op op, Value a, Value b);
void collect_regs(const Expr& e, std::set<RegId>& out);
bool expr_equal(const Expr& a, const Expr& b);
// Structural total order, used to keep labels comparable.
int expr_compare(const Expr& a, const Expr& b);

// ----------------------------------------------------------------- statements

struct Operand {
  bool is_reg = false;
  RegId reg = -1;
  Value value = 0;
};

enum class StmtKind { Skip, Load, Store, Assign, Dmb, Asm, Seq, Choice, Iterate };

struct StmtNode;
using Stmt = std::shared_ptr<const StmtNode>;

struct StmtNode {
  StmtKind kind = StmtKind::Skip;
  RegId reg = -1;   // Load, Assign
  LocId loc = -1;   // Load, Store
  Operand rv;       // Store
  Expr expr;        // Assign, Asm
  Stmt first;       // Seq, Choice, Iterate
  Stmt second;      // Seq, Choice
  SourcePos pos;
};

Stmt make_skip();
Stmt make_load(RegId r, LocId x);
Stmt make_store(LocId x, Operand rv);
Stmt make_assign(RegId r, Expr e);
Stmt make_dmb();
Stmt make_asm(Expr b);
Stmt make_seq(Stmt a, Stmt b);
Stmt make_choice(Stmt a, Stmt b);
Stmt make_iterate(Stmt a);
Stmt with_pos(Stmt s, SourcePos pos);

bool stmt_equal(const Stmt& a, const Stmt& b);
bool has_iterate(const Stmt& s);

// ------------------------------------------------------------------ the test

struct RegInfo {
  std::string name;
  Tid tid = 0;
};

struct OutcomeAtom {
  enum class Kind { Reg, Loc };
  Kind kind = Kind::Reg;
  int id = -1;  // RegId or LocId
  Value value = 0;
};

struct Outcome {
  std::vector<OutcomeAtom> atoms;  // conjunction; empty means true
  bool mentions_memory() const;
};

enum class Expected { Reachable, Unreachable, Unspecified };

struct Thread {
  Tid tid = 0;
  Stmt body;
};

struct LitmusTest {
  std::string name;
  std::vector<std::string> locations;
  std::vector<RegInfo> registers;
  std::vector<Thread> threads;  // threads[i].tid == i + 1
  Outcome outcome;
  Expected expected = Expected::Unspecified;

  int thread_count() const { return static_cast<int>(threads.size()); }
  std::vector<RegId> regs_of(Tid tid) const;
  std::optional<RegId> find_reg(const std::string& name) const;
  std::optional<LocId> find_loc(const std::string& name) const;
};

const char* expected_name(Expected e);

}  // namespace wmmr

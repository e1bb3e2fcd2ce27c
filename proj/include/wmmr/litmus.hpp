#pragma once

#include <set>
#include <string>
#include <vector>

#include "wmmr/ast.hpp"

namespace wmmr {

// Parse a `.lit` file. `fallback_name` is used when the text has no `test` line.
LitmusTest parse_litmus(const std::string& text, const std::string& fallback_name = "test");
LitmusTest load_litmus_file(const std::string& path);

// Files ending in .lit under each path (directories are scanned, sorted by name).
std::vector<std::string> collect_litmus_paths(const std::vector<std::string>& paths);

std::string print_litmus(const LitmusTest& test);
std::string print_stmt(const LitmusTest& test, const Stmt& s, int indent = 0);
std::string print_expr(const LitmusTest& test, const Expr& e);
std::string print_outcome(const LitmusTest& test, const Outcome& o);

bool same_test(const LitmusTest& a, const LitmusTest& b);

// Replace every iterate(S) by choice(S^0, choice(S^1, ... S^unroll)).
LitmusTest elaborate(const LitmusTest& test, int unroll);
Stmt elaborate_stmt(const Stmt& s, int unroll);

class UniverseOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Superset of every value any execution of the (elaborated) test can compute or store.
std::set<Value> value_universe(const LitmusTest& test, std::size_t cap = 256);

// Number of store statements in the (elaborated) test.
int count_stores(const LitmusTest& test);
int count_stores(const Stmt& s);

}  // namespace wmmr

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wmmr/ast.hpp"
#include "wmmr/promising.hpp"
#include "wmmr/proof.hpp"

namespace wmmr {

struct Shape {
  int min_threads = 2;
  int max_threads = 3;
  int max_stmts = 4;  // per thread
  int max_locations = 2;
  std::vector<Value> values{0, 1, 2};
  bool dmb = true;
  bool assume = true;
  bool register_ops = true;  // register stores and assignments
  bool choice = true;
  bool loads = true;
};

// Source text of a random test within `shape`. Assumptions only mention
// registers loaded earlier in the same thread.
std::string random_program(std::mt19937_64& rng, const Shape& shape, const std::string& name);

struct CrosscheckCase {
  std::string source;
  std::size_t op_finals = 0;
  std::size_t proof_finals = 0;
  bool engines_agree = true;     // explore vs proof_final_states
  bool schedulers_agree = true;  // promises-first vs unrestricted
  bool traces_ok = true;         // every witness trace replays and yields outlines
  bool witness_ok = true;        // the proof engine's witness re-checks
  long long violations = 0;      // view monotonicity
  bool bounded = false;
  std::string detail;            // filled on any discrepancy
};

struct CrosscheckReport {
  std::uint64_t seed = 0;
  std::vector<CrosscheckCase> cases;
  int engine_mismatches = 0;
  int scheduler_mismatches = 0;
  int trace_failures = 0;
  int witness_failures = 0;
  long long violations = 0;
  int bounded = 0;
  bool ok() const {
    return engine_mismatches == 0 && scheduler_mismatches == 0 && trace_failures == 0 && witness_failures == 0 &&
           violations == 0;
  }
};

// Runs every check on one parsed test.
CrosscheckCase crosscheck_test(const LitmusTest& test, const Bounds& bounds, const ProofBounds& proof_bounds);

CrosscheckReport crosscheck(std::uint64_t seed, int count, const Shape& shape = {}, const Bounds& bounds = {},
                            const ProofBounds& proof_bounds = default_proof_bounds());

}  // namespace wmmr

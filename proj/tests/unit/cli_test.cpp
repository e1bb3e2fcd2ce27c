#include "common.hpp"
#include "doctest.h"
#include "wmmr/report.hpp"

using namespace wmmr;

namespace {

std::string data(const std::string& name) { return std::string(WMMR_SOURCE_DIR) + "/tests/data/" + name; }

}  // namespace

TEST_CASE("corpus run agrees") {
  Report r = run(RunConfig{}, {std::string(WMMR_SOURCE_DIR) + "/corpus"});
  REQUIRE(r.tests.size() == 8);
  for (const auto& t : r.tests) CHECK_MESSAGE(t.agree, t.name);
  CHECK(r.exit_code == 0);
  CHECK(r.tests.front().name == "IRIW");
  auto j = to_json(r);
  CHECK(j["summary"]["agree"] == 8);
}

TEST_CASE("reports are deterministic apart from timings") {
  RunConfig cfg;
  cfg.witness = true;
  auto strip = [](nlohmann::json j) {
    for (auto& t : j["tests"]) {
      t.erase("wall_ms");
      for (auto& [k, e] : t["engines"].items()) e.erase("wall_ms");
    }
    return j;
  };
  std::vector<std::string> paths{std::string(WMMR_SOURCE_DIR) + "/corpus"};
  CHECK(strip(to_json(run(cfg, paths))) == strip(to_json(run(cfg, paths))));
}

TEST_CASE("proof witness shows the configuration") {
  RunConfig cfg;
  cfg.engine = Engine::Proof;
  cfg.witness = true;
  Report r = run(cfg, {corpus_path("LB")});
  REQUIRE(r.tests.size() == 1);
  REQUIRE(r.tests[0].proof);
  CHECK_FALSE(r.tests[0].op);
  const std::string& w = r.tests[0].proof->witness;
  CHECK(w.find("configuration:") != std::string::npos);
  CHECK(w.find("PR-ReadNew") != std::string::npos);
  CHECK(w.find("final: a=1 b=1") != std::string::npos);
}

TEST_CASE("wrong expectation fails with exit 1") {
  Report r = run(RunConfig{}, {data("wrong_expectation.lit")});
  REQUIRE(r.tests.size() == 1);
  CHECK_FALSE(r.tests[0].agree);
  CHECK(r.exit_code == 1);
}

TEST_CASE("parse errors exit 2 and other files still run") {
  Report r = run(RunConfig{}, {data("bad.lit"), corpus_path("SB")});
  REQUIRE(r.tests.size() == 2);
  CHECK(r.exit_code == 2);
  int errors = 0;
  for (const auto& t : r.tests) errors += !t.error.empty();
  CHECK(errors == 1);
  CHECK(run(RunConfig{}, {data("missing.lit")}).exit_code == 2);
}

TEST_CASE("strict mode and bounded verdicts") {
  RunConfig cfg;
  cfg.max_memory = 1;
  Report r = run(cfg, {corpus_path("WRC")});
  REQUIRE(r.tests[0].op);
  CHECK(r.tests[0].op->verdict == Verdict::BoundedUnknown);
  CHECK(r.exit_code == 0);
  cfg.strict = true;
  CHECK(run(cfg, {corpus_path("WRC")}).exit_code == 3);
}

TEST_CASE("crosscheck edge cases") {
  CrosscheckReport empty = crosscheck(1, 0);
  CHECK(empty.cases.empty());
  CHECK(empty.ok());

  Shape sc;
  sc.min_threads = sc.max_threads = 1;
  sc.loads = sc.dmb = sc.assume = sc.register_ops = sc.choice = false;
  CrosscheckReport one = crosscheck(9, 10, sc);
  CHECK(one.ok());
  for (const auto& c : one.cases) {
    CHECK(c.op_finals == 1);
    CHECK(c.proof_finals == 1);
  }
}

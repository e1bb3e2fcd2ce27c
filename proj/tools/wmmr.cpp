#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "wmmr/report.hpp"

using namespace wmmr;

int main(int argc, char** argv) {
  CLI::App app{"Litmus tests under a promising-style semantics and its event-structure proof calculus"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::vector<std::string> paths;
  int max_memory = -1;
  auto* check = app.add_subcommand("check", "run the engines on .lit files or directories");
  check->add_option("paths", paths, "files or directories")->required();
  check->add_option("--engine", cfg.engine, "op, proof or both")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Engine>{
          {"op", Engine::Op}, {"proof", Engine::Proof}, {"both", Engine::Both}}));
  check->add_option("--unroll", cfg.unroll, "iterations per loop")->check(CLI::NonNegativeNumber);
  check->add_option("--max-memory", max_memory, "memory length bound of the operational engine")
      ->check(CLI::NonNegativeNumber);
  check->add_flag("--json", cfg.json, "machine-readable report");
  check->add_flag("--witness", cfg.witness, "print witnesses of reachable outcomes");
  check->add_flag("--dot", cfg.dot, "print the proof configuration as DOT");
  check->add_flag("--strict", cfg.strict, "exit 3 when some verdict is bounded-unknown");

  std::map<std::string, ChainMode> chains{{"flow", ChainMode::Flow}, {"restricted", ChainMode::Restricted}};
  std::map<std::string, RestrictMode> restricts{{"repaired", RestrictMode::Repaired}, {"literal", RestrictMode::Literal}};
  auto calculus_options = [&](CLI::App* sub, Calculus& c) {
    sub->add_option("--chains", c.chains, "read-chain rule: flow or restricted")
        ->transform(CLI::CheckedTransformer(chains));
    sub->add_option("--restrict", c.restrict_mode, "restriction rule: repaired or literal")
        ->transform(CLI::CheckedTransformer(restricts));
  };
  calculus_options(check, cfg.calculus);

  std::uint64_t seed = 1;
  int count = 200;
  Shape shape;
  ProofBounds pb = default_proof_bounds();
  bool cc_json = false;
  auto* cc = app.add_subcommand("crosscheck", "compare the engines on random programs");
  cc->add_option("--seed", seed, "generator seed");
  cc->add_option("--count", count, "number of programs")->check(CLI::NonNegativeNumber);
  cc->add_option("--min-threads", shape.min_threads)->check(CLI::Range(1, 8));
  cc->add_option("--max-threads", shape.max_threads)->check(CLI::Range(1, 8));
  cc->add_option("--max-stmts", shape.max_stmts)->check(CLI::Range(1, 8));
  cc->add_option("--max-locations", shape.max_locations)->check(CLI::Range(1, 2));
  cc->add_option("--values", shape.values, "store and comparison values");
  cc->add_flag("!--no-dmb", shape.dmb);
  cc->add_flag("!--no-assume", shape.assume);
  cc->add_flag("!--no-register-ops", shape.register_ops);
  cc->add_flag("!--no-choice", shape.choice);
  cc->add_flag("!--no-loads", shape.loads);
  cc->add_flag("--json", cc_json, "machine-readable report");
  calculus_options(cc, pb.calculus);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*check) {
    if (max_memory >= 0) cfg.max_memory = max_memory;
    Report rep = run(cfg, paths);
    if (cfg.json) std::cout << to_json(rep).dump(2) << "\n";
    else std::cout << to_text(rep);
    return rep.exit_code;
  }

  if (shape.max_threads < shape.min_threads) {
    std::cerr << "--max-threads is below --min-threads\n";
    return 2;
  }
  CrosscheckReport rep = crosscheck(seed, count, shape, {}, pb);
  if (cc_json) std::cout << to_json(rep).dump(2) << "\n";
  else std::cout << to_text(rep);
  return rep.ok() ? 0 : 1;
}

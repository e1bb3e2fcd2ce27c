#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wmmr/crosscheck.hpp"
#include "wmmr/proof.hpp"

namespace wmmr {

enum class Engine { Op, Proof, Both };

struct RunConfig {
  Engine engine = Engine::Both;
  int unroll = 2;
  std::optional<int> max_memory;
  bool json = false;
  bool witness = false;
  bool dot = false;     // DOT of the proof configuration with the witness
  bool strict = false;  // bounded-unknown verdicts fail the run
  Calculus calculus;
};

struct EngineRun {
  Verdict verdict = Verdict::Unreachable;
  bool bounded = false;
  std::string witness;  // filled when RunConfig::witness is set and a witness exists
  std::string dot;
  std::string revalidation;  // proof engine: empty when the witness re-checks
  double ms = 0;
};

struct TestReport {
  std::string path;
  std::string name;
  std::string outcome;
  Expected expected = Expected::Unspecified;
  std::optional<EngineRun> op;
  std::optional<EngineRun> proof;
  std::string error;  // parse or configuration failure
  bool agree = true;  // engines with each other and with `expected:`
  double ms = 0;
};

struct Report {
  std::vector<TestReport> tests;
  int exit_code = 0;
};

// Parses and checks every .lit file under `paths`. Tests run concurrently and
// are reported sorted by name, then path.
Report run(const RunConfig& config, const std::vector<std::string>& paths);

// Exit-code contract: 2 on any parse or configuration error, else 1 on a
// disagreement, else 3 on a bounded-unknown verdict under `strict`, else 0.
int exit_code(const Report& report, bool strict);

nlohmann::json to_json(const Report& report);
std::string to_text(const Report& report);

nlohmann::json to_json(const CrosscheckReport& report);
std::string to_text(const CrosscheckReport& report);

}  // namespace wmmr

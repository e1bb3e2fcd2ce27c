// One line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "oracle.hpp"
#include "wmmr/crosscheck.hpp"
#include "wmmr/litmus.hpp"
#include "wmmr/proof.hpp"

using namespace wmmr;

namespace {

constexpr double kLimitSeconds = 10.0;

LitmusTest load(const std::string& name) {
  return elaborate(load_litmus_file(std::string(WMMR_SOURCE_DIR) + "/corpus/" + name + ".lit"), 2);
}

struct Line {
  int id;
  bool pass;
  std::string detail;
};

int failures = 0;

void print(const Line& l) {
  if (!l.pass) ++failures;
  std::printf("criterion %2d: %s  %s\n", l.id, l.pass ? "PASS" : "FAIL", l.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

long long corpus_violations = 0;

// Both engines on a corpus test against the expected verdict.
Line litmus(int id, const std::string& name, Verdict want, const std::function<std::string(const LitmusTest&, const ExploreResult&, bool&)>& extra = {}) {
  LitmusTest t = load(name);
  auto t0 = std::chrono::steady_clock::now();
  ExploreResult op = explore(t, Bounds{});
  Verdict ov = check_outcome(op, t.outcome).verdict;
  double op_s = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  Verdict pv = check_reachable(t, default_proof_bounds()).verdict;
  double pr_s = seconds_since(t0);
  corpus_violations += op.stats.monotonicity_violations;
  bool pass = ov == want && pv == want && op_s < kLimitSeconds && pr_s < kLimitSeconds;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %s: op=%s (%.2fs) proof=%s (%.2fs)", name.c_str(),
                print_outcome(t, t.outcome).c_str(), verdict_name(ov), op_s, verdict_name(pv), pr_s);
  std::string detail = buf;
  if (extra) detail += extra(t, op, pass);
  return {id, pass, detail};
}

std::string sb_oracle(const LitmusTest& t, const ExploreResult& op, bool& pass) {
  std::set<std::vector<Value>> want;
  for (const auto& s : oracle::final_states(t)) want.insert(s.first);
  bool same = op.valuations() == want;
  bool four = want == std::set<std::vector<Value>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  pass = pass && same && four;
  return std::string("; outcome set ") + (same ? "equals" : "differs from") + " the brute-force oracle (" +
         std::to_string(want.size()) + " valuations)";
}

}  // namespace

int main() {
  print(litmus(1, "LB", Verdict::Reachable));
  print(litmus(2, "LB+dmb", Verdict::Unreachable));
  print(litmus(3, "MP", Verdict::Reachable));
  print(litmus(4, "MP+dmb", Verdict::Unreachable));
  print(litmus(5, "SB", Verdict::Reachable, sb_oracle));
  print(litmus(6, "IRIW", Verdict::Unreachable));
  print(litmus(7, "WRC", Verdict::Reachable));
  print(litmus(8, "RRC", Verdict::Unreachable));

  auto t0 = std::chrono::steady_clock::now();
  CrosscheckReport rep = crosscheck(1, 200);
  double cc_s = seconds_since(t0);

  std::string first;
  for (const auto& c : rep.cases)
    if (!c.engines_agree) {
      first = c.source;
      std::istringstream lines(c.detail);
      for (std::string l; std::getline(lines, l);)
        if (l.rfind("  operational only", 0) == 0 || l.rfind("  proof only", 0) == 0) first += l + "\n";
      break;
    }
  print({9, rep.engine_mismatches == 0 && rep.bounded == 0,
         std::to_string(rep.cases.size()) + " random programs (seed 1, " + std::to_string(static_cast<int>(cc_s)) +
             "s): " + std::to_string(rep.engine_mismatches) + " final-state set mismatches, " +
             std::to_string(rep.bounded) + " bounded"});
  if (!first.empty()) std::printf("first mismatch:\n%s", first.c_str());

  ProofBounds restricted = default_proof_bounds();
  restricted.calculus.chains = ChainMode::Restricted;
  CrosscheckReport alt = crosscheck(1, 200, Shape{}, Bounds{}, restricted);
  std::printf("  note: with restricted read chains: %d mismatches, %d bounded, %d trace failures\n",
              alt.engine_mismatches, alt.bounded, alt.trace_failures);

  print({10, rep.scheduler_mismatches == 0,
         std::to_string(rep.cases.size()) + " random programs: " + std::to_string(rep.scheduler_mismatches) +
             " promises-first vs unrestricted mismatches"});

  long long random_violations = rep.violations + alt.violations;
  print({11, corpus_violations == 0 && random_violations == 0,
         "view monotonicity violations: corpus " + std::to_string(corpus_violations) + ", random " +
             std::to_string(random_violations)});

  int corpus_witnesses = 0, corpus_bad = 0;
  for (const char* name : {"LB", "LB+dmb", "MP", "MP+dmb", "SB", "IRIW", "WRC", "RRC"}) {
    LitmusTest t = load(name);
    ProofResult r = check_reachable(t, default_proof_bounds());
    if (!r.witness) continue;
    ++corpus_witnesses;
    if (!revalidate(t, *r.witness)) ++corpus_bad;
  }
  int random_witnesses = 0;
  for (const auto& c : rep.cases)
    if (c.proof_finals > 0) ++random_witnesses;
  print({12, corpus_bad == 0 && rep.witness_failures == 0 && alt.witness_failures == 0,
         std::to_string(corpus_witnesses) + " corpus and " + std::to_string(random_witnesses) +
             " random witnesses re-checked: " + std::to_string(corpus_bad + rep.witness_failures) + " failures"});

  std::printf("%d of 12 criteria fail\n", failures);
  return failures == 0 ? 0 : 1;
}

#include "wmmr/report.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "wmmr/litmus.hpp"

namespace wmmr {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

bool definite(Verdict v) { return v != Verdict::BoundedUnknown; }

bool matches(Expected e, Verdict v) {
  if (e == Expected::Unspecified || !definite(v)) return true;
  return (e == Expected::Reachable) == (v == Verdict::Reachable);
}

EngineRun run_op(const LitmusTest& test, const RunConfig& cfg, bool parallel) {
  auto t0 = std::chrono::steady_clock::now();
  Bounds b;
  b.unroll = cfg.unroll;
  if (cfg.max_memory) b.max_memory = *cfg.max_memory;
  b.parallel = parallel;
  ExploreResult r = explore(test, b);
  OpVerdict v = check_outcome(r, test.outcome);
  EngineRun out;
  out.verdict = v.verdict;
  out.bounded = r.bounded_incomplete;
  if (cfg.witness && v.witness)
    out.witness = trace_text(test, *v.witness) + "final: " + state_text(test, *v.state) + "\n";
  out.ms = ms_since(t0);
  return out;
}

EngineRun run_proof(const LitmusTest& test, const RunConfig& cfg, bool parallel) {
  auto t0 = std::chrono::steady_clock::now();
  ProofBounds b = default_proof_bounds();
  b.unroll = cfg.unroll;
  b.parallel = parallel;
  b.calculus = cfg.calculus;
  ProofResult r = check_reachable(test, b);
  EngineRun out;
  out.verdict = r.verdict;
  out.bounded = r.bounded_incomplete;
  if (r.witness) {
    std::string why;
    if (!revalidate(test, *r.witness, &why, cfg.calculus)) out.revalidation = why.empty() ? "re-check failed" : why;
    if (cfg.witness) out.witness = render_witness(test, *r.witness);
    if (cfg.dot) out.dot = to_dot(test, r.witness->config.config, r.witness->config.order);
  }
  out.ms = ms_since(t0);
  return out;
}

TestReport run_one(const std::string& path, const RunConfig& cfg, bool parallel) {
  auto t0 = std::chrono::steady_clock::now();
  TestReport rep;
  rep.path = path;
  try {
    LitmusTest src = load_litmus_file(path);
    rep.name = src.name;
    rep.outcome = print_outcome(src, src.outcome);
    rep.expected = src.expected;
    LitmusTest test = elaborate(src, cfg.unroll);
    if (cfg.engine != Engine::Proof) rep.op = run_op(test, cfg, parallel);
    if (cfg.engine != Engine::Op) rep.proof = run_proof(test, cfg, parallel);
  } catch (const std::exception& e) {
    rep.error = e.what();
    if (rep.name.empty()) rep.name = path;
  }
  if (!rep.error.empty()) rep.agree = false;
  for (const auto* e : {&rep.op, &rep.proof})
    if (*e && (!matches(rep.expected, (*e)->verdict) || !(*e)->revalidation.empty())) rep.agree = false;
  if (rep.op && rep.proof && definite(rep.op->verdict) && definite(rep.proof->verdict) &&
      rep.op->verdict != rep.proof->verdict)
    rep.agree = false;
  rep.ms = ms_since(t0);
  return rep;
}

const char* engine_verdict(const std::optional<EngineRun>& e) { return e ? verdict_name(e->verdict) : "-"; }

}  // namespace

Report run(const RunConfig& config, const std::vector<std::string>& paths) {
  Report rep;
  std::vector<std::string> files;
  try {
    files = collect_litmus_paths(paths);
  } catch (const std::exception& e) {
    TestReport t;
    t.name = t.path = paths.empty() ? "" : paths.front();
    t.error = e.what();
    t.agree = false;
    rep.tests.push_back(t);
    rep.exit_code = exit_code(rep, config.strict);
    return rep;
  }
  rep.tests.resize(files.size());
  bool batch = files.size() > 1;
  long long n = static_cast<long long>(files.size());
#ifdef WMMR_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (batch)
#endif
  for (long long i = 0; i < n; ++i)
    rep.tests[static_cast<std::size_t>(i)] = run_one(files[static_cast<std::size_t>(i)], config, !batch);
  std::stable_sort(rep.tests.begin(), rep.tests.end(), [](const TestReport& a, const TestReport& b) {
    return a.name != b.name ? a.name < b.name : a.path < b.path;
  });
  rep.exit_code = exit_code(rep, config.strict);
  return rep;
}

int exit_code(const Report& report, bool strict) {
  bool error = false, mismatch = false, unknown = false;
  for (const auto& t : report.tests) {
    if (!t.error.empty()) error = true;
    else if (!t.agree) mismatch = true;
    for (const auto* e : {&t.op, &t.proof})
      if (*e && (*e)->verdict == Verdict::BoundedUnknown) unknown = true;
  }
  if (error) return 2;
  if (mismatch) return 1;
  if (strict && unknown) return 3;
  return 0;
}

nlohmann::json to_json(const Report& report) {
  using nlohmann::json;
  json tests = json::array();
  for (const auto& t : report.tests) {
    json j{{"name", t.name}, {"path", t.path}, {"agree", t.agree}, {"wall_ms", t.ms}};
    if (!t.error.empty()) {
      j["error"] = t.error;
    } else {
      j["outcome"] = t.outcome;
      j["expected"] = expected_name(t.expected);
    }
    json engines = json::object();
    auto put = [&](const char* key, const std::optional<EngineRun>& e) {
      if (!e) return;
      json r{{"verdict", verdict_name(e->verdict)}, {"bounded", e->bounded}, {"wall_ms", e->ms}};
      if (!e->witness.empty()) r["witness"] = e->witness;
      if (!e->dot.empty()) r["dot"] = e->dot;
      if (!e->revalidation.empty()) r["revalidation_failure"] = e->revalidation;
      engines[key] = r;
    };
    put("op", t.op);
    put("proof", t.proof);
    j["engines"] = engines;
    tests.push_back(j);
  }
  int agreed = static_cast<int>(std::count_if(report.tests.begin(), report.tests.end(), [](const TestReport& t) { return t.agree; }));
  return json{{"kind", "check"},
              {"tests", tests},
              {"summary", {{"total", report.tests.size()}, {"agree", agreed}, {"exit_code", report.exit_code}}}};
}

std::string to_text(const Report& report) {
  std::ostringstream os;
  int agreed = 0;
  for (const auto& t : report.tests) {
    if (t.agree) ++agreed;
    if (!t.error.empty()) {
      os << "ERROR " << t.path << ": " << t.error << "\n";
      continue;
    }
    os << (t.agree ? "ok   " : "FAIL ") << t.name << "  " << t.outcome << "  expected=" << expected_name(t.expected)
       << " op=" << engine_verdict(t.op) << " proof=" << engine_verdict(t.proof);
    os.setf(std::ios::fixed);
    os.precision(1);
    os << "  (" << t.ms << " ms)\n";
    for (const auto* e : {&t.op, &t.proof})
      if (*e && !(*e)->revalidation.empty()) os << "  witness re-check failed: " << (*e)->revalidation << "\n";
    if (t.op && !t.op->witness.empty()) os << "  operational witness:\n" << t.op->witness;
    if (t.proof && !t.proof->witness.empty()) os << "  proof witness:\n" << t.proof->witness;
    if (t.proof && !t.proof->dot.empty()) os << t.proof->dot;
  }
  os << agreed << "/" << report.tests.size() << " agree\n";
  return os.str();
}

nlohmann::json to_json(const CrosscheckReport& report) {
  using nlohmann::json;
  json cases = json::array();
  for (std::size_t i = 0; i < report.cases.size(); ++i) {
    const auto& c = report.cases[i];
    if (c.detail.empty() && !c.bounded) continue;
    cases.push_back({{"index", i},
                     {"source", c.source},
                     {"engines_agree", c.engines_agree},
                     {"schedulers_agree", c.schedulers_agree},
                     {"traces_ok", c.traces_ok},
                     {"witness_ok", c.witness_ok},
                     {"violations", c.violations},
                     {"bounded", c.bounded},
                     {"detail", c.detail}});
  }
  return json{{"kind", "crosscheck"},
              {"seed", report.seed},
              {"count", report.cases.size()},
              {"engine_mismatches", report.engine_mismatches},
              {"scheduler_mismatches", report.scheduler_mismatches},
              {"trace_failures", report.trace_failures},
              {"witness_failures", report.witness_failures},
              {"monotonicity_violations", report.violations},
              {"bounded", report.bounded},
              {"ok", report.ok()},
              {"discrepancies", cases}};
}

std::string to_text(const CrosscheckReport& report) {
  std::ostringstream os;
  for (const auto& c : report.cases)
    if (!c.detail.empty()) os << "---- discrepancy\n" << c.source << c.detail;
  os << "seed " << report.seed << ", " << report.cases.size() << " programs: " << report.engine_mismatches
     << " engine mismatches, " << report.scheduler_mismatches << " scheduler mismatches, " << report.trace_failures
     << " trace failures, " << report.witness_failures << " witness failures, " << report.violations << " monotonicity violations, " << report.bounded << " bounded\n";
  return os.str();
}

}  // namespace wmmr

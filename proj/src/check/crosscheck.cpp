#include "wmmr/crosscheck.hpp"

#include <sstream>

#include "wmmr/litmus.hpp"

namespace wmmr {

namespace {

std::string reg_name(int k) {
  if (k < 26) return std::string(1, static_cast<char>('a' + k));
  return "r" + std::to_string(k);
}

struct Gen {
  std::mt19937_64& rng;
  const Shape& shape;
  int locs = 1;
  int next_reg = 0;

  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  bool chance(int percent) { return below(100) < percent; }
  std::string loc() { return locs == 1 || below(2) == 0 ? "x" : "y"; }
  Value value() { return shape.values[static_cast<std::size_t>(below(static_cast<int>(shape.values.size())))]; }
  Value nonzero() {
    std::vector<Value> v;
    for (Value x : shape.values)
      if (x != 0) v.push_back(x);
    if (v.empty()) return value();
    return v[static_cast<std::size_t>(below(static_cast<int>(v.size())))];
  }

  // One simple statement; `regs` are the registers already loaded.
  std::string simple(std::vector<std::string>& regs, bool allow_load) {
    for (;;) {
      int r = below(100);
      if (r < 35) return loc() + " := " + std::to_string(nonzero());
      if (r < 70) {
        if (!allow_load || !shape.loads) continue;
        std::string a = reg_name(next_reg++);
        regs.push_back(a);
        return a + " := " + loc();
      }
      if (r < 80) {
        if (!shape.dmb) continue;
        return "dmb";
      }
      if (regs.empty()) continue;
      std::string a = regs[static_cast<std::size_t>(below(static_cast<int>(regs.size())))];
      if (r < 88) {
        if (!shape.assume) continue;
        return "assume " + a + (below(2) ? " == " : " != ") + std::to_string(value());
      }
      if (!shape.register_ops) continue;
      if (r < 95) return loc() + " := " + a;
      std::string b = reg_name(next_reg++);
      regs.push_back(b);
      return b + " := " + a + " + " + std::to_string(value());
    }
  }
};

}  // namespace

std::string random_program(std::mt19937_64& rng, const Shape& shape, const std::string& name) {
  Gen g{rng, shape};
  int threads = shape.min_threads + g.below(shape.max_threads - shape.min_threads + 1);
  g.locs = 1 + g.below(std::max(1, std::min(2, shape.max_locations)));
  std::ostringstream os;
  os << "test " << name << "\nlocations: x" << (g.locs > 1 ? " y" : "") << "\n";
  for (int t = 1; t <= threads; ++t) {
    os << "thread " << t << ":\n";
    std::vector<std::string> regs;
    int n = 1 + g.below(shape.max_stmts);
    for (int k = 0; k < n; ++k) {
      if (shape.choice && k + 1 < n && g.chance(8)) {
        // Branches without loads keep later assumptions well defined.
        os << "  choose\n    " << g.simple(regs, false) << "\n  or\n    " << g.simple(regs, false) << "\n  end\n";
        continue;
      }
      os << "  " << g.simple(regs, true) << "\n";
    }
  }
  return os.str();
}

namespace {

std::set<FinalState> states_of(const ExploreResult& r) {
  std::set<FinalState> out;
  for (const auto& [s, t] : r.finals) out.insert(s);
  return out;
}

void diff(const LitmusTest& test, const std::set<FinalState>& a, const std::set<FinalState>& b, const char* an,
          const char* bn, std::ostringstream& os) {
  for (const auto& s : a)
    if (!b.count(s)) os << "  " << an << " only: " << state_text(test, s) << "\n";
  for (const auto& s : b)
    if (!a.count(s)) os << "  " << bn << " only: " << state_text(test, s) << "\n";
}

}  // namespace

CrosscheckCase crosscheck_test(const LitmusTest& test, const Bounds& bounds, const ProofBounds& proof_bounds) {
  CrosscheckCase c;
  c.source = print_litmus(test);
  std::ostringstream detail;
  ExploreResult op = explore(test, bounds);
  ExploreResult un = explore_unrestricted(test, bounds);
  ProofResult pr = proof_final_states(test, proof_bounds);
  c.bounded = op.bounded_incomplete || un.bounded_incomplete || pr.bounded_incomplete;
  c.violations = op.stats.monotonicity_violations + un.stats.monotonicity_violations;
  auto ops = states_of(op), uns = states_of(un);
  c.op_finals = ops.size();
  c.proof_finals = pr.finals.size();
  c.schedulers_agree = ops == uns;
  c.engines_agree = ops == pr.finals;
  if (!c.schedulers_agree) {
    detail << "promises-first vs unrestricted:\n";
    diff(test, ops, uns, "promises-first", "unrestricted", detail);
  }
  if (!c.engines_agree) {
    detail << "operational vs proof:\n";
    diff(test, ops, pr.finals, "operational", "proof", detail);
    for (const auto& s : ops)
      if (!pr.finals.count(s)) detail << "  trace for " << state_text(test, s) << ":\n" << trace_text(test, op.finals.at(s));
  }
  if (pr.witness) {
    std::string why;
    if (!revalidate(test, *pr.witness, &why, proof_bounds.calculus)) {
      c.witness_ok = false;
      detail << "proof witness does not re-check: " << why << "\n";
    }
  }
  for (const auto& [s, tr] : op.finals) {
    auto replayed = replay_trace(test, tr);
    if (!replayed || !(*replayed == s)) {
      c.traces_ok = false;
      detail << "trace does not replay: " << state_text(test, s) << "\n";
      continue;
    }
    try {
      auto outlines = outline_from_trace(test, tr, proof_bounds.calculus);
      std::vector<EventStructure> locals;
      for (const auto& o : outlines) {
        std::string why;
        if (!check_outline(test, o, &why, proof_bounds.calculus)) throw std::invalid_argument(why);
        locals.push_back(o.final());
      }
      auto w = timestamp_configuration(locals);
      if (!w) throw std::invalid_argument("no timestamp configuration");
      if (!final_states(test, w->config).count(s)) throw std::invalid_argument("configuration misses the state");
    } catch (const std::exception& e) {
      c.traces_ok = false;
      detail << "outline from trace for " << state_text(test, s) << ": " << e.what() << "\n";
    }
  }
  c.detail = detail.str();
  return c;
}

CrosscheckReport crosscheck(std::uint64_t seed, int count, const Shape& shape, const Bounds& bounds,
                            const ProofBounds& proof_bounds) {
  CrosscheckReport rep;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::vector<std::string> sources;
  for (int i = 0; i < count; ++i) sources.push_back(random_program(rng, shape, "random" + std::to_string(i)));
  rep.cases.resize(sources.size());
  Bounds b = bounds;
  b.parallel = false;
  ProofBounds pb = proof_bounds;
  pb.parallel = false;
  long long n = static_cast<long long>(sources.size());
#ifdef WMMR_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long i = 0; i < n; ++i) {
    LitmusTest t = parse_litmus(sources[static_cast<std::size_t>(i)]);
    rep.cases[static_cast<std::size_t>(i)] = crosscheck_test(t, b, pb);
  }
  for (const auto& c : rep.cases) {
    if (!c.engines_agree) ++rep.engine_mismatches;
    if (!c.schedulers_agree) ++rep.scheduler_mismatches;
    if (!c.traces_ok) ++rep.trace_failures;
    if (!c.witness_ok) ++rep.witness_failures;
    if (c.bounded) ++rep.bounded;
    rep.violations += c.violations;
  }
  return rep;
}

}  // namespace wmmr

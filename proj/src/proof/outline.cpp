#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_set>

#include "wmmr/litmus.hpp"
#include "wmmr/proof.hpp"

namespace wmmr {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Write: return "PR-Write";
    case Rule::WriteR: return "PR-WriteR";
    case Rule::Fence: return "PR-Fence";
    case Rule::ReadEx: return "PR-ReadEx";
    case Rule::ReadNew: return "PR-ReadNew";
    case Rule::Registers: return "PR-Registers";
    case Rule::Assume: return "PR-Assume";
  }
  return "?";
}

const EventStructure& ProofOutline::final() const {
  static const EventStructure ini = ini_structure();
  return steps.empty() ? ini : steps.back().post;
}

ProofBounds default_proof_bounds() {
  ProofBounds b;
  long long cap = default_max_states();
  if (cap > 0) {
    b.max_outlines = std::min<std::size_t>(b.max_outlines, static_cast<std::size_t>(cap));
    b.max_tuples = std::min<std::size_t>(b.max_tuples, static_cast<std::size_t>(cap));
  }
  return b;
}

namespace {

void collect_stores(const Stmt& s, std::vector<const StmtNode*>& out) {
  if (!s) return;
  switch (s->kind) {
    case StmtKind::Store: out.push_back(s.get()); break;
    case StmtKind::Seq:
    case StmtKind::Choice:
    case StmtKind::Iterate:
      collect_stores(s->first, out);
      collect_stores(s->second, out);
      break;
    default: break;
  }
}

// How many stores of `opt.promiser` could write opt.val to opt.loc.
std::map<ReadOption, int> store_capacity(const LitmusTest& test) {
  std::map<ReadOption, int> cap;
  auto universe = value_universe(test);
  for (const auto& th : test.threads) {
    std::vector<const StmtNode*> stores;
    collect_stores(th.body, stores);
    for (const StmtNode* s : stores) {
      if (s->rv.is_reg) {
        for (Value v : universe) ++cap[{th.tid, s->loc, v}];
      } else {
        ++cap[{th.tid, s->loc, s->rv.value}];
      }
    }
  }
  return cap;
}

}  // namespace

std::vector<ReadOption> read_menu(const LitmusTest& test, Tid tid) {
  std::vector<ReadOption> out;
  for (const auto& [opt, n] : store_capacity(test))
    if (opt.promiser != tid && n > 0) out.push_back(opt);
  return out;
}

namespace {

// Locations of read events not yet followed directly by a bar on their location.
struct Pending {
  int count = 0;
  LocSet locs = 0;
};

Pending pending_reads(const EventStructure& es) {
  std::vector<char> barred(static_cast<std::size_t>(es.size()), 0);
  for (EventId e = 0; e < es.size(); ++e) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (a.kind != Action::Kind::BarLoc) continue;
    for (EventId d : es.pred[static_cast<std::size_t>(e)]) {
      const Action& r = es.label[static_cast<std::size_t>(d)];
      if (r.is_read() && r.loc == a.loc) barred[static_cast<std::size_t>(d)] = 1;
    }
  }
  Pending p;
  for (EventId e = 0; e < es.size(); ++e) {
    const Action& a = es.label[static_cast<std::size_t>(e)];
    if (a.is_read() && !barred[static_cast<std::size_t>(e)]) {
      ++p.count;
      p.locs |= loc_bit(a.loc);
    }
  }
  return p;
}

class Deriver {
 public:
  Deriver(const LitmusTest& test, Tid tid, const std::vector<ReadOption>& menu, const ProofBounds& bounds)
      : test_(test), tid_(tid), code_(compile_thread(test, tid)), menu_(menu), bounds_(bounds) {
    capacity_ = store_capacity(test);
    std::size_t n = code_.nodes.size();
    max_loads_.assign(n, -1);
    loadable_.assign(n, 0);
    for (std::size_t pc = 0; pc < n; ++pc) loads_ahead(static_cast<int>(pc));
    for (const auto& th : test.threads) {
      if (th.tid == tid) continue;
      std::vector<const StmtNode*> stores;
      collect_stores(th.body, stores);
      max_chain_ += static_cast<int>(stores.size());
    }
  }

  OutlineSet run() {
    go(code_.entry, ini_structure());
    return std::move(out_);
  }

 private:
  int loads_ahead(int pc) {
    auto& m = max_loads_[static_cast<std::size_t>(pc)];
    if (m >= 0) return m;
    const CodeNode& n = code_.nodes[static_cast<std::size_t>(pc)];
    LocSet locs = 0;
    int best = 0;
    if (n.kind == CodeNode::Kind::Atomic) {
      best = loads_ahead(n.next);
      locs = loadable_[static_cast<std::size_t>(n.next)];
      if (n.stmt->kind == StmtKind::Load) {
        ++best;
        locs |= loc_bit(n.stmt->loc);
      }
    } else if (n.kind == CodeNode::Kind::Branch) {
      best = std::max(loads_ahead(n.next), loads_ahead(n.alt));
      locs = loadable_[static_cast<std::size_t>(n.next)] | loadable_[static_cast<std::size_t>(n.alt)];
    }
    loadable_[static_cast<std::size_t>(pc)] = locs;
    return m = best;
  }

  bool viable(int pc, const EventStructure& es) const {
    Pending p = pending_reads(es);
    if (p.count > max_loads_[static_cast<std::size_t>(pc)]) return false;
    if (p.locs & ~loadable_[static_cast<std::size_t>(pc)]) return false;
    std::map<ReadOption, int> used;
    for (const Action& a : es.label)
      if (a.is_read()) {
        ReadOption o{a.tid, a.loc, a.val};
        auto it = capacity_.find(o);
        if (it == capacity_.end() || ++used[o] > it->second) return false;
      }
    return true;
  }

  void go(int pc, const EventStructure& es) {
    if (stop_) return;
    if (!visited_.insert(std::to_string(pc) + "|" + es.key()).second) return;
    const CodeNode& n = code_.nodes[static_cast<std::size_t>(pc)];
    if (n.kind == CodeNode::Kind::End) {
      if (pending_reads(es).count != 0) return;
      if (!finals_.insert(es.key()).second) return;
      ProofOutline o;
      o.tid = tid_;
      o.steps = path_;
      out_.outlines.push_back(std::move(o));
      if (out_.outlines.size() >= bounds_.max_outlines) {
        out_.truncated = true;
        stop_ = true;
      }
      return;
    }
    if (n.kind == CodeNode::Kind::Branch) {
      go(n.next, es);
      go(n.alt, es);
      return;
    }
    for (auto& step : apply(n.stmt, es)) {
      if (!viable(n.next, step.post)) continue;
      EventStructure post = step.post;
      path_.push_back(std::move(step));
      go(n.next, post);
      path_.pop_back();
      if (stop_) return;
    }
  }

  std::vector<ProofStep> apply(const Stmt& s, const EventStructure& es) {
    std::vector<ProofStep> out;
    auto single = [&](Rule r, EventStructure post) {
      ProofStep st;
      st.stmt = s;
      st.rule = r;
      st.post = std::move(post);
      out.push_back(std::move(st));
    };
    switch (s->kind) {
      case StmtKind::Store:
        if (s->rv.is_reg)
          single(Rule::WriteR, plus_ff_reg(es, tid_, s->rv.reg, s->loc, register_value(es, s->rv.reg)));
        else
          single(Rule::Write, plus_ff(es, tid_, s->loc, s->rv.value));
        break;
      case StmtKind::Dmb: single(Rule::Fence, plus_fnc(es, tid_)); break;
      case StmtKind::Assign: single(Rule::Registers, plus_bar_exp(es, tid_, s->reg, s->expr)); break;
      case StmtKind::Asm:
        if (expr_value(es, s->expr) != 0) single(Rule::Assume, plus_tst(es, tid_, s->expr));
        break;
      case StmtKind::Load: load(s, es, out); break;
      default: throw std::logic_error("non-atomic statement in compiled code");
    }
    return out;
  }

  void load(const Stmt& s, const EventStructure& es, std::vector<ProofStep>& out) {
    LocId x = s->loc;
    Closure before = flow_closure(es);
    if (auto e = unique_last(es, before, Pattern::act(x))) {
      const Action& a = es.label[static_cast<std::size_t>(*e)];
      if (a.is_ini() || a.is_read() || (a.is_ff() && a.tid == tid_)) {
        ProofStep st;
        st.stmt = s;
        st.rule = Rule::ReadEx;
        st.from = *e;
        st.post = restrict(plus_bar_loc(es, tid_, s->reg, x), *e, x, tid_, bounds_.calculus.restrict_mode);
        out.push_back(std::move(st));
      }
    }
    LocSet blocked = pending_reads(es).locs;
    if (blocked & loc_bit(x)) return;
    std::vector<Action> chain;
    LocSet used = 0;
    std::function<void()> extend = [&]() {
      if (static_cast<int>(chain.size()) >= max_chain_) return;
      for (const ReadOption& o : menu_) {
        LocSet bit = loc_bit(o.loc);
        if ((used | blocked) & bit) continue;
        chain.push_back(prm_action(o.promiser, o.loc, o.val));
        if (o.loc == x) {
          ProofStep st;
          st.stmt = s;
          st.rule = Rule::ReadNew;
          st.chain = chain;
          st.post = read_new_post(es, chain, tid_, s->reg, x, bounds_.calculus);
          out.push_back(std::move(st));
        } else {
          used |= bit;
          extend();
          used &= ~bit;
        }
        chain.pop_back();
      }
    };
    extend();
  }

  const LitmusTest& test_;
  Tid tid_;
  ThreadCode code_;
  const std::vector<ReadOption>& menu_;
  ProofBounds bounds_;
  std::map<ReadOption, int> capacity_;
  std::vector<int> max_loads_;
  std::vector<LocSet> loadable_;
  int max_chain_ = 0;
  std::vector<ProofStep> path_;
  std::unordered_set<std::string> visited_;
  std::unordered_set<std::string> finals_;
  OutlineSet out_;
  bool stop_ = false;
};

}  // namespace

EventStructure read_new_post(const EventStructure& pre, const std::vector<Action>& chain, Tid tid, RegId reg, LocId x,
                             const Calculus& calculus) {
  EventStructure post = plus_bar_loc(append_read_chain(pre, chain, calculus.chains), tid, reg, x);
  if (calculus.chains == ChainMode::Restricted)
    for (std::size_t i = 0; i < chain.size(); ++i)
      post = restrict(post, pre.size() + static_cast<EventId>(i), chain[i].loc, tid, calculus.restrict_mode);
  return post;
}

OutlineSet derive_outlines(const LitmusTest& test, Tid tid, const std::vector<ReadOption>& menu,
                           const ProofBounds& bounds) {
  return Deriver(test, tid, menu, bounds).run();
}

// ----------------------------------------------------------- re-checking

namespace {

Timestamp added_ts(const EventStructure& pre, const EventStructure& post) {
  return post.size() > pre.size() ? post.label[static_cast<std::size_t>(pre.size())].ts : -1;
}

std::optional<EventStructure> rederive(const LitmusTest& test, Tid tid, const EventStructure& pre, const ProofStep& st,
                                       const Calculus& calculus, std::string& why) {
  const StmtNode& s = *st.stmt;
  Timestamp ts = added_ts(pre, st.post);
  auto expect = [&](StmtKind k) {
    if (s.kind != k) why = std::string(rule_name(st.rule)) + " applied to the wrong statement";
    return s.kind == k;
  };
  switch (st.rule) {
    case Rule::Write:
      if (!expect(StmtKind::Store) || s.rv.is_reg) return std::nullopt;
      return plus_ff(pre, tid, s.loc, s.rv.value, ts);
    case Rule::WriteR:
      if (!expect(StmtKind::Store) || !s.rv.is_reg) return std::nullopt;
      return plus_ff_reg(pre, tid, s.rv.reg, s.loc, register_value(pre, s.rv.reg), ts);
    case Rule::Fence:
      if (!expect(StmtKind::Dmb)) return std::nullopt;
      return plus_fnc(pre, tid);
    case Rule::Registers:
      if (!expect(StmtKind::Assign)) return std::nullopt;
      return plus_bar_exp(pre, tid, s.reg, s.expr);
    case Rule::Assume:
      if (!expect(StmtKind::Asm)) return std::nullopt;
      if (expr_value(pre, s.expr) == 0) {
        why = "assumption is false in the pre-assertion";
        return std::nullopt;
      }
      return plus_tst(pre, tid, s.expr);
    case Rule::ReadEx: {
      if (!expect(StmtKind::Load)) return std::nullopt;
      auto e = unique_last(pre, flow_closure(pre), Pattern::act(s.loc));
      if (!e || *e != st.from) {
        why = "read-from event is not the unique last event on " + test.locations[static_cast<std::size_t>(s.loc)];
        return std::nullopt;
      }
      const Action& a = pre.label[static_cast<std::size_t>(*e)];
      if (a.is_ff() && a.tid != tid) {
        why = "reads from another thread's fulfill";
        return std::nullopt;
      }
      return restrict(plus_bar_loc(pre, tid, s.reg, s.loc), *e, s.loc, tid, calculus.restrict_mode);
    }
    case Rule::ReadNew: {
      if (!expect(StmtKind::Load)) return std::nullopt;
      if (st.chain.empty() || st.chain.back().loc != s.loc) {
        why = "read chain does not end on the loaded location";
        return std::nullopt;
      }
      for (const Action& a : st.chain)
        if (!a.is_read() || a.tid == tid) {
          why = "read chain contains an event of the thread itself";
          return std::nullopt;
        }
      return read_new_post(pre, st.chain, tid, s.reg, s.loc, calculus);
    }
  }
  return std::nullopt;
}

}  // namespace

bool check_outline(const LitmusTest& test, const ProofOutline& outline, std::string* why, const Calculus& calculus) {
  auto fail = [&](const std::string& m) {
    if (why) *why = "thread " + std::to_string(outline.tid) + ": " + m;
    return false;
  };
  ThreadCode code = compile_thread(test, outline.tid);
  std::set<int> pcs{code.entry};
  EventStructure pre = ini_structure();
  for (std::size_t i = 0; i < outline.steps.size(); ++i) {
    const ProofStep& st = outline.steps[i];
    std::set<int> next;
    for (int pc : pcs)
      for (int n : code.frontier(pc)) {
        const CodeNode& node = code.nodes[static_cast<std::size_t>(n)];
        if (stmt_equal(node.stmt, st.stmt)) next.insert(node.next);
      }
    if (next.empty()) return fail("step " + std::to_string(i + 1) + " is not the next statement of the program");
    pcs = std::move(next);
    std::string reason;
    auto expected = rederive(test, outline.tid, pre, st, calculus, reason);
    if (!expected) return fail("step " + std::to_string(i + 1) + ": " + reason);
    if (expected->key() != st.post.key())
      return fail("step " + std::to_string(i + 1) + ": post-assertion differs from " + rule_name(st.rule));
    pre = st.post;
  }
  bool done = std::any_of(pcs.begin(), pcs.end(), [&](int pc) { return code.can_finish(pc); });
  if (!done) return fail("program not finished");
  return true;
}

std::string render_outline(const LitmusTest& test, const ProofOutline& outline) {
  std::ostringstream os;
  os << "thread " << outline.tid << ":\n";
  os << "  [ " << es_text(test, ini_structure()) << " ]\n";
  for (const auto& st : outline.steps) {
    std::string stmt = print_stmt(test, st.stmt);
    if (!stmt.empty() && stmt.back() == '\n') stmt.pop_back();
    os << "  " << stmt << "    -- " << rule_name(st.rule);
    if (st.rule == Rule::ReadNew) {
      os << " ";
      for (std::size_t i = 0; i < st.chain.size(); ++i) os << (i ? " -> " : "") << action_text(test, st.chain[i]);
    }
    os << "\n  [ " << es_text(test, st.post) << " ]\n";
  }
  return os.str();
}

}  // namespace wmmr

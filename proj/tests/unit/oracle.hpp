#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wmmr/ast.hpp"

// Brute-force final states of straight-line programs built from constant
// stores, loads and dmb. Every store is promised up front, so each candidate
// memory is a permutation of all store messages and the threads then run
// independently against it.
namespace oracle {

using wmmr::Value;

struct Ins {
  enum Kind { Load, Store, Dmb } kind;
  int loc = 0;
  Value val = 0;
  int reg = -1;
};

struct Msg {
  int tid, loc;
  Value val;
  bool operator<(const Msg& o) const {
    return tid != o.tid ? tid < o.tid : (loc != o.loc ? loc < o.loc : val < o.val);
  }
  bool operator==(const Msg& o) const { return tid == o.tid && loc == o.loc && val == o.val; }
};

using State = std::pair<std::vector<Value>, std::vector<Value>>;  // registers, memory

inline void flatten(const wmmr::Stmt& s, std::vector<Ins>& out) {
  using wmmr::StmtKind;
  switch (s->kind) {
    case StmtKind::Skip: return;
    case StmtKind::Seq:
      flatten(s->first, out);
      flatten(s->second, out);
      return;
    case StmtKind::Load: out.push_back({Ins::Load, s->loc, 0, s->reg}); return;
    case StmtKind::Store:
      if (s->rv.is_reg) break;
      out.push_back({Ins::Store, s->loc, s->rv.value, -1});
      return;
    case StmtKind::Dmb: out.push_back({Ins::Dmb, 0, 0, -1}); return;
    default: break;
  }
  throw std::invalid_argument("oracle handles constant stores, loads and dmb only");
}

struct Run {
  const std::vector<Ins>& code;
  const std::vector<Msg>& mem;  // index 0 is ini
  int tid;
  int locs;
  std::vector<std::vector<std::pair<int, Value>>> out;  // (reg, value) lists

  void go(std::size_t pc, std::vector<int> coh, int v_read, int v_wold, int v_wnew, std::vector<bool> open,
          std::vector<std::pair<int, Value>> regs) {
    if (pc == code.size()) {
      if (std::none_of(open.begin(), open.end(), [](bool b) { return b; })) out.push_back(regs);
      return;
    }
    const Ins& in = code[pc];
    int n = static_cast<int>(mem.size());
    if (in.kind == Ins::Dmb) {
      int v = std::max(v_read, v_wold);
      go(pc + 1, coh, v, v_wold, v, open, regs);
      return;
    }
    if (in.kind == Ins::Store) {
      for (int t = std::max(v_wnew, coh[in.loc]) + 1; t < n; ++t) {
        if (!open[t] || !(mem[t] == Msg{tid, in.loc, in.val})) continue;
        auto o = open;
        o[t] = false;
        auto c = coh;
        c[in.loc] = t;
        go(pc + 1, c, v_read, std::max(v_wold, t), v_wnew, o, regs);
      }
      return;
    }
    int bound = std::max(v_read, coh[in.loc]);
    std::vector<int> cands;
    int latest = 0;
    for (int t = 1; t <= std::min(bound, n - 1); ++t)
      if (mem[t].loc == in.loc) latest = t;
    cands.push_back(latest);
    for (int t = bound + 1; t < n; ++t)
      if (mem[t].loc == in.loc) cands.push_back(t);
    for (int t : cands) {
      int post = std::max(v_read, t);
      auto c = coh;
      c[in.loc] = std::max(c[in.loc], post);
      auto r = regs;
      r.push_back({in.reg, t == 0 ? 0 : mem[t].val});
      go(pc + 1, c, post, v_wold, v_wnew, open, r);
    }
  }
};

inline std::set<State> final_states(const wmmr::LitmusTest& test) {
  int locs = static_cast<int>(test.locations.size());
  std::vector<std::vector<Ins>> code;
  std::vector<Msg> msgs;
  for (const auto& th : test.threads) {
    code.emplace_back();
    flatten(th.body, code.back());
    for (const auto& in : code.back())
      if (in.kind == Ins::Store) msgs.push_back({th.tid, in.loc, in.val});
  }
  std::sort(msgs.begin(), msgs.end());
  std::set<State> result;
  do {
    std::vector<Msg> mem{{0, -1, 0}};
    mem.insert(mem.end(), msgs.begin(), msgs.end());
    std::vector<Value> memory(static_cast<std::size_t>(locs), 0);
    for (std::size_t t = 1; t < mem.size(); ++t) memory[static_cast<std::size_t>(mem[t].loc)] = mem[t].val;
    // product of the per-thread outcomes
    std::vector<std::vector<Value>> partial{std::vector<Value>(test.registers.size(), 0)};
    for (std::size_t i = 0; i < code.size(); ++i) {
      int tid = static_cast<int>(i + 1);
      std::vector<bool> open(mem.size(), false);
      for (std::size_t t = 1; t < mem.size(); ++t) open[t] = mem[t].tid == tid;
      Run r{code[i], mem, tid, locs, {}};
      r.go(0, std::vector<int>(static_cast<std::size_t>(locs), 0), 0, 0, 0, open, {});
      std::vector<std::vector<Value>> next;
      for (const auto& p : partial)
        for (const auto& regs : r.out) {
          auto q = p;
          for (auto [reg, v] : regs) q[static_cast<std::size_t>(reg)] = v;
          next.push_back(q);
        }
      partial = std::move(next);
    }
    for (auto& regs : partial) result.insert({regs, memory});
  } while (std::next_permutation(msgs.begin(), msgs.end()));
  return result;
}

}  // namespace oracle

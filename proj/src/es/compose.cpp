#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

#include "wmmr/event_structure.hpp"
#include "wmmr/litmus.hpp"

namespace wmmr {

namespace {

Action tuple_label(const std::vector<EventStructure>& locals, const std::vector<EventId>& t) {
  const Action* only = nullptr;
  int used = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == kStar) continue;
    const Action& a = locals[i].label[static_cast<std::size_t>(t[i])];
    if (a.is_ini()) return a;
    if (a.is_ff()) return a;  // synchronised events keep the fulfill label
    only = &a;
    ++used;
  }
  return *only;
}

}  // namespace

EventStructure compose_tuples(const std::vector<EventStructure>& locals, const std::vector<std::vector<EventId>>& tuples) {
  EventStructure es;
  std::size_t n = locals.size();
  // slot_index[i][local event] -> composite events using it in slot i
  std::vector<std::vector<std::vector<EventId>>> users(n);
  for (std::size_t i = 0; i < n; ++i) users[i].resize(static_cast<std::size_t>(locals[i].size()));
  for (std::size_t c = 0; c < tuples.size(); ++c) {
    es.label.push_back(tuple_label(locals, tuples[c]));
    es.tuple.push_back(tuples[c]);
    for (std::size_t i = 0; i < n; ++i)
      if (tuples[c][i] != kStar) users[i][static_cast<std::size_t>(tuples[c][i])].push_back(static_cast<EventId>(c));
  }
  es.pred.assign(tuples.size(), {});
  for (std::size_t c = 0; c < tuples.size(); ++c) {
    std::set<EventId> preds;
    for (std::size_t i = 0; i < n; ++i) {
      EventId e = tuples[c][i];
      if (e == kStar) continue;
      for (EventId p : locals[i].pred[static_cast<std::size_t>(e)])
        for (EventId d : users[i][static_cast<std::size_t>(p)]) preds.insert(d);
    }
    es.pred[c].assign(preds.begin(), preds.end());
  }
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [k, L] : locals[i].lambda)
      for (EventId d : users[i][static_cast<std::size_t>(k.first)])
        for (EventId f : users[i][static_cast<std::size_t>(k.second)]) es.lambda[{d, f}] |= L;
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& u : users[i])
      for (std::size_t a = 0; a < u.size(); ++a)
        for (std::size_t b = a + 1; b < u.size(); ++b) es.conflict.emplace_back(std::min(u[a], u[b]), std::max(u[a], u[b]));
  std::sort(es.conflict.begin(), es.conflict.end());
  es.conflict.erase(std::unique(es.conflict.begin(), es.conflict.end()), es.conflict.end());
  return es;
}

EventStructure parallel_compose(const std::vector<EventStructure>& locals) {
  std::size_t n = locals.size();
  std::vector<std::vector<EventId>> tuples;
  std::vector<EventId> ini(n);
  for (std::size_t i = 0; i < n; ++i) ini[i] = locals[i].ini();
  tuples.push_back(ini);
  // Synchronising events: one fulfill plus complementary reads in other slots.
  for (std::size_t i = 0; i < n; ++i) {
    for (EventId f = 0; f < locals[i].size(); ++f) {
      const Action& a = locals[i].label[static_cast<std::size_t>(f)];
      if (!a.is_ff()) continue;
      std::vector<std::vector<EventId>> options(n);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          options[j] = {f};
          continue;
        }
        options[j] = {kStar};
        for (EventId r = 0; r < locals[j].size(); ++r)
          if (locals[j].label[static_cast<std::size_t>(r)].complements(a)) options[j].push_back(r);
      }
      std::vector<std::size_t> pick(n, 0);
      while (true) {
        std::vector<EventId> t(n);
        int partners = 0;
        for (std::size_t j = 0; j < n; ++j) {
          t[j] = options[j][pick[j]];
          if (j != i && t[j] != kStar) ++partners;
        }
        if (partners > 0) tuples.push_back(t);
        std::size_t j = 0;
        for (; j < n; ++j) {
          if (++pick[j] < options[j].size()) break;
          pick[j] = 0;
        }
        if (j == n) break;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (EventId e = 0; e < locals[i].size(); ++e) {
      if (e == ini[i]) continue;
      std::vector<EventId> t(n, kStar);
      t[i] = e;
      tuples.push_back(t);
    }
  return compose_tuples(locals, tuples);
}

namespace {

bool acyclic_on(const EventStructure& es, const std::vector<char>& in) {
  // Kahn's algorithm on the induced subgraph.
  std::size_t n = static_cast<std::size_t>(es.size());
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<EventId>> succ(n);
  std::size_t members = 0;
  for (std::size_t e = 0; e < n; ++e) {
    if (!in[e]) continue;
    ++members;
    for (EventId d : es.pred[e])
      if (in[static_cast<std::size_t>(d)]) {
        ++indeg[e];
        succ[static_cast<std::size_t>(d)].push_back(static_cast<EventId>(e));
      }
  }
  std::vector<EventId> ready;
  for (std::size_t e = 0; e < n; ++e)
    if (in[e] && indeg[e] == 0) ready.push_back(static_cast<EventId>(e));
  std::size_t seen = 0;
  while (!ready.empty()) {
    EventId e = ready.back();
    ready.pop_back();
    ++seen;
    for (EventId s : succ[static_cast<std::size_t>(e)])
      if (--indeg[static_cast<std::size_t>(s)] == 0) ready.push_back(s);
  }
  return seen == members;
}

}  // namespace

bool is_configuration(const EventStructure& es, const std::vector<EventId>& C) {
  std::vector<char> in(static_cast<std::size_t>(es.size()), 0);
  for (EventId e : C) in[static_cast<std::size_t>(e)] = 1;
  if (!acyclic_on(es, in)) return false;
  std::set<std::pair<EventId, EventId>> conflicts(es.conflict.begin(), es.conflict.end());
  auto conflict = [&](EventId a, EventId b) { return conflicts.count({std::min(a, b), std::max(a, b)}) > 0; };
  for (EventId a : C)
    for (EventId b : C)
      if (a < b && conflict(a, b)) return false;
  for (EventId e : C)
    for (EventId d : es.pred[static_cast<std::size_t>(e)]) {
      if (in[static_cast<std::size_t>(d)]) continue;
      bool covered = false;
      for (EventId f : C)
        if (conflict(d, f) && es.flows(f, e)) {
          covered = true;
          break;
        }
      if (!covered) return false;
    }
  return true;
}

EventStructure sub_structure(const EventStructure& es, const std::vector<EventId>& C) {
  std::vector<EventId> index(static_cast<std::size_t>(es.size()), -1);
  for (std::size_t i = 0; i < C.size(); ++i) index[static_cast<std::size_t>(C[i])] = static_cast<EventId>(i);
  EventStructure out;
  for (EventId e : C) {
    std::vector<EventId> preds;
    for (EventId d : es.pred[static_cast<std::size_t>(e)])
      if (index[static_cast<std::size_t>(d)] >= 0) preds.push_back(index[static_cast<std::size_t>(d)]);
    out.add(es.label[static_cast<std::size_t>(e)], preds);
    if (es.is_composite()) out.tuple.push_back(es.tuple[static_cast<std::size_t>(e)]);
  }
  for (const auto& [k, L] : es.lambda) {
    EventId a = index[static_cast<std::size_t>(k.first)], b = index[static_cast<std::size_t>(k.second)];
    if (a >= 0 && b >= 0) out.lambda[{a, b}] = L;
  }
  for (const auto& [a, b] : es.conflict) {
    EventId x = index[static_cast<std::size_t>(a)], y = index[static_cast<std::size_t>(b)];
    if (x >= 0 && y >= 0) out.conflict.emplace_back(std::min(x, y), std::max(x, y));
  }
  return out;
}

// ------------------------------------------------------------ linearize

namespace {

struct LinProblem {
  std::vector<EventId> mem;            // memory events
  std::vector<std::uint64_t> need;     // memory predecessors (flow+), as masks over mem
  std::vector<LocSet> loc;             // location bits; ini has every bit
  struct Rule {
    int d, f;
    LocSet L;
  };
  std::vector<Rule> rules;

  explicit LinProblem(const EventStructure& es) {
    std::vector<int> pos(static_cast<std::size_t>(es.size()), -1);
    for (EventId e = 0; e < es.size(); ++e)
      if (es.label[static_cast<std::size_t>(e)].is_memory()) {
        pos[static_cast<std::size_t>(e)] = static_cast<int>(mem.size());
        mem.push_back(e);
      }
    if (mem.size() > 64) throw std::length_error("too many memory events to linearize");
    Closure before = flow_closure(es);
    for (EventId e : mem) {
      std::uint64_t m = 0;
      for (std::size_t i = 0; i < mem.size(); ++i)
        if (before[static_cast<std::size_t>(e)].test(static_cast<std::size_t>(mem[i]))) m |= std::uint64_t{1} << i;
      need.push_back(m);
      const Action& a = es.label[static_cast<std::size_t>(e)];
      loc.push_back(a.is_ini() ? ~LocSet{0} : loc_bit(a.loc));
    }
    for (const auto& [k, L] : es.lambda) {
      int d = pos[static_cast<std::size_t>(k.first)], f = pos[static_cast<std::size_t>(k.second)];
      if (d >= 0 && f >= 0 && L) rules.push_back({d, f, L});
    }
  }

  bool can_place(std::uint64_t placed, int m) const {
    if (need[static_cast<std::size_t>(m)] & ~placed) return false;
    for (const auto& r : rules) {
      if (r.f == m) continue;
      if ((placed >> r.d & 1u) && !(placed >> r.f & 1u) && (r.L & loc[static_cast<std::size_t>(m)])) return false;
    }
    return true;
  }
};

}  // namespace

std::optional<std::vector<EventId>> linearize(const EventStructure& es) {
  LinProblem p(es);
  std::size_t n = p.mem.size();
  std::uint64_t full = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  std::unordered_set<std::uint64_t> dead;
  std::vector<int> order;
  std::function<bool(std::uint64_t)> go = [&](std::uint64_t placed) {
    if (placed == full) return true;
    if (dead.count(placed)) return false;
    for (std::size_t m = 0; m < n; ++m) {
      if (placed >> m & 1u) continue;
      if (!p.can_place(placed, static_cast<int>(m))) continue;
      order.push_back(static_cast<int>(m));
      if (go(placed | std::uint64_t{1} << m)) return true;
      order.pop_back();
    }
    dead.insert(placed);
    return false;
  };
  if (!go(0)) return std::nullopt;
  std::vector<EventId> out;
  for (int m : order) out.push_back(p.mem[static_cast<std::size_t>(m)]);
  return out;
}

std::vector<std::vector<EventId>> all_linearizations(const EventStructure& es, std::size_t cap) {
  LinProblem p(es);
  std::size_t n = p.mem.size();
  std::vector<std::vector<EventId>> out;
  std::vector<int> order;
  std::unordered_set<std::uint64_t> dead;
  std::function<bool(std::uint64_t)> go = [&](std::uint64_t placed) {
    if (order.size() == n) {
      std::vector<EventId> o;
      for (int m : order) o.push_back(p.mem[static_cast<std::size_t>(m)]);
      out.push_back(std::move(o));
      return true;
    }
    if (dead.count(placed)) return false;
    bool any = false;
    for (std::size_t m = 0; m < n && out.size() < cap; ++m) {
      if (placed >> m & 1u) continue;
      if (!p.can_place(placed, static_cast<int>(m))) continue;
      order.push_back(static_cast<int>(m));
      any |= go(placed | std::uint64_t{1} << m);
      order.pop_back();
    }
    if (!any) dead.insert(placed);
    return any;
  };
  go(0);
  return out;
}

// ------------------------------------------------- interference freedom

void for_each_interference_free(const std::vector<EventStructure>& locals,
                                const std::function<bool(const LocalWitness&)>& visit) {
  std::size_t n = locals.size();
  struct Read {
    std::size_t thread;
    EventId ev;
    std::vector<EventId> partners;  // fulfills in the promising thread's slot
    std::size_t slot;
  };
  std::vector<Read> reads;
  for (std::size_t i = 0; i < n; ++i)
    for (EventId r = 0; r < locals[i].size(); ++r) {
      const Action& a = locals[i].label[static_cast<std::size_t>(r)];
      if (!a.is_read()) continue;
      Read rd{i, r, {}, static_cast<std::size_t>(a.tid - 1)};
      if (a.tid >= 1 && rd.slot < n && rd.slot != i)
        for (EventId f = 0; f < locals[rd.slot].size(); ++f)
          if (locals[rd.slot].label[static_cast<std::size_t>(f)].complements(a)) rd.partners.push_back(f);
      if (rd.partners.empty()) return;  // an unsynchronisable read
      reads.push_back(std::move(rd));
    }
  // taken[slot][fulfill] -> mask of reader threads already paired with it
  std::vector<std::vector<std::uint64_t>> taken(n);
  for (std::size_t i = 0; i < n; ++i) taken[i].assign(static_cast<std::size_t>(locals[i].size()), 0);
  std::vector<EventId> choice(reads.size(), -1);
  bool stop = false;

  auto leaf = [&]() {
    std::vector<std::vector<EventId>> tuples;
    std::vector<EventId> ini(n);
    for (std::size_t i = 0; i < n; ++i) ini[i] = locals[i].ini();
    tuples.push_back(ini);
    std::map<std::pair<std::size_t, EventId>, std::size_t> ff_tuple;
    for (std::size_t i = 0; i < n; ++i)
      for (EventId e = 0; e < locals[i].size(); ++e) {
        const Action& a = locals[i].label[static_cast<std::size_t>(e)];
        if (a.is_ini() || a.is_read()) continue;
        std::vector<EventId> t(n, kStar);
        t[i] = e;
        if (a.is_ff()) ff_tuple[{i, e}] = tuples.size();
        tuples.push_back(t);
      }
    for (std::size_t k = 0; k < reads.size(); ++k)
      tuples[ff_tuple.at({reads[k].slot, choice[k]})][reads[k].thread] = reads[k].ev;
    LocalWitness w;
    w.config = compose_tuples(locals, tuples);
    std::vector<char> all(static_cast<std::size_t>(w.config.size()), 1);
    if (!acyclic_on(w.config, all)) return;
    auto order = linearize(w.config);
    if (!order) return;
    w.tuples = std::move(tuples);
    w.order = std::move(*order);
    if (!visit(w)) stop = true;
  };

  std::function<void(std::size_t)> go = [&](std::size_t k) {
    if (stop) return;
    if (k == reads.size()) {
      leaf();
      return;
    }
    const Read& rd = reads[k];
    for (EventId f : rd.partners) {
      auto& mask = taken[rd.slot][static_cast<std::size_t>(f)];
      std::uint64_t bit = std::uint64_t{1} << rd.thread;
      if (mask & bit) continue;
      mask |= bit;
      choice[k] = f;
      go(k + 1);
      mask &= ~bit;
      if (stop) return;
    }
  };
  go(0);
}

std::optional<LocalWitness> interference_free_witness(const std::vector<EventStructure>& locals) {
  std::optional<LocalWitness> out;
  for_each_interference_free(locals, [&](const LocalWitness& w) {
    out = w;
    return false;
  });
  return out;
}

std::optional<InterferenceFree> find_interference_free(const EventStructure& composition,
                                                       const std::vector<EventStructure>& locals) {
  auto w = interference_free_witness(locals);
  if (!w) return std::nullopt;
  std::map<std::vector<EventId>, EventId> id;
  for (EventId c = 0; c < composition.size(); ++c) id[composition.tuple[static_cast<std::size_t>(c)]] = c;
  InterferenceFree out;
  for (const auto& t : w->tuples) out.config.push_back(id.at(t));
  for (EventId e : w->order) out.order.push_back(id.at(w->tuples[static_cast<std::size_t>(e)]));
  std::sort(out.config.begin(), out.config.end());
  return out;
}

bool check_interference_free(const EventStructure& composition, const std::vector<EventStructure>& locals,
                             const InterferenceFree& w, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (!is_configuration(composition, w.config)) return fail("not a configuration");
  std::set<EventId> C(w.config.begin(), w.config.end());
  // thread-covering
  for (std::size_t i = 0; i < locals.size(); ++i) {
    std::set<EventId> proj;
    for (EventId c : C) {
      EventId e = composition.tuple[static_cast<std::size_t>(c)][i];
      if (e != kStar) proj.insert(e);
    }
    if (static_cast<int>(proj.size()) != locals[i].size()) return fail("not thread-covering");
  }
  // no unsynchronised reads
  for (EventId c : C) {
    const auto& t = composition.tuple[static_cast<std::size_t>(c)];
    int used = 0;
    bool read = false;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] != kStar) {
        ++used;
        read = locals[i].label[static_cast<std::size_t>(t[i])].is_read();
      }
    if (used == 1 && read) return fail("unsynchronised read");
  }
  // the order covers exactly the memory events of C
  std::set<EventId> mem;
  for (EventId c : C)
    if (composition.label[static_cast<std::size_t>(c)].is_memory()) mem.insert(c);
  std::set<EventId> ord(w.order.begin(), w.order.end());
  if (ord != mem || ord.size() != w.order.size()) return fail("order is not a total order on memory events");
  std::map<EventId, std::size_t> rank;
  for (std::size_t i = 0; i < w.order.size(); ++i) rank[w.order[i]] = i;
  // flow within C, transitively, is contained in the order
  EventStructure sub = sub_structure(composition, w.config);
  Closure before = flow_closure(sub);
  for (std::size_t a = 0; a < w.config.size(); ++a)
    for (std::size_t b = 0; b < w.config.size(); ++b) {
      EventId ca = w.config[a], cb = w.config[b];
      if (!mem.count(ca) || !mem.count(cb) || !before[b].test(a)) continue;
      if (rank[ca] >= rank[cb]) return fail("order does not extend flow");
    }
  // restrictions: d ~L~> f and d < e < f means e is not on L
  for (const auto& [k, L] : composition.lambda) {
    if (!C.count(k.first) || !C.count(k.second) || !mem.count(k.first) || !mem.count(k.second)) continue;
    std::size_t lo = rank[k.first], hi = rank[k.second];
    for (std::size_t r = lo + 1; r < hi; ++r) {
      const Action& e = composition.label[static_cast<std::size_t>(w.order[r])];
      LocSet bits = e.is_ini() ? ~LocSet{0} : loc_bit(e.loc);
      if (bits & L) return fail("restriction violated by the order");
    }
  }
  return true;
}

// --------------------------------------------------------------- output

std::string to_dot(const LitmusTest& test, const EventStructure& es, const std::vector<EventId>& highlight) {
  std::set<EventId> hl(highlight.begin(), highlight.end());
  std::ostringstream os;
  os << "digraph es {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n";
  for (EventId e = 0; e < es.size(); ++e) {
    os << "  e" << e << " [label=\"";
    if (es.is_composite()) {
      os << "(";
      const auto& t = es.tuple[static_cast<std::size_t>(e)];
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) os << ",";
        if (t[i] == kStar) os << "*";
        else os << t[i];
      }
      os << ") ";
    }
    os << action_text(test, es.label[static_cast<std::size_t>(e)]) << "\"";
    if (hl.count(e)) os << ", style=filled, fillcolor=lightblue";
    os << "];\n";
  }
  for (EventId e = 0; e < es.size(); ++e)
    for (EventId d : es.pred[static_cast<std::size_t>(e)]) {
      os << "  e" << d << " -> e" << e;
      LocSet L = es.restriction(d, e);
      if (L) {
        os << " [color=red, label=\"{";
        bool first = true;
        for (std::size_t x = 0; x < test.locations.size(); ++x)
          if (L >> x & 1u) {
            os << (first ? "" : ",") << test.locations[x];
            first = false;
          }
        os << "}\"]";
      }
      os << ";\n";
    }
  // restrictions between events that are not directly flow-related
  for (const auto& [k, L] : es.lambda) {
    if (es.flows(k.first, k.second)) continue;
    os << "  e" << k.first << " -> e" << k.second << " [style=dotted, color=red, label=\"{";
    bool first = true;
    for (std::size_t x = 0; x < test.locations.size(); ++x)
      if (L >> x & 1u) {
        os << (first ? "" : ",") << test.locations[x];
        first = false;
      }
    os << "}\"];\n";
  }
  for (const auto& [a, b] : es.conflict)
    os << "  e" << a << " -> e" << b << " [dir=none, style=dashed, color=gray];\n";
  os << "}\n";
  return os.str();
}

std::string es_text(const LitmusTest& test, const EventStructure& es) {
  auto name = [&](EventId e) { return "e" + std::to_string(e) + ":" + action_text(test, es.label[static_cast<std::size_t>(e)]); };
  auto locs = [&](LocSet L) {
    std::string s = "{";
    for (std::size_t x = 0; x < test.locations.size(); ++x)
      if (L >> x & 1u) s += (s.size() > 1 ? "," : "") + test.locations[x];
    return s + "}";
  };
  std::vector<std::string> parts;
  for (EventId e = 0; e < es.size(); ++e) {
    if (es.pred[static_cast<std::size_t>(e)].empty() && !es.label[static_cast<std::size_t>(e)].is_ini()) parts.push_back(name(e));
    for (EventId d : es.pred[static_cast<std::size_t>(e)]) {
      LocSet L = es.restriction(d, e);
      parts.push_back(name(d) + (L ? " -" + locs(L) + "-> " : " -> ") + name(e));
    }
  }
  for (const auto& [k, L] : es.lambda)
    if (!es.flows(k.first, k.second)) parts.push_back(name(k.first) + " ~" + locs(L) + "~ " + name(k.second));
  if (parts.empty()) return name(0);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
  return out;
}

}  // namespace wmmr

#pragma once

// Breadth-first state-space exploration and the checks run over the
// resulting transition systems.

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "nacforge/encoder.hpp"
#include "nacforge/engine.hpp"
#include "nacforge/iso.hpp"
#include "nacforge/morphism.hpp"

namespace nacforge {

struct Transition {
  std::size_t from = 0;
  std::string rule;    // the rule that fired
  std::string family;  // the rule's family (its source rule after encoding)
  std::string digest;  // the match, for telling parallel transitions apart
  std::size_t to = 0;
};

template <class State>
struct BasicLts {
  std::vector<State> states;
  std::vector<std::string> keys;
  std::vector<std::size_t> depth;
  std::vector<bool> expanded;
  std::size_t initial = 0;
  std::vector<Transition> transitions;
  bool bound_reached = false;
  std::unordered_map<std::string, std::size_t> index;  // key → state

  std::optional<std::size_t> find(const std::string& key) const {
    auto it = index.find(key);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

using Lts = BasicLts<Graph>;

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

inline std::string state_key(const Graph& g, bool safe) { return safe ? safe_key(g) : canonical_key(g); }

// Worker count from NACFORGE_WORKERS, at least one.
inline unsigned default_workers() {
  if (const char* s = std::getenv("NACFORGE_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
  }
  return 1;
}

namespace detail {

// Runs f(i) for i in [0, n) on up to `workers` threads.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  for (unsigned t = 0; t < w; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += w) f(i);
    });
  for (std::thread& th : pool) th.join();
}

}  // namespace detail

struct ExploreOptions {
  std::size_t max_steps = kUnbounded;
  unsigned workers = 0;  // 0: take NACFORGE_WORKERS
  bool check_nacs = true;
};

// A successor produced while expanding a state.
template <class State>
struct Successor {
  State after;
  std::string rule, family, digest;
};

namespace detail {

// Level-synchronous breadth-first search. Successors of a level are
// computed in parallel and inserted in a fixed order afterwards, so the
// result does not depend on the number of workers.
template <class State, class KeyFn, class SuccFn>
BasicLts<State> bfs(State start, KeyFn key_of, SuccFn successors, const ExploreOptions& opt) {
  BasicLts<State> lts;
  auto add_state = [&](State s, std::size_t depth) {
    std::string key = key_of(s);
    auto [it, fresh] = lts.index.emplace(key, lts.states.size());
    if (fresh) {
      lts.states.push_back(std::move(s));
      lts.keys.push_back(std::move(key));
      lts.depth.push_back(depth);
      lts.expanded.push_back(false);
    }
    return it->second;
  };
  lts.initial = add_state(std::move(start), 0);
  std::vector<std::size_t> level{lts.initial};
  const unsigned workers = opt.workers ? opt.workers : default_workers();
  // Successors are computed a chunk at a time so a level's worth of new
  // graphs never sits in memory at once.
  const std::size_t chunk = 64 * static_cast<std::size_t>(workers);
  for (std::size_t depth = 0; !level.empty(); ++depth) {
    if (depth >= opt.max_steps) {
      // Only whether the bound cut something off matters here.
      for (std::size_t i = 0; i < level.size() && !lts.bound_reached; ++i)
        lts.bound_reached = !successors(lts.states[level[i]], depth).empty();
      break;
    }
    std::vector<std::size_t> next;
    for (std::size_t lo = 0; lo < level.size(); lo += chunk) {
      const std::size_t hi = std::min(level.size(), lo + chunk);
      std::vector<std::vector<Successor<State>>> succ(hi - lo);
      detail::parallel_for(hi - lo, workers,
                           [&](std::size_t i) { succ[i] = successors(lts.states[level[lo + i]], depth); });
      for (std::size_t i = 0; i < succ.size(); ++i) {
        const std::size_t from = level[lo + i];
        lts.expanded[from] = true;
        for (Successor<State>& e : succ[i]) {
          std::size_t before = lts.states.size();
          std::size_t to = add_state(std::move(e.after), depth + 1);
          if (lts.states.size() > before) next.push_back(to);
          lts.transitions.push_back({from, std::move(e.rule), std::move(e.family), std::move(e.digest), to});
        }
      }
    }
    level = std::move(next);
  }
  return lts;
}

}  // namespace detail

inline Lts explore(const ConditionalGrammar& g, const ExploreOptions& opt = {}) {
  auto successors = [&](const Graph& s, std::size_t depth) {
    std::vector<Successor<Graph>> out;
    for (Enabled& e : enabled_steps(g, s, depth, opt.check_nacs)) {
      const Rule& r = g.rules[e.rule];
      std::string digest = match_digest(r.lhs, e.step.before, e.step.match);
      out.push_back({std::move(e.step.after), r.name, r.family_name(), std::move(digest)});
    }
    return out;
  };
  return detail::bfs(g.start, [&](const Graph& s) { return state_key(s, g.safe); }, successors, opt);
}

// ---------------------------------------------------------------------------
// Checks

struct InvariantCheck {
  std::size_t states = 0;
  std::vector<std::pair<std::size_t, InvariantViolation>> violations;
  bool ok() const { return violations.empty(); }
};

inline InvariantCheck check_invariant_reachable(const Lts& lts, const InvariantFormula& phi) {
  InvariantCheck out;
  out.states = lts.states.size();
  for (std::size_t s = 0; s < lts.states.size(); ++s)
    for (InvariantViolation& v : eval_invariant(lts.states[s], phi).violations) out.violations.emplace_back(s, v);
  return out;
}

struct RedundancyCheck {
  std::size_t pairs = 0;  // (state, rule, match) triples examined
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Every constraint of every rule holds at every match in every state.
inline RedundancyCheck check_nac_redundancy(const ConditionalGrammar& g, const Lts& lts) {
  RedundancyCheck out;
  for (std::size_t s = 0; s < lts.states.size(); ++s)
    for (const Rule& r : g.rules)
      for (const Morphism& m : find_matches(r, lts.states[s])) {
        ++out.pairs;
        if (auto bad = violated_constraint(r, m, lts.states[s]))
          out.violations.push_back("state " + std::to_string(s) + ": " + r.name + " at " +
                                   match_digest(r.lhs, lts.states[s], m) + " violates " + *bad);
      }
  return out;
}

struct ReflectionCheck {
  std::size_t transitions = 0;
  std::vector<std::string> unmatched;
  bool ok() const { return unmatched.empty(); }
};

namespace detail {

// Match pairs restricted to items typed over the original type graph.
inline std::set<std::string> visible_pairs(const Graph& lhs, const Graph& host, const Morphism& m,
                                           const EnrichedTypeGraph& etg) {
  std::set<std::string> out;
  for (Index i = 0; i < m.nodes.size(); ++i)
    if (lhs.node(i).type < etg.in_tg.nodes.size())
      out.insert("n:" + etg.tg_bar.node(lhs.node(i).type).name + "->" + host.node(m.nodes[i]).name);
  for (Index i = 0; i < m.edges.size(); ++i)
    if (lhs.edge(i).type < etg.in_tg.edges.size())
      out.insert("e:" + etg.tg_bar.edge(lhs.edge(i).type).name + "->" + host.edge(m.edges[i]).name);
  return out;
}

}  // namespace detail

// Every transition G -(p,m)-> H of the source grammar has a counterpart in
// the enriched grammar from the closure of G, taken by a member of p's
// family whose match agrees with m, leading to a graph that restricts to H.
inline ReflectionCheck check_reflection(const ConditionalGrammar& cg, const Lts& lts, const EnrichedGrammar& ecg) {
  ReflectionCheck out;
  std::map<std::size_t, std::vector<Enabled>> source_steps, image_steps;
  for (const Transition& t : lts.transitions) {
    ++out.transitions;
    const Graph& g = lts.states[t.from];
    const Graph& h = lts.states[t.to];
    auto src = source_steps.find(t.from);
    if (src == source_steps.end()) src = source_steps.emplace(t.from, enabled_steps(cg, g, 0)).first;
    auto img = image_steps.find(t.from);
    if (img == image_steps.end())
      img = image_steps.emplace(t.from, enabled_steps(ecg.grammar, invariant_closure(g, ecg.etg), 0)).first;
    // The source match as (type, host item) pairs; closure keeps host names.
    std::set<std::string> want;
    for (const Enabled& e : src->second) {
      const Rule& p = cg.rules[e.rule];
      if (p.name == t.rule && match_digest(p.lhs, g, e.step.match) == t.digest) {
        want = detail::visible_pairs(p.lhs, g, e.step.match, ecg.etg);
        break;
      }
    }
    bool found = false;
    for (const Enabled& e : img->second) {
      const Rule& q = ecg.grammar.rules[e.rule];
      if (q.family_name() != t.rule) continue;
      std::set<std::string> got = detail::visible_pairs(q.lhs, e.step.before, e.step.match, ecg.etg);
      if (!std::includes(got.begin(), got.end(), want.begin(), want.end())) continue;
      if (state_key(restrict_to_tg(e.step.after, ecg.etg), cg.safe) == state_key(h, cg.safe)) {
        found = true;
        break;
      }
    }
    if (!found)
      out.unmatched.push_back("state " + std::to_string(t.from) + " -" + t.rule + "[" + t.digest + "]-> state " +
                              std::to_string(t.to));
  }
  return out;
}

// Label-preserving correspondence between two transition systems.
struct EquivCheck {
  bool functional_forth = true;    // each mapped transition exists in the target
  bool functional_back = true;     // each target move out of a mapped state is matched
  bool fixpoint_bisimilar = true;  // greatest bisimulation relates the initial states
  std::size_t states_a = 0, transitions_a = 0, states_b = 0, transitions_b = 0;
  std::vector<std::string> problems;
  std::vector<std::string> counterexample;  // label path to a distinguishing state
  bool ok() const { return functional_forth && functional_back && fixpoint_bisimilar; }
};

namespace detail {

// Greatest bisimulation between a and b restricted to the pairs reachable
// from the initial pair by moves with equal labels; the restriction is
// exact because that set contains every pair a step can lead to. Frontier
// states (not expanded) are related to everything.
struct Bisimulation {
  std::unordered_map<std::uint64_t, bool> alive;  // candidate pair → still related
  std::size_t b_states = 0;

  std::uint64_t key(std::size_t x, std::size_t y) const { return static_cast<std::uint64_t>(x) * b_states + y; }
  bool related(std::size_t x, std::size_t y) const {
    auto it = alive.find(key(x, y));
    return it != alive.end() && it->second;
  }
};

template <class A, class B>
Bisimulation greatest_bisimulation(const BasicLts<A>& a, const BasicLts<B>& b,
                                   const std::function<std::string(const Transition&)>& la,
                                   const std::function<std::string(const Transition&)>& lb) {
  // Distinct (label, target) moves per state, labels interned.
  std::map<std::string, int> label_ids;
  auto intern = [&](const std::string& l) { return label_ids.emplace(l, static_cast<int>(label_ids.size())).first->second; };
  using Moves = std::vector<std::vector<std::pair<int, std::size_t>>>;
  auto moves_of = [&](const auto& lts, const auto& label) {
    Moves m(lts.states.size());
    for (const Transition& t : lts.transitions) m[t.from].emplace_back(intern(label(t)), t.to);
    for (auto& v : m) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return m;
  };
  Moves ma = moves_of(a, la), mb = moves_of(b, lb);

  Bisimulation out;
  out.b_states = b.states.size();
  struct PairInfo {
    std::size_t x, y;
    std::vector<int> count_a, count_b;  // live partners per move of x, of y
  };
  std::vector<PairInfo> pairs;
  std::unordered_map<std::uint64_t, std::size_t> index;
  std::vector<std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>> users;  // q → (p, move of x, move of y)
  std::vector<std::size_t> dead;
  auto add = [&](std::size_t x, std::size_t y) {
    auto [it, fresh] = index.emplace(out.key(x, y), pairs.size());
    if (fresh) {
      pairs.push_back({x, y, {}, {}});
      users.emplace_back();
    }
    return it->second;
  };
  add(a.initial, b.initial);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto [x, y] = std::pair{pairs[p].x, pairs[p].y};
    if (!a.expanded[x] || !b.expanded[y]) continue;
    std::vector<int> ca(ma[x].size(), 0), cb(mb[y].size(), 0);
    for (std::size_t i = 0; i < ma[x].size(); ++i)
      for (std::size_t j = 0; j < mb[y].size(); ++j) {
        if (ma[x][i].first != mb[y][j].first) continue;
        std::size_t q = add(ma[x][i].second, mb[y][j].second);
        users[q].emplace_back(p, i, j);
        ++ca[i];
        ++cb[j];
      }
    bool unmatched = std::count(ca.begin(), ca.end(), 0) + std::count(cb.begin(), cb.end(), 0) > 0;
    pairs[p].count_a = std::move(ca);
    pairs[p].count_b = std::move(cb);
    if (unmatched) dead.push_back(p);
  }
  std::vector<bool> alive(pairs.size(), true);
  for (std::size_t p : dead) alive[p] = false;
  while (!dead.empty()) {
    std::size_t q = dead.back();
    dead.pop_back();
    for (auto [p, i, j] : users[q]) {
      if (!alive[p]) continue;
      if (--pairs[p].count_a[i] == 0 || --pairs[p].count_b[j] == 0) {
        alive[p] = false;
        dead.push_back(p);
      }
    }
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) out.alive[out.key(pairs[p].x, pairs[p].y)] = alive[p];
  return out;
}

// Coarsest partition of the disjoint union of a and b that is stable under
// labelled moves, with all frontier states in one block that is never
// split. Blocks of a's states come first in the result. This equivalence is
// a bisimulation in which frontier states match only each other, so equal
// blocks imply relatedness under the frontier-matches-anything reading.
template <class A, class B>
std::vector<std::size_t> union_partition(const BasicLts<A>& a, const BasicLts<B>& b,
                                         const std::function<std::string(const Transition&)>& la,
                                         const std::function<std::string(const Transition&)>& lb) {
  const std::size_t na = a.states.size(), n = na + b.states.size();
  std::map<std::string, std::size_t> label_ids;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> moves(n);
  auto intern = [&](const std::string& l) { return label_ids.emplace(l, label_ids.size()).first->second; };
  for (const Transition& t : a.transitions) moves[t.from].emplace_back(intern(la(t)), t.to);
  for (const Transition& t : b.transitions) moves[na + t.from].emplace_back(intern(lb(t)), na + t.to);
  std::vector<bool> frontier(n);
  for (std::size_t x = 0; x < n; ++x) frontier[x] = x < na ? !a.expanded[x] : !b.expanded[x - na];
  std::vector<std::size_t> block(n);
  for (std::size_t x = 0; x < n; ++x) block[x] = frontier[x] ? 1 : 0;
  std::size_t count = 0;
  for (;;) {
    std::map<std::vector<std::size_t>, std::size_t> ids;
    std::vector<std::size_t> next(n);
    for (std::size_t x = 0; x < n; ++x) {
      std::vector<std::size_t> sig{frontier[x] ? 1u : 0u};
      if (!frontier[x]) {
        sig.push_back(block[x]);
        std::vector<std::pair<std::size_t, std::size_t>> succ;
        for (auto [l, to] : moves[x]) succ.emplace_back(l, block[to]);
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        for (auto [l, bl] : succ) {
          sig.push_back(l);
          sig.push_back(bl);
        }
      }
      next[x] = ids.emplace(std::move(sig), ids.size()).first->second;
    }
    block = std::move(next);
    if (ids.size() == count) return block;
    count = ids.size();
  }
}

}  // namespace detail

// Checks `fine` against `coarse` through a state map (fine state → coarse
// key) and a label map, both as a functional bisimulation and by the
// greatest-fixpoint construction.
template <class A, class B>
EquivCheck check_correspondence(const BasicLts<A>& coarse, const BasicLts<B>& fine,
                                const std::function<std::string(const std::type_identity_t<B>&)>& project,
                                const std::function<std::string(const Transition&)>& fine_label) {
  EquivCheck out;
  out.states_a = coarse.states.size();
  out.transitions_a = coarse.transitions.size();
  out.states_b = fine.states.size();
  out.transitions_b = fine.transitions.size();
  std::vector<std::optional<std::size_t>> map(fine.states.size());
  for (std::size_t s = 0; s < fine.states.size(); ++s) {
    map[s] = coarse.find(project(fine.states[s]));
    if (!map[s]) {
      out.functional_forth = false;
      out.problems.push_back("fine state " + std::to_string(s) + " has no counterpart");
    }
  }
  if (map[fine.initial] != coarse.initial) {
    out.functional_forth = false;
    out.problems.push_back("initial states do not correspond");
  }
  std::set<std::tuple<std::size_t, std::string, std::size_t>> coarse_moves, mapped_moves;
  for (const Transition& t : coarse.transitions) coarse_moves.emplace(t.from, t.rule, t.to);
  for (const Transition& t : fine.transitions) {
    if (!map[t.from] || !map[t.to]) continue;
    auto mv = std::tuple{*map[t.from], fine_label(t), *map[t.to]};
    mapped_moves.insert(mv);
    if (!coarse_moves.count(mv) && coarse.expanded[*map[t.from]]) {
      out.functional_forth = false;
      out.problems.push_back("fine move " + std::to_string(t.from) + " -" + t.rule + "-> " + std::to_string(t.to) +
                             " has no coarse counterpart");
    }
  }
  std::vector<std::vector<const Transition*>> coarse_out(coarse.states.size());
  for (const Transition& t : coarse.transitions) coarse_out[t.from].push_back(&t);
  std::vector<std::set<std::pair<std::string, std::size_t>>> fine_out(fine.states.size());
  for (const Transition& u : fine.transitions)
    if (map[u.to]) fine_out[u.from].emplace(fine_label(u), *map[u.to]);
  for (std::size_t s = 0; s < fine.states.size(); ++s) {
    if (!map[s] || !fine.expanded[s]) continue;
    for (const Transition* t : coarse_out[*map[s]])
      if (!fine_out[s].count({t->rule, t->to})) {
        out.functional_back = false;
        out.problems.push_back("coarse move " + std::to_string(t->from) + " -" + t->rule + "-> " +
                               std::to_string(t->to) + " is not matched from fine state " + std::to_string(s));
      }
  }
  // The partition settles the common case cheaply; the pairwise fixpoint is
  // exact and also yields the counterexample.
  std::function<std::string(const Transition&)> coarse_label = [](const Transition& t) { return t.rule; };
  auto blocks = detail::union_partition(coarse, fine, coarse_label, fine_label);
  out.fixpoint_bisimilar = blocks[coarse.initial] == blocks[coarse.states.size() + fine.initial];
  if (!out.fixpoint_bisimilar)
    out.fixpoint_bisimilar =
        detail::greatest_bisimulation(coarse, fine, coarse_label, fine_label).related(coarse.initial, fine.initial);
  if (!out.fixpoint_bisimilar) {
    // Breadth-first over pairs reached by equal label paths, up to the first
    // pair where one side has a label the other lacks.
    std::vector<std::map<std::string, std::vector<std::size_t>>> cm(coarse.states.size()), fm(fine.states.size());
    for (const Transition& t : coarse.transitions) cm[t.from][t.rule].push_back(t.to);
    for (const Transition& u : fine.transitions) fm[u.from][fine_label(u)].push_back(u.to);
    struct Visit {
      std::size_t x, y, parent;
      std::string label;
    };
    std::vector<Visit> queue{{coarse.initial, fine.initial, 0, ""}};
    std::set<std::pair<std::size_t, std::size_t>> seen{{coarse.initial, fine.initial}};
    auto path_to = [&](std::size_t i) {
      std::vector<std::string> p;
      for (; i != 0; i = queue[i].parent) p.push_back(queue[i].label);
      return std::vector<std::string>(p.rbegin(), p.rend());
    };
    for (std::size_t qi = 0; qi < queue.size() && out.counterexample.empty(); ++qi) {
      const auto [x, y, parent, label] = queue[qi];
      if (!coarse.expanded[x] || !fine.expanded[y]) continue;
      auto only = [&](const auto& mine, const auto& theirs, const char* side) {
        for (const auto& [l, tos] : mine)
          if (!theirs.count(l)) {
            out.counterexample = path_to(qi);
            out.counterexample.push_back(l + " (" + side + " only)");
            return true;
          }
        return false;
      };
      if (only(cm[x], fm[y], "first") || only(fm[y], cm[x], "second")) break;
      for (const auto& [l, xs] : cm[x])
        for (std::size_t x2 : xs)
          for (std::size_t y2 : fm[y].at(l))
            if (seen.insert({x2, y2}).second) queue.push_back({x2, y2, qi, l});
    }
    // Without a frontier the pairs visited here form a bisimulation, so an
    // empty search means the difference lies past the exploration bound.
    if (out.counterexample.empty())
      out.problems.push_back("no distinguishing path inside the explored part; the systems differ past the bound");
  }
  return out;
}

// CG against a grammar whose states restrict to CG states along a type
// span and whose rules belong to families named after CG rules.
inline EquivCheck check_equiv(const ConditionalGrammar& cg, const ConditionalGrammar& other,
                              const ExploreOptions& opt = {}) {
  Lts a = explore(cg, opt);
  Lts b = explore(other, opt);
  TypeSpan span = span_by_name(other.type_graph, cg.type_graph);
  return check_correspondence(
      a, b, [&](const Graph& g) { return state_key(retype(span, g).graph, cg.safe); },
      [](const Transition& t) { return t.family; });
}

// ---------------------------------------------------------------------------
// Independence

struct IndependenceCheck {
  std::size_t pairs = 0;
  std::size_t independent_source = 0;
  std::vector<std::string> preservation_violations;
  std::vector<std::string> church_rosser_violations;
  std::vector<std::string> findings;  // independent in the image but not in the source
  bool ok() const { return preservation_violations.empty() && church_rosser_violations.empty(); }
};

// Over every pair of consecutive steps reachable in `g1`, compares
// independence there with independence of the images under `f`.
inline IndependenceCheck check_independence(const GrammarMorphism& f, const ConditionalGrammar& g1,
                                            const ConditionalGrammar& g2, const Lts& lts1) {
  IndependenceCheck out;
  ApplyOptions opt1, opt2;
  opt1.safe = g1.safe;
  opt1.type_graph = &g1.type_graph;
  opt2.safe = g2.safe;
  opt2.type_graph = &g2.type_graph;
  std::vector<std::vector<Enabled>> steps(lts1.states.size());
  detail::parallel_for(lts1.states.size(), default_workers(),
                       [&](std::size_t s) { steps[s] = enabled_steps(g1, lts1.states[s], 0); });
  for (std::size_t s = 0; s < lts1.states.size(); ++s)
    for (const Enabled& a : steps[s]) {
      const Rule& p1 = g1.rules[a.rule];
      for (const Rule& p2 : g1.rules) {
        // Second steps are taken from the graph produced by the first one.
        for (const Morphism& m2 : find_matches(p2, a.step.after)) {
          auto b = try_apply(p2, m2, a.step.after, opt1);
          if (!b) continue;
          ++out.pairs;
          std::string where = "state " + std::to_string(s) + ": " + p1.name + " then " + p2.name;
          IndependenceWitness w1 = check_sequential_independence(p1, a.step, p2, *b, opt1);
          if (w1.independent) {
            ++out.independent_source;
            if (state_key(w1.second->after, g1.safe) != state_key(b->after, g1.safe))
              out.church_rosser_violations.push_back(where + ": swapped order ends elsewhere");
          }
          std::vector<DerivationStep> img;
          try {
            img = map_derivation(f, g1, g2, {a.step, *b});
          } catch (const Error& e) {
            out.preservation_violations.push_back(where + ": image derivation fails: " + e.what());
            continue;
          }
          const Rule* q1 = g2.find_rule(img[0].rule);
          const Rule* q2 = g2.find_rule(img[1].rule);
          IndependenceWitness w2 = check_sequential_independence(*q1, img[0], *q2, img[1], opt2);
          if (w1.independent && !w2.independent)
            out.preservation_violations.push_back(where + ": images are dependent (" + w2.reason + ")");
          if (!w1.independent && w2.independent)
            out.findings.push_back(where + ": source dependent (" + w1.reason + ") but images independent");
        }
      }
    }
  return out;
}

}  // namespace nacforge

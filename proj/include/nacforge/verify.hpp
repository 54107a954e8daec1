#pragma once

// The complete check suite for a grammar, as run by `nacforge verify`.
//
// For a safe grammar with NACs: encode it, then check over the full state
// spaces that the complementation invariant holds in every reachable
// enriched state, that the NACs of the enriched grammar never block a step,
// that the grammar, its enriched form and the NAC-free enriched form agree
// step for step, that e and d are grammar morphisms, and that e preserves
// independence of consecutive steps. Steps that are independent only in the
// image are findings, not failures.
//
// For an attributed grammar: encode NACs as counters and compare both
// systems up to the exploration bound.

#include <chrono>
#include <string>
#include <vector>

#include "nacforge/attributed.hpp"
#include "nacforge/encoder.hpp"
#include "nacforge/explorer.hpp"
#include "nacforge/io.hpp"
#include "nacforge/morphism.hpp"

namespace nacforge {

struct CheckLine {
  std::string name;
  bool ok = false;
  std::string detail;
  double seconds = 0;
};

struct VerifyReport {
  std::vector<CheckLine> checks;
  std::vector<std::string> findings;
  std::vector<std::string> notes;  // what the encoder decided, for the reader
  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.ok; });
  }

  Json to_json() const {
    Json cs = Json::array();
    for (const CheckLine& c : checks)
      cs.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}, {"seconds", c.seconds}});
    return {{"ok", ok()}, {"checks", cs}, {"findings", findings}, {"notes", notes}};
  }
};

namespace detail {

template <class F>
CheckLine timed(const std::string& name, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  CheckLine line{name, false, {}, 0};
  try {
    body(line);
  } catch (const Error& e) {
    line.ok = false;
    line.detail = e.what();
  }
  line.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return line;
}

inline std::string first_of(const std::vector<std::string>& v) { return v.empty() ? "" : "; first: " + v.front(); }

}  // namespace detail

inline VerifyReport verify_grammar(const ConditionalGrammar& cg, const ExploreOptions& opt = {}) {
  VerifyReport rep;
  EnrichedGrammar e;
  ConditionalGrammar de;
  Lts lcg, le;
  rep.checks.push_back(detail::timed("encode", [&](CheckLine& l) {
    e = enrich_grammar(cg);
    de = drop_nacs(e.grammar);
    l.ok = true;
    l.detail = std::to_string(e.etg.tg_bar.node_count()) + " node types, " +
               std::to_string(e.etg.tg_bar.edge_count()) + " edge types, " + std::to_string(e.grammar.rules.size()) +
               " rules";
  }));
  if (!rep.checks.back().ok) return rep;
  rep.checks.push_back(detail::timed("explore", [&](CheckLine& l) {
    lcg = explore(cg, opt);
    le = explore(e.grammar, opt);
    l.ok = true;
    l.detail = "grammar " + std::to_string(lcg.states.size()) + " states / " + std::to_string(lcg.transitions.size()) +
               " transitions; enriched " + std::to_string(le.states.size()) + " / " +
               std::to_string(le.transitions.size()) + (lcg.bound_reached || le.bound_reached ? " (bounded)" : "");
  }));
  rep.checks.push_back(detail::timed("invariant", [&](CheckLine& l) {
    InvariantCheck c = check_invariant_reachable(le, e.phi);
    l.ok = c.ok();
    l.detail = std::to_string(c.states) + " states, " + std::to_string(c.violations.size()) + " violations";
    if (!c.ok()) l.detail += "; first in state " + std::to_string(c.violations.front().first) + ", shape " +
                             c.violations.front().second.shape_id;
  }));
  rep.checks.push_back(detail::timed("nac-redundancy", [&](CheckLine& l) {
    RedundancyCheck c = check_nac_redundancy(e.grammar, le);
    l.ok = c.ok();
    l.detail = std::to_string(c.pairs) + " matches, " + std::to_string(c.violations.size()) + " blocked by a NAC" +
               detail::first_of(c.violations);
  }));
  rep.checks.push_back(detail::timed("reflection", [&](CheckLine& l) {
    ReflectionCheck c = check_reflection(cg, lcg, e);
    l.ok = c.ok();
    l.detail = std::to_string(c.transitions) + " transitions, " + std::to_string(c.unmatched.size()) + " unmatched" +
               detail::first_of(c.unmatched);
  }));
  auto equiv_line = [&](const std::string& name, const ConditionalGrammar& other) {
    return detail::timed(name, [&](CheckLine& l) {
      EquivCheck c = check_equiv(cg, other, opt);
      l.ok = c.ok();
      l.detail = std::to_string(c.states_b) + " states / " + std::to_string(c.transitions_b) + " transitions" +
                 (c.fixpoint_bisimilar ? ", bisimilar" : ", not bisimilar") + detail::first_of(c.problems);
    });
  };
  rep.checks.push_back(equiv_line("equiv-enriched", e.grammar));
  rep.checks.push_back(equiv_line("equiv-nac-free", de));
  GrammarMorphism fe = build_e(cg, e), fd = build_d(e.grammar);
  rep.checks.push_back(detail::timed("morphism-e", [&](CheckLine& l) {
    MorphismReport m = check_morphism(fe, e.grammar, cg);
    l.ok = m.ok();
    l.detail = m.ok() ? "conditions 1-3 hold" : "condition " + std::to_string(m.first_failed()) + " fails" +
                                                    detail::first_of(m.problems);
  }));
  rep.checks.push_back(detail::timed("morphism-d", [&](CheckLine& l) {
    MorphismReport m = check_morphism(fd, e.grammar, de);
    l.ok = m.ok();
    l.detail = m.ok() ? "conditions 1-3 hold" : "condition " + std::to_string(m.first_failed()) + " fails" +
                                                    detail::first_of(m.problems);
  }));
  rep.checks.push_back(detail::timed("independence", [&](CheckLine& l) {
    if (!rep.checks.back().ok || !rep.checks[rep.checks.size() - 2].ok)
      throw Error(ErrorKind::PreconditionViolated, "needs a valid morphism e");
    IndependenceCheck c = check_independence(fe, e.grammar, cg, le);
    l.ok = c.ok();
    l.detail = std::to_string(c.pairs) + " pairs, " + std::to_string(c.independent_source) + " independent, " +
               std::to_string(c.preservation_violations.size() + c.church_rosser_violations.size()) + " violations" +
               detail::first_of(c.preservation_violations) + detail::first_of(c.church_rosser_violations);
    for (const std::string& f : c.findings) rep.findings.push_back("independence not reflected: " + f);
  }));
  return rep;
}

inline VerifyReport verify_attributed(const AttributedGrammar& g, const AttrExploreOptions& opt) {
  VerifyReport rep;
  CounterEncoding enc;
  rep.checks.push_back(detail::timed("encode-counters", [&](CheckLine& l) {
    enc = encode_counters(g);
    l.ok = true;
    l.detail = std::to_string(enc.invariants.size()) + " counter invariants, " +
               std::to_string(enc.nac_counters.size()) + " NACs replaced";
  }));
  if (!rep.checks.back().ok) return rep;
  CounterEquivReport c;
  rep.checks.push_back(detail::timed("equiv-counters", [&](CheckLine& l) {
    c = check_counter_encoding(g, enc, opt);
    l.ok = c.equiv.ok();
    l.detail = std::to_string(c.original_states) + " / " + std::to_string(c.encoded_states) + " states" +
               (c.equiv.fixpoint_bisimilar ? ", bisimilar after erasure" : ", not bisimilar") +
               detail::first_of(c.equiv.problems);
  }));
  if (!rep.checks.back().ok && c.original_states == 0) return rep;
  rep.checks.push_back({"counter-invariants", c.invariants.ok(),
                        std::to_string(c.invariants.violations.size()) + " violations" +
                            detail::first_of(c.invariants.violations),
                        0});
  rep.checks.push_back({"counter-guards", c.pointwise.ok(),
                        std::to_string(c.pointwise.violations.size()) + " disagreements" +
                            detail::first_of(c.pointwise.violations),
                        0});
  rep.checks.push_back({"rwds-non-negative", c.non_negative.ok(),
                        std::to_string(c.non_negative.violations.size()) + " violations" +
                            detail::first_of(c.non_negative.violations),
                        0});
  for (const std::string& s : enc.log) rep.notes.push_back(s);
  return rep;
}

}  // namespace nacforge

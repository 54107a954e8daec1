// Encodes the NACs of a safe grammar into its type graph, then checks the
// result the way `nacforge verify` does, printing each stage.
//
//   encode_client_server grammars/clientserver.json

#include <iostream>

#include "nacforge/encoder.hpp"
#include "nacforge/explorer.hpp"
#include "nacforge/io.hpp"

using namespace nacforge;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: encode_client_server GRAMMAR.json\n";
    return 2;
  }
  try {
    ConditionalGrammar g = load_grammar(argv[1]);
    EnrichedGrammar e = enrich_grammar(g);
    std::cout << "type graph: " << g.type_graph.node_count() << " nodes, " << g.type_graph.edge_count()
              << " edges; enriched: " << e.etg.tg_bar.node_count() << " nodes, " << e.etg.tg_bar.edge_count()
              << " edges\n";
    for (const FamilyView& f : families(e.grammar)) std::cout << "  " << f.name << ": " << f.members.size() << " rule(s)\n";

    Lts lts = explore(e.grammar);
    std::cout << "reachable: " << lts.states.size() << " states, " << lts.transitions.size() << " transitions\n";

    InvariantCheck inv = check_invariant_reachable(lts, e.phi);
    RedundancyCheck red = check_nac_redundancy(e.grammar, lts);
    EquivCheck eq = check_equiv(g, drop_nacs(e.grammar));
    std::cout << "invariant violations: " << inv.violations.size() << "\n"
              << "matches blocked by a NAC: " << red.violations.size() << " of " << red.pairs << "\n"
              << "bisimilar without NACs: " << (eq.ok() ? "yes" : "no") << "\n";
    return inv.ok() && red.ok() && eq.ok() ? 0 : 1;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}

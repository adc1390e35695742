#pragma once

// Test-only labelled graph isomorphism by backtracking. Deliberately shares
// nothing with the canonical ranking used by the SMILES writer.

#include <vector>

#include "selnoise/chem/molgraph.hpp"

namespace selnoise::test_support {

inline bool isomorphic(const chem::MolGraph& g, const chem::MolGraph& h) {
  const int n = static_cast<int>(g.atom_count());
  if (n != static_cast<int>(h.atom_count()) || g.bond_count() != h.bond_count()) return false;
  auto compatible = [&](int a, int b) {
    return g.atom(a) == h.atom(b) && g.degree(a) == h.degree(b);
  };
  std::vector<int> map(n, -1), used(n, 0);
  // Order g atoms BFS-wise so each new atom is adjacent to a mapped one.
  std::vector<int> order;
  std::vector<char> seen(n, 0);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    order.push_back(s);
    for (std::size_t k = order.size() - 1; k < order.size(); ++k)
      for (const auto& nb : g.neighbors(order[k]))
        if (!seen[nb.atom]) {
          seen[nb.atom] = 1;
          order.push_back(nb.atom);
        }
  }
  auto consistent = [&](int a, int b) {
    for (const auto& nb : g.neighbors(a)) {
      const int mb = map[nb.atom];
      if (mb < 0) continue;
      const int hb = h.find_bond(b, mb);
      if (hb < 0 || h.bond(hb).order != g.bond(nb.bond).order) return false;
    }
    return true;
  };
  auto search = [&](auto&& self, std::size_t depth) -> bool {
    if (depth == order.size()) return true;
    const int a = order[depth];
    for (int b = 0; b < n; ++b) {
      if (used[b] || !compatible(a, b) || !consistent(a, b)) continue;
      map[a] = b;
      used[b] = 1;
      if (self(self, depth + 1)) return true;
      map[a] = -1;
      used[b] = 0;
    }
    return false;
  };
  return search(search, 0);
}

}  // namespace selnoise::test_support

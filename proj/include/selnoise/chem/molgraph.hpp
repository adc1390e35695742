#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "selnoise/chem/element.hpp"
#include "selnoise/core/error.hpp"

namespace selnoise::chem {

enum class BondOrder : std::uint8_t { single = 1, double_ = 2, triple = 3, aromatic = 4 };

// Contribution of a bond to its endpoints' valence. Aromatic bonds count 1;
// the extra aromatic unit is handled by the implicit-hydrogen rule.
inline constexpr int valence_units(BondOrder o) noexcept {
  return o == BondOrder::aromatic ? 1 : static_cast<int>(o);
}

struct Atom {
  int atomic_number = 6;
  int charge = 0;
  bool aromatic = false;
  int implicit_h = 0;

  std::string_view symbol() const { return element(atomic_number).symbol; }
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::single;

  int other(int atom) const { return atom == a ? b : a; }
  friend bool operator==(const Bond&, const Bond&) = default;
};

// Implicit hydrogen count an unbracketed atom gets in SMILES, or nullopt when
// the bond sum exceeds every allowed valence. Aromatic atoms reserve one unit
// for the delocalised bond: h = max(0, lowest valence - (bond sum + 1)).
inline std::optional<int> default_hydrogens(int atomic_number, bool aromatic, int bond_sum) {
  const ElementInfo& e = element(atomic_number);
  if (!valence_checked(e)) return 0;
  if (aromatic) {
    const int h = std::max(0, e.valences[0] - bond_sum - 1);
    if (bond_sum + h > e.valences[e.n_valences - 1]) return std::nullopt;
    return h;
  }
  for (int i = 0; i < e.n_valences; ++i)
    if (e.valences[i] >= bond_sum) return e.valences[i] - bond_sum;
  return std::nullopt;
}

struct Neighbor {
  int atom;
  int bond;
};

// A connected, valence-valid molecular graph with implicit hydrogens.
// Immutable after construction.
class MolGraph {
 public:
  MolGraph() = default;

  // Validates every invariant; throws ArgumentError describing the first violation.
  MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
      : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
    if (auto problem = check(atoms_, bonds_)) throw ArgumentError(problem->message);
    build_adjacency();
    compute_rings();
  }

  struct Problem {
    std::string message;
    int atom = -1;  // offending atom, when there is one
  };

  // Returns the first invariant violation, if any.
  static std::optional<Problem> check(std::span<const Atom> atoms, std::span<const Bond> bonds) {
    const int n = static_cast<int>(atoms.size());
    std::vector<int> bond_sum(atoms.size(), 0);
    std::vector<std::vector<int>> adj(atoms.size());
    for (const Bond& b : bonds) {
      if (b.a < 0 || b.b < 0 || b.a >= n || b.b >= n) return Problem{"bond endpoint out of range", -1};
      if (b.a == b.b) return Problem{"self bond", b.a};
      for (int x : adj[b.a])
        if (x == b.b) return Problem{"duplicate bond", b.b};
      adj[b.a].push_back(b.b);
      adj[b.b].push_back(b.a);
      bond_sum[b.a] += valence_units(b.order);
      bond_sum[b.b] += valence_units(b.order);
    }
    for (int i = 0; i < n; ++i) {
      const Atom& a = atoms[i];
      if (a.implicit_h < 0) return Problem{"negative hydrogen count", i};
      const ElementInfo& e = element(a.atomic_number);
      if (!valence_checked(e)) continue;
      const auto allowed = allowed_valences(e, a.charge);
      const int used = bond_sum[i] + a.implicit_h;
      if (allowed.empty() || used > allowed.back())
        return Problem{"valence violation on " + std::string(e.symbol) + " atom " + std::to_string(i), i};
    }
    if (n > 1) {
      std::vector<char> seen(atoms.size(), 0);
      std::vector<int> stack{0};
      seen[0] = 1;
      int count = 1;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
          if (!seen[w]) {
            seen[w] = 1;
            ++count;
            stack.push_back(w);
          }
      }
      if (count != n) return Problem{"graph is not connected", -1};
    }
    return std::nullopt;
  }

  std::size_t atom_count() const noexcept { return atoms_.size(); }
  std::size_t bond_count() const noexcept { return bonds_.size(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  const Atom& atom(int i) const { return atoms_[i]; }
  const Bond& bond(int i) const { return bonds_[i]; }
  std::span<const Neighbor> neighbors(int i) const { return adjacency_[i]; }

  int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }

  int heavy_degree(int i) const {
    int d = 0;
    for (const auto& nb : adjacency_[i])
      if (atoms_[nb.atom].atomic_number != 1) ++d;
    return d;
  }

  int bond_sum(int i) const {
    int s = 0;
    for (const auto& nb : adjacency_[i]) s += valence_units(bonds_[nb.bond].order);
    return s;
  }

  // Bond index between a and b, or -1.
  int find_bond(int a, int b) const {
    for (const auto& nb : adjacency_[a])
      if (nb.atom == b) return nb.bond;
    return -1;
  }

  bool in_ring(int atom) const { return atom_in_ring_[atom]; }
  bool bond_in_ring(int bond) const { return bond_in_ring_[bond]; }

  // Largest additional bond order the atom can take, keeping its charge and
  // treating implicit hydrogens as removable.
  int free_valence(int i) const { return atoms_[i].implicit_h; }

  friend bool operator==(const MolGraph& x, const MolGraph& y) {
    return x.atoms_ == y.atoms_ && x.bonds_ == y.bonds_;
  }

 private:
  void build_adjacency() {
    adjacency_.assign(atoms_.size(), {});
    for (int i = 0; i < static_cast<int>(bonds_.size()); ++i) {
      adjacency_[bonds_[i].a].push_back({bonds_[i].b, i});
      adjacency_[bonds_[i].b].push_back({bonds_[i].a, i});
    }
  }

  // A bond is in a ring iff it is not a bridge (Tarjan low-link).
  void compute_rings() {
    const int n = static_cast<int>(atoms_.size());
    bond_in_ring_.assign(bonds_.size(), 1);
    atom_in_ring_.assign(atoms_.size(), 0);
    std::vector<int> disc(n, -1), low(n, 0);
    int timer = 0;
    struct Frame {
      int v;
      int parent_bond;
      std::size_t next;
    };
    for (int root = 0; root < n; ++root) {
      if (disc[root] != -1) continue;
      std::vector<Frame> stack{{root, -1, 0}};
      disc[root] = low[root] = timer++;
      while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < adjacency_[f.v].size()) {
          const Neighbor nb = adjacency_[f.v][f.next++];
          if (nb.bond == f.parent_bond) continue;
          if (disc[nb.atom] == -1) {
            disc[nb.atom] = low[nb.atom] = timer++;
            stack.push_back({nb.atom, nb.bond, 0});
          } else {
            low[f.v] = std::min(low[f.v], disc[nb.atom]);
          }
        } else {
          const Frame done = f;
          stack.pop_back();
          if (!stack.empty()) {
            Frame& parent = stack.back();
            low[parent.v] = std::min(low[parent.v], low[done.v]);
            if (low[done.v] > disc[parent.v]) bond_in_ring_[done.parent_bond] = 0;
          }
        }
      }
    }
    for (int i = 0; i < static_cast<int>(bonds_.size()); ++i)
      if (bond_in_ring_[i]) atom_in_ring_[bonds_[i].a] = atom_in_ring_[bonds_[i].b] = 1;
  }

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<char> atom_in_ring_;
  std::vector<char> bond_in_ring_;
};

}  // namespace selnoise::chem

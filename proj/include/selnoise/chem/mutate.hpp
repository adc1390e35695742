#pragma once

// Graph-level molecular edits and similarity-gated sampling of neighbouring
// molecules. A candidate is built from 1..max_edits random single edits and
// kept only if its fingerprint similarity to the source lies in the requested
// range.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "selnoise/chem/element.hpp"
#include "selnoise/chem/fingerprint.hpp"
#include "selnoise/chem/molgraph.hpp"
#include "selnoise/core/error.hpp"
#include "selnoise/core/rng.hpp"

namespace selnoise::chem {

enum class EditKind : std::uint8_t { substitute, bond_increment, bond_decrement, delete_terminal, add_terminal };

struct Edit {
  EditKind kind;
  int target;        // atom index (substitute/delete/add) or bond index
  int element = 0;   // new element for substitute / add
};

namespace detail {

inline constexpr int kHeteroFamily[] = {6, 7, 8, 16};
inline constexpr int kHalogenFamily[] = {9, 17, 35, 53};
inline constexpr int kAddable[] = {6, 7, 8};

inline bool recomputable(const Atom& a) {
  return a.charge == 0 && element(a.atomic_number).organic_subset;
}

// Hydrogen count after the atom's bond sum changes by `delta`, or nullopt if
// the result would break valence. Neutral non-aromatic organic atoms take the
// default SMILES hydrogen count; everything else trades hydrogens one for one.
inline std::optional<int> hydrogens_after(const Atom& a, int bond_sum, int delta) {
  if (recomputable(a) && !a.aromatic) return default_hydrogens(a.atomic_number, false, bond_sum + delta);
  const int h = a.implicit_h - delta;
  if (h < 0) return std::nullopt;
  const ElementInfo& e = element(a.atomic_number);
  if (valence_checked(e)) {
    const auto allowed = allowed_valences(e, a.charge);
    if (allowed.empty() || bond_sum + delta + h > allowed.back()) return std::nullopt;
  }
  return h;
}

template <std::size_t N>
inline bool in_family(int z, const int (&family)[N]) {
  for (int f : family)
    if (f == z) return true;
  return false;
}

}  // namespace detail

// Every single edit that yields a valid connected graph.
inline std::vector<Edit> valid_edits(const MolGraph& mol) {
  std::vector<Edit> edits;
  const int n = static_cast<int>(mol.atom_count());
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    if (!detail::recomputable(a)) continue;
    const int sum = mol.bond_sum(i);
    auto try_family = [&](const auto& family) {
      for (int z : family) {
        if (z == a.atomic_number) continue;
        if (a.aromatic && !element(z).aromatic_capable) continue;
        if (default_hydrogens(z, a.aromatic, sum)) edits.push_back({EditKind::substitute, i, z});
      }
    };
    if (detail::in_family(a.atomic_number, detail::kHeteroFamily)) try_family(detail::kHeteroFamily);
    if (detail::in_family(a.atomic_number, detail::kHalogenFamily)) try_family(detail::kHalogenFamily);
  }
  for (int b = 0; b < static_cast<int>(mol.bond_count()); ++b) {
    const Bond& bond = mol.bond(b);
    if (bond.order == BondOrder::aromatic) continue;
    const Atom& x = mol.atom(bond.a);
    const Atom& y = mol.atom(bond.b);
    if (bond.order != BondOrder::triple && x.implicit_h > 0 && y.implicit_h > 0 &&
        detail::hydrogens_after(x, mol.bond_sum(bond.a), 1) && detail::hydrogens_after(y, mol.bond_sum(bond.b), 1))
      edits.push_back({EditKind::bond_increment, b});
    if (bond.order != BondOrder::single && detail::hydrogens_after(x, mol.bond_sum(bond.a), -1) &&
        detail::hydrogens_after(y, mol.bond_sum(bond.b), -1))
      edits.push_back({EditKind::bond_decrement, b});
  }
  if (n > 1) {
    for (int i = 0; i < n; ++i) {
      if (mol.degree(i) != 1) continue;
      const Neighbor nb = mol.neighbors(i)[0];
      const int delta = -valence_units(mol.bond(nb.bond).order);
      if (detail::hydrogens_after(mol.atom(nb.atom), mol.bond_sum(nb.atom), delta))
        edits.push_back({EditKind::delete_terminal, i});
    }
  }
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    if (a.atomic_number == 1 || a.implicit_h == 0) continue;
    if (!detail::hydrogens_after(a, mol.bond_sum(i), 1)) continue;
    for (int z : detail::kAddable) edits.push_back({EditKind::add_terminal, i, z});
  }
  return edits;
}

inline MolGraph apply_edit(const MolGraph& mol, const Edit& e) {
  std::vector<Atom> atoms = mol.atoms();
  std::vector<Bond> bonds = mol.bonds();
  auto adjust = [&](int atom, int delta) {
    atoms[atom].implicit_h = detail::hydrogens_after(mol.atom(atom), mol.bond_sum(atom), delta).value();
  };
  switch (e.kind) {
    case EditKind::substitute:
      atoms[e.target].atomic_number = e.element;
      atoms[e.target].implicit_h =
          default_hydrogens(e.element, atoms[e.target].aromatic, mol.bond_sum(e.target)).value();
      break;
    case EditKind::bond_increment:
    case EditKind::bond_decrement: {
      const int delta = e.kind == EditKind::bond_increment ? 1 : -1;
      Bond& b = bonds[e.target];
      b.order = static_cast<BondOrder>(static_cast<int>(b.order) + delta);
      adjust(b.a, delta);
      adjust(b.b, delta);
      break;
    }
    case EditKind::delete_terminal: {
      const Neighbor nb = mol.neighbors(e.target)[0];
      adjust(nb.atom, -valence_units(mol.bond(nb.bond).order));
      bonds.erase(bonds.begin() + nb.bond);
      atoms.erase(atoms.begin() + e.target);
      for (Bond& b : bonds) {
        if (b.a > e.target) --b.a;
        if (b.b > e.target) --b.b;
      }
      break;
    }
    case EditKind::add_terminal: {
      adjust(e.target, 1);
      Atom added;
      added.atomic_number = e.element;
      added.implicit_h = default_hydrogens(e.element, false, 1).value();
      atoms.push_back(added);
      bonds.push_back({e.target, static_cast<int>(atoms.size()) - 1, BondOrder::single});
      break;
    }
  }
  return MolGraph(std::move(atoms), std::move(bonds));
}

// One edit drawn uniformly from the valid set.
inline MolGraph mutate(const MolGraph& mol, RngStream& rng) {
  const auto edits = valid_edits(mol);
  if (edits.empty()) throw MutationExhaustedError("no valid edit for molecule");
  return apply_edit(mol, edits[rng.below(edits.size())]);
}

struct SimilarityRange {
  double lo = 0.0;
  double hi = 1.0;

  SimilarityRange() = default;
  SimilarityRange(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) throw ArgumentError("similarity range must satisfy 0 <= lo <= hi <= 1");
  }
  bool contains(double s) const { return lo <= s && s <= hi; }
};

struct SampleConfig {
  std::size_t n_candidates = 200;
  std::size_t max_edits = 3;
  int radius = 2;
  std::size_t nbits = 2048;

  // Dissimilar targets need deeper edit chains.
  static SampleConfig defaults_for(const SimilarityRange& range) {
    SampleConfig c;
    if (range.hi < 0.5) c.max_edits = 8;
    return c;
  }
};

struct SampleResult {
  std::optional<MolGraph> molecule;  // empty on fallback
  double similarity = 0.0;
  std::size_t chosen = 0;  // index into pool
  // Similarity of every generated candidate; NaN where the edit chain was exhausted.
  std::vector<double> pool;

  bool fallback() const { return !molecule.has_value(); }
};

// Best-in-range neighbour of `mol`. Candidate c draws from the substream
// derived from (rng seed, c), so the pool is independent of evaluation order.
inline SampleResult sample_similar(const MolGraph& mol, const SimilarityRange& range, const SampleConfig& cfg,
                                   const RngStream& rng) {
  if (cfg.n_candidates == 0) throw ArgumentError("n_candidates must be at least 1");
  if (cfg.max_edits == 0) throw ArgumentError("max_edits must be at least 1");
  const Fingerprint reference = ecfp(mol, cfg.radius, cfg.nbits);
  SampleResult result;
  std::optional<MolGraph> best;
  double best_sim = -1.0;
  std::size_t best_idx = 0;

  auto generate = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      RngStream stream = rng.substream(static_cast<std::uint64_t>(c));
      const std::size_t depth = 1 + stream.below(cfg.max_edits);
      std::optional<MolGraph> cand = mol;
      for (std::size_t k = 0; k < depth; ++k) {
        try {
          cand = mutate(*cand, stream);
        } catch (const MutationExhaustedError&) {
          cand.reset();
          break;
        }
      }
      if (!cand) {
        result.pool.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const double sim = tanimoto(reference, ecfp(*cand, cfg.radius, cfg.nbits));
      result.pool.push_back(sim);
      if (range.contains(sim) && sim > best_sim) {
        best_sim = sim;
        best_idx = c;
        best = std::move(cand);
      }
    }
  };

  generate(0, cfg.n_candidates);
  if (!best) generate(cfg.n_candidates, 2 * cfg.n_candidates);
  if (best) {
    result.molecule = std::move(best);
    result.similarity = best_sim;
    result.chosen = best_idx;
  }
  return result;
}

}  // namespace selnoise::chem

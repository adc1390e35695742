#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "selnoise/chem/molgraph.hpp"

namespace selnoise::chem {

// Node feature layout (26 columns):
//   [0, 13)  element one-hot over kPalette, last slot "other"
//   [13, 19) heavy degree 0..5 (clamped)
//   [19, 24) implicit H 0..4 (clamped)
//   24       aromatic flag
//   25       formal charge clamped to [-2, 2], times 0.5
inline constexpr int kPalette[] = {6, 7, 8, 16, 9, 17, 35, 53, 15, 5, 14, 34};
inline constexpr int kPaletteSize = 12;
inline constexpr int kElementSlots = kPaletteSize + 1;
inline constexpr int kDegreeOffset = kElementSlots;
inline constexpr int kHydrogenOffset = kDegreeOffset + 6;
inline constexpr int kAromaticColumn = kHydrogenOffset + 5;
inline constexpr int kChargeColumn = kAromaticColumn + 1;
inline constexpr int kNodeFeatures = kChargeColumn + 1;

struct GraphFeatures {
  Eigen::MatrixXd nodes;      // atoms x kNodeFeatures
  Eigen::MatrixXd adjacency;  // D^-1/2 (A + I) D^-1/2
};

inline GraphFeatures featurize_graph(const MolGraph& mol) {
  const int n = static_cast<int>(mol.atom_count());
  GraphFeatures g;
  g.nodes = Eigen::MatrixXd::Zero(n, kNodeFeatures);
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    int slot = kPaletteSize;
    for (int k = 0; k < kPaletteSize; ++k)
      if (kPalette[k] == a.atomic_number) slot = k;
    g.nodes(i, slot) = 1.0;
    g.nodes(i, kDegreeOffset + std::min(mol.heavy_degree(i), 5)) = 1.0;
    g.nodes(i, kHydrogenOffset + std::min(a.implicit_h, 4)) = 1.0;
    g.nodes(i, kAromaticColumn) = a.aromatic ? 1.0 : 0.0;
    g.nodes(i, kChargeColumn) = 0.5 * std::clamp(a.charge, -2, 2);
  }
  std::vector<double> inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(mol.degree(i) + 1));
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) g.adjacency(i, i) = inv_sqrt[i] * inv_sqrt[i];
  for (const Bond& b : mol.bonds()) {
    const double w = inv_sqrt[b.a] * inv_sqrt[b.b];
    g.adjacency(b.a, b.b) = w;
    g.adjacency(b.b, b.a) = w;
  }
  return g;
}

}  // namespace selnoise::chem

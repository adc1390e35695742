#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <utility>
#include <vector>

#include "selnoise/chem/molgraph.hpp"
#include "selnoise/core/error.hpp"
#include "selnoise/core/hash.hpp"

namespace selnoise::chem {

// Fixed-length bit vector.
class Fingerprint {
 public:
  explicit Fingerprint(std::size_t nbits = 2048) : nbits_(nbits), words_((nbits + 63) / 64, 0) {
    if (nbits == 0) throw ArgumentError("fingerprint length must be positive");
  }

  std::size_t nbits() const noexcept { return nbits_; }

  void set(std::size_t bit) { words_[bit / 64] |= std::uint64_t{1} << (bit % 64); }
  bool test(std::size_t bit) const { return (words_[bit / 64] >> (bit % 64)) & 1U; }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  std::vector<std::size_t> on_bits() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nbits_; ++i)
      if (test(i)) out.push_back(i);
    return out;
  }

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  std::size_t nbits_;
  std::vector<std::uint64_t> words_;
};

// Circular (ECFP-style) fingerprint. Every (atom, iteration) identifier is
// folded into the bit vector; identical environments are not deduplicated.
inline Fingerprint ecfp(const MolGraph& mol, int radius = 2, std::size_t nbits = 2048) {
  if (radius < 0) throw ArgumentError("radius must be non-negative");
  Fingerprint fp(nbits);
  const int n = static_cast<int>(mol.atom_count());
  std::vector<std::uint64_t> ids(n), next(n);
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    ids[i] = Fnv1a{}
                 .u64(0)
                 .i64(a.atomic_number)
                 .i64(mol.heavy_degree(i))
                 .i64(a.implicit_h)
                 .i64(a.charge)
                 .u64(a.aromatic ? 1 : 0)
                 .u64(mol.in_ring(i) ? 1 : 0)
                 .digest();
    fp.set(ids[i] % nbits);
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int r = 1; r <= radius; ++r) {
    for (int i = 0; i < n; ++i) {
      env.clear();
      for (const auto& nb : mol.neighbors(i))
        env.emplace_back(static_cast<std::uint64_t>(mol.bond(nb.bond).order), ids[nb.atom]);
      std::sort(env.begin(), env.end());
      Fnv1a h;
      h.u64(static_cast<std::uint64_t>(r)).u64(ids[i]);
      for (const auto& [order, id] : env) h.u64(order).u64(id);
      next[i] = h.digest();
      fp.set(next[i] % nbits);
    }
    std::swap(ids, next);
  }
  return fp;
}

// |a & b| / |a | b|; 1.0 when both are empty.
inline double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.nbits() != b.nbits()) throw ArgumentError("fingerprint lengths differ");
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += static_cast<std::size_t>(std::popcount(a.words()[i] & b.words()[i]));
    either += static_cast<std::size_t>(std::popcount(a.words()[i] | b.words()[i]));
  }
  if (either == 0) return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace selnoise::chem

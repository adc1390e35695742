#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace selnoise::chem {

struct ElementInfo {
  std::string_view symbol;
  int atomic_number;
  // Main-group column (13..17) used to shift valences for charged atoms; 0 otherwise.
  int group;
  // Allowed neutral valences, ascending. Empty means the element is not
  // valence-checked (metals and other exotic bracket atoms).
  std::array<int, 3> valences;
  int n_valences;
  bool organic_subset;
  bool aromatic_capable;
};

namespace detail {

// clang-format off
inline constexpr ElementInfo kElements[] = {
    {"H", 1, 0, {1, 0, 0}, 1, false, false},
    {"He", 2, 0, {}, 0, false, false},
    {"Li", 3, 0, {}, 0, false, false},
    {"Be", 4, 0, {}, 0, false, false},
    {"B", 5, 13, {3, 0, 0}, 1, true, true},
    {"C", 6, 14, {4, 0, 0}, 1, true, true},
    {"N", 7, 15, {3, 0, 0}, 1, true, true},
    {"O", 8, 16, {2, 0, 0}, 1, true, true},
    {"F", 9, 17, {1, 0, 0}, 1, true, false},
    {"Ne", 10, 0, {}, 0, false, false},
    {"Na", 11, 0, {}, 0, false, false},
    {"Mg", 12, 0, {}, 0, false, false},
    {"Al", 13, 0, {}, 0, false, false},
    {"Si", 14, 14, {4, 0, 0}, 1, false, false},
    {"P", 15, 15, {3, 5, 0}, 2, true, true},
    {"S", 16, 16, {2, 4, 6}, 3, true, true},
    {"Cl", 17, 17, {1, 0, 0}, 1, true, false},
    {"Ar", 18, 0, {}, 0, false, false},
    {"K", 19, 0, {}, 0, false, false},
    {"Ca", 20, 0, {}, 0, false, false},
    {"Ti", 22, 0, {}, 0, false, false},
    {"Cr", 24, 0, {}, 0, false, false},
    {"Mn", 25, 0, {}, 0, false, false},
    {"Fe", 26, 0, {}, 0, false, false},
    {"Co", 27, 0, {}, 0, false, false},
    {"Ni", 28, 0, {}, 0, false, false},
    {"Cu", 29, 0, {}, 0, false, false},
    {"Zn", 30, 0, {}, 0, false, false},
    {"Ga", 31, 0, {}, 0, false, false},
    {"Ge", 32, 14, {4, 0, 0}, 1, false, false},
    {"As", 33, 15, {3, 5, 0}, 2, false, true},
    {"Se", 34, 16, {2, 4, 6}, 3, false, true},
    {"Br", 35, 17, {1, 0, 0}, 1, true, false},
    {"Kr", 36, 0, {}, 0, false, false},
    {"Rb", 37, 0, {}, 0, false, false},
    {"Sr", 38, 0, {}, 0, false, false},
    {"Ag", 47, 0, {}, 0, false, false},
    {"Sn", 50, 0, {}, 0, false, false},
    {"Sb", 51, 0, {}, 0, false, false},
    {"Te", 52, 16, {2, 4, 6}, 3, false, true},
    {"I", 53, 17, {1, 0, 0}, 1, true, false},
    {"Xe", 54, 0, {}, 0, false, false},
    {"Cs", 55, 0, {}, 0, false, false},
    {"Ba", 56, 0, {}, 0, false, false},
    {"Pt", 78, 0, {}, 0, false, false},
    {"Au", 79, 0, {}, 0, false, false},
    {"Hg", 80, 0, {}, 0, false, false},
    {"Pb", 82, 0, {}, 0, false, false},
    {"Bi", 83, 0, {}, 0, false, false},
};
// clang-format on

}  // namespace detail

inline const ElementInfo* find_element(std::string_view symbol) {
  for (const auto& e : detail::kElements)
    if (e.symbol == symbol) return &e;
  return nullptr;
}

inline const ElementInfo& element(int atomic_number) {
  for (const auto& e : detail::kElements)
    if (e.atomic_number == atomic_number) return e;
  return detail::kElements[0];
}

// Allowed valences for an element carrying `charge`. Charged main-group atoms
// take the valences of their isoelectronic neighbour (N+ like C, O- like F).
inline std::vector<int> allowed_valences(const ElementInfo& e, int charge) {
  std::vector<int> out;
  for (int i = 0; i < e.n_valences; ++i) {
    int v = e.valences[i];
    if (charge != 0) {
      switch (e.group) {
        case 13: v -= charge; break;
        case 14: v -= charge < 0 ? -charge : charge; break;
        case 15:
        case 16:
        case 17: v += charge; break;
        default: break;
      }
    }
    if (v >= 0 && (out.empty() || out.back() < v)) out.push_back(v);
  }
  return out;
}

inline bool valence_checked(const ElementInfo& e) { return e.n_valences > 0; }

}  // namespace selnoise::chem

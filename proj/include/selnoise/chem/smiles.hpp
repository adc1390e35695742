#pragma once

// SMILES reading and writing.
//
// Supported input: organic-subset atoms (B C N O P S F Cl Br I), aromatic
// lowercase (b c n o p s), bracket atoms with isotope / H count / charge,
// bonds - = # : (plus / and \ read as single), branches and ring closures
// (digits and %nn). Stereo markers are read and dropped. Dot-disconnected
// input is rejected.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "selnoise/chem/element.hpp"
#include "selnoise/chem/molgraph.hpp"
#include "selnoise/core/error.hpp"

namespace selnoise::chem {

namespace detail {

struct ParsedAtom {
  Atom atom;
  bool bracket = false;
  std::size_t offset = 0;
};

struct RingOpen {
  int atom;
  std::optional<BondOrder> order;
  std::size_t offset;
};

class SmilesReader {
 public:
  explicit SmilesReader(std::string_view text) : s_(text) {}

  MolGraph read() {
    if (s_.empty()) throw ParseError("empty SMILES", 0);
    while (pos_ < s_.size()) step();
    if (!branches_.empty()) throw ParseError("unclosed branch", branch_offsets_.back());
    if (!rings_.empty()) throw ParseError("unclosed ring bond " + std::to_string(rings_.begin()->first),
                                          rings_.begin()->second.offset);
    if (pending_) throw ParseError("dangling bond", pending_offset_);
    if (atoms_.empty()) throw ParseError("no atoms", 0);
    return finish();
  }

 private:
  char peek(std::size_t k = 0) const { return pos_ + k < s_.size() ? s_[pos_ + k] : '\0'; }

  void step() {
    const char c = peek();
    switch (c) {
      case '(':
        if (prev_ < 0) throw ParseError("branch before any atom", pos_);
        if (pending_) throw ParseError("bond before branch", pos_);
        branches_.push_back(prev_);
        branch_offsets_.push_back(pos_);
        branch_empty_ = true;
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) throw ParseError("unbalanced ')'", pos_);
        if (branch_empty_) throw ParseError("empty branch", pos_);
        if (pending_) throw ParseError("dangling bond", pending_offset_);
        prev_ = branches_.back();
        branches_.pop_back();
        branch_offsets_.pop_back();
        branch_empty_ = false;
        ++pos_;
        return;
      case '-': set_bond(BondOrder::single); return;
      case '=': set_bond(BondOrder::double_); return;
      case '#': set_bond(BondOrder::triple); return;
      case ':': set_bond(BondOrder::aromatic); return;
      case '/':
      case '\\': set_bond(BondOrder::single); return;
      case '.': throw ParseError("multi-fragment SMILES not supported", pos_);
      case '%': {
        const std::size_t at = pos_;
        if (!std::isdigit(static_cast<unsigned char>(peek(1))) ||
            !std::isdigit(static_cast<unsigned char>(peek(2))))
          throw ParseError("malformed %nn ring bond", at);
        const int digit = (peek(1) - '0') * 10 + (peek(2) - '0');
        pos_ += 3;
        ring_bond(digit, at);
        return;
      }
      case '[': bracket_atom(); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t at = pos_++;
      ring_bond(c - '0', at);
      return;
    }
    organic_atom();
  }

  void set_bond(BondOrder order) {
    if (pending_) throw ParseError("consecutive bond symbols", pos_);
    if (prev_ < 0) throw ParseError("bond before any atom", pos_);
    pending_ = order;
    pending_offset_ = pos_++;
  }

  void organic_atom() {
    const std::size_t at = pos_;
    const char c = peek();
    std::string_view sym;
    bool aromatic = false;
    if (c == 'C' && peek(1) == 'l') {
      sym = "Cl";
    } else if (c == 'B' && peek(1) == 'r') {
      sym = "Br";
    } else if (std::string_view("BCNOPSFI").find(c) != std::string_view::npos && c != '\0') {
      sym = s_.substr(pos_, 1);
    } else if (std::string_view("bcnops").find(c) != std::string_view::npos && c != '\0') {
      sym = s_.substr(pos_, 1);
      aromatic = true;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", at);
    }
    pos_ += sym.size();
    std::string upper(sym);
    upper[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(upper[0])));
    const ElementInfo* e = find_element(upper);
    Atom atom;
    atom.atomic_number = e->atomic_number;
    atom.aromatic = aromatic;
    add_atom(atom, false, at);
  }

  void bracket_atom() {
    const std::size_t at = pos_++;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;  // isotope, discarded
    Atom atom;
    const char c = peek();
    std::string sym;
    if (std::isupper(static_cast<unsigned char>(c))) {
      sym.push_back(c);
      if (std::islower(static_cast<unsigned char>(peek(1)))) {
        std::string two = sym + peek(1);
        if (find_element(two)) sym = two;
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      atom.aromatic = true;
      std::string two{static_cast<char>(std::toupper(static_cast<unsigned char>(c))), peek(1)};
      if (std::islower(static_cast<unsigned char>(peek(1))) && find_element(two) &&
          find_element(two)->aromatic_capable) {
        sym = two;
      } else {
        sym = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      }
    } else {
      throw ParseError("expected element symbol", pos_);
    }
    const ElementInfo* e = find_element(sym);
    if (!e) throw ParseError("unknown element '" + sym + "'", pos_);
    if (atom.aromatic && !e->aromatic_capable) throw ParseError("element cannot be aromatic", pos_);
    atom.atomic_number = e->atomic_number;
    pos_ += sym.size();

    if (peek() == '@') {
      ++pos_;
      if (peek() == '@') {
        ++pos_;
      } else {
        while (std::isupper(static_cast<unsigned char>(peek())) && peek() != 'H') ++pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      }
    }
    if (peek() == 'H') {
      ++pos_;
      int h = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        h = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) h = h * 10 + (s_[pos_++] - '0');
      }
      atom.implicit_h = h;
    }
    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      const int unit = sign == '+' ? 1 : -1;
      ++pos_;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        int mag = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) mag = mag * 10 + (s_[pos_++] - '0');
        atom.charge = unit * mag;
      } else {
        atom.charge = unit;
        while (peek() == sign) {
          atom.charge += unit;
          ++pos_;
        }
      }
    }
    if (peek() == ':') {
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;  // atom class
    }
    if (peek() != ']') throw ParseError("unterminated bracket atom", at);
    ++pos_;
    add_atom(atom, true, at);
  }

  BondOrder implicit_order(int a, int b) const {
    return atoms_[a].atom.aromatic && atoms_[b].atom.aromatic ? BondOrder::aromatic : BondOrder::single;
  }

  void add_bond(int a, int b, BondOrder order, std::size_t at) {
    if (a == b) throw ParseError("ring bond to itself", at);
    for (const Bond& x : bonds_)
      if ((x.a == a && x.b == b) || (x.a == b && x.b == a)) throw ParseError("duplicate bond", at);
    bonds_.push_back({a, b, order});
  }

  void add_atom(const Atom& atom, bool bracket, std::size_t at) {
    const int idx = static_cast<int>(atoms_.size());
    atoms_.push_back({atom, bracket, at});
    if (prev_ >= 0) {
      add_bond(prev_, idx, pending_ ? *pending_ : implicit_order(prev_, idx), at);
    } else if (pending_) {
      throw ParseError("bond before any atom", pending_offset_);
    }
    pending_.reset();
    prev_ = idx;
    branch_empty_ = false;
  }

  void ring_bond(int digit, std::size_t at) {
    if (prev_ < 0) throw ParseError("ring bond before any atom", at);
    auto it = rings_.find(digit);
    if (it == rings_.end()) {
      rings_[digit] = {prev_, pending_, at};
    } else {
      const RingOpen open = it->second;
      rings_.erase(it);
      if (pending_ && open.order && *pending_ != *open.order)
        throw ParseError("conflicting ring bond orders", at);
      BondOrder order = pending_ ? *pending_ : open.order ? *open.order : implicit_order(open.atom, prev_);
      add_bond(open.atom, prev_, order, at);
    }
    pending_.reset();
  }

  MolGraph finish() {
    std::vector<int> bond_sum(atoms_.size(), 0);
    for (const Bond& b : bonds_) {
      bond_sum[b.a] += valence_units(b.order);
      bond_sum[b.b] += valence_units(b.order);
    }
    std::vector<Atom> atoms;
    atoms.reserve(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      Atom a = atoms_[i].atom;
      if (!atoms_[i].bracket) {
        auto h = default_hydrogens(a.atomic_number, a.aromatic, bond_sum[i]);
        if (!h) throw ParseError("valence violation on " + std::string(a.symbol()), atoms_[i].offset);
        a.implicit_h = *h;
      }
      atoms.push_back(a);
    }
    if (auto problem = MolGraph::check(atoms, bonds_)) {
      const std::size_t at = problem->atom >= 0 ? atoms_[problem->atom].offset : 0;
      throw ParseError(problem->message, at);
    }
    return MolGraph(std::move(atoms), std::move(bonds_));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<ParsedAtom> atoms_;
  std::vector<Bond> bonds_;
  int prev_ = -1;
  std::optional<BondOrder> pending_;
  std::size_t pending_offset_ = 0;
  std::vector<int> branches_;
  std::vector<std::size_t> branch_offsets_;
  bool branch_empty_ = false;
  std::map<int, RingOpen> rings_;
};

}  // namespace detail

// Throws ParseError carrying the byte offset of the problem.
inline MolGraph parse_smiles(std::string_view text) { return detail::SmilesReader(text).read(); }

// Canonical atom ranks by iterated neighbourhood refinement with
// deterministic tie breaking. Ranks are a permutation of 0..n-1.
inline std::vector<int> canonical_ranks(const MolGraph& mol) {
  const int n = static_cast<int>(mol.atom_count());
  std::vector<int> rank(n, 0);
  if (n == 0) return rank;

  using Key = std::vector<long long>;
  auto assign = [&](const std::vector<Key>& keys) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return keys[x] < keys[y]; });
    int classes = 0;
    for (int i = 0; i < n; ++i) {
      if (i > 0 && keys[order[i]] != keys[order[i - 1]]) ++classes;
      rank[order[i]] = classes;
    }
    return classes + 1;
  };
  auto refine = [&] {
    int classes = 0;
    for (;;) {
      std::vector<Key> keys(n);
      for (int i = 0; i < n; ++i) {
        std::vector<long long> nb;
        for (const auto& x : mol.neighbors(i))
          nb.push_back(static_cast<long long>(mol.bond(x.bond).order) * 1000003LL + rank[x.atom]);
        std::sort(nb.begin(), nb.end());
        keys[i].push_back(rank[i]);
        keys[i].insert(keys[i].end(), nb.begin(), nb.end());
      }
      const int next = assign(keys);
      if (next == classes) return next;
      classes = next;
    }
  };

  std::vector<Key> initial(n);
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    initial[i] = {mol.degree(i), a.atomic_number, a.charge, a.aromatic ? 1 : 0, a.implicit_h, mol.bond_sum(i)};
  }
  assign(initial);
  int classes = refine();
  while (classes < n) {
    // Break the lowest tied class by promoting its first member.
    std::vector<int> count(n, 0);
    for (int r : rank) ++count[r];
    int tied = 0;
    while (count[tied] < 2) ++tied;
    int pick = -1;
    for (int i = 0; i < n; ++i)
      if (rank[i] == tied) {
        pick = i;
        break;
      }
    std::vector<Key> keys(n);
    for (int i = 0; i < n; ++i) keys[i] = {2LL * rank[i] + (rank[i] == tied && i != pick ? 1 : 0)};
    assign(keys);
    classes = refine();
  }
  return rank;
}

namespace detail {

inline std::string atom_text(const MolGraph& mol, int i) {
  const Atom& a = mol.atom(i);
  const ElementInfo& e = element(a.atomic_number);
  std::string sym(e.symbol);
  if (a.aromatic) sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
  const bool bare = e.organic_subset && a.charge == 0 && (!a.aromatic || e.aromatic_capable) &&
                    default_hydrogens(a.atomic_number, a.aromatic, mol.bond_sum(i)) == a.implicit_h;
  if (bare) return sym;
  std::string out = "[" + sym;
  if (a.implicit_h > 0) {
    out += 'H';
    if (a.implicit_h > 1) out += std::to_string(a.implicit_h);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    const int mag = a.charge > 0 ? a.charge : -a.charge;
    if (mag > 1) out += std::to_string(mag);
  }
  out += ']';
  return out;
}

inline std::string bond_text(const MolGraph& mol, const Bond& b) {
  const bool both_aromatic = mol.atom(b.a).aromatic && mol.atom(b.b).aromatic;
  switch (b.order) {
    case BondOrder::single: return both_aromatic ? "-" : "";
    case BondOrder::double_: return "=";
    case BondOrder::triple: return "#";
    case BondOrder::aromatic: return both_aromatic ? "" : ":";
  }
  return "";
}

}  // namespace detail

// Depth-first emission from the lowest-ranked atom, visiting neighbours in
// rank order; the output re-parses to an isomorphic graph.
inline std::string write_smiles(const MolGraph& mol) {
  const int n = static_cast<int>(mol.atom_count());
  if (n == 0) return {};
  const std::vector<int> rank = canonical_ranks(mol);

  std::vector<std::vector<int>> children(n);
  // Ring-closure bonds per atom, in the order they must be written.
  std::vector<std::vector<int>> closures(n);
  std::vector<char> visited(n, 0), bond_used(mol.bond_count(), 0);
  std::vector<int> order;

  auto sorted_neighbors = [&](int v) {
    std::vector<Neighbor> nb(mol.neighbors(v).begin(), mol.neighbors(v).end());
    std::sort(nb.begin(), nb.end(), [&](const Neighbor& x, const Neighbor& y) { return rank[x.atom] < rank[y.atom]; });
    return nb;
  };

  int root = static_cast<int>(std::min_element(rank.begin(), rank.end()) - rank.begin());
  struct Frame {
    int v;
    std::vector<Neighbor> nb;
    std::size_t next;
  };
  std::vector<Frame> stack;
  visited[root] = 1;
  order.push_back(root);
  stack.push_back({root, sorted_neighbors(root), 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next == f.nb.size()) {
      stack.pop_back();
      continue;
    }
    const Neighbor x = f.nb[f.next++];
    if (bond_used[x.bond]) continue;
    bond_used[x.bond] = 1;
    if (!visited[x.atom]) {
      children[f.v].push_back(x.bond);
      visited[x.atom] = 1;
      order.push_back(x.atom);
      const int w = x.atom;
      stack.push_back({w, sorted_neighbors(w), 0});
    } else {
      closures[x.atom].push_back(x.bond);  // opened at the earlier atom
      closures[f.v].push_back(x.bond);
    }
  }

  std::vector<int> position(n);
  for (int i = 0; i < n; ++i) position[order[i]] = i;

  std::map<int, int> open_digit;  // bond -> digit
  std::vector<char> digit_busy(100, 0);
  std::string out;

  struct EmitFrame {
    int v;
    std::size_t child;
  };
  auto emit_atom = [&](int v) {
    out += detail::atom_text(mol, v);
    auto& cl = closures[v];
    // Closings (other end already written) before openings; each group by partner position.
    std::stable_sort(cl.begin(), cl.end(), [&](int x, int y) {
      const int ox = mol.bond(x).other(v), oy = mol.bond(y).other(v);
      const bool cx = position[ox] < position[v], cy = position[oy] < position[v];
      if (cx != cy) return cx;
      return position[ox] < position[oy];
    });
    for (int b : cl) {
      const int other = mol.bond(b).other(v);
      if (position[other] < position[v]) {
        const int d = open_digit.at(b);
        digit_busy[d] = 0;
        out += d < 10 ? std::to_string(d) : "%" + std::to_string(d);
      } else {
        int d = 1;
        while (digit_busy[d]) ++d;
        digit_busy[d] = 1;
        open_digit[b] = d;
        out += detail::bond_text(mol, mol.bond(b));
        out += d < 10 ? std::to_string(d) : "%" + std::to_string(d);
      }
    }
  };

  std::vector<EmitFrame> emit{{root, 0}};
  emit_atom(root);
  while (!emit.empty()) {
    EmitFrame& f = emit.back();
    const auto& kids = children[f.v];
    if (f.child == kids.size()) {
      emit.pop_back();
      if (!emit.empty() && emit.back().child < children[emit.back().v].size()) out += ')';
      continue;
    }
    const int b = kids[f.child++];
    const bool last = f.child == kids.size();
    if (!last) out += '(';
    out += detail::bond_text(mol, mol.bond(b));
    const int w = mol.bond(b).other(f.v);
    emit_atom(w);
    emit.push_back({w, 0});
  }
  return out;
}

}  // namespace selnoise::chem

#include "cnf/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cnf/error.hpp"

namespace cnf {

namespace {

constexpr std::array<std::string_view, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",
    "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh",
    "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re",
    "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db",
    "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

// Elements that may appear as lowercase aromatic symbols inside brackets.
constexpr std::array<std::string_view, 9> kAromaticBracket = {"B", "C", "N", "O", "P", "S", "Se", "As", "Te"};
constexpr std::array<std::string_view, 6> kAromaticOrganic = {"B", "C", "N", "O", "P", "S"};
constexpr std::array<std::string_view, 10> kOrganic = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view s) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

std::string capitalise(std::string_view lower) {
  std::string s(lower);
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

struct PendingBond {
  std::optional<BondOrder> order;
  std::optional<BondDirection> direction;  // relative to the atom it was written after
  bool present() const { return order.has_value(); }
};

struct OpenRing {
  AtomIndex atom;
  PendingBond bond;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  MolGraph run() {
    if (text_.empty()) throw Error(ErrorCode::EmptyInput, "empty SMILES");
    for (char c : text_) {
      if (static_cast<unsigned char>(c) > 127) fail(ErrorCode::SyntaxError, "non-ASCII character");
    }
    while (pos_ < text_.size()) step();
    if (!branches_.empty()) fail(ErrorCode::UnbalancedParenthesis, "unclosed branch");
    if (!rings_.empty())
      fail(ErrorCode::UnmatchedRingClosure, "ring bond " + std::to_string(rings_.begin()->first) + " never closed");
    if (pending_.present()) fail(ErrorCode::SyntaxError, "dangling bond symbol at end of input");
    if (atoms_.empty()) fail(ErrorCode::EmptyInput, "no atoms");
    return MolGraph(std::move(atoms_), std::move(bonds_));
  }

 private:
  [[noreturn]] void fail(ErrorCode code, const std::string& what) const {
    throw Error(code, what + " at position " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void step() {
    const char c = peek();
    switch (c) {
      case '(': open_branch(); return;
      case ')': close_branch(); return;
      case '-': set_bond(BondOrder::Single, std::nullopt); return;
      case '=': set_bond(BondOrder::Double, std::nullopt); return;
      case '#': set_bond(BondOrder::Triple, std::nullopt); return;
      case ':': set_bond(BondOrder::Aromatic, std::nullopt); return;
      case '/': set_bond(BondOrder::Single, BondDirection::Up); return;
      case '\\': set_bond(BondOrder::Single, BondDirection::Down); return;
      case '.': fail(ErrorCode::MultiFragmentInput, "multi-fragment SMILES");
      case '[': add_atom(parse_bracket()); return;
      case '%': ring_bond(parse_ring_number()); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ++pos_;
      ring_bond(c - '0');
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
      add_atom(parse_organic());
      return;
    }
    fail(ErrorCode::SyntaxError, std::string("unexpected character '") + c + "'");
  }

  void open_branch() {
    if (!previous_) fail(ErrorCode::SyntaxError, "branch before any atom");
    if (pending_.present()) fail(ErrorCode::SyntaxError, "bond symbol before '('");
    branches_.push_back({*previous_, atoms_.size()});
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty()) fail(ErrorCode::UnbalancedParenthesis, "')' without matching '('");
    if (pending_.present()) fail(ErrorCode::SyntaxError, "dangling bond symbol before ')'");
    if (branches_.back().atoms_at_open == atoms_.size()) fail(ErrorCode::SyntaxError, "empty branch");
    previous_ = branches_.back().atom;
    branches_.pop_back();
    ++pos_;
  }

  void set_bond(BondOrder order, std::optional<BondDirection> direction) {
    if (pending_.present()) fail(ErrorCode::SyntaxError, "two consecutive bond symbols");
    if (!previous_) fail(ErrorCode::SyntaxError, "bond symbol before any atom");
    pending_ = {order, direction};
    ++pos_;
  }

  int parse_ring_number() {
    ++pos_;  // '%'
    const char d1 = peek();
    const char d2 = peek(1);
    if (!std::isdigit(static_cast<unsigned char>(d1)) || !std::isdigit(static_cast<unsigned char>(d2)))
      fail(ErrorCode::SyntaxError, "'%' must be followed by two digits");
    pos_ += 2;
    return (d1 - '0') * 10 + (d2 - '0');
  }

  BondOrder implicit_order(AtomIndex a, AtomIndex b) const {
    return atoms_[a].aromatic && atoms_[b].aromatic ? BondOrder::Aromatic : BondOrder::Single;
  }

  void add_bond(AtomIndex a, AtomIndex b, BondOrder order, std::optional<BondDirection> direction) {
    if (a == b) fail(ErrorCode::InvalidBond, "ring closure bonds an atom to itself");
    for (const Bond& existing : bonds_) {
      if ((existing.a == a && existing.b == b) || (existing.a == b && existing.b == a))
        fail(ErrorCode::InvalidBond, "duplicate bond");
    }
    bonds_.push_back({a, b, order, direction});
  }

  void ring_bond(int number) {
    if (!previous_) fail(ErrorCode::SyntaxError, "ring-closure digit before any atom");
    const AtomIndex here = *previous_;
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, OpenRing{here, pending_});
      pending_ = {};
      return;
    }
    const OpenRing open = it->second;
    rings_.erase(it);
    if (open.bond.present() && pending_.present() && *open.bond.order != *pending_.order)
      fail(ErrorCode::InvalidBond, "conflicting bond orders on ring closure " + std::to_string(number));
    BondOrder order = implicit_order(open.atom, here);
    if (open.bond.present()) order = *open.bond.order;
    else if (pending_.present()) order = *pending_.order;
    std::optional<BondDirection> direction = open.bond.direction;
    if (!direction && pending_.direction) {
      // Written at the closing atom, so it reads closing -> opening; store opening -> closing.
      direction = *pending_.direction == BondDirection::Up ? BondDirection::Down : BondDirection::Up;
    }
    pending_ = {};
    add_bond(open.atom, here, order, direction);
  }

  void add_atom(Atom atom) {
    const AtomIndex index = atoms_.size();
    atoms_.push_back(std::move(atom));
    if (previous_) {
      const BondOrder order = pending_.present() ? *pending_.order : implicit_order(*previous_, index);
      add_bond(*previous_, index, order, pending_.direction);
    }
    pending_ = {};
    previous_ = index;
  }

  Atom parse_organic() {
    const char c = peek();
    Atom atom;
    if (c == 'B' && peek(1) == 'r') {
      atom.element = "Br";
      pos_ += 2;
    } else if (c == 'C' && peek(1) == 'l') {
      atom.element = "Cl";
      pos_ += 2;
    } else if (std::isupper(static_cast<unsigned char>(c)) && contains(kOrganic, std::string_view(&c, 1))) {
      atom.element = std::string(1, c);
      ++pos_;
    } else if (std::islower(static_cast<unsigned char>(c)) && contains(kAromaticOrganic, capitalise(std::string(1, c)))) {
      atom.element = capitalise(std::string(1, c));
      atom.aromatic = true;
      ++pos_;
    } else {
      fail(ErrorCode::UnknownElement, std::string("'") + c + "' is not an organic-subset atom");
    }
    return atom;
  }

  unsigned parse_number() {
    unsigned value = 0;
    std::size_t digits = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + static_cast<unsigned>(peek() - '0');
      ++pos_;
      if (++digits > 4) fail(ErrorCode::MalformedBracketAtom, "number too long in bracket atom");
    }
    return value;
  }

  Atom parse_bracket() {
    ++pos_;  // '['
    Atom atom;
    atom.bracket = true;
    if (std::isdigit(static_cast<unsigned char>(peek()))) atom.isotope = parse_number();

    const char c = peek();
    if (std::isupper(static_cast<unsigned char>(c))) {
      const char next = peek(1);
      std::string two{c, next};
      if (std::islower(static_cast<unsigned char>(next)) && is_known_element(two)) {
        atom.element = two;
        pos_ += 2;
      } else if (is_known_element(std::string_view(&c, 1))) {
        atom.element = std::string(1, c);
        ++pos_;
      } else {
        fail(ErrorCode::UnknownElement, std::string("unknown element '") + c + "'");
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      const std::string two = capitalise(std::string{c, peek(1)});
      if (std::islower(static_cast<unsigned char>(peek(1))) && contains(kAromaticBracket, two)) {
        atom.element = two;
        pos_ += 2;
      } else if (contains(kAromaticBracket, capitalise(std::string(1, c)))) {
        atom.element = capitalise(std::string(1, c));
        ++pos_;
      } else {
        fail(ErrorCode::UnknownElement, std::string("unknown aromatic element '") + c + "'");
      }
      atom.aromatic = true;
    } else if (c == '*') {
      fail(ErrorCode::UnknownElement, "wildcard atoms are not supported");
    } else {
      fail(ErrorCode::MalformedBracketAtom, "bracket atom without element symbol");
    }

    if (peek() == '@') {
      ++pos_;
      atom.chirality = "@";
      if (peek() == '@') {
        ++pos_;
        atom.chirality = "@@";
      } else if (std::isupper(static_cast<unsigned char>(peek())) && peek() != 'H') {
        fail(ErrorCode::MalformedBracketAtom, "extended chirality classes are not supported");
      }
    }

    atom.explicit_h = 0u;
    if (peek() == 'H') {
      ++pos_;
      atom.explicit_h = std::isdigit(static_cast<unsigned char>(peek())) ? parse_number() : 1u;
    }

    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      ++pos_;
      int magnitude = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = static_cast<int>(parse_number());
      } else {
        while (peek() == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.formal_charge = sign == '+' ? magnitude : -magnitude;
    }

    if (peek() == ':') {
      ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail(ErrorCode::MalformedBracketAtom, "empty atom class");
      parse_number();  // atom classes are accepted and dropped
    }

    if (peek() != ']') fail(ErrorCode::MalformedBracketAtom, "expected ']'");
    ++pos_;
    return atom;
  }

  struct OpenBranch {
    AtomIndex atom;
    std::size_t atoms_at_open;
  };

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::optional<AtomIndex> previous_;
  PendingBond pending_;
  std::vector<OpenBranch> branches_;
  std::map<int, OpenRing> rings_;
};

// ---------------------------------------------------------------------------
// Writer

struct RingEvent {
  std::size_t bond;
  AtomIndex partner;
  bool opening;
};

class Writer {
 public:
  Writer(const MolGraph& graph, const TraversalOrder& order)
      : graph_(graph),
        order_(order),
        visited_(graph.atom_count(), false),
        edge_used_(graph.bond_count(), false),
        parent_bond_(graph.atom_count(), kNone),
        children_(graph.atom_count()),
        rings_(graph.atom_count()) {}

  std::string run() {
    visited_[order_.start] = true;
    build_tree(order_.start);
    sort_openings();
    std::string out;
    out.reserve(graph_.atom_count() * 3);
    emit(order_.start, out);
    return out;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void build_tree(AtomIndex u) {
    for (AtomIndex v : order_.neighbor_perm[u]) {
      const std::size_t bond = *graph_.bond_between(u, v);
      if (edge_used_[bond]) continue;
      edge_used_[bond] = true;
      if (!visited_[v]) {
        visited_[v] = true;
        parent_bond_[v] = bond;
        children_[u].push_back(v);
        build_tree(v);
      } else {
        // v is an ancestor still on the walk: it opens the ring, u closes it.
        rings_[u].push_back({bond, v, false});
        rings_[v].push_back({bond, u, true});
      }
    }
  }

  // Openings were recorded in discovery order; emit them in the opener's
  // neighbour order so the traversal order fully determines the string.
  void sort_openings() {
    for (AtomIndex u = 0; u < graph_.atom_count(); ++u) {
      auto& events = rings_[u];
      const auto& perm = order_.neighbor_perm[u];
      auto position = [&](AtomIndex partner) {
        return std::find(perm.begin(), perm.end(), partner) - perm.begin();
      };
      std::stable_sort(events.begin(), events.end(), [&](const RingEvent& x, const RingEvent& y) {
        if (x.opening != y.opening) return !x.opening;  // closings first
        return position(x.partner) < position(y.partner);
      });
    }
  }

  void emit_bond(std::size_t bond_index, AtomIndex from, std::string& out) const {
    const Bond& bond = graph_.bond(bond_index);
    const bool both_aromatic = graph_.atom(bond.a).aromatic && graph_.atom(bond.b).aromatic;
    if (bond.direction) {
      BondDirection dir = *bond.direction;
      if (from != bond.a) dir = dir == BondDirection::Up ? BondDirection::Down : BondDirection::Up;
      out += dir == BondDirection::Up ? '/' : '\\';
      return;
    }
    switch (bond.order) {
      case BondOrder::Single:
        if (both_aromatic) out += '-';
        break;
      case BondOrder::Double: out += '='; break;
      case BondOrder::Triple: out += '#'; break;
      case BondOrder::Aromatic:
        if (!both_aromatic) out += ':';
        break;
    }
  }

  static void emit_atom(const Atom& atom, std::string& out) {
    const bool organic = atom.aromatic ? contains(kAromaticOrganic, atom.element) : contains(kOrganic, atom.element);
    const bool plain = !atom.isotope && !atom.explicit_h.value_or(0) && atom.formal_charge == 0 && atom.chirality.empty();
    auto symbol = [&] {
      std::string s = atom.element;
      if (atom.aromatic) std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
      return s;
    };
    if (!atom.bracket && organic && plain) {
      out += symbol();
      return;
    }
    out += '[';
    if (atom.isotope) out += std::to_string(*atom.isotope);
    out += symbol();
    out += atom.chirality;
    if (const unsigned h = atom.explicit_h.value_or(0); h > 0) {
      out += 'H';
      if (h > 1) out += std::to_string(h);
    }
    if (atom.formal_charge != 0) {
      out += atom.formal_charge > 0 ? '+' : '-';
      const int magnitude = atom.formal_charge > 0 ? atom.formal_charge : -atom.formal_charge;
      if (magnitude > 1) out += std::to_string(magnitude);
    }
    out += ']';
  }

  static void emit_digit(int digit, std::string& out) {
    if (digit < 10) {
      out += static_cast<char>('0' + digit);
    } else {
      out += '%';
      out += std::to_string(digit);
    }
  }

  void emit(AtomIndex u, std::string& out) {
    emit_atom(graph_.atom(u), out);
    std::vector<int> released;
    for (const RingEvent& event : rings_[u]) {
      if (!event.opening) {
        const int digit = digit_of_bond_.at(event.bond);
        emit_digit(digit, out);
        released.push_back(digit);
        continue;
      }
      int digit = 1;
      while (digits_in_use_.count(digit)) ++digit;
      if (digit > 99) throw Error(ErrorCode::InvalidGraph, "more than 99 simultaneously open rings");
      digits_in_use_.insert(digit);
      digit_of_bond_[event.bond] = digit;
      emit_bond(event.bond, u, out);
      emit_digit(digit, out);
    }
    for (int digit : released) digits_in_use_.erase(digit);

    const auto& kids = children_[u];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool branch = i + 1 < kids.size();
      if (branch) out += '(';
      emit_bond(parent_bond_[kids[i]], u, out);
      emit(kids[i], out);
      if (branch) out += ')';
    }
  }

  const MolGraph& graph_;
  const TraversalOrder& order_;
  std::vector<bool> visited_;
  std::vector<bool> edge_used_;
  std::vector<std::size_t> parent_bond_;
  std::vector<std::vector<AtomIndex>> children_;
  std::vector<std::vector<RingEvent>> rings_;
  std::set<int> digits_in_use_;
  std::map<std::size_t, int> digit_of_bond_;
};

}  // namespace

bool is_known_element(std::string_view symbol) { return contains(kElements, symbol); }

MolGraph parse_smiles(std::string_view text) { return Parser(text).run(); }

std::string write_smiles(const MolGraph& graph, const TraversalOrder& order) {
  validate_order(graph, order);
  return Writer(graph, order).run();
}

}  // namespace cnf

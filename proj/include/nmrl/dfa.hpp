#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nmrl/types.hpp"

namespace nmrl {

/// Total-transition deterministic finite automaton over the event alphabet.
/// Doubles as learned reward machine and as ground-truth reward monitor.
struct Dfa {
  std::int32_t n_states = 1;
  std::int32_t n_symbols = 1;
  std::vector<std::int32_t> delta;  // n_states * n_symbols, row-major
  std::int32_t initial = 0;
  std::vector<std::uint8_t> accepting;

  Dfa() = default;
  Dfa(std::int32_t states, std::int32_t symbols);

  static Dfa single_state(std::int32_t n_symbols, bool accept = false);

  std::int32_t next(std::int32_t q, SymbolId a) const {
    return delta[static_cast<std::size_t>(q) * n_symbols + a];
  }
  void set_transition(std::int32_t q, SymbolId a, std::int32_t to) {
    delta[static_cast<std::size_t>(q) * n_symbols + a] = to;
  }
  bool is_accepting(std::int32_t q) const {
    return accepting[static_cast<std::size_t>(q)] != 0;
  }

  std::int32_t run(const Word& w) const;
  bool accepts(const Word& w) const { return is_accepting(run(w)); }

  /// Throws std::invalid_argument if delta is not total or any index is out
  /// of range.
  void validate() const;

  bool operator==(const Dfa&) const = default;
};

/// Language-equivalent minimal DFA with canonical state numbering by
/// breadth-first order from the initial state (symbol order breaks ties).
/// Unreachable states are dropped.
Dfa minimize(const Dfa& d);

/// Shortest word on which the two automata disagree, found by BFS over the
/// product; nullopt when the languages are equal. Requires equal alphabets.
std::optional<Word> counterexample(const Dfa& a, const Dfa& b);

inline bool equivalent(const Dfa& a, const Dfa& b) {
  return !counterexample(a, b).has_value();
}

/// MDP state paired with one machine state per tracked reward type.
struct ProductState {
  StateId mdp = 0;
  std::vector<std::int32_t> machine;

  bool operator==(const ProductState&) const = default;
};

ProductState product_initial(StateId s0, const std::vector<Dfa>& machines);

/// Advances the MDP component to s' and each machine component on the event
/// symbol; filtered (no-effect) steps leave every machine component as is.
ProductState product_step(const ProductState& p, StateId next_mdp,
                          std::optional<SymbolId> sym,
                          const std::vector<Dfa>& machines);

/// Dense/hashed indexing helper over an MDP state count and a fixed list of
/// machine sizes.
struct ProductSpace {
  std::int64_t mdp_count = 1;
  std::vector<std::int32_t> machine_sizes;

  static ProductSpace of(std::int64_t mdp_count,
                         const std::vector<Dfa>& machines);

  std::int64_t machine_combo_count() const;
  std::int64_t machine_index(const std::vector<std::int32_t>& machine) const;
  std::int64_t index(const ProductState& p) const {
    return p.mdp * machine_combo_count() + machine_index(p.machine);
  }
};

/// Tabular text format: header `<n_states> <alphabet>`, one transition row
/// per state, then the accepting list line.
std::string to_table_text(const Dfa& d);
Dfa from_table_text(std::istream& in);

/// Graphviz dot rendering of the automaton.
std::string to_dot(const Dfa& d, const std::string& name = "dfa");

}  // namespace nmrl

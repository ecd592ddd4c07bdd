#pragma once

#include <cstdint>
#include <vector>

namespace nmrl {

using StateId = std::int32_t;   // index into an environment's enumerated state set
using ActionId = std::int32_t;  // index into an environment's action set
using SymbolId = std::int32_t;  // index into the event alphabet

using Word = std::vector<SymbolId>;

enum class MarkovianHint { Unknown, Markovian, NonMarkovian };

/// One entry of an environment's declared reward-type list. Reward values are
/// deterministic per type; the id is the position in the list.
struct RewardType {
  int id = 0;
  double value = 0.0;
  MarkovianHint hint = MarkovianHint::Unknown;
};

enum class AlphabetMode { ActionOnly, ActionState };

/// An event as observed by the automata-learning side: the applied action and
/// (in ActionState mode) the state it produced.
struct EventSymbol {
  ActionId action = 0;
  StateId effect_state = 0;
};

/// Finite, enumerated alphabet of event symbols. In ActionOnly mode a symbol
/// is the action label of an effective action; in ActionState mode it is the
/// (action, resulting state) pair.
struct EventAlphabet {
  AlphabetMode mode = AlphabetMode::ActionOnly;
  int n_actions = 0;
  StateId n_states = 0;

  int size() const {
    return mode == AlphabetMode::ActionOnly
               ? n_actions
               : n_actions * static_cast<int>(n_states);
  }
  SymbolId encode(const EventSymbol& e) const {
    return mode == AlphabetMode::ActionOnly
               ? e.action
               : e.action * n_states + e.effect_state;
  }
  EventSymbol decode(SymbolId s) const {
    if (mode == AlphabetMode::ActionOnly) return {s, 0};
    return {s / n_states, s % n_states};
  }
};

struct WordHash {
  std::size_t operator()(const Word& w) const {
    std::size_t h = 0x9e3779b97f4a7c15ull ^ w.size();
    for (SymbolId s : w) {
      h ^= static_cast<std::size_t>(s) + 0x9e3779b9 + (h << 6) + (h >> 2);
    }
    return h;
  }
};

}  // namespace nmrl

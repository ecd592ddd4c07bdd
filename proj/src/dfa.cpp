#include "nmrl/dfa.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nmrl {

Dfa::Dfa(std::int32_t states, std::int32_t symbols)
    : n_states(states),
      n_symbols(symbols),
      delta(static_cast<std::size_t>(states) * symbols, 0),
      accepting(static_cast<std::size_t>(states), 0) {}

Dfa Dfa::single_state(std::int32_t n_symbols, bool accept) {
  Dfa d(1, n_symbols);
  d.accepting[0] = accept ? 1 : 0;
  return d;
}

std::int32_t Dfa::run(const Word& w) const {
  std::int32_t q = initial;
  for (SymbolId s : w) q = next(q, s);
  return q;
}

void Dfa::validate() const {
  if (n_states < 1 || n_symbols < 1)
    throw std::invalid_argument("dfa: empty state set or alphabet");
  if (initial < 0 || initial >= n_states)
    throw std::invalid_argument("dfa: initial state out of range");
  if (delta.size() != static_cast<std::size_t>(n_states) * n_symbols ||
      accepting.size() != static_cast<std::size_t>(n_states))
    throw std::invalid_argument("dfa: table size mismatch");
  for (std::int32_t to : delta) {
    if (to < 0 || to >= n_states)
      throw std::invalid_argument("dfa: transition target out of range");
  }
}

namespace {

// Reachable-state restriction in BFS order; returns old->new mapping.
Dfa restrict_reachable(const Dfa& d) {
  std::vector<std::int32_t> order;
  std::vector<std::int32_t> remap(static_cast<std::size_t>(d.n_states), -1);
  std::deque<std::int32_t> queue{d.initial};
  remap[static_cast<std::size_t>(d.initial)] = 0;
  order.push_back(d.initial);
  while (!queue.empty()) {
    std::int32_t q = queue.front();
    queue.pop_front();
    for (SymbolId a = 0; a < d.n_symbols; ++a) {
      std::int32_t to = d.next(q, a);
      if (remap[static_cast<std::size_t>(to)] < 0) {
        remap[static_cast<std::size_t>(to)] =
            static_cast<std::int32_t>(order.size());
        order.push_back(to);
        queue.push_back(to);
      }
    }
  }
  Dfa out(static_cast<std::int32_t>(order.size()), d.n_symbols);
  out.initial = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::int32_t old_q = order[i];
    out.accepting[i] = d.accepting[static_cast<std::size_t>(old_q)];
    for (SymbolId a = 0; a < d.n_symbols; ++a) {
      out.set_transition(static_cast<std::int32_t>(i), a,
                         remap[static_cast<std::size_t>(d.next(old_q, a))]);
    }
  }
  return out;
}

}  // namespace

Dfa minimize(const Dfa& d) {
  d.validate();
  Dfa r = restrict_reachable(d);

  // Moore partition refinement: start from accepting/rejecting, split by
  // successor-class signatures until stable.
  std::vector<std::int32_t> cls(static_cast<std::size_t>(r.n_states));
  for (std::int32_t q = 0; q < r.n_states; ++q)
    cls[static_cast<std::size_t>(q)] = r.accepting[static_cast<std::size_t>(q)] ? 1 : 0;

  for (;;) {
    std::map<std::vector<std::int32_t>, std::int32_t> sig_to_class;
    std::vector<std::int32_t> next_cls(static_cast<std::size_t>(r.n_states));
    for (std::int32_t q = 0; q < r.n_states; ++q) {
      std::vector<std::int32_t> sig;
      sig.reserve(static_cast<std::size_t>(r.n_symbols) + 1);
      sig.push_back(cls[static_cast<std::size_t>(q)]);
      for (SymbolId a = 0; a < r.n_symbols; ++a)
        sig.push_back(cls[static_cast<std::size_t>(r.next(q, a))]);
      auto [it, inserted] = sig_to_class.emplace(
          std::move(sig), static_cast<std::int32_t>(sig_to_class.size()));
      next_cls[static_cast<std::size_t>(q)] = it->second;
    }
    bool changed = false;
    for (std::int32_t q = 0; q < r.n_states; ++q) {
      if (next_cls[static_cast<std::size_t>(q)] !=
          cls[static_cast<std::size_t>(q)]) {
        changed = true;
        break;
      }
    }
    std::int32_t n_classes = static_cast<std::int32_t>(
        1 + *std::max_element(next_cls.begin(), next_cls.end()));
    cls = std::move(next_cls);
    if (!changed || n_classes == r.n_states) break;
  }

  // Quotient on representative transitions, then canonicalize by BFS.
  std::int32_t n_classes = 1 + *std::max_element(cls.begin(), cls.end());
  Dfa q(n_classes, r.n_symbols);
  q.initial = cls[static_cast<std::size_t>(r.initial)];
  for (std::int32_t s = 0; s < r.n_states; ++s) {
    std::int32_t c = cls[static_cast<std::size_t>(s)];
    q.accepting[static_cast<std::size_t>(c)] =
        r.accepting[static_cast<std::size_t>(s)];
    for (SymbolId a = 0; a < r.n_symbols; ++a)
      q.set_transition(c, a, cls[static_cast<std::size_t>(r.next(s, a))]);
  }
  return restrict_reachable(q);
}

std::optional<Word> counterexample(const Dfa& a, const Dfa& b) {
  a.validate();
  b.validate();
  if (a.n_symbols != b.n_symbols)
    throw std::invalid_argument("counterexample: alphabet mismatch");

  struct Visit {
    std::int64_t parent = -1;
    SymbolId via = -1;
  };
  const std::int64_t nb = b.n_states;
  std::vector<Visit> visited(static_cast<std::size_t>(a.n_states) *
                             static_cast<std::size_t>(nb));
  std::vector<std::uint8_t> seen(visited.size(), 0);
  auto idx = [nb](std::int32_t qa, std::int32_t qb) {
    return static_cast<std::int64_t>(qa) * nb + qb;
  };

  std::deque<std::pair<std::int32_t, std::int32_t>> queue;
  queue.emplace_back(a.initial, b.initial);
  seen[static_cast<std::size_t>(idx(a.initial, b.initial))] = 1;

  auto rebuild = [&](std::int32_t qa, std::int32_t qb) {
    Word w;
    std::int64_t cur = idx(qa, qb);
    while (visited[static_cast<std::size_t>(cur)].parent >= 0) {
      w.push_back(visited[static_cast<std::size_t>(cur)].via);
      cur = visited[static_cast<std::size_t>(cur)].parent;
    }
    std::reverse(w.begin(), w.end());
    return w;
  };

  while (!queue.empty()) {
    auto [qa, qb] = queue.front();
    queue.pop_front();
    if (a.is_accepting(qa) != b.is_accepting(qb)) return rebuild(qa, qb);
    for (SymbolId s = 0; s < a.n_symbols; ++s) {
      std::int32_t na = a.next(qa, s);
      std::int32_t nb2 = b.next(qb, s);
      std::int64_t i = idx(na, nb2);
      if (!seen[static_cast<std::size_t>(i)]) {
        seen[static_cast<std::size_t>(i)] = 1;
        visited[static_cast<std::size_t>(i)] = {idx(qa, qb), s};
        queue.emplace_back(na, nb2);
      }
    }
  }
  return std::nullopt;
}

ProductState product_initial(StateId s0, const std::vector<Dfa>& machines) {
  ProductState p;
  p.mdp = s0;
  p.machine.reserve(machines.size());
  for (const Dfa& d : machines) p.machine.push_back(d.initial);
  return p;
}

ProductState product_step(const ProductState& p, StateId next_mdp,
                          std::optional<SymbolId> sym,
                          const std::vector<Dfa>& machines) {
  assert(p.machine.size() == machines.size());
  ProductState out = p;
  out.mdp = next_mdp;
  if (sym.has_value()) {
    for (std::size_t i = 0; i < machines.size(); ++i)
      out.machine[i] = machines[i].next(p.machine[i], *sym);
  }
  return out;
}

ProductSpace ProductSpace::of(std::int64_t mdp_count,
                              const std::vector<Dfa>& machines) {
  ProductSpace ps;
  ps.mdp_count = mdp_count;
  ps.machine_sizes.reserve(machines.size());
  for (const Dfa& d : machines) ps.machine_sizes.push_back(d.n_states);
  return ps;
}

std::int64_t ProductSpace::machine_combo_count() const {
  std::int64_t n = 1;
  for (std::int32_t s : machine_sizes) n *= s;
  return n;
}

std::int64_t ProductSpace::machine_index(
    const std::vector<std::int32_t>& machine) const {
  assert(machine.size() == machine_sizes.size());
  std::int64_t idx = 0;
  for (std::size_t i = 0; i < machine.size(); ++i)
    idx = idx * machine_sizes[i] + machine[i];
  return idx;
}

std::string to_table_text(const Dfa& d) {
  std::ostringstream out;
  out << d.n_states << ' ' << d.n_symbols << '\n';
  out << d.initial << '\n';
  for (std::int32_t q = 0; q < d.n_states; ++q) {
    for (SymbolId a = 0; a < d.n_symbols; ++a) {
      if (a > 0) out << ' ';
      out << d.next(q, a);
    }
    out << '\n';
  }
  bool first = true;
  for (std::int32_t q = 0; q < d.n_states; ++q) {
    if (d.is_accepting(q)) {
      if (!first) out << ' ';
      out << q;
      first = false;
    }
  }
  out << '\n';
  return out.str();
}

Dfa from_table_text(std::istream& in) {
  std::int32_t n_states = 0, n_symbols = 0;
  if (!(in >> n_states >> n_symbols))
    throw std::runtime_error("dfa table: bad header");
  Dfa d(n_states, n_symbols);
  if (!(in >> d.initial)) throw std::runtime_error("dfa table: bad initial");
  for (std::int32_t q = 0; q < n_states; ++q) {
    for (SymbolId a = 0; a < n_symbols; ++a) {
      std::int32_t to = 0;
      if (!(in >> to)) throw std::runtime_error("dfa table: bad transition");
      d.set_transition(q, a, to);
    }
  }
  std::string rest;
  std::getline(in, rest);  // finish the last transition row
  if (std::getline(in, rest)) {
    std::istringstream acc(rest);
    std::int32_t q = 0;
    while (acc >> q) {
      if (q < 0 || q >= n_states)
        throw std::runtime_error("dfa table: accepting state out of range");
      d.accepting[static_cast<std::size_t>(q)] = 1;
    }
  }
  d.validate();
  return d;
}

std::string to_dot(const Dfa& d, const std::string& name) {
  std::ostringstream out;
  out << "digraph " << name << " {\n  rankdir=LR;\n";
  out << "  start [shape=point];\n";
  for (std::int32_t q = 0; q < d.n_states; ++q) {
    out << "  q" << q << " [shape="
        << (d.is_accepting(q) ? "doublecircle" : "circle") << "];\n";
  }
  out << "  start -> q" << d.initial << ";\n";
  for (std::int32_t q = 0; q < d.n_states; ++q) {
    // group parallel edges into one label
    std::map<std::int32_t, std::string> edges;
    for (SymbolId a = 0; a < d.n_symbols; ++a) {
      std::string& lbl = edges[d.next(q, a)];
      if (!lbl.empty()) lbl += ",";
      lbl += std::to_string(a);
    }
    for (const auto& [to, lbl] : edges)
      out << "  q" << q << " -> q" << to << " [label=\"" << lbl << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace nmrl

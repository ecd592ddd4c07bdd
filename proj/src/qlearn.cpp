#include "nmrl/qlearn.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace nmrl {

QTable::QTable(std::vector<Dfa> machines, std::vector<double> reward_values,
               const QConfig& cfg)
    : machines_(std::move(machines)),
      reward_values_(std::move(reward_values)),
      cfg_(cfg) {
  if (machines_.size() != reward_values_.size())
    throw std::invalid_argument("QTable: one reward value per machine");
  if (cfg_.alpha <= 0.0 || cfg_.alpha >= 1.0 || cfg_.gamma <= 0.0 ||
      cfg_.gamma >= 1.0)
    throw std::invalid_argument("QTable: alpha and gamma must be in (0,1)");
  for (const Dfa& d : machines_) {
    machine_sizes_.push_back(d.n_states);
    machine_combos_ *= d.n_states;
  }
}

double QTable::init_value(const ProductState& p) const {
  double v = 0.0;
  for (std::size_t t = 0; t < machines_.size(); ++t)
    if (machines_[t].is_accepting(p.machine[t])) v += reward_values_[t];
  return v;
}

std::uint64_t QTable::key(const ProductState& p, ActionId a) const {
  assert(p.machine.size() == machines_.size());
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < p.machine.size(); ++i)
    m = m * static_cast<std::uint64_t>(machine_sizes_[i]) +
        static_cast<std::uint64_t>(p.machine[i]);
  const std::uint64_t product =
      static_cast<std::uint64_t>(p.mdp) *
          static_cast<std::uint64_t>(machine_combos_) +
      m;
  return product * 64 + static_cast<std::uint64_t>(a);
}

double QTable::get(const ProductState& p, ActionId a) const {
  auto it = table_.find(key(p, a));
  return it != table_.end() ? it->second : init_value(p);
}

double QTable::max_over_actions(const ProductState& p, int n_actions) const {
  double best = get(p, 0);
  for (ActionId a = 1; a < n_actions; ++a) best = std::max(best, get(p, a));
  return best;
}

double QTable::update(const ProductState& p, ActionId a, double r,
                      const ProductState& next, bool terminal, int n_actions) {
  const double target =
      terminal ? r : r + cfg_.gamma * max_over_actions(next, n_actions);
  const double old = get(p, a);
  const double value = (1.0 - cfg_.alpha) * old + cfg_.alpha * target;
  table_[key(p, a)] = value;
  return value;
}

ActionId QTable::greedy(const ProductState& p, int n_actions, Rng& rng) const {
  double best = get(p, 0);
  int ties = 1;
  ActionId pick = 0;
  for (ActionId a = 1; a < n_actions; ++a) {
    const double v = get(p, a);
    if (v > best) {
      best = v;
      ties = 1;
      pick = a;
    } else if (v == best) {
      // reservoir choice keeps ties uniform without a second pass
      ++ties;
      std::uniform_int_distribution<int> d(0, ties - 1);
      if (d(rng) == 0) pick = a;
    }
  }
  return pick;
}

ActionId select_action(const QTable& q, const ProductState& p, int n_actions,
                       const ExplorationSchedule& sched, std::uint64_t step,
                       Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < sched.epsilon(step)) {
    std::uniform_int_distribution<ActionId> d(0, n_actions - 1);
    return d(rng);
  }
  return q.greedy(p, n_actions, rng);
}

QTable reinit_with_automata(const ReplayBuffer& replay,
                            const std::vector<Dfa>& machines,
                            const std::vector<double>& reward_values,
                            const QConfig& cfg, const EventAlphabet& alphabet,
                            int n_actions) {
  QTable q(machines, reward_values, cfg);
  for (const ReplayEpisode& ep : replay.episodes()) {
    ProductState p = product_initial(ep.start, machines);
    for (const ReplayStep& st : ep.steps) {
      std::optional<SymbolId> sym;
      if (st.effective) sym = alphabet.encode({st.action, st.next});
      ProductState next = product_step(p, st.next, sym, machines);
      double r = st.markov_reward;
      for (std::size_t t = 0; t < reward_values.size(); ++t)
        if (st.fired_mask & (1u << t)) r += reward_values[t];
      q.update(p, st.action, r, next, st.terminal, n_actions);
      p = std::move(next);
    }
  }
  return q;
}

double greedy_eval(const QTable& q, Environment& env,
                   const std::vector<Dfa>& machines, int episodes, Rng& rng) {
  const int n_actions = env.action_count();
  const std::vector<RewardType>& types = env.reward_types();
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    StateId s = env.reset();
    ProductState p = product_initial(s, machines);
    double ret = 0.0;
    double discount = 1.0;
    for (;;) {
      const ActionId a = q.greedy(p, n_actions, rng);
      const StepOutcome out = env.step(a);
      double r = out.markov_reward;
      for (int t : out.fired) r += types[static_cast<std::size_t>(t)].value;
      ret += discount * r;
      discount *= q.config().gamma;
      p = product_step(p, out.state, out.symbol, machines);
      if (out.terminal) break;
    }
    total += ret;
  }
  return total / episodes;
}

}  // namespace nmrl

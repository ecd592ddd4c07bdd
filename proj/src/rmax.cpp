#include "nmrl/rmax.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <ostream>

namespace nmrl {

RmaxModel::RmaxModel(std::vector<Dfa> machines,
                     std::vector<double> reward_values, int n_actions,
                     const EventAlphabet& alphabet, const RmaxConfig& cfg)
    : machines_(std::move(machines)),
      reward_values_(std::move(reward_values)),
      n_actions_(n_actions),
      alphabet_(alphabet),
      cfg_(cfg),
      mismatches_(reward_values_.size(), 0) {
  if (machines_.size() != reward_values_.size())
    throw std::invalid_argument("RmaxModel: one reward value per machine");
}

std::uint64_t RmaxModel::product_key(const ProductState& p, ActionId a) const {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < p.machine.size(); ++i)
    m = m * static_cast<std::uint64_t>(machines_[i].n_states) +
        static_cast<std::uint64_t>(p.machine[i]);
  std::uint64_t combos = 1;
  for (const Dfa& d : machines_) combos *= static_cast<std::uint64_t>(d.n_states);
  return (static_cast<std::uint64_t>(p.mdp) * combos + m) * 64 +
         static_cast<std::uint64_t>(a);
}

void RmaxModel::observe(const ProductState& p, ActionId a, StateId next,
                        bool effective, const std::vector<int>& fired,
                        double markov_reward) {
  PairStats& ps = pairs_[pair_key(p.mdp, a)];
  ps.n += 1;
  auto it = std::lower_bound(
      ps.outcomes.begin(), ps.outcomes.end(), std::pair(next, effective),
      [](const Outcome& o, const std::pair<StateId, bool>& k) {
        return o.next != k.first ? o.next < k.first : o.effective < k.second;
      });
  if (it != ps.outcomes.end() && it->next == next &&
      it->effective == effective) {
    it->count += 1;
  } else {
    ps.outcomes.insert(it, {next, effective, 1});
  }
  if (ps.markov_obs == 0) ps.markov_first = markov_reward;
  else if (markov_reward != ps.markov_first) ps.markov_mixed = true;
  ps.markov_sum += markov_reward;
  ps.markov_obs += 1;
  if (!ps.known && ps.n >= cfg_.known_threshold) {
    ps.known = true;
    dirty_ = true;
  }

  NmrCell& cell = nmr_log_[product_key(p, a)];
  if (cell.fired.empty()) cell.fired.assign(reward_values_.size(), 0);
  cell.visits += 1;
  for (int t : fired) cell.fired[static_cast<std::size_t>(t)] += 1;

  // Staleness: compare each firing against what the current machines
  // dictate for this transition.
  for (std::size_t t = 0; t < machines_.size(); ++t) {
    bool predicted = false;
    if (effective) {
      const SymbolId sym = alphabet_.encode({a, next});
      predicted =
          machines_[t].is_accepting(machines_[t].next(p.machine[t], sym));
    }
    const bool actual =
        std::find(fired.begin(), fired.end(), static_cast<int>(t)) !=
        fired.end();
    if (predicted != actual) {
      if (mismatches_[t] == 0) dirty_ = true;
      mismatches_[t] += 1;
    }
  }
}

void RmaxModel::rebuild_on_automata(std::vector<Dfa> machines) {
  if (machines.size() != reward_values_.size())
    throw std::invalid_argument("rebuild_on_automata: machine count changed");
  machines_ = std::move(machines);
  nmr_log_.clear();
  std::fill(mismatches_.begin(), mismatches_.end(), 0);
  dirty_ = true;
}

const RmaxModel::PairStats* RmaxModel::pair(StateId s, ActionId a) const {
  auto it = pairs_.find(pair_key(s, a));
  return it != pairs_.end() ? &it->second : nullptr;
}

bool RmaxModel::known(StateId s, ActionId a) const {
  const PairStats* ps = pair(s, a);
  return ps != nullptr && ps->known;
}

long RmaxModel::visit_count(StateId s, ActionId a) const {
  const PairStats* ps = pair(s, a);
  return ps != nullptr ? ps->n : 0;
}

double RmaxModel::rmax_bound() const {
  double r = 0.0;
  for (double v : reward_values_) r = std::max(r, v);
  return r;
}

double RmaxModel::markov_reward(const PairStats& ps) const {
  if (ps.markov_obs < cfg_.reward_obs_min) return 0.0;
  return ps.markov_sum / static_cast<double>(ps.markov_obs);
}

void RmaxModel::dump(std::ostream& out) const {
  out << "state action n known markov_obs markov_mean outcomes\n";
  std::vector<std::uint64_t> keys;
  keys.reserve(pairs_.size());
  for (const auto& [k, v] : pairs_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (std::uint64_t k : keys) {
    const PairStats& ps = pairs_.at(k);
    out << k / static_cast<std::uint64_t>(n_actions_) << ' '
        << k % static_cast<std::uint64_t>(n_actions_) << ' ' << ps.n << ' '
        << (ps.known ? 1 : 0) << ' ' << ps.markov_obs << ' '
        << (ps.markov_obs ? ps.markov_sum / ps.markov_obs : 0.0);
    for (const Outcome& o : ps.outcomes)
      out << ' ' << o.next << (o.effective ? "e" : "i") << ':' << o.count;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Planner
// ---------------------------------------------------------------------------

std::int64_t PlannerOutput::combo_of(const ProductState& p) const {
  std::int64_t m = 0;
  for (std::size_t i = 0; i < p.machine.size(); ++i)
    m = m * machine_sizes[i] + p.machine[i];
  return m;
}

double PlannerOutput::value_of(const ProductState& p) const {
  auto it = mdp_index.find(p.mdp);
  if (it == mdp_index.end()) return optimistic_value;
  return values[static_cast<std::size_t>(it->second * combos + combo_of(p))];
}

ActionId PlannerOutput::greedy_action(const ProductState& p) const {
  auto it = mdp_index.find(p.mdp);
  if (it == mdp_index.end()) return 0;
  return actions[static_cast<std::size_t>(it->second * combos + combo_of(p))];
}

PlannerOutput plan(const RmaxModel& model, const RmaxConfig& cfg) {
  PlannerOutput out;
  const std::vector<Dfa>& machines = model.machines();
  const int n_actions = model.action_count();
  const double gamma = cfg.gamma;
  const double rmax = model.rmax_bound();

  for (const Dfa& d : machines) {
    out.machine_sizes.push_back(d.n_states);
    out.combos *= d.n_states;
  }
  const std::int64_t combos = out.combos;

  // Visited MDP states, deterministic order.
  std::vector<StateId> states;
  for (const auto& [key, ps] : model.pairs()) {
    states.push_back(static_cast<StateId>(key / static_cast<std::uint64_t>(n_actions)));
    for (const RmaxModel::Outcome& o : ps.outcomes) states.push_back(o.next);
  }
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  for (std::size_t i = 0; i < states.size(); ++i)
    out.mdp_index.emplace(states[i], static_cast<std::int32_t>(i));

  const std::size_t total = states.size() * static_cast<std::size_t>(combos);
  out.values.assign(total, 0.0);
  out.actions.assign(total, 0);

  // Machine-combo transition and entry-reward tables (action-only alphabet:
  // the symbol is the action, so both depend on (combo, action) only).
  const bool action_only =
      model.alphabet().mode == AlphabetMode::ActionOnly;
  std::vector<std::int64_t> combo_next;
  std::vector<double> combo_reward;
  if (action_only) {
    combo_next.resize(static_cast<std::size_t>(combos) * n_actions);
    combo_reward.resize(static_cast<std::size_t>(combos) * n_actions);
    std::vector<std::int32_t> ms(machines.size());
    for (std::int64_t m = 0; m < combos; ++m) {
      std::int64_t rest = m;
      for (std::size_t i = machines.size(); i-- > 0;) {
        ms[i] = static_cast<std::int32_t>(rest % machines[i].n_states);
        rest /= machines[i].n_states;
      }
      for (ActionId a = 0; a < n_actions; ++a) {
        std::int64_t nm = 0;
        double r = 0.0;
        for (std::size_t i = 0; i < machines.size(); ++i) {
          const std::int32_t q = machines[i].next(ms[i], a);
          nm = nm * machines[i].n_states + q;
          if (machines[i].is_accepting(q) && !model.stale(static_cast<int>(i)))
            r += model.reward_values()[i];
        }
        combo_next[static_cast<std::size_t>(m * n_actions + a)] = nm;
        combo_reward[static_cast<std::size_t>(m * n_actions + a)] = r;
      }
    }
  }

  auto machine_states_of = [&](std::int64_t m) {
    std::vector<std::int32_t> ms(machines.size());
    std::int64_t rest = m;
    for (std::size_t i = machines.size(); i-- > 0;) {
      ms[i] = static_cast<std::int32_t>(rest % machines[i].n_states);
      rest /= machines[i].n_states;
    }
    return ms;
  };

  // Pre-resolved backup data so the sweeps touch only dense arrays.
  struct ResolvedOutcome {
    double prob = 0.0;
    std::int32_t next_index = 0;
    StateId next = 0;
    bool effective = false;
  };
  struct ResolvedPair {
    bool known = false;
    double markov = 0.0;
    std::int32_t first = 0, count = 0;  // slice into outcome pool
  };
  std::vector<ResolvedPair> resolved(states.size() *
                                     static_cast<std::size_t>(n_actions));
  std::vector<ResolvedOutcome> pool;
  for (std::size_t si = 0; si < states.size(); ++si) {
    for (ActionId a = 0; a < n_actions; ++a) {
      const RmaxModel::PairStats* ps = model.pair(states[si], a);
      ResolvedPair& rp = resolved[si * static_cast<std::size_t>(n_actions) +
                                  static_cast<std::size_t>(a)];
      if (ps == nullptr || !ps->known) continue;
      rp.known = true;
      rp.markov = model.markov_reward(*ps);
      rp.first = static_cast<std::int32_t>(pool.size());
      const double inv_n = 1.0 / static_cast<double>(ps->n);
      for (const RmaxModel::Outcome& o : ps->outcomes) {
        pool.push_back({static_cast<double>(o.count) * inv_n,
                        out.mdp_index.at(o.next), o.next, o.effective});
      }
      rp.count = static_cast<std::int32_t>(pool.size()) - rp.first;
    }
  }

  const bool finite = cfg.horizon > 0;
  const long sweeps_cap = finite ? cfg.horizon : cfg.max_iterations;
  std::vector<double> next_values(total, 0.0);
  double fict = 0.0;  // value of the fictitious absorbing state so far

  double residual = 0.0;
  long iter = 0;
  for (; iter < sweeps_cap; ++iter) {
    const double q_unknown = rmax + gamma * fict;
    const bool record_policy = finite ? (iter == sweeps_cap - 1) : true;
    residual = 0.0;
    for (std::size_t si = 0; si < states.size(); ++si) {
      for (std::int64_t m = 0; m < combos; ++m) {
        double best = -std::numeric_limits<double>::infinity();
        ActionId best_a = 0;
        for (ActionId a = 0; a < n_actions; ++a) {
          const ResolvedPair& rp =
              resolved[si * static_cast<std::size_t>(n_actions) +
                       static_cast<std::size_t>(a)];
          double q;
          if (!rp.known) {
            q = q_unknown;
          } else {
            q = rp.markov;
            const std::int64_t nm_eff =
                action_only
                    ? combo_next[static_cast<std::size_t>(m * n_actions + a)]
                    : -1;
            const double r_eff =
                action_only
                    ? combo_reward[static_cast<std::size_t>(m * n_actions + a)]
                    : 0.0;
            for (std::int32_t k = 0; k < rp.count; ++k) {
              const ResolvedOutcome& o =
                  pool[static_cast<std::size_t>(rp.first + k)];
              std::int64_t nm = m;
              double enter_r = 0.0;
              if (o.effective) {
                if (action_only) {
                  nm = nm_eff;
                  enter_r = r_eff;
                } else {
                  const SymbolId sym = model.alphabet().encode({a, o.next});
                  std::vector<std::int32_t> ms = machine_states_of(m);
                  nm = 0;
                  for (std::size_t i = 0; i < machines.size(); ++i) {
                    const std::int32_t qn = machines[i].next(ms[i], sym);
                    nm = nm * machines[i].n_states + qn;
                    if (machines[i].is_accepting(qn) &&
                        !model.stale(static_cast<int>(i)))
                      enter_r += model.reward_values()[i];
                  }
                }
              }
              q += o.prob *
                   (enter_r + gamma * out.values[static_cast<std::size_t>(
                                          o.next_index * combos + nm)]);
            }
          }
          if (q > best) {
            best = q;
            best_a = a;
          }
        }
        const std::size_t idx = si * static_cast<std::size_t>(combos) +
                                static_cast<std::size_t>(m);
        residual = std::max(residual, std::abs(best - out.values[idx]));
        next_values[idx] = best;
        if (record_policy) out.actions[idx] = best_a;
      }
    }
    std::swap(out.values, next_values);
    fict = rmax + gamma * fict;
    out.residual_history.push_back(residual);
    if (!finite && residual < cfg.tol) {
      ++iter;
      break;
    }
  }
  if (!finite && residual >= cfg.tol)
    throw PlanError("value iteration did not converge", residual);

  out.iterations = iter;
  out.residual = residual;
  out.optimistic_value =
      finite ? fict : rmax / (1.0 - gamma);
  return out;
}

ActionId rmax_act(const PlannerOutput& planner, const ProductState& p,
                  int n_actions, const ExplorationSchedule& sched,
                  std::uint64_t step, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < sched.epsilon(step)) {
    std::uniform_int_distribution<ActionId> d(0, n_actions - 1);
    return d(rng);
  }
  return planner.greedy_action(p);
}

}  // namespace nmrl

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "nmrl/dfa.hpp"
#include "nmrl/qlearn.hpp"  // ExplorationSchedule
#include "nmrl/rng.hpp"
#include "nmrl/types.hpp"

namespace nmrl {

struct RmaxConfig {
  int known_threshold = 5;  // K: visits before (s,a) counts as known
  int reward_obs_min = 3;   // observations before a reward entry is trusted
  double gamma = 0.99;
  double tol = 1e-9;
  int horizon = 0;  // 0: infinite-horizon to tol; >0: finite-horizon backups
  long max_iterations = 1000000;
};

struct PlanError : std::runtime_error {
  PlanError(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
  double residual;
};

/// Empirical model over MDP states plus machine bookkeeping. Transition
/// counts and known flags live at the MDP level and survive machine changes;
/// reward predictions for non-Markovian types come from the current machines
/// and are withheld while observations contradict them.
class RmaxModel {
 public:
  RmaxModel(std::vector<Dfa> machines, std::vector<double> reward_values,
            int n_actions, const EventAlphabet& alphabet,
            const RmaxConfig& cfg);

  void observe(const ProductState& p, ActionId a, StateId next, bool effective,
               const std::vector<int>& fired, double markov_reward);

  /// Swaps in newly learned machines. MDP-level counts, known flags and
  /// Markovian reward estimates carry over verbatim; the per-product reward
  /// observation log restarts under the new machine states.
  void rebuild_on_automata(std::vector<Dfa> machines);

  bool known(StateId s, ActionId a) const;
  long visit_count(StateId s, ActionId a) const;
  bool stale(int type) const { return mismatches_[static_cast<std::size_t>(type)] > 0; }
  long mismatch_count(int type) const {
    return mismatches_[static_cast<std::size_t>(type)];
  }
  double rmax_bound() const;

  const std::vector<Dfa>& machines() const { return machines_; }
  const std::vector<double>& reward_values() const { return reward_values_; }
  int action_count() const { return n_actions_; }
  const EventAlphabet& alphabet() const { return alphabet_; }
  const RmaxConfig& config() const { return cfg_; }

  bool planner_dirty() const { return dirty_; }
  void clear_dirty() { dirty_ = false; }

  /// Counts, known flags and reward estimates, one line per (state, action).
  void dump(std::ostream& out) const;

  struct Outcome {
    StateId next = 0;
    bool effective = false;
    long count = 0;
  };
  struct PairStats {
    long n = 0;
    bool known = false;
    double markov_sum = 0.0;
    double markov_first = 0.0;
    long markov_obs = 0;
    bool markov_mixed = false;
    std::vector<Outcome> outcomes;  // sorted by (next, effective)
  };

  const PairStats* pair(StateId s, ActionId a) const;
  const std::unordered_map<std::uint64_t, PairStats>& pairs() const {
    return pairs_;
  }
  /// Trusted Markovian reward estimate for (s,a); zero until confirmed.
  double markov_reward(const PairStats& ps) const;

  struct NmrCell {
    long visits = 0;
    std::vector<long> fired;  // per type
  };
  const std::unordered_map<std::uint64_t, NmrCell>& reward_log() const {
    return nmr_log_;
  }

 private:
  std::uint64_t pair_key(StateId s, ActionId a) const {
    return static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(n_actions_) + static_cast<std::uint64_t>(a);
  }
  std::uint64_t product_key(const ProductState& p, ActionId a) const;

  std::vector<Dfa> machines_;
  std::vector<double> reward_values_;
  int n_actions_;
  EventAlphabet alphabet_;
  RmaxConfig cfg_;
  std::unordered_map<std::uint64_t, PairStats> pairs_;
  std::unordered_map<std::uint64_t, NmrCell> nmr_log_;
  std::vector<long> mismatches_;  // per type, since the last rebuild
  bool dirty_ = true;
};

/// Value and greedy action per product state from value iteration over the
/// model; unknown pairs jump to the fictitious absorbing state worth Rmax
/// per step. Finite-horizon mode runs exactly `horizon` backups.
class PlannerOutput {
 public:
  double value_of(const ProductState& p) const;
  ActionId greedy_action(const ProductState& p) const;

  long iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;

 private:
  friend PlannerOutput plan(const RmaxModel&, const RmaxConfig&);

  std::unordered_map<StateId, std::int32_t> mdp_index;
  std::vector<std::int32_t> machine_sizes;
  std::int64_t combos = 1;
  std::vector<double> values;     // [mdp_idx * combos + combo]
  std::vector<ActionId> actions;  // same layout
  double optimistic_value = 0.0;

  std::int64_t combo_of(const ProductState& p) const;
};

PlannerOutput plan(const RmaxModel& model, const RmaxConfig& cfg);

/// Epsilon-greedy over the planner's action.
ActionId rmax_act(const PlannerOutput& planner, const ProductState& p,
                  int n_actions, const ExplorationSchedule& sched,
                  std::uint64_t step, Rng& rng);

}  // namespace nmrl

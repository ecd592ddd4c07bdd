#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "nmrl/dfa.hpp"
#include "nmrl/environment.hpp"
#include "nmrl/rng.hpp"
#include "nmrl/types.hpp"

namespace nmrl {

/// Annealed epsilon: eps(step) = max(floor, start - decay * step).
struct ExplorationSchedule {
  double start = 0.9;
  double floor = 0.1;
  double decay_per_step = 1e-6;

  double epsilon(std::uint64_t step) const {
    const double e = start - decay_per_step * static_cast<double>(step);
    return e < floor ? floor : e;
  }
};

struct QConfig {
  double alpha = 0.1;
  double gamma = 0.99;
};

/// Hashed Q-table over product states. Missing entries read as their
/// initialization value: the summed reward values of whichever machine
/// components are accepting, zero otherwise.
class QTable {
 public:
  QTable(std::vector<Dfa> machines, std::vector<double> reward_values,
         const QConfig& cfg);

  double get(const ProductState& p, ActionId a) const;
  double max_over_actions(const ProductState& p, int n_actions) const;

  /// Q(s,a) = (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')).
  /// Terminal transitions bootstrap nothing: the target is just r.
  double update(const ProductState& p, ActionId a, double r,
                const ProductState& next, bool terminal, int n_actions);

  /// Argmax with uniformly random tie-breaking.
  ActionId greedy(const ProductState& p, int n_actions, Rng& rng) const;

  const QConfig& config() const { return cfg_; }
  const std::vector<Dfa>& machines() const { return machines_; }
  std::size_t entries() const { return table_.size(); }

 private:
  double init_value(const ProductState& p) const;
  std::uint64_t key(const ProductState& p, ActionId a) const;

  std::vector<Dfa> machines_;
  std::vector<double> reward_values_;
  QConfig cfg_;
  std::int64_t machine_combos_ = 1;
  std::vector<std::int32_t> machine_sizes_;
  std::unordered_map<std::uint64_t, double> table_;
};

/// Epsilon-greedy over the table's argmax.
ActionId select_action(const QTable& q, const ProductState& p, int n_actions,
                       const ExplorationSchedule& sched, std::uint64_t step,
                       Rng& rng);

/// One stored environment transition, sufficient to replay an episode under
/// any machine set.
struct ReplayStep {
  StateId state = 0;
  StateId next = 0;
  ActionId action = 0;
  float markov_reward = 0.0f;
  std::uint8_t fired_mask = 0;  // bit t: reward type t fired
  bool effective = false;
  bool terminal = false;
};

struct ReplayEpisode {
  StateId start = 0;
  std::vector<ReplayStep> steps;
};

/// Bounded chronological buffer of full episodes (oldest dropped first).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 50000) : capacity_(capacity) {}

  void push(ReplayEpisode e) {
    if (episodes_.size() == capacity_) episodes_.pop_front();
    episodes_.push_back(std::move(e));
  }
  const std::deque<ReplayEpisode>& episodes() const { return episodes_; }
  std::size_t size() const { return episodes_.size(); }

 private:
  std::size_t capacity_;
  std::deque<ReplayEpisode> episodes_;
};

/// Fresh table for the new machines: accepting components seed their reward
/// value, everything else zero; then every stored episode is replayed oldest
/// first, tracking machine states deterministically along the trace.
QTable reinit_with_automata(const ReplayBuffer& replay,
                            const std::vector<Dfa>& machines,
                            const std::vector<double>& reward_values,
                            const QConfig& cfg, const EventAlphabet& alphabet,
                            int n_actions);

/// Mean discounted return of the greedy policy over `episodes` episodes on
/// the given (dedicated) environment instance; q is not mutated.
double greedy_eval(const QTable& q, Environment& env,
                   const std::vector<Dfa>& machines, int episodes, Rng& rng);

}  // namespace nmrl

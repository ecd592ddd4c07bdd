#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "nmrl/dfa.hpp"
#include "nmrl/types.hpp"

namespace nmrl {

struct StepOutcome {
  StateId state = 0;               // resulting MDP state
  std::optional<SymbolId> symbol;  // event symbol; absent for no-effect steps
  std::vector<int> fired;          // reward types fired on this step
  double markov_reward = 0.0;
  bool terminal = false;           // episode finished (goal or step limit)
};

/// Episodic environment with hidden reward monitors. step() is the only
/// source of randomness; the stream is seeded at construction.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual StateId reset() = 0;
  virtual StepOutcome step(ActionId a) = 0;

  virtual StateId state_count() const = 0;
  virtual int action_count() const = 0;
  virtual const EventAlphabet& alphabet() const = 0;
  virtual const std::vector<RewardType>& reward_types() const = 0;
  virtual int episode_limit() const = 0;

  /// Ground-truth monitor automaton; hidden from learners, exposed for
  /// baselines and oracles.
  virtual Dfa ground_truth_machine(int type) const = 0;

  /// Independent copy with its own random stream (evaluation runs).
  virtual std::unique_ptr<Environment> clone_with_seed(
      std::uint64_t seed) const = 0;

  int reward_type_count() const {
    return static_cast<int>(reward_types().size());
  }
  std::vector<Dfa> ground_truth_machines() const {
    std::vector<Dfa> out;
    for (int t = 0; t < reward_type_count(); ++t)
      out.push_back(ground_truth_machine(t));
    return out;
  }
};

}  // namespace nmrl

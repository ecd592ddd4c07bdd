#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nmrl/environment.hpp"
#include "nmrl/rng.hpp"

namespace nmrl {

/// Monitor wrapper: tracks the state of one ground-truth machine and reports
/// a firing whenever a symbol drives it into an accepting state. Re-firing
/// and latching behavior is wired into the machine's transitions, so the
/// monitor itself is stateless beyond the current machine state.
struct RewardMonitor {
  Dfa dfa;
  std::int32_t state = 0;

  void reset() { state = dfa.initial; }
  bool advance(SymbolId sym) {
    state = dfa.next(state, sym);
    return dfa.is_accepting(state);
  }
};

// ---------------------------------------------------------------------------
// Non-Markovian multi-armed bandit
// ---------------------------------------------------------------------------

enum class MabScheme { S1, S2, S3, S4 };

MabScheme mab_scheme_from_string(const std::string& s);
std::string to_string(MabScheme s);

struct MabConfig {
  MabScheme scheme = MabScheme::S1;
  int n_arms = 3;
  int steps_per_episode = 20;
  double nmr_value = 10.0;
};

/// Ground-truth monitor DFA for one reward type of a MAB scheme, over the
/// arm alphabet. S1/S4[0]: arm 1 four consecutive times then arm 3;
/// S2: the same pattern with the firing three symbols later; S3/S4[1]:
/// arm 3 twice in a row then arm 2.
Dfa mab_monitor_dfa(MabScheme scheme, int type, int n_arms);
int mab_reward_type_count(MabScheme scheme);

class MabEnv : public Environment {
 public:
  MabEnv(const MabConfig& cfg, std::uint64_t seed);

  StateId reset() override;
  StepOutcome step(ActionId a) override;

  StateId state_count() const override { return 1; }
  int action_count() const override { return cfg_.n_arms; }
  const EventAlphabet& alphabet() const override { return alphabet_; }
  const std::vector<RewardType>& reward_types() const override {
    return reward_types_;
  }
  int episode_limit() const override { return cfg_.steps_per_episode; }
  Dfa ground_truth_machine(int type) const override;
  std::unique_ptr<Environment> clone_with_seed(
      std::uint64_t seed) const override;

 private:
  MabConfig cfg_;
  EventAlphabet alphabet_;
  std::vector<RewardType> reward_types_;
  std::vector<RewardMonitor> monitors_;
  int steps_taken_ = 0;
  bool episode_open_ = false;
};

// ---------------------------------------------------------------------------
// Robot world
// ---------------------------------------------------------------------------

enum class RobotScheme { R1, R2, R3, R4 };

RobotScheme robot_scheme_from_string(const std::string& s);
std::string to_string(RobotScheme s);

// Action ids, also the event-symbol ids in action-only mode.
enum RobotAction : ActionId {
  kUp = 0,
  kDown = 1,
  kLeft = 2,
  kRight = 3,
  kClean = 4,
  kPick = 5,
  kPut = 6,
};
constexpr int kRobotActionCount = 7;

struct RobotConfig {
  RobotScheme scheme = RobotScheme::R1;
  int width = 5;
  int height = 5;
  int n_stains = 2;
  int n_fruits = 2;
  int steps_per_episode = 60;
  int start_cell = 0;    // robot start, fixed
  int basket_cell = -1;  // -1: opposite corner
  double nmr_value = 100.0;
  double move_success = 0.6;  // remaining mass splits evenly on the two slips
  double op_success = 0.6;    // clean/pick/put
  AlphabetMode alphabet_mode = AlphabetMode::ActionOnly;

  int cells() const { return width * height; }
  int resolved_basket() const {
    return basket_cell >= 0 ? basket_cell : cells() - 1;
  }
};

/// Ground-truth monitor DFA for one reward type of a robot scheme over the
/// seven-action alphabet (n_stains matters for the "all stains cleaned"
/// schemes).
Dfa robot_monitor_dfa(RobotScheme scheme, int type, int n_stains);
int robot_reward_type_count(RobotScheme scheme);

class RobotWorldEnv : public Environment {
 public:
  RobotWorldEnv(const RobotConfig& cfg, std::uint64_t seed);

  StateId reset() override;
  StepOutcome step(ActionId a) override;

  StateId state_count() const override { return state_count_; }
  int action_count() const override { return kRobotActionCount; }
  const EventAlphabet& alphabet() const override { return alphabet_; }
  const std::vector<RewardType>& reward_types() const override {
    return reward_types_;
  }
  int episode_limit() const override { return cfg_.steps_per_episode; }
  Dfa ground_truth_machine(int type) const override;
  std::unique_ptr<Environment> clone_with_seed(
      std::uint64_t seed) const override;

  const RobotConfig& config() const { return cfg_; }

 private:
  // Per-object encodings inside the packed state id:
  //   stain component: cell index while dirty, `cells` when cleaned;
  //   fruit component: cell index on the ground, `cells` held, cells+1 in
  //   the basket.
  StateId encode_state() const;
  bool goal_reached() const;
  int move_target(int pos, ActionId dir) const;

  RobotConfig cfg_;
  EventAlphabet alphabet_;
  std::vector<RewardType> reward_types_;
  std::vector<RewardMonitor> monitors_;
  StateId state_count_ = 0;
  Rng rng_;

  int robot_ = 0;
  std::vector<int> stain_;  // see encode_state
  std::vector<int> fruit_;
  int steps_taken_ = 0;
  bool episode_open_ = false;
};

}  // namespace nmrl

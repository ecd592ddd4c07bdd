#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nmrl/envs.hpp"
#include "nmrl/orchestrate.hpp"

namespace nmrl {

/// Full experiment description. Every field has a default equal to the
/// benchmark setting where one exists; a flat sectioned key-value file
/// overrides them. The resolved config serializes into result headers.
struct ExperimentConfig {
  // [experiment]
  std::string env_name = "mab";  // mab | robot
  std::string scheme = "S1";
  std::vector<std::string> algorithms = {"qlearn", "rmax"};
  std::vector<std::string> learners = {"lstar", "edsm", "optimal", "vanilla"};
  std::uint64_t budget = 4000000;
  std::uint64_t checkpoint_every = 100000;
  std::vector<std::uint64_t> seeds = {1};
  int eval_episodes = 20;

  // [exploration]
  ExplorationSchedule schedule;

  // [qlearn]
  double alpha = 0.1;
  double gamma = -1.0;  // resolved per env: 0.99 mab, 0.999999 robot

  // [rmax]
  int known_threshold = -1;    // 5 mab, 10 robot
  int reward_obs_min = 3;
  double plan_tol = -1.0;      // 1e-9 mab, 1e-6 robot
  int plan_horizon = -1;       // 0 (infinite) mab, episode length robot
  std::uint64_t replan_interval = 0;  // 200 mab, 5000 robot

  // [learning]
  int c_trials = 100;
  long c_pos = 10;
  int membership_attempts = -1;  // k: 1 mab, 100 robot
  std::string scheduling = "prioritized";
  std::size_t fifo_capacity = 1000;
  std::size_t replay_capacity = 50000;
  int edsm_max_states = 20;
  int edsm_max_retries = 20;
  std::string edsm_score_mode = "pairs";  // pairs | evidence
  std::string alphabet_mode = "action_only";
  std::string query_log_dir;  // empty: no per-run query logs

  // [mab]
  MabConfig mab;

  // [robot]
  RobotConfig robot;

  bool is_mab() const { return env_name == "mab"; }

  double resolved_gamma() const {
    return gamma > 0 ? gamma : (is_mab() ? 0.99 : 0.999999);
  }
  int resolved_known_threshold() const {
    return known_threshold > 0 ? known_threshold : (is_mab() ? 5 : 10);
  }
  double resolved_plan_tol() const {
    return plan_tol > 0 ? plan_tol : (is_mab() ? 1e-9 : 1e-6);
  }
  int resolved_plan_horizon() const {
    if (plan_horizon >= 0) return plan_horizon;
    return is_mab() ? 0
                    : (robot.steps_per_episode > 0 ? robot.steps_per_episode
                                                   : 60);
  }
  int resolved_membership_attempts() const {
    return membership_attempts > 0 ? membership_attempts : (is_mab() ? 1 : 100);
  }
  std::uint64_t resolved_replan_interval() const {
    return replan_interval > 0 ? replan_interval : (is_mab() ? 200 : 5000);
  }

  /// One "key=value key=value ..." line, deterministic order.
  std::string serialize() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace nmrl

#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nmrl/edsm.hpp"
#include "nmrl/environment.hpp"
#include "nmrl/lstar.hpp"
#include "nmrl/qlearn.hpp"
#include "nmrl/rmax.hpp"
#include "nmrl/trace.hpp"

namespace nmrl {

/// Trie over every observed episode trace, with the reward types that fired
/// at each prefix. Serves membership answers from experience and
/// counterexample scans against hypothesis machines.
class ObservationLog {
 public:
  explicit ObservationLog(int n_types);

  void insert(const Trace& t);

  bool known(const Word& w) const;
  /// Fired-type bitmask at the end of `w`; nullopt if never observed.
  std::optional<std::uint32_t> lookup(const Word& w) const;

  /// Shortest observed word misclassified by `hyp` for `type` (BFS order,
  /// lexicographically smallest among equals).
  std::optional<Word> find_counterexample(const Dfa& hyp, int type) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<std::pair<SymbolId, std::int32_t>> children;  // sorted
    std::int32_t parent = -1;
    SymbolId in_symbol = -1;
    std::uint32_t fired_mask = 0;
  };
  std::int32_t walk(const Word& w) const;  // -1 when absent

  std::vector<Node> nodes_;
  int n_types_;
};

/// Label disagreements between a single trace (all its prefixes) and a
/// hypothesis; returns the shortest misclassified prefix.
std::optional<Word> trace_counterexample(const Trace& t, const Dfa& hyp,
                                         int type);

// ---------------------------------------------------------------------------
// RL agents behind one interface
// ---------------------------------------------------------------------------

class RlAgent {
 public:
  virtual ~RlAgent() = default;
  virtual void machines_changed(const std::vector<Dfa>& machines) = 0;
  virtual ActionId act(const ProductState& p, std::uint64_t step, Rng& rng) = 0;
  virtual void observe_step(const ProductState& p, ActionId a,
                            const StepOutcome& out,
                            const ProductState& next) = 0;
  virtual void episode_finished(std::uint64_t step) = 0;
  /// Mean discounted return of the greedy policy on a dedicated env clone.
  virtual double evaluate(Environment& eval_env,
                          const std::vector<Dfa>& machines, int episodes,
                          Rng& rng) = 0;
};

class QlearnAgent : public RlAgent {
 public:
  QlearnAgent(const Environment& env, const QConfig& cfg,
              const ExplorationSchedule& sched, const ReplayBuffer* replay,
              std::vector<Dfa> machines);

  void machines_changed(const std::vector<Dfa>& machines) override;
  ActionId act(const ProductState& p, std::uint64_t step, Rng& rng) override;
  void observe_step(const ProductState& p, ActionId a, const StepOutcome& out,
                    const ProductState& next) override;
  void episode_finished(std::uint64_t step) override {}
  double evaluate(Environment& eval_env, const std::vector<Dfa>& machines,
                  int episodes, Rng& rng) override;

  const QTable& table() const { return q_; }

 private:
  QConfig cfg_;
  ExplorationSchedule sched_;
  const ReplayBuffer* replay_;
  EventAlphabet alphabet_;
  int n_actions_;
  std::vector<double> values_;
  QTable q_;
};

class RmaxAgent : public RlAgent {
 public:
  RmaxAgent(const Environment& env, const RmaxConfig& cfg,
            const ExplorationSchedule& sched, std::vector<Dfa> machines,
            std::uint64_t replan_interval_steps);

  void machines_changed(const std::vector<Dfa>& machines) override;
  ActionId act(const ProductState& p, std::uint64_t step, Rng& rng) override;
  void observe_step(const ProductState& p, ActionId a, const StepOutcome& out,
                    const ProductState& next) override;
  void episode_finished(std::uint64_t step) override;
  double evaluate(Environment& eval_env, const std::vector<Dfa>& machines,
                  int episodes, Rng& rng) override;

  const RmaxModel& model() const { return model_; }
  long replans() const { return replans_; }

 private:
  void replan();

  RmaxConfig cfg_;
  ExplorationSchedule sched_;
  int n_actions_;
  RmaxModel model_;
  std::optional<PlannerOutput> planner_;
  std::uint64_t replan_interval_;
  std::uint64_t last_replan_step_ = 0;
  long replans_ = 0;
};

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

enum class LearnerKind { Lstar, Edsm, Optimal, Vanilla };
LearnerKind learner_from_string(const std::string& s);
std::string to_string(LearnerKind k);

enum class QueryScheduling { Prioritized, Interleaved };

struct CheckpointRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::string learner;
  std::string env_name;
  std::string scheme;
  std::uint64_t step = 0;
  double mean_return = 0.0;
  std::vector<int> machine_states;
  std::vector<bool> machine_correct;
  long wall_ms = 0;
};

using CheckpointSink = std::function<void(const CheckpointRow&)>;

struct RunConfig {
  std::uint64_t budget_steps = 100000;
  std::uint64_t checkpoint_every = 100000;
  int eval_episodes = 20;
  int c_trials = 100;
  long c_pos = 10;
  int membership_attempts = 100;  // k
  QueryScheduling scheduling = QueryScheduling::Prioritized;
  PreprocessConfig preprocess;
  std::size_t negative_fifo_capacity = 1000;
  std::string query_log_path;  // empty: no query log

  std::string run_id;
  std::string algorithm;
  std::string learner;
  std::string env_name;
  std::string scheme;
};

struct RunStats {
  std::uint64_t steps = 0;
  std::uint64_t episodes = 0;
  long machine_rebuilds = 0;
  long edsm_failures = 0;
  long lstar_restarts = 0;
  long heuristic_answers = 0;
};

/// Drives one experiment cell: episodes, trace storage, machine learning,
/// RL rebuilds and periodic greedy evaluation.
class Runner {
 public:
  /// The replay buffer is shared with the agent (Q-learning replays it on
  /// machine changes), so the caller owns it and hands it to both.
  Runner(Environment& env, RlAgent& agent, ReplayBuffer& replay,
         const RunConfig& cfg, std::uint64_t seed, CheckpointSink sink);
  ~Runner();

  /// RL with a state-merging learner (or none for optimal/vanilla).
  void run_alg1(LearnerKind learner);
  /// RL with per-reward-type L* sessions answered from experience.
  void run_alg2();

  /// Forces the environment through `w` for up to `attempts` episodes and
  /// answers from the observed label; unanswered queries come back as a
  /// heuristic negative.
  struct MembershipOutcome {
    bool label = false;
    bool heuristic = false;  // true when the attempt budget ran out
    int attempts_used = 0;
  };
  MembershipOutcome serve_membership(int type, const Word& w, int attempts);

  /// Scans the log for a disagreeing word; explores (storing traces and
  /// updating the RL state) until one appears or `max_steps` pass.
  std::optional<Word> serve_equivalence(int type, const Dfa& hypothesis,
                                        std::uint64_t max_steps);

  const std::vector<Dfa>& machines() const { return machines_; }
  const TraceStore& store() const { return store_; }
  const ObservationLog& log() const { return log_; }
  const RunStats& stats() const { return stats_; }
  std::uint64_t steps() const { return step_count_; }

 private:
  struct EpisodeResult {
    bool answered = false;
    bool label = false;
    Trace trace;
  };
  struct ForceTarget {
    int type = 0;
    const Word* word = nullptr;
  };

  EpisodeResult run_episode(std::optional<ForceTarget> force);
  void maybe_checkpoint();
  void set_machines(int type, Dfa dfa);
  void log_query(const std::string& line);

  Environment& env_;
  RlAgent& agent_;
  RunConfig cfg_;
  std::uint64_t seed_;
  CheckpointSink sink_;

  std::vector<Dfa> machines_;
  std::vector<Dfa> ground_truth_;
  std::vector<double> reward_values_;
  TraceStore store_;
  ObservationLog log_;
  ReplayBuffer& replay_;
  Rng policy_rng_;

  std::uint64_t step_count_ = 0;
  std::uint64_t next_checkpoint_;
  int checkpoint_index_ = 0;
  RunStats stats_;
  std::chrono::steady_clock::time_point started_;
  std::unique_ptr<std::ofstream> query_log_;
};

}  // namespace nmrl

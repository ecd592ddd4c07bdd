#include "nmrl/orchestrate.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "nmrl/rng.hpp"

namespace nmrl {

// ---------------------------------------------------------------------------
// ObservationLog
// ---------------------------------------------------------------------------

ObservationLog::ObservationLog(int n_types) : n_types_(n_types) {
  nodes_.push_back({});  // root = the empty word, observed at every reset
}

void ObservationLog::insert(const Trace& t) {
  std::int32_t node = 0;
  for (std::size_t depth = 1; depth <= t.symbols.size(); ++depth) {
    const SymbolId a = t.symbols[depth - 1];
    Node& n = nodes_[static_cast<std::size_t>(node)];
    auto it = std::lower_bound(
        n.children.begin(), n.children.end(), a,
        [](const std::pair<SymbolId, std::int32_t>& c, SymbolId s) {
          return c.first < s;
        });
    std::int32_t child;
    if (it != n.children.end() && it->first == a) {
      child = it->second;
    } else {
      child = static_cast<std::int32_t>(nodes_.size());
      n.children.insert(it, {a, child});
      Node fresh;
      fresh.parent = node;
      fresh.in_symbol = a;
      nodes_.push_back(fresh);
    }
    node = child;
    std::uint32_t mask = 0;
    for (const RewardFiring& f : t.firings)
      if (f.step == static_cast<int>(depth)) mask |= 1u << f.type;
    // rewards are deterministic, so revisits carry the same mask
    nodes_[static_cast<std::size_t>(node)].fired_mask |= mask;
  }
}

std::int32_t ObservationLog::walk(const Word& w) const {
  std::int32_t node = 0;
  for (SymbolId a : w) {
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    auto it = std::lower_bound(
        n.children.begin(), n.children.end(), a,
        [](const std::pair<SymbolId, std::int32_t>& c, SymbolId s) {
          return c.first < s;
        });
    if (it == n.children.end() || it->first != a) return -1;
    node = it->second;
  }
  return node;
}

bool ObservationLog::known(const Word& w) const { return walk(w) >= 0; }

std::optional<std::uint32_t> ObservationLog::lookup(const Word& w) const {
  const std::int32_t node = walk(w);
  if (node < 0) return std::nullopt;
  return nodes_[static_cast<std::size_t>(node)].fired_mask;
}

std::optional<Word> ObservationLog::find_counterexample(const Dfa& hyp,
                                                        int type) const {
  // BFS over the trie; the machine state along each path is unique.
  std::deque<std::pair<std::int32_t, std::int32_t>> queue;  // (node, q)
  queue.emplace_back(0, hyp.initial);
  while (!queue.empty()) {
    auto [node, q] = queue.front();
    queue.pop_front();
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    const bool fired = (n.fired_mask >> type) & 1u;
    if (hyp.is_accepting(q) != fired) {
      Word w;
      for (std::int32_t c = node; c != 0;
           c = nodes_[static_cast<std::size_t>(c)].parent)
        w.push_back(nodes_[static_cast<std::size_t>(c)].in_symbol);
      std::reverse(w.begin(), w.end());
      return w;
    }
    for (const auto& [a, child] : n.children)
      queue.emplace_back(child, hyp.next(q, a));
  }
  return std::nullopt;
}

std::optional<Word> trace_counterexample(const Trace& t, const Dfa& hyp,
                                         int type) {
  std::int32_t q = hyp.initial;
  if (hyp.is_accepting(q)) return Word{};  // nothing fires before any symbol
  for (std::size_t i = 0; i < t.symbols.size(); ++i) {
    q = hyp.next(q, t.symbols[i]);
    const bool fired = t.fired_at(static_cast<int>(i) + 1, type);
    if (hyp.is_accepting(q) != fired)
      return Word(t.symbols.begin(), t.symbols.begin() + static_cast<long>(i) + 1);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

namespace {

std::vector<double> declared_values(const Environment& env) {
  std::vector<double> v;
  for (const RewardType& t : env.reward_types()) v.push_back(t.value);
  return v;
}

}  // namespace

QlearnAgent::QlearnAgent(const Environment& env, const QConfig& cfg,
                         const ExplorationSchedule& sched,
                         const ReplayBuffer* replay, std::vector<Dfa> machines)
    : cfg_(cfg),
      sched_(sched),
      replay_(replay),
      alphabet_(env.alphabet()),
      n_actions_(env.action_count()),
      values_(declared_values(env)),
      q_(std::move(machines), values_, cfg) {}

void QlearnAgent::machines_changed(const std::vector<Dfa>& machines) {
  q_ = reinit_with_automata(*replay_, machines, values_, cfg_, alphabet_,
                            n_actions_);
}

ActionId QlearnAgent::act(const ProductState& p, std::uint64_t step,
                          Rng& rng) {
  return select_action(q_, p, n_actions_, sched_, step, rng);
}

void QlearnAgent::observe_step(const ProductState& p, ActionId a,
                               const StepOutcome& out,
                               const ProductState& next) {
  double r = out.markov_reward;
  for (int t : out.fired) r += values_[static_cast<std::size_t>(t)];
  q_.update(p, a, r, next, out.terminal, n_actions_);
}

double QlearnAgent::evaluate(Environment& eval_env,
                             const std::vector<Dfa>& machines, int episodes,
                             Rng& rng) {
  return greedy_eval(q_, eval_env, machines, episodes, rng);
}

RmaxAgent::RmaxAgent(const Environment& env, const RmaxConfig& cfg,
                     const ExplorationSchedule& sched,
                     std::vector<Dfa> machines,
                     std::uint64_t replan_interval_steps)
    : cfg_(cfg),
      sched_(sched),
      n_actions_(env.action_count()),
      model_(std::move(machines), declared_values(env), env.action_count(),
             env.alphabet(), cfg),
      replan_interval_(replan_interval_steps) {}

void RmaxAgent::replan() {
  planner_ = plan(model_, cfg_);
  model_.clear_dirty();
  ++replans_;
}

void RmaxAgent::machines_changed(const std::vector<Dfa>& machines) {
  model_.rebuild_on_automata(machines);
  replan();
}

ActionId RmaxAgent::act(const ProductState& p, std::uint64_t step, Rng& rng) {
  if (!planner_.has_value()) replan();
  return rmax_act(*planner_, p, n_actions_, sched_, step, rng);
}

void RmaxAgent::observe_step(const ProductState& p, ActionId a,
                             const StepOutcome& out,
                             const ProductState& next) {
  model_.observe(p, a, out.state, out.symbol.has_value(), out.fired,
                 out.markov_reward);
}

void RmaxAgent::episode_finished(std::uint64_t step) {
  if (model_.planner_dirty() && step >= last_replan_step_ + replan_interval_) {
    replan();
    last_replan_step_ = step;
  }
}

double RmaxAgent::evaluate(Environment& eval_env,
                           const std::vector<Dfa>& machines, int episodes,
                           Rng& rng) {
  (void)rng;
  if (model_.planner_dirty() || !planner_.has_value()) replan();
  const std::vector<RewardType>& types = eval_env.reward_types();
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    StateId s = eval_env.reset();
    ProductState p = product_initial(s, machines);
    double ret = 0.0;
    double discount = 1.0;
    for (;;) {
      const ActionId a = planner_->greedy_action(p);
      const StepOutcome out = eval_env.step(a);
      double r = out.markov_reward;
      for (int t : out.fired) r += types[static_cast<std::size_t>(t)].value;
      ret += discount * r;
      discount *= cfg_.gamma;
      p = product_step(p, out.state, out.symbol, machines);
      if (out.terminal) break;
    }
    total += ret;
  }
  return total / episodes;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

LearnerKind learner_from_string(const std::string& s) {
  if (s == "lstar") return LearnerKind::Lstar;
  if (s == "edsm") return LearnerKind::Edsm;
  if (s == "optimal") return LearnerKind::Optimal;
  if (s == "vanilla") return LearnerKind::Vanilla;
  throw std::invalid_argument("unknown learner: " + s);
}

std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::Lstar: return "lstar";
    case LearnerKind::Edsm: return "edsm";
    case LearnerKind::Optimal: return "optimal";
    case LearnerKind::Vanilla: return "vanilla";
  }
  return "?";
}

Runner::Runner(Environment& env, RlAgent& agent, ReplayBuffer& replay,
               const RunConfig& cfg, std::uint64_t seed, CheckpointSink sink)
    : env_(env),
      agent_(agent),
      cfg_(cfg),
      seed_(seed),
      sink_(std::move(sink)),
      ground_truth_(env.ground_truth_machines()),
      reward_values_(declared_values(env)),
      store_(env.reward_type_count(), cfg.negative_fifo_capacity),
      log_(env.reward_type_count()),
      replay_(replay),
      policy_rng_(derive_seed(seed, 1)),
      next_checkpoint_(cfg.checkpoint_every),
      started_(std::chrono::steady_clock::now()) {
  machines_.assign(static_cast<std::size_t>(env.reward_type_count()),
                   Dfa::single_state(env.alphabet().size(), false));
  if (!cfg_.query_log_path.empty())
    query_log_ = std::make_unique<std::ofstream>(cfg_.query_log_path);
}

Runner::~Runner() = default;

void Runner::log_query(const std::string& line) {
  if (query_log_ && query_log_->is_open()) *query_log_ << line << '\n';
}

void Runner::set_machines(int type, Dfa dfa) {
  machines_[static_cast<std::size_t>(type)] = std::move(dfa);
  agent_.machines_changed(machines_);
  ++stats_.machine_rebuilds;
}

Runner::EpisodeResult Runner::run_episode(std::optional<ForceTarget> force) {
  EpisodeResult result;
  const StateId start = env_.reset();
  ProductState p = product_initial(start, machines_);
  ReplayEpisode episode;
  episode.start = start;
  bool forcing = force.has_value();

  for (;;) {
    if (step_count_ >= cfg_.budget_steps) break;
    ActionId a;
    if (forcing && !result.answered &&
        result.trace.symbols.size() < force->word->size()) {
      const SymbolId next_sym = (*force->word)[result.trace.symbols.size()];
      a = env_.alphabet().decode(next_sym).action;
    } else {
      a = agent_.act(p, step_count_, policy_rng_);
    }
    const StepOutcome out = env_.step(a);
    ++step_count_;

    record_step(result.trace, out.symbol, out.fired);
    if (forcing && !result.answered) {
      const Word& w = *force->word;
      const std::size_t len = result.trace.symbols.size();
      if (len > 0 && (len > w.size() ||
                      result.trace.symbols[len - 1] != w[len - 1])) {
        forcing = false;  // derailed (possible only with state symbols)
      } else if (len == w.size()) {
        result.answered = true;
        result.label =
            std::find(out.fired.begin(), out.fired.end(), force->type) !=
            out.fired.end();
      }
    }

    ProductState next = product_step(p, out.state, out.symbol, machines_);
    ReplayStep rs;
    rs.state = p.mdp;
    rs.next = out.state;
    rs.action = a;
    rs.markov_reward = static_cast<float>(out.markov_reward);
    for (int t : out.fired) rs.fired_mask |= static_cast<std::uint8_t>(1u << t);
    rs.effective = out.symbol.has_value();
    rs.terminal = out.terminal;
    episode.steps.push_back(rs);
    agent_.observe_step(p, a, out, next);
    p = std::move(next);
    if (out.terminal) break;
  }

  store_.close_episode(result.trace);
  log_.insert(result.trace);
  replay_.push(std::move(episode));
  ++stats_.episodes;
  agent_.episode_finished(step_count_);
  maybe_checkpoint();
  return result;
}

void Runner::maybe_checkpoint() {
  while (step_count_ >= next_checkpoint_ &&
         next_checkpoint_ <= cfg_.budget_steps) {
    auto eval_env = env_.clone_with_seed(
        derive_seed(seed_, 1000 + static_cast<std::uint64_t>(checkpoint_index_)));
    Rng eval_rng(
        derive_seed(seed_, 5000 + static_cast<std::uint64_t>(checkpoint_index_)));
    CheckpointRow row;
    row.run_id = cfg_.run_id;
    row.seed = seed_;
    row.algorithm = cfg_.algorithm;
    row.learner = cfg_.learner.empty() ? "?" : cfg_.learner;
    row.env_name = cfg_.env_name;
    row.scheme = cfg_.scheme;
    row.step = next_checkpoint_;
    row.mean_return =
        agent_.evaluate(*eval_env, machines_, cfg_.eval_episodes, eval_rng);
    for (std::size_t t = 0; t < machines_.size(); ++t) {
      row.machine_states.push_back(machines_[t].n_states);
      row.machine_correct.push_back(equivalent(machines_[t], ground_truth_[t]));
    }
    row.wall_ms = static_cast<long>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started_)
            .count());
    sink_(row);
    ++checkpoint_index_;
    next_checkpoint_ += cfg_.checkpoint_every;
  }
}

void Runner::run_alg1(LearnerKind learner) {
  if (learner == LearnerKind::Lstar)
    throw std::invalid_argument("run_alg1: L* runs under run_alg2");
  if (learner == LearnerKind::Optimal) {
    machines_ = ground_truth_;
    agent_.machines_changed(machines_);
  }

  std::vector<long> last_learned_pos(machines_.size(), 0);
  while (step_count_ < cfg_.budget_steps) {
    for (int i = 0; i < cfg_.c_trials && step_count_ < cfg_.budget_steps; ++i)
      run_episode(std::nullopt);
    if (learner != LearnerKind::Edsm) continue;
    for (int t = 0; t < static_cast<int>(machines_.size()); ++t) {
      const long pos = store_.positive_weight(t);
      if (pos <= cfg_.c_pos || pos == last_learned_pos[static_cast<std::size_t>(t)])
        continue;
      last_learned_pos[static_cast<std::size_t>(t)] = pos;
      PreprocessOutcome outcome = preprocess_and_learn(
          store_, t, env_.alphabet().size(), cfg_.preprocess);
      if (outcome.dfa.has_value()) {
        set_machines(t, std::move(*outcome.dfa));
      } else {
        ++stats_.edsm_failures;  // keep the previous machine
      }
    }
  }
  stats_.steps = step_count_;
}

Runner::MembershipOutcome Runner::serve_membership(int type, const Word& w,
                                                   int attempts) {
  MembershipOutcome out;
  // Anything observed before answers immediately.
  if (std::optional<std::uint32_t> mask = log_.lookup(w)) {
    out.label = (*mask >> type) & 1u;
    return out;
  }
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (step_count_ >= cfg_.budget_steps) break;
    ++out.attempts_used;
    ForceTarget target{type, &w};
    EpisodeResult res = run_episode(target);
    if (res.answered) {
      out.label = res.label;
      return out;
    }
  }
  out.label = false;  // k attempts exhausted: tagged negative
  out.heuristic = true;
  ++stats_.heuristic_answers;
  return out;
}

std::optional<Word> Runner::serve_equivalence(int type, const Dfa& hypothesis,
                                              std::uint64_t max_steps) {
  if (std::optional<Word> ce = log_.find_counterexample(hypothesis, type))
    return ce;
  const std::uint64_t stop =
      std::min(cfg_.budget_steps, step_count_ + max_steps);
  while (step_count_ < stop) {
    EpisodeResult res = run_episode(std::nullopt);
    if (std::optional<Word> ce =
            trace_counterexample(res.trace, hypothesis, type))
      return ce;
  }
  return std::nullopt;
}

void Runner::run_alg2() {
  const int n_types = static_cast<int>(machines_.size());
  struct TypeState {
    LstarSession session;
    std::optional<Word> pending;  // membership being forced
    int attempts = 0;
    bool awaiting_ce = false;
    std::unordered_map<Word, bool, WordHash> heuristic;
    explicit TypeState(std::int32_t n_symbols) : session(n_symbols) {}
  };
  std::vector<TypeState> types;
  types.reserve(static_cast<std::size_t>(n_types));
  for (int t = 0; t < n_types; ++t)
    types.emplace_back(env_.alphabet().size());

  // Advances one session as far as free answers (log lookups, cached
  // answers) allow; stops at a query that needs environment work.
  auto pump = [&](int t) {
    TypeState& ts = types[static_cast<std::size_t>(t)];
    for (;;) {
      LstarSession::Query q = ts.session.next();
      if (q.kind == LstarSession::QueryKind::Finished) return;
      if (q.kind == LstarSession::QueryKind::Membership) {
        if (std::optional<std::uint32_t> mask = log_.lookup(q.word)) {
          const bool label = (*mask >> t) & 1u;
          ts.session.answer_membership(q.word, label);
          std::ostringstream line;
          line << t << " member observed " << label;
          log_query(line.str());
          continue;
        }
        ts.pending = q.word;
        ts.attempts = 0;
        return;
      }
      // Equivalence: the newest hypothesis drives the product space at once.
      set_machines(t, q.hypothesis);
      std::ostringstream line;
      line << t << " equivalence states=" << q.hypothesis.n_states;
      log_query(line.str());
      if (std::optional<Word> ce = log_.find_counterexample(q.hypothesis, t)) {
        ts.session.answer_counterexample(*ce);
        continue;
      }
      ts.awaiting_ce = true;
      return;
    }
  };

  for (int t = 0; t < n_types; ++t) pump(t);

  int rotate = 0;
  while (step_count_ < cfg_.budget_steps) {
    // Membership queries that need forcing, schedule-ordered.
    std::vector<int> forceable;
    for (int t = 0; t < n_types; ++t)
      if (types[static_cast<std::size_t>(t)].pending.has_value())
        forceable.push_back(t);

    Trace episode_trace;
    if (!forceable.empty()) {
      int pick;
      if (cfg_.scheduling == QueryScheduling::Prioritized) {
        pick = forceable.front();
      } else {
        pick = forceable[static_cast<std::size_t>(rotate) % forceable.size()];
        ++rotate;
      }
      TypeState& ts = types[static_cast<std::size_t>(pick)];
      const Word w = *ts.pending;
      ForceTarget target{pick, &w};
      EpisodeResult res = run_episode(target);
      episode_trace = std::move(res.trace);
      if (res.answered) {
        ts.session.answer_membership(w, res.label);
        std::ostringstream line;
        line << pick << " member forced " << res.label;
        log_query(line.str());
        ts.pending.reset();
        pump(pick);
      } else if (++ts.attempts >= cfg_.membership_attempts) {
        ts.session.answer_membership(w, false);
        ts.heuristic.emplace(w, false);
        ++stats_.heuristic_answers;
        std::ostringstream line;
        line << pick << " member heuristic 0";
        log_query(line.str());
        ts.pending.reset();
        pump(pick);
      }
    } else {
      // No membership work: explore so counterexamples can show up.
      EpisodeResult res = run_episode(std::nullopt);
      episode_trace = std::move(res.trace);
    }

    // The new trace may contradict hypotheses awaiting counterexamples.
    for (int t = 0; t < n_types; ++t) {
      TypeState& ts = types[static_cast<std::size_t>(t)];
      if (!ts.awaiting_ce || !ts.session.current_hypothesis().has_value())
        continue;
      if (std::optional<Word> ce = trace_counterexample(
              episode_trace, *ts.session.current_hypothesis(), t)) {
        ts.awaiting_ce = false;
        ts.session.answer_counterexample(*ce);
        pump(t);
      }
    }

    // Heuristic answers contradicted by observation: fix the cache and
    // restart that session (the table may rest on the bad answer).
    for (int t = 0; t < n_types; ++t) {
      TypeState& ts = types[static_cast<std::size_t>(t)];
      std::optional<Word> bad;
      for (const auto& [w, ans] : ts.heuristic) {
        std::optional<std::uint32_t> mask = log_.lookup(w);
        if (mask.has_value() && (((*mask >> t) & 1u) != 0) != ans) {
          bad = w;
          break;
        }
      }
      if (bad.has_value()) {
        const bool truth = (*log_.lookup(*bad) >> t) & 1u;
        ts.heuristic.erase(*bad);
        ts.session.overwrite_cache(*bad, truth);
        ts.session.restart_keep_cache();
        ts.pending.reset();
        ts.awaiting_ce = false;
        ++stats_.lstar_restarts;
        pump(t);
      }
    }
  }
  stats_.steps = step_count_;
}

}  // namespace nmrl

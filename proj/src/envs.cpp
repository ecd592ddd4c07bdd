#include "nmrl/envs.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace nmrl {

namespace {

// Minimal DFA for "the last m+1 symbols are a^m b", with accepting-state
// continuation equal to the initial state's (the monitor pattern may re-fire).
Dfa consecutive_then(SymbolId a, int m, SymbolId b, std::int32_t n_symbols) {
  assert(a != b && m >= 1);
  // states 0..m: capped count of consecutive `a`; state m+1: accept
  const std::int32_t accept = m + 1;
  Dfa d(m + 2, n_symbols);
  for (std::int32_t p = 0; p <= m; ++p) {
    for (SymbolId x = 0; x < n_symbols; ++x) {
      std::int32_t to = 0;
      if (x == a)
        to = std::min<std::int32_t>(p + 1, m);
      else if (x == b && p == m)
        to = accept;
      d.set_transition(p, x, to);
    }
  }
  for (SymbolId x = 0; x < n_symbols; ++x)
    d.set_transition(accept, x, d.next(0, x));
  d.accepting[static_cast<std::size_t>(accept)] = 1;
  return d;
}

// Pushes the firing `delay` symbols later by routing every accepting entry
// through a chain of any-symbol states. The learner-facing language is the
// delayed one; emission timing follows the same machine.
Dfa delayed_monitor(const Dfa& base, int delay) {
  if (delay <= 0) return minimize(base);
  const std::int32_t chain0 = base.n_states;
  const std::int32_t accept = chain0 + delay;
  Dfa d(base.n_states + delay + 1, base.n_symbols);
  auto redirect = [&](std::int32_t to) {
    return base.is_accepting(to) ? chain0 : to;
  };
  for (std::int32_t q = 0; q < base.n_states; ++q)
    for (SymbolId x = 0; x < base.n_symbols; ++x)
      d.set_transition(q, x, redirect(base.next(q, x)));
  for (int i = 0; i < delay; ++i)
    for (SymbolId x = 0; x < base.n_symbols; ++x)
      d.set_transition(chain0 + i, x,
                       i + 1 < delay ? chain0 + i + 1 : accept);
  for (SymbolId x = 0; x < base.n_symbols; ++x)
    d.set_transition(accept, x, redirect(base.next(base.initial, x)));
  d.initial = base.initial;
  d.accepting.assign(static_cast<std::size_t>(d.n_states), 0);
  d.accepting[static_cast<std::size_t>(accept)] = 1;
  return minimize(d);
}

// "Pick once all n stains were cleaned", applicable for each pick.
Dfa cleaned_then_pick(int n_stains, std::int32_t n_symbols) {
  // states 0..n: cleans seen (capped); state n+1: accept
  const std::int32_t armed = n_stains;
  const std::int32_t accept = n_stains + 1;
  Dfa d(n_stains + 2, n_symbols);
  for (std::int32_t c = 0; c <= armed; ++c) {
    for (SymbolId x = 0; x < n_symbols; ++x) {
      std::int32_t to = c;
      if (x == kClean)
        to = std::min<std::int32_t>(c + 1, armed);
      else if (x == kPick && c == armed)
        to = accept;
      d.set_transition(c, x, to);
    }
  }
  for (SymbolId x = 0; x < n_symbols; ++x)
    d.set_transition(accept, x, x == kPick ? accept : armed);
  d.accepting[static_cast<std::size_t>(accept)] = 1;
  return d;
}

// R2: as cleaned_then_pick but delayed by three symbols and applicable only
// to the first qualifying pick (latches into a dead state afterwards).
Dfa cleaned_then_first_pick_delayed(int n_stains, std::int32_t n_symbols,
                                    int delay) {
  const std::int32_t armed = n_stains;
  const std::int32_t chain0 = armed + 1;
  const std::int32_t accept = chain0 + delay;
  const std::int32_t dead = accept + 1;
  Dfa d(dead + 1, n_symbols);
  for (std::int32_t c = 0; c <= armed; ++c) {
    for (SymbolId x = 0; x < n_symbols; ++x) {
      std::int32_t to = c;
      if (x == kClean)
        to = std::min<std::int32_t>(c + 1, armed);
      else if (x == kPick && c == armed)
        to = chain0;
      d.set_transition(c, x, to);
    }
  }
  for (int i = 0; i < delay; ++i)
    for (SymbolId x = 0; x < n_symbols; ++x)
      d.set_transition(chain0 + i, x, i + 1 < delay ? chain0 + i + 1 : accept);
  for (SymbolId x = 0; x < n_symbols; ++x) {
    d.set_transition(accept, x, dead);
    d.set_transition(dead, x, dead);
  }
  d.accepting[static_cast<std::size_t>(accept)] = 1;
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// MAB
// ---------------------------------------------------------------------------

MabScheme mab_scheme_from_string(const std::string& s) {
  if (s == "S1" || s == "s1") return MabScheme::S1;
  if (s == "S2" || s == "s2") return MabScheme::S2;
  if (s == "S3" || s == "s3") return MabScheme::S3;
  if (s == "S4" || s == "s4") return MabScheme::S4;
  throw std::invalid_argument("unknown MAB scheme: " + s);
}

std::string to_string(MabScheme s) {
  switch (s) {
    case MabScheme::S1: return "S1";
    case MabScheme::S2: return "S2";
    case MabScheme::S3: return "S3";
    case MabScheme::S4: return "S4";
  }
  return "?";
}

int mab_reward_type_count(MabScheme scheme) {
  return scheme == MabScheme::S4 ? 2 : 1;
}

Dfa mab_monitor_dfa(MabScheme scheme, int type, int n_arms) {
  if (type < 0 || type >= mab_reward_type_count(scheme))
    throw std::invalid_argument("mab_monitor_dfa: bad reward type");
  const std::int32_t n = n_arms;
  // arm labels 1..3 map to symbol ids 0..2
  const SymbolId arm1 = 0, arm2 = 1, arm3 = 2;
  switch (scheme) {
    case MabScheme::S1:
      return minimize(consecutive_then(arm1, 4, arm3, n));
    case MabScheme::S2:
      return delayed_monitor(consecutive_then(arm1, 4, arm3, n), 3);
    case MabScheme::S3:
      return minimize(consecutive_then(arm3, 2, arm2, n));
    case MabScheme::S4:
      return type == 0 ? minimize(consecutive_then(arm1, 4, arm3, n))
                       : minimize(consecutive_then(arm3, 2, arm2, n));
  }
  throw std::logic_error("unreachable");
}

MabEnv::MabEnv(const MabConfig& cfg, std::uint64_t /*seed*/) : cfg_(cfg) {
  if (cfg_.n_arms < 3)
    throw std::invalid_argument("MabEnv: schemes use arms 1..3");
  alphabet_ = EventAlphabet{AlphabetMode::ActionOnly, cfg_.n_arms, 1};
  const int n_types = mab_reward_type_count(cfg_.scheme);
  for (int t = 0; t < n_types; ++t) {
    reward_types_.push_back({t, cfg_.nmr_value, MarkovianHint::Unknown});
    monitors_.push_back({mab_monitor_dfa(cfg_.scheme, t, cfg_.n_arms), 0});
  }
}

StateId MabEnv::reset() {
  for (auto& m : monitors_) m.reset();
  steps_taken_ = 0;
  episode_open_ = true;
  return 0;
}

StepOutcome MabEnv::step(ActionId a) {
  if (!episode_open_ || steps_taken_ >= cfg_.steps_per_episode)
    throw std::logic_error("MabEnv: episode exhausted, call reset()");
  if (a < 0 || a >= cfg_.n_arms)
    throw std::invalid_argument("MabEnv: bad action");
  StepOutcome out;
  out.state = 0;
  out.symbol = alphabet_.encode({a, 0});
  for (std::size_t t = 0; t < monitors_.size(); ++t) {
    if (monitors_[t].advance(*out.symbol)) out.fired.push_back(static_cast<int>(t));
  }
  ++steps_taken_;
  out.terminal = steps_taken_ >= cfg_.steps_per_episode;
  if (out.terminal) episode_open_ = false;
  return out;
}

Dfa MabEnv::ground_truth_machine(int type) const {
  return mab_monitor_dfa(cfg_.scheme, type, cfg_.n_arms);
}

std::unique_ptr<Environment> MabEnv::clone_with_seed(
    std::uint64_t seed) const {
  return std::make_unique<MabEnv>(cfg_, seed);
}

// ---------------------------------------------------------------------------
// Robot world
// ---------------------------------------------------------------------------

RobotScheme robot_scheme_from_string(const std::string& s) {
  if (s == "R1" || s == "r1") return RobotScheme::R1;
  if (s == "R2" || s == "r2") return RobotScheme::R2;
  if (s == "R3" || s == "r3") return RobotScheme::R3;
  if (s == "R4" || s == "r4") return RobotScheme::R4;
  throw std::invalid_argument("unknown robot scheme: " + s);
}

std::string to_string(RobotScheme s) {
  switch (s) {
    case RobotScheme::R1: return "R1";
    case RobotScheme::R2: return "R2";
    case RobotScheme::R3: return "R3";
    case RobotScheme::R4: return "R4";
  }
  return "?";
}

int robot_reward_type_count(RobotScheme scheme) {
  return scheme == RobotScheme::R4 ? 2 : 1;
}

Dfa robot_monitor_dfa(RobotScheme scheme, int type, int n_stains) {
  if (type < 0 || type >= robot_reward_type_count(scheme))
    throw std::invalid_argument("robot_monitor_dfa: bad reward type");
  const std::int32_t n = kRobotActionCount;
  switch (scheme) {
    case RobotScheme::R1:
      return minimize(cleaned_then_pick(n_stains, n));
    case RobotScheme::R2:
      return minimize(cleaned_then_first_pick_delayed(n_stains, n, 3));
    case RobotScheme::R3:
      return minimize(consecutive_then(kRight, 2, kPick, n));
    case RobotScheme::R4:
      return type == 0 ? minimize(cleaned_then_pick(n_stains, n))
                       : minimize(consecutive_then(kRight, 2, kPick, n));
  }
  throw std::logic_error("unreachable");
}

RobotWorldEnv::RobotWorldEnv(const RobotConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed) {
  const int cells = cfg_.cells();
  if (cells < 4 || cfg_.n_stains < 1 || cfg_.n_fruits < 1)
    throw std::invalid_argument("RobotWorldEnv: degenerate configuration");
  if (cfg_.n_stains + cfg_.n_fruits > cells - 2)
    throw std::invalid_argument("RobotWorldEnv: too many objects");
  if (cfg_.start_cell == cfg_.resolved_basket())
    throw std::invalid_argument("RobotWorldEnv: start equals basket");

  std::int64_t count = cells;
  for (int i = 0; i < cfg_.n_stains; ++i) count *= cells + 1;
  for (int i = 0; i < cfg_.n_fruits; ++i) count *= cells + 2;
  if (count > INT32_MAX)
    throw std::invalid_argument("RobotWorldEnv: state space too large");
  state_count_ = static_cast<StateId>(count);

  alphabet_ = cfg_.alphabet_mode == AlphabetMode::ActionOnly
                  ? EventAlphabet{AlphabetMode::ActionOnly, kRobotActionCount, 1}
                  : EventAlphabet{AlphabetMode::ActionState, kRobotActionCount,
                                  state_count_};

  const int n_types = robot_reward_type_count(cfg_.scheme);
  for (int t = 0; t < n_types; ++t) {
    reward_types_.push_back({t, cfg_.nmr_value, MarkovianHint::Unknown});
    if (cfg_.alphabet_mode != AlphabetMode::ActionOnly)
      throw std::invalid_argument(
          "RobotWorldEnv: monitors are defined over the action-only alphabet");
    monitors_.push_back({robot_monitor_dfa(cfg_.scheme, t, cfg_.n_stains), 0});
  }
  stain_.assign(static_cast<std::size_t>(cfg_.n_stains), 0);
  fruit_.assign(static_cast<std::size_t>(cfg_.n_fruits), 0);
}

StateId RobotWorldEnv::encode_state() const {
  const int cells = cfg_.cells();
  std::int64_t id = robot_;
  for (int s : stain_) id = id * (cells + 1) + s;
  for (int f : fruit_) id = id * (cells + 2) + f;
  return static_cast<StateId>(id);
}

bool RobotWorldEnv::goal_reached() const {
  const int cells = cfg_.cells();
  for (int s : stain_)
    if (s != cells) return false;
  for (int f : fruit_)
    if (f != cells + 1) return false;
  return true;
}

int RobotWorldEnv::move_target(int pos, ActionId dir) const {
  int x = pos % cfg_.width;
  int y = pos / cfg_.width;
  switch (dir) {
    case kUp: ++y; break;
    case kDown: --y; break;
    case kLeft: --x; break;
    case kRight: ++x; break;
    default: return -1;
  }
  if (x < 0 || x >= cfg_.width || y < 0 || y >= cfg_.height) return -1;
  return y * cfg_.width + x;
}

StateId RobotWorldEnv::reset() {
  const int cells = cfg_.cells();
  robot_ = cfg_.start_cell;
  // Stains and fruits land on distinct cells, never on the start or the
  // basket.
  std::vector<int> candidates;
  candidates.reserve(static_cast<std::size_t>(cells));
  for (int c = 0; c < cells; ++c)
    if (c != cfg_.start_cell && c != cfg_.resolved_basket())
      candidates.push_back(c);
  const int need = cfg_.n_stains + cfg_.n_fruits;
  for (int i = 0; i < need; ++i) {
    std::uniform_int_distribution<std::size_t> pick(
        static_cast<std::size_t>(i), candidates.size() - 1);
    std::swap(candidates[static_cast<std::size_t>(i)], candidates[pick(rng_)]);
  }
  for (int i = 0; i < cfg_.n_stains; ++i)
    stain_[static_cast<std::size_t>(i)] = candidates[static_cast<std::size_t>(i)];
  for (int i = 0; i < cfg_.n_fruits; ++i)
    fruit_[static_cast<std::size_t>(i)] =
        candidates[static_cast<std::size_t>(cfg_.n_stains + i)];
  for (auto& m : monitors_) m.reset();
  steps_taken_ = 0;
  episode_open_ = true;
  return encode_state();
}

StepOutcome RobotWorldEnv::step(ActionId a) {
  if (!episode_open_) throw std::logic_error("RobotWorldEnv: call reset()");
  if (a < 0 || a >= kRobotActionCount)
    throw std::invalid_argument("RobotWorldEnv: bad action");
  const int cells = cfg_.cells();
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  StepOutcome out;
  bool effective = false;

  if (a <= kRight) {
    out.markov_reward = -1.0;  // every move action costs -1
    const double roll = unif(rng_);
    ActionId dir = a;
    if (roll >= cfg_.move_success) {
      // clockwise slip on the first half of the remaining mass, else
      // counter-clockwise
      static constexpr ActionId kCw[4] = {kRight, kLeft, kUp, kDown};
      static constexpr ActionId kCcw[4] = {kLeft, kRight, kDown, kUp};
      const double half = cfg_.move_success + (1.0 - cfg_.move_success) / 2.0;
      dir = roll < half ? kCw[a] : kCcw[a];
    }
    const int target = move_target(robot_, dir);
    if (target >= 0 && target != robot_) {
      robot_ = target;
      effective = true;
    }
  } else if (a == kClean) {
    int idx = -1;
    for (std::size_t i = 0; i < stain_.size(); ++i)
      if (stain_[i] == robot_) idx = static_cast<int>(i);
    if (idx < 0) {
      out.markov_reward = -1.0;  // illegal
    } else if (unif(rng_) < cfg_.op_success) {
      stain_[static_cast<std::size_t>(idx)] = cells;
      effective = true;
    }
  } else if (a == kPick) {
    int idx = -1;
    for (std::size_t i = 0; i < fruit_.size(); ++i)
      if (fruit_[i] == robot_) idx = static_cast<int>(i);
    if (idx < 0) {
      out.markov_reward = -1.0;
    } else if (unif(rng_) < cfg_.op_success) {
      fruit_[static_cast<std::size_t>(idx)] = cells;  // held
      effective = true;
    }
  } else {  // kPut
    int idx = -1;
    for (std::size_t i = 0; i < fruit_.size(); ++i)
      if (fruit_[i] == cells) idx = static_cast<int>(i);
    if (robot_ != cfg_.resolved_basket() || idx < 0) {
      out.markov_reward = -1.0;
    } else if (unif(rng_) < cfg_.op_success) {
      fruit_[static_cast<std::size_t>(idx)] = cells + 1;  // in the basket
      effective = true;
    }
  }

  ++steps_taken_;
  out.state = encode_state();
  if (effective) {
    out.symbol = alphabet_.encode({a, out.state});
    for (std::size_t t = 0; t < monitors_.size(); ++t) {
      if (monitors_[t].advance(*out.symbol))
        out.fired.push_back(static_cast<int>(t));
    }
  }
  out.terminal = steps_taken_ >= cfg_.steps_per_episode || goal_reached();
  if (out.terminal) episode_open_ = false;
  return out;
}

Dfa RobotWorldEnv::ground_truth_machine(int type) const {
  return robot_monitor_dfa(cfg_.scheme, type, cfg_.n_stains);
}

std::unique_ptr<Environment> RobotWorldEnv::clone_with_seed(
    std::uint64_t seed) const {
  return std::make_unique<RobotWorldEnv>(cfg_, seed);
}

}  // namespace nmrl

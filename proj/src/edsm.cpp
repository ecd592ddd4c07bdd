#include "nmrl/edsm.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <limits>
#include <unordered_map>

namespace nmrl {

Pta Pta::build(const std::vector<Sample>& samples, std::int32_t n_symbols,
               bool prefix_negatives) {
  if (samples.empty())
    throw std::invalid_argument("build_pta: at least one labeled trace");
  Pta pta;
  pta.n_symbols_ = n_symbols;
  pta.children_.assign(static_cast<std::size_t>(n_symbols), -1);
  pta.acc_w_.assign(1, 0);
  pta.rej_w_.assign(1, 0);

  auto mark = [&pta](std::int32_t node, bool accepting, long w) {
    if (accepting)
      pta.acc_w_[static_cast<std::size_t>(node)] += w;
    else
      pta.rej_w_[static_cast<std::size_t>(node)] += w;
    if (pta.acc_w_[static_cast<std::size_t>(node)] > 0 &&
        pta.rej_w_[static_cast<std::size_t>(node)] > 0)
      throw InputInconsistency("same word labeled both positive and negative");
  };

  for (const Sample& s : samples) {
    std::int32_t node = 0;
    std::size_t next_firing = 0;
    if (prefix_negatives) {
      const bool fires_at_0 =
          !s.firing_steps.empty() && s.firing_steps.front() == 0;
      mark(0, fires_at_0, s.weight);
      if (fires_at_0) ++next_firing;
    } else if (s.symbols.empty()) {
      mark(0, s.positive(), s.weight);
    }
    for (std::size_t depth = 1; depth <= s.symbols.size(); ++depth) {
      const SymbolId a = s.symbols[depth - 1];
      if (a < 0 || a >= n_symbols)
        throw std::invalid_argument("build_pta: symbol out of range");
      std::int32_t& slot =
          pta.children_[static_cast<std::size_t>(node) * n_symbols + a];
      if (slot < 0) {
        slot = pta.n_nodes_++;
        pta.children_.resize(pta.children_.size() + n_symbols, -1);
        pta.acc_w_.push_back(0);
        pta.rej_w_.push_back(0);
      }
      node = slot;
      const bool fires_here = next_firing < s.firing_steps.size() &&
                              s.firing_steps[next_firing] ==
                                  static_cast<int>(depth);
      if (fires_here) ++next_firing;
      if (prefix_negatives) {
        mark(node, fires_here, s.weight);
      } else if (depth == s.symbols.size()) {
        mark(node, s.positive(), s.weight);
      }
    }
  }

  // canonical ranks by breadth-first order
  pta.bfs_rank_.assign(static_cast<std::size_t>(pta.n_nodes_), 0);
  std::deque<std::int32_t> queue{0};
  std::int32_t next_rank = 0;
  while (!queue.empty()) {
    std::int32_t n = queue.front();
    queue.pop_front();
    pta.bfs_rank_[static_cast<std::size_t>(n)] = next_rank++;
    for (SymbolId a = 0; a < n_symbols; ++a) {
      std::int32_t c = pta.child(n, a);
      if (c >= 0) queue.push_back(c);
    }
  }
  return pta;
}

MergeState::MergeState(const Pta& pta, EdsmScoreMode mode)
    : n_symbols_(pta.symbol_count()), mode_(mode) {
  const std::int32_t n = pta.node_count();
  parent_.resize(static_cast<std::size_t>(n));
  acc_w_.resize(static_cast<std::size_t>(n));
  rej_w_.resize(static_cast<std::size_t>(n));
  rank_.resize(static_cast<std::size_t>(n));
  rows_.resize(static_cast<std::size_t>(n) * n_symbols_);
  for (std::int32_t i = 0; i < n; ++i) {
    parent_[static_cast<std::size_t>(i)] = i;
    acc_w_[static_cast<std::size_t>(i)] = pta.acc_weight(i);
    rej_w_[static_cast<std::size_t>(i)] = pta.rej_weight(i);
    rank_[static_cast<std::size_t>(i)] = pta.bfs_rank(i);
    for (SymbolId a = 0; a < n_symbols_; ++a)
      rows_[static_cast<std::size_t>(i) * n_symbols_ + a] = pta.child(i, a);
  }
}

std::int32_t MergeState::find(std::int32_t node) const {
  while (parent_[static_cast<std::size_t>(node)] != node)
    node = parent_[static_cast<std::size_t>(node)];
  return node;
}

void MergeState::rollback(std::size_t mark) {
  while (journal_.size() > mark) {
    const Undo& u = journal_.back();
    switch (u.kind) {
      case Undo::Parent:
        parent_[static_cast<std::size_t>(u.index)] =
            static_cast<std::int32_t>(u.old_value);
        break;
      case Undo::AccW:
        acc_w_[static_cast<std::size_t>(u.index)] = u.old_value;
        break;
      case Undo::RejW:
        rej_w_[static_cast<std::size_t>(u.index)] = u.old_value;
        break;
      case Undo::Row:
        rows_[static_cast<std::size_t>(u.index)] =
            static_cast<std::int32_t>(u.old_value);
        break;
      case Undo::Rank:
        rank_[static_cast<std::size_t>(u.index)] =
            static_cast<std::int32_t>(u.old_value);
        break;
    }
    journal_.pop_back();
  }
}

MergeState::MergeResult MergeState::merge_impl(std::int32_t into,
                                               std::int32_t from,
                                               bool commit) {
  const std::size_t mark = journal_.size();
  MergeResult result;

  // Worklist fold: (keeper, folded) pairs, keeper side stays oriented toward
  // the red sub-automaton.
  std::deque<std::pair<std::int32_t, std::int32_t>> work;
  work.emplace_back(into, from);
  while (!work.empty()) {
    auto [x, y] = work.front();
    work.pop_front();
    x = find(x);
    y = find(y);
    if (x == y) continue;

    const std::size_t sx = static_cast<std::size_t>(x);
    const std::size_t sy = static_cast<std::size_t>(y);
    if ((acc_w_[sx] > 0 && rej_w_[sy] > 0) ||
        (rej_w_[sx] > 0 && acc_w_[sy] > 0)) {
      rollback(mark);
      return {false, 0};
    }
    if (acc_w_[sx] > 0 && acc_w_[sy] > 0)
      result.score += mode_ == EdsmScoreMode::PairCount
                          ? 1
                          : acc_w_[sx] + acc_w_[sy];
    if (rej_w_[sx] > 0 && rej_w_[sy] > 0)
      result.score += mode_ == EdsmScoreMode::PairCount
                          ? 1
                          : rej_w_[sx] + rej_w_[sy];

    journal_.push_back({Undo::Parent, y, y});
    parent_[sy] = x;
    journal_.push_back({Undo::AccW, x, acc_w_[sx]});
    acc_w_[sx] += acc_w_[sy];
    journal_.push_back({Undo::RejW, x, rej_w_[sx]});
    rej_w_[sx] += rej_w_[sy];
    journal_.push_back({Undo::Rank, x, rank_[sx]});
    rank_[sx] = std::min(rank_[sx], rank_[sy]);

    for (SymbolId a = 0; a < n_symbols_; ++a) {
      const std::int64_t ix = static_cast<std::int64_t>(x) * n_symbols_ + a;
      const std::int32_t tx = rows_[static_cast<std::size_t>(ix)];
      const std::int32_t ty =
          rows_[static_cast<std::size_t>(y) * n_symbols_ + a];
      if (ty < 0) continue;
      if (tx < 0) {
        journal_.push_back({Undo::Row, ix, tx});
        rows_[static_cast<std::size_t>(ix)] = ty;
      } else {
        work.emplace_back(tx, ty);
      }
    }
  }

  result.ok = true;
  if (!commit) rollback(mark);
  return result;
}

MergeState::MergeResult MergeState::try_merge(std::int32_t into,
                                              std::int32_t from) {
  return merge_impl(into, from, true);
}

MergeState::MergeResult MergeState::probe_merge(std::int32_t into,
                                                std::int32_t from) {
  return merge_impl(into, from, false);
}

Dfa MergeState::quotient(std::int32_t root_node) const {
  const std::int32_t root = find(root_node);
  std::unordered_map<std::int32_t, std::int32_t> id;
  std::vector<std::int32_t> order;
  std::deque<std::int32_t> queue{root};
  id.emplace(root, 0);
  order.push_back(root);
  while (!queue.empty()) {
    std::int32_t c = queue.front();
    queue.pop_front();
    for (SymbolId a = 0; a < n_symbols_; ++a) {
      std::int32_t t = transition(c, a);
      if (t < 0) continue;
      std::int32_t r = find(t);
      if (id.emplace(r, static_cast<std::int32_t>(order.size())).second) {
        order.push_back(r);
        queue.push_back(r);
      }
    }
  }
  Dfa d(static_cast<std::int32_t>(order.size()), n_symbols_);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::int32_t c = order[i];
    d.accepting[i] = class_acc(c) > 0 ? 1 : 0;
    for (SymbolId a = 0; a < n_symbols_; ++a) {
      std::int32_t t = transition(c, a);
      // absent transitions self-loop
      d.set_transition(static_cast<std::int32_t>(i), a,
                       t < 0 ? static_cast<std::int32_t>(i) : id.at(find(t)));
    }
  }
  return d;
}

Dfa edsm_run(const std::vector<Sample>& samples, std::int32_t n_symbols,
             const EdsmConfig& cfg) {
  Pta pta = Pta::build(samples, n_symbols, cfg.prefix_negatives);
  MergeState ms(pta, cfg.score_mode);

  std::vector<std::int32_t> red{ms.find(0)};
  auto is_red = [&red](std::int32_t c) {
    return std::find(red.begin(), red.end(), c) != red.end();
  };

  for (;;) {
    // frontier: child classes of red classes, canonical order
    std::vector<std::int32_t> blues;
    for (std::int32_t r : red) {
      for (SymbolId a = 0; a < n_symbols; ++a) {
        std::int32_t t = ms.transition(r, a);
        if (t < 0) continue;
        std::int32_t c = ms.find(t);
        if (!is_red(c) &&
            std::find(blues.begin(), blues.end(), c) == blues.end())
          blues.push_back(c);
      }
    }
    if (blues.empty()) break;
    std::sort(blues.begin(), blues.end(),
              [&ms](std::int32_t a, std::int32_t b) {
                return ms.class_rank(a) < ms.class_rank(b);
              });

    long best_score = -1;
    std::int32_t best_red = -1, best_blue = -1;
    bool promoted = false;
    for (std::int32_t b : blues) {
      bool has_candidate = false;
      for (std::int32_t r : red) {
        MergeState::MergeResult res = ms.probe_merge(r, b);
        if (!res.ok || res.score <= 0) continue;  // evidence required
        has_candidate = true;
        const bool better =
            res.score > best_score ||
            (res.score == best_score &&
             (ms.class_rank(r) < ms.class_rank(best_red) ||
              (ms.class_rank(r) == ms.class_rank(best_red) &&
               ms.class_rank(b) < ms.class_rank(best_blue))));
        if (better) {
          best_score = res.score;
          best_red = r;
          best_blue = b;
        }
      }
      if (!has_candidate) {
        red.push_back(b);  // promote the first blue without a candidate
        promoted = true;
        break;
      }
    }
    if (promoted) continue;
    MergeState::MergeResult res = ms.try_merge(best_red, best_blue);
    assert(res.ok);
    (void)res;
  }

  return ms.quotient(0);
}

namespace {

std::vector<Sample> truncate_negatives(const TraceStore& store, int type,
                                       std::size_t limit) {
  std::vector<Sample> out;
  std::unordered_map<Word, std::size_t, WordHash> index;
  for (const Sample& s : store.positives(type)) {
    out.push_back(s);
    index.emplace(s.symbols, out.size() - 1);
  }
  for (const Sample& neg : store.negatives(type)) {
    Sample s;
    const std::size_t len = std::min(neg.symbols.size(), limit);
    s.symbols.assign(neg.symbols.begin(),
                     neg.symbols.begin() + static_cast<long>(len));
    for (int f : neg.firing_steps)
      if (f <= static_cast<int>(len)) s.firing_steps.push_back(f);
    s.weight = neg.weight;
    auto it = index.find(s.symbols);
    if (it != index.end()) {
      // a truncated negative may collide with a stored positive when the cut
      // lands exactly on a firing; weights just merge
      out[it->second].weight += s.weight;
    } else {
      index.emplace(s.symbols, out.size());
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace

PreprocessOutcome preprocess_and_learn(const TraceStore& store, int type,
                                       std::int32_t n_symbols,
                                       const PreprocessConfig& cfg) {
  PreprocessOutcome outcome;
  if (store.positive_weight(type) < cfg.min_positives) return outcome;

  std::size_t max_neg = 0;
  for (const Sample& s : store.negatives(type))
    max_neg = std::max(max_neg, s.symbols.size());
  std::size_t min_pos = std::numeric_limits<std::size_t>::max();
  for (const Sample& s : store.positives(type))
    min_pos = std::min(min_pos, s.symbols.size());
  const std::size_t floor_len =
      std::min(min_pos, std::max<std::size_t>(max_neg, 1));

  std::size_t limit = max_neg;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    std::vector<Sample> samples = truncate_negatives(store, type, limit);
    Dfa dfa = edsm_run(samples, n_symbols, cfg.edsm);
    if (dfa.n_states <= cfg.max_states) {
      outcome.dfa = std::move(dfa);
      outcome.retries = attempt;
      return outcome;
    }
    const std::size_t next = std::max(limit / 2, floor_len);
    if (next >= limit) break;  // floor reached, retrying cannot change it
    limit = next;
  }
  outcome.retries = cfg.max_retries;
  return outcome;
}

}  // namespace nmrl

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "nmrl/types.hpp"

namespace nmrl {

enum class Label { Unknown, Positive, Negative };

/// Reward type `type` fired after the trace's `step`-th symbol (1-based, so
/// step == symbols.size() means "at the final symbol").
struct RewardFiring {
  int step = 0;
  int type = 0;
};

/// One episode's event-symbol sequence together with the reward firings
/// observed along it. Labels are per reward type and derived: a trace is
/// positive for type t iff t fired exactly at its final symbol.
struct Trace {
  Word symbols;
  std::vector<RewardFiring> firings;

  bool fired_at(int step, int type) const;
  std::vector<int> firing_steps(int type) const;
  Label label_for(int type) const;
};

/// Appends `sym` (absent when the action had no effect and was filtered) and
/// records the rewards fired at the new final index. Rewards never fire on a
/// filtered step since monitors only advance on effective symbols.
void record_step(Trace& t, std::optional<SymbolId> sym,
                 const std::vector<int>& fired);

/// One reward type's labeled sample: symbols, that type's firing steps, and a
/// multiplicity weight. Positive iff the last firing is at the final symbol.
struct Sample {
  Word symbols;
  std::vector<int> firing_steps;
  long weight = 1;

  bool positive() const {
    return !firing_steps.empty() &&
           firing_steps.back() == static_cast<int>(symbols.size());
  }
};

/// Per-reward-type sample storage. Positives hold every prefix of a closed
/// episode that ends exactly at a firing (truncated there); negatives hold
/// full episode traces that did not fire the type at their end, in a bounded
/// FIFO. Duplicate words increment a weight instead of re-storing.
class TraceStore {
 public:
  explicit TraceStore(int n_types, std::size_t negative_capacity = 1000);

  void close_episode(const Trace& t);

  int type_count() const { return static_cast<int>(per_type_.size()); }
  const std::vector<Sample>& positives(int type) const;
  const std::deque<Sample>& negatives(int type) const;
  long positive_weight(int type) const;
  long negative_weight(int type) const;
  long episodes_closed() const { return episodes_closed_; }
  std::size_t negative_capacity() const { return negative_capacity_; }

 private:
  struct PerType {
    std::vector<Sample> positives;
    std::unordered_map<Word, std::size_t, WordHash> positive_index;
    std::deque<Sample> negatives;
    std::unordered_map<Word, std::uint64_t, WordHash> negative_seq;
    std::uint64_t fifo_base = 0;  // sequence id of negatives.front()
    long positive_weight = 0;
    long negative_weight = 0;
  };

  void add_positive(PerType& pt, Sample s);
  void add_negative(PerType& pt, Sample s);

  std::vector<PerType> per_type_;
  std::size_t negative_capacity_;
  long episodes_closed_ = 0;
};

}  // namespace nmrl

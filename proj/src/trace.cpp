#include "nmrl/trace.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace nmrl {

bool Trace::fired_at(int step, int type) const {
  for (const auto& f : firings) {
    if (f.step == step && f.type == type) return true;
  }
  return false;
}

std::vector<int> Trace::firing_steps(int type) const {
  std::vector<int> out;
  for (const auto& f : firings) {
    if (f.type == type) out.push_back(f.step);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Label Trace::label_for(int type) const {
  if (symbols.empty()) return Label::Unknown;
  return fired_at(static_cast<int>(symbols.size()), type) ? Label::Positive
                                                          : Label::Negative;
}

void record_step(Trace& t, std::optional<SymbolId> sym,
                 const std::vector<int>& fired) {
  if (!sym.has_value()) {
    assert(fired.empty() && "reward fired on a filtered (no-effect) step");
    return;
  }
  t.symbols.push_back(*sym);
  const int step = static_cast<int>(t.symbols.size());
  for (int type : fired) t.firings.push_back({step, type});
}

TraceStore::TraceStore(int n_types, std::size_t negative_capacity)
    : per_type_(n_types), negative_capacity_(negative_capacity) {
  if (n_types <= 0) throw std::invalid_argument("TraceStore: n_types < 1");
  if (negative_capacity_ == 0)
    throw std::invalid_argument("TraceStore: capacity < 1");
}

void TraceStore::add_positive(PerType& pt, Sample s) {
  pt.positive_weight += s.weight;
  auto it = pt.positive_index.find(s.symbols);
  if (it != pt.positive_index.end()) {
    pt.positives[it->second].weight += s.weight;
    return;
  }
  pt.positive_index.emplace(s.symbols, pt.positives.size());
  pt.positives.push_back(std::move(s));
}

void TraceStore::add_negative(PerType& pt, Sample s) {
  pt.negative_weight += s.weight;
  auto it = pt.negative_seq.find(s.symbols);
  if (it != pt.negative_seq.end()) {
    pt.negatives[it->second - pt.fifo_base].weight += s.weight;
    return;
  }
  if (pt.negatives.size() == negative_capacity_) {
    pt.negative_weight -= pt.negatives.front().weight;
    pt.negative_seq.erase(pt.negatives.front().symbols);
    pt.negatives.pop_front();
    ++pt.fifo_base;
  }
  pt.negative_seq.emplace(s.symbols, pt.fifo_base + pt.negatives.size());
  pt.negatives.push_back(std::move(s));
}

void TraceStore::close_episode(const Trace& t) {
  ++episodes_closed_;
  if (t.symbols.empty()) return;
  const int len = static_cast<int>(t.symbols.size());
  for (int type = 0; type < type_count(); ++type) {
    PerType& pt = per_type_[static_cast<std::size_t>(type)];
    const std::vector<int> steps = t.firing_steps(type);
    for (int s : steps) {
      Sample sample;
      sample.symbols.assign(t.symbols.begin(), t.symbols.begin() + s);
      sample.firing_steps.assign(
          steps.begin(), std::upper_bound(steps.begin(), steps.end(), s));
      add_positive(pt, std::move(sample));
    }
    if (steps.empty() || steps.back() != len) {
      Sample sample;
      sample.symbols = t.symbols;
      sample.firing_steps = steps;
      add_negative(pt, std::move(sample));
    }
  }
}

const std::vector<Sample>& TraceStore::positives(int type) const {
  return per_type_.at(static_cast<std::size_t>(type)).positives;
}

const std::deque<Sample>& TraceStore::negatives(int type) const {
  return per_type_.at(static_cast<std::size_t>(type)).negatives;
}

long TraceStore::positive_weight(int type) const {
  return per_type_.at(static_cast<std::size_t>(type)).positive_weight;
}

long TraceStore::negative_weight(int type) const {
  return per_type_.at(static_cast<std::size_t>(type)).negative_weight;
}

}  // namespace nmrl

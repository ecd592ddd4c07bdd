#include "nmrl/lstar.hpp"

#include <algorithm>
#include <cassert>

namespace nmrl {

namespace {

Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Word concat(const Word& a, SymbolId s) {
  Word out = a;
  out.push_back(s);
  return out;
}

}  // namespace

ObservationTable ObservationTable::fresh() {
  ObservationTable tbl;
  tbl.access.push_back({});
  tbl.tests.push_back({});
  return tbl;
}

std::optional<bool> cached_lookup(ObservationTable& tbl,
                                  const MembershipFn& source, const Word& w) {
  auto it = tbl.cache.find(w);
  if (it != tbl.cache.end()) return it->second;
  std::optional<bool> ans = source(w);
  if (ans.has_value()) tbl.cache.emplace(w, *ans);
  return ans;
}

std::optional<bool> t_equivalent(const Word& v, const Word& w,
                                 ObservationTable& tbl,
                                 const MembershipFn& source) {
  if (v == w) return true;
  for (const Word& u : tbl.tests) {
    std::optional<bool> mv = cached_lookup(tbl, source, concat(v, u));
    if (!mv.has_value()) return std::nullopt;
    std::optional<bool> mw = cached_lookup(tbl, source, concat(w, u));
    if (!mw.has_value()) return std::nullopt;
    if (*mv != *mw) return false;
  }
  return true;
}

namespace {

// Index of the unique access word T-equivalent to `w`; -1 when none,
// nullopt when suspended. Asserts uniqueness (separability).
std::optional<int> find_equivalent_access(const Word& w,
                                          ObservationTable& tbl,
                                          const MembershipFn& source) {
  int found = -1;
  for (std::size_t i = 0; i < tbl.access.size(); ++i) {
    std::optional<bool> eq = t_equivalent(w, tbl.access[i], tbl, source);
    if (!eq.has_value()) return std::nullopt;
    if (*eq) {
      if (found >= 0)
        throw std::logic_error(
            "observation table lost separability: two access words are "
            "T-equivalent");
      found = static_cast<int>(i);
    }
  }
  return found;
}

}  // namespace

bool close_table(ObservationTable& tbl, std::int32_t n_symbols,
                 const MembershipFn& source) {
  for (std::size_t qi = 0; qi < tbl.access.size(); ++qi) {
    for (SymbolId a = 0; a < n_symbols; ++a) {
      Word w = concat(tbl.access[qi], a);
      std::optional<int> match = find_equivalent_access(w, tbl, source);
      if (!match.has_value()) return false;
      if (*match < 0) tbl.access.push_back(std::move(w));
    }
  }
  return true;
}

Dfa build_hypothesis(const ObservationTable& tbl, std::int32_t n_symbols) {
  const std::int32_t n = static_cast<std::int32_t>(tbl.access.size());
  assert(!tbl.access.empty() && tbl.access[0].empty());
  Dfa d(n, n_symbols);
  d.initial = 0;

  // Everything needed is in the cache once a close completed.
  auto lookup = [&tbl](const Word& w) -> bool {
    auto it = tbl.cache.find(w);
    if (it == tbl.cache.end()) throw TableNotClosed();
    return it->second;
  };
  auto rows_equal = [&](const Word& v, const Word& w) {
    for (const Word& u : tbl.tests)
      if (lookup(concat(v, u)) != lookup(concat(w, u))) return false;
    return true;
  };

  for (std::int32_t q = 0; q < n; ++q) {
    d.accepting[static_cast<std::size_t>(q)] =
        lookup(tbl.access[static_cast<std::size_t>(q)]) ? 1 : 0;
    for (SymbolId a = 0; a < n_symbols; ++a) {
      Word w = concat(tbl.access[static_cast<std::size_t>(q)], a);
      int match = -1;
      for (std::size_t i = 0; i < tbl.access.size(); ++i) {
        if (rows_equal(w, tbl.access[i])) {
          if (match >= 0)
            throw std::logic_error(
                "observation table lost separability: two access words are "
                "T-equivalent");
          match = static_cast<int>(i);
        }
      }
      if (match < 0) throw TableNotClosed();
      d.set_transition(q, a, match);
    }
  }
  return d;
}

std::optional<CeSplit> process_counterexample(const Word& ce,
                                              ObservationTable& tbl,
                                              const Dfa& hypothesis,
                                              const MembershipFn& source) {
  const int n = static_cast<int>(ce.size());
  if (n == 0)
    throw TeacherInconsistent(
        "empty counterexample: membership of the empty word is cached");

  // Tag of prefix i: membership after substituting the access word of the
  // hypothesis state reached on ce[0..i).
  auto tag = [&](int i) -> std::optional<bool> {
    std::int32_t q = hypothesis.initial;
    for (int k = 0; k < i; ++k) q = hypothesis.next(q, ce[static_cast<std::size_t>(k)]);
    Word w = tbl.access[static_cast<std::size_t>(q)];
    w.insert(w.end(), ce.begin() + i, ce.end());
    return cached_lookup(tbl, source, w);
  };

  std::optional<bool> t0 = tag(0);
  if (!t0.has_value()) return std::nullopt;
  std::optional<bool> tn = tag(n);
  if (!tn.has_value()) return std::nullopt;
  if (*t0 == *tn)
    throw TeacherInconsistent(
        "counterexample is classified consistently with cached answers");

  int lo = 0, hi = n;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    std::optional<bool> tm = tag(mid);
    if (!tm.has_value()) return std::nullopt;
    if (*tm == *t0)
      lo = mid;
    else
      hi = mid;
  }

  std::int32_t q = hypothesis.initial;
  for (int k = 0; k < lo; ++k) q = hypothesis.next(q, ce[static_cast<std::size_t>(k)]);
  CeSplit split;
  split.new_access =
      concat(tbl.access[static_cast<std::size_t>(q)], ce[static_cast<std::size_t>(lo)]);
  split.new_test.assign(ce.begin() + lo + 1, ce.end());
  return split;
}

namespace {

void apply_split(ObservationTable& tbl, const CeSplit& split) {
  if (std::find(tbl.access.begin(), tbl.access.end(), split.new_access) !=
      tbl.access.end())
    throw std::logic_error("counterexample split produced a known access word");
  if (std::find(tbl.tests.begin(), tbl.tests.end(), split.new_test) ==
      tbl.tests.end())
    tbl.tests.push_back(split.new_test);
  tbl.access.push_back(split.new_access);
}

}  // namespace

LstarResult lstar_run(Teacher& teacher, std::int32_t n_symbols,
                      const LstarLimits& limits) {
  LstarResult result;
  ObservationTable tbl = ObservationTable::fresh();
  const MembershipFn source = [&](const Word& w) -> std::optional<bool> {
    ++result.stats.membership_queries;
    return teacher.member(w);
  };

  for (;;) {
    const bool closed = close_table(tbl, n_symbols, source);
    assert(closed);
    (void)closed;
    result.dfa = build_hypothesis(tbl, n_symbols);

    if (limits.max_membership_queries >= 0 &&
        result.stats.membership_queries > limits.max_membership_queries) {
      result.provisional = true;
      return result;
    }

    ++result.stats.equivalence_queries;
    std::optional<Word> ce = teacher.equivalence(result.dfa);
    if (!ce.has_value()) {
      result.provisional = false;
      return result;
    }
    std::optional<CeSplit> split =
        process_counterexample(*ce, tbl, result.dfa, source);
    assert(split.has_value());
    apply_split(tbl, *split);
  }
}

// ---------------------------------------------------------------------------
// Resumable session
// ---------------------------------------------------------------------------

LstarSession::LstarSession(std::int32_t n_symbols)
    : n_symbols_(n_symbols), tbl_(ObservationTable::fresh()) {}

MembershipFn LstarSession::suspending_source() {
  return [this](const Word& w) -> std::optional<bool> {
    if (!pending_.has_value()) pending_ = w;
    return std::nullopt;
  };
}

LstarSession::Query LstarSession::next() {
  const MembershipFn source = suspending_source();
  for (;;) {
    pending_.reset();
    switch (phase_) {
      case Phase::Close: {
        if (!close_table(tbl_, n_symbols_, source)) {
          return {QueryKind::Membership, *pending_, {}};
        }
        hyp_ = build_hypothesis(tbl_, n_symbols_);
        ++stats_.equivalence_queries;
        phase_ = Phase::AwaitEquivalence;
        break;
      }
      case Phase::AwaitEquivalence:
        return {QueryKind::Equivalence, {}, *hyp_};
      case Phase::SearchCe: {
        std::optional<CeSplit> split =
            process_counterexample(ce_, tbl_, *hyp_, source);
        if (!split.has_value()) {
          return {QueryKind::Membership, *pending_, {}};
        }
        apply_split(tbl_, *split);
        phase_ = Phase::Close;
        break;
      }
      case Phase::Done:
        return {QueryKind::Finished, {}, {}};
    }
  }
}

void LstarSession::answer_membership(const Word& w, bool in_language) {
  if (tbl_.cache.emplace(w, in_language).second)
    ++stats_.membership_queries;
}

void LstarSession::answer_equivalence_ok() {
  if (phase_ != Phase::AwaitEquivalence)
    throw std::logic_error("no equivalence query pending");
  phase_ = Phase::Done;
}

void LstarSession::answer_counterexample(const Word& w) {
  if (phase_ != Phase::AwaitEquivalence)
    throw std::logic_error("no equivalence query pending");
  ce_ = w;
  phase_ = Phase::SearchCe;
}

std::optional<bool> LstarSession::cached(const Word& w) const {
  auto it = tbl_.cache.find(w);
  if (it == tbl_.cache.end()) return std::nullopt;
  return it->second;
}

void LstarSession::overwrite_cache(const Word& w, bool in_language) {
  tbl_.cache[w] = in_language;
}

void LstarSession::restart_keep_cache() {
  tbl_.access.clear();
  tbl_.access.push_back({});
  tbl_.tests.clear();
  tbl_.tests.push_back({});
  phase_ = Phase::Close;
  hyp_.reset();
  ce_.clear();
  pending_.reset();
}

}  // namespace nmrl

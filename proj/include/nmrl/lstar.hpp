#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "nmrl/dfa.hpp"
#include "nmrl/types.hpp"

namespace nmrl {

/// Oracle for exact automata learning: membership plus equivalence queries,
/// answered consistently with one fixed regular language.
class Teacher {
 public:
  virtual ~Teacher() = default;
  virtual bool member(const Word& w) = 0;
  /// nullopt accepts the hypothesis, otherwise a misclassified word.
  virtual std::optional<Word> equivalence(const Dfa& hypothesis) = 0;
};

struct TableNotClosed : std::logic_error {
  TableNotClosed() : std::logic_error("observation table is not closed") {}
};
struct TeacherInconsistent : std::runtime_error {
  explicit TeacherInconsistent(const std::string& what)
      : std::runtime_error(what) {}
};

/// Access words, test words and the membership cache. access[0] is always
/// the empty word, and tests always contain the empty word.
struct ObservationTable {
  std::vector<Word> access;
  std::vector<Word> tests;
  std::unordered_map<Word, bool, WordHash> cache;

  static ObservationTable fresh();
};

/// Raw membership source. Returns nullopt when the answer is not available
/// yet (a suspended, resumable run); total functions never return nullopt.
using MembershipFn = std::function<std::optional<bool>(const Word&)>;

/// Cache-through lookup: consults tbl.cache first, stores any answer.
std::optional<bool> cached_lookup(ObservationTable& tbl,
                                  const MembershipFn& source, const Word& w);

/// True iff v and w agree on membership under every test-word extension.
/// nullopt when a needed answer is unavailable.
std::optional<bool> t_equivalent(const Word& v, const Word& w,
                                 ObservationTable& tbl,
                                 const MembershipFn& source);

/// Enlarges the access set until every one-symbol extension of an access
/// word is T-equivalent to some access word. Returns false when suspended.
bool close_table(ObservationTable& tbl, std::int32_t n_symbols,
                 const MembershipFn& source);

/// Hypothesis automaton of a separable, closed table: states are the access
/// words, transitions follow T-equivalence, accepting states are the access
/// words in the language. Throws TableNotClosed when memberships are missing
/// or no T-equivalent access word exists.
Dfa build_hypothesis(const ObservationTable& tbl, std::int32_t n_symbols);

struct CeSplit {
  Word new_access;
  Word new_test;
};

/// Rivest--Schapire counterexample processing: binary search over prefixes
/// of `ce` for adjacent access-word substitutions tagged differently, giving
/// a (new access word, new test word) pair that keeps the table separable.
/// nullopt when suspended; throws TeacherInconsistent when `ce` is not
/// actually misclassified under the cached answers.
std::optional<CeSplit> process_counterexample(const Word& ce,
                                              ObservationTable& tbl,
                                              const Dfa& hypothesis,
                                              const MembershipFn& source);

struct LstarStats {
  long membership_queries = 0;
  long cache_hits = 0;
  long equivalence_queries = 0;
};

struct LstarLimits {
  long max_membership_queries = -1;  // <0: unlimited
};

struct LstarResult {
  Dfa dfa;
  bool provisional = false;  // budget ran out before the teacher agreed
  LstarStats stats;
};

/// Runs L* to completion against a synchronous teacher.
LstarResult lstar_run(Teacher& teacher, std::int32_t n_symbols,
                      const LstarLimits& limits = {});

/// Resumable L* session: next() advances as far as the cached answers allow
/// and surfaces the query it is blocked on. Used when queries are answered
/// by acting in an environment.
class LstarSession {
 public:
  enum class QueryKind { Membership, Equivalence, Finished };
  struct Query {
    QueryKind kind = QueryKind::Finished;
    Word word;       // membership
    Dfa hypothesis;  // equivalence
  };

  explicit LstarSession(std::int32_t n_symbols);

  Query next();
  void answer_membership(const Word& w, bool in_language);
  void answer_equivalence_ok();
  void answer_counterexample(const Word& w);

  bool finished() const { return phase_ == Phase::Done; }
  const std::optional<Dfa>& current_hypothesis() const { return hyp_; }
  const LstarStats& stats() const { return stats_; }
  const ObservationTable& table() const { return tbl_; }

  std::optional<bool> cached(const Word& w) const;
  /// Overwrites one cached answer (corrected heuristic) without touching the
  /// rest; callers restart afterwards since the table may rest on the old
  /// value.
  void overwrite_cache(const Word& w, bool in_language);
  void restart_keep_cache();

 private:
  enum class Phase { Close, AwaitEquivalence, SearchCe, Done };

  MembershipFn suspending_source();

  std::int32_t n_symbols_;
  Phase phase_ = Phase::Close;
  ObservationTable tbl_;
  std::optional<Dfa> hyp_;
  Word ce_;
  std::optional<Word> pending_;
  LstarStats stats_;
};

}  // namespace nmrl

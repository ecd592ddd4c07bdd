#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nmrl/dfa.hpp"
#include "nmrl/trace.hpp"

namespace nmrl {

struct InputInconsistency : std::runtime_error {
  explicit InputInconsistency(const std::string& what)
      : std::runtime_error(what) {}
};

enum class EdsmScoreMode {
  PairCount,    // +1 per label-confirming pair unified during the fold
  EvidenceSum,  // sum of the two classes' matching evidence per pair
};

struct EdsmConfig {
  EdsmScoreMode score_mode = EdsmScoreMode::PairCount;
  /// Label every non-firing prefix of a sample as rejecting (trace samples).
  /// Off for raw Abbadingo input, where only word ends carry labels.
  bool prefix_negatives = true;
};

/// Prefix tree acceptor over sample prefixes with weighted accepting and
/// rejecting evidence per state.
class Pta {
 public:
  static Pta build(const std::vector<Sample>& samples, std::int32_t n_symbols,
                   bool prefix_negatives);

  std::int32_t node_count() const { return n_nodes_; }
  std::int32_t symbol_count() const { return n_symbols_; }
  std::int32_t child(std::int32_t node, SymbolId a) const {
    return children_[static_cast<std::size_t>(node) * n_symbols_ + a];
  }
  long acc_weight(std::int32_t node) const {
    return acc_w_[static_cast<std::size_t>(node)];
  }
  long rej_weight(std::int32_t node) const {
    return rej_w_[static_cast<std::size_t>(node)];
  }
  /// Canonical breadth-first rank of a node (root is 0).
  std::int32_t bfs_rank(std::int32_t node) const {
    return bfs_rank_[static_cast<std::size_t>(node)];
  }

 private:
  std::int32_t n_nodes_ = 1;
  std::int32_t n_symbols_ = 1;
  std::vector<std::int32_t> children_;  // -1 where absent
  std::vector<long> acc_w_;
  std::vector<long> rej_w_;
  std::vector<std::int32_t> bfs_rank_;
};

/// Union-find partition over PTA states for red-blue merging, with
/// journaled rollback so failed merges leave the state bit-identical.
class MergeState {
 public:
  MergeState(const Pta& pta, EdsmScoreMode mode);

  struct MergeResult {
    bool ok = false;
    long score = 0;
  };

  /// Unifies the two classes and runs the determinization fold; on any
  /// accepting/rejecting clash the state is rolled back and ok is false.
  MergeResult try_merge(std::int32_t into, std::int32_t from);
  /// As try_merge but always rolled back; used for scoring candidates.
  MergeResult probe_merge(std::int32_t into, std::int32_t from);

  std::int32_t find(std::int32_t node) const;
  std::int32_t class_rank(std::int32_t root) const {
    return rank_[static_cast<std::size_t>(root)];
  }
  long class_acc(std::int32_t root) const {
    return acc_w_[static_cast<std::size_t>(root)];
  }
  long class_rej(std::int32_t root) const {
    return rej_w_[static_cast<std::size_t>(root)];
  }
  /// Class transition target (a node id, not necessarily a root); -1 absent.
  std::int32_t transition(std::int32_t root, SymbolId a) const {
    return rows_[static_cast<std::size_t>(root) * n_symbols_ + a];
  }
  std::int32_t symbol_count() const { return n_symbols_; }

  /// Quotient automaton of the current partition, reachable part only,
  /// breadth-first canonical numbering. Unlabeled classes reject; absent
  /// transitions self-loop.
  Dfa quotient(std::int32_t root_node) const;

  bool operator==(const MergeState& other) const {
    return parent_ == other.parent_ && acc_w_ == other.acc_w_ &&
           rej_w_ == other.rej_w_ && rows_ == other.rows_ &&
           rank_ == other.rank_;
  }

 private:
  struct Undo {
    enum Kind : std::uint8_t { Parent, AccW, RejW, Row, Rank } kind;
    std::int64_t index;
    long old_value;
  };

  MergeResult merge_impl(std::int32_t into, std::int32_t from, bool commit);
  void rollback(std::size_t mark);

  std::int32_t n_symbols_;
  EdsmScoreMode mode_;
  std::vector<std::int32_t> parent_;
  std::vector<long> acc_w_;
  std::vector<long> rej_w_;
  std::vector<std::int32_t> rows_;
  std::vector<std::int32_t> rank_;  // per root: min bfs rank of the class
  std::vector<Undo> journal_;
};

/// Evidence-driven state merging in the red-blue framework. Candidate merges
/// need positive evidence; the highest score wins, ties break toward the
/// lexicographically smallest (red, blue) pair in canonical order; a blue
/// with no candidate is promoted.
Dfa edsm_run(const std::vector<Sample>& samples, std::int32_t n_symbols,
             const EdsmConfig& cfg = {});

struct PreprocessConfig {
  int max_states = 20;
  int max_retries = 20;
  long min_positives = 1;
  EdsmConfig edsm;
};

struct PreprocessOutcome {
  std::optional<Dfa> dfa;  // empty on failure; caller keeps its previous one
  int retries = 0;
};

/// The paper's convergence heuristics around the plain EDSM call: negatives
/// are truncated to a length limit that starts at the current maximum and is
/// halved (down to the minimal positive length) each time the learned DFA
/// exceeds max_states, giving up after max_retries failures.
PreprocessOutcome preprocess_and_learn(const TraceStore& store, int type,
                                       std::int32_t n_symbols,
                                       const PreprocessConfig& cfg = {});

}  // namespace nmrl

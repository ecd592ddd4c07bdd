#pragma once

#include <string>
#include <vector>

#include "nmrl/config.hpp"
#include "nmrl/orchestrate.hpp"

namespace nmrl {

inline constexpr const char* kVersion = "0.1.0";

struct CellSpec {
  std::string algorithm;
  LearnerKind learner = LearnerKind::Vanilla;
  std::uint64_t seed = 0;
};

struct CellResult {
  CellSpec spec;
  std::vector<CheckpointRow> rows;
  std::vector<Dfa> final_machines;
  RunStats stats;
  std::string error;  // non-empty when the cell failed
};

struct ResultSet {
  ExperimentConfig config;
  std::vector<CellResult> cells;  // canonical (algorithm, learner, seed) order
};

std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg,
                                              std::uint64_t seed);

/// Runs one (algorithm, learner, seed) cell to completion.
CellResult run_cell(const ExperimentConfig& cfg, const CellSpec& spec);

/// Runs the whole (algorithm x learner x seed) matrix, up to `workers` cells
/// concurrently. Failed cells carry their error and do not disturb others.
ResultSet run_matrix(const ExperimentConfig& cfg, int workers = 1);

/// results.csv (deterministic), timings.csv (wall clock), aggregate.csv
/// (mean +/- std across seeds) and per-cell final machine snapshots.
void write_results(const ResultSet& results, const std::string& out_dir);

/// Reads a results directory and writes per-variant data files plus a
/// gnuplot script with reward-vs-steps curves and error bars; one panel per
/// results directory.
void emit_plots(const std::vector<std::string>& results_dirs,
                const std::string& out_dir);

}  // namespace nmrl

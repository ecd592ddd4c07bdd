#include "nmrl/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "nmrl/rng.hpp"

namespace nmrl {

namespace fs = std::filesystem;

std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg,
                                              std::uint64_t seed) {
  if (cfg.is_mab()) return std::make_unique<MabEnv>(cfg.mab, seed);
  if (cfg.env_name == "robot")
    return std::make_unique<RobotWorldEnv>(cfg.robot, seed);
  throw std::invalid_argument("unknown environment: " + cfg.env_name);
}

namespace {

RunConfig make_run_config(const ExperimentConfig& cfg, const CellSpec& spec) {
  RunConfig rc;
  rc.budget_steps = cfg.budget;
  rc.checkpoint_every = cfg.checkpoint_every;
  rc.eval_episodes = cfg.eval_episodes;
  rc.c_trials = cfg.c_trials;
  rc.c_pos = cfg.c_pos;
  rc.membership_attempts = cfg.resolved_membership_attempts();
  rc.scheduling = cfg.scheduling == "interleaved"
                      ? QueryScheduling::Interleaved
                      : QueryScheduling::Prioritized;
  rc.preprocess.max_states = cfg.edsm_max_states;
  rc.preprocess.max_retries = cfg.edsm_max_retries;
  rc.preprocess.min_positives = cfg.c_pos + 1;
  rc.preprocess.edsm.score_mode = cfg.edsm_score_mode == "evidence"
                                      ? EdsmScoreMode::EvidenceSum
                                      : EdsmScoreMode::PairCount;
  rc.negative_fifo_capacity = cfg.fifo_capacity;
  rc.algorithm = spec.algorithm;
  rc.learner = to_string(spec.learner);
  rc.env_name = cfg.env_name;
  rc.scheme = cfg.scheme;
  rc.run_id = spec.algorithm + "-" + to_string(spec.learner);
  if (!cfg.query_log_dir.empty()) {
    rc.query_log_path = cfg.query_log_dir + "/" + rc.run_id + "-seed" +
                        std::to_string(spec.seed) + ".qlog";
  }
  return rc;
}

}  // namespace

CellResult run_cell(const ExperimentConfig& cfg, const CellSpec& spec) {
  CellResult result;
  result.spec = spec;
  try {
    auto env = make_environment(cfg, derive_seed(spec.seed, 0));
    const RunConfig rc = make_run_config(cfg, spec);
    std::vector<Dfa> trivial(
        static_cast<std::size_t>(env->reward_type_count()),
        Dfa::single_state(env->alphabet().size(), false));

    ReplayBuffer replay(cfg.replay_capacity);
    std::unique_ptr<RlAgent> agent;
    if (spec.algorithm == "qlearn") {
      QConfig qc{cfg.alpha, cfg.resolved_gamma()};
      agent = std::make_unique<QlearnAgent>(*env, qc, cfg.schedule, &replay,
                                            trivial);
    } else if (spec.algorithm == "rmax") {
      RmaxConfig mc;
      mc.known_threshold = cfg.resolved_known_threshold();
      mc.reward_obs_min = cfg.reward_obs_min;
      mc.gamma = cfg.resolved_gamma();
      mc.tol = cfg.resolved_plan_tol();
      mc.horizon = cfg.resolved_plan_horizon();
      agent = std::make_unique<RmaxAgent>(*env, mc, cfg.schedule, trivial,
                                          cfg.resolved_replan_interval());
    } else {
      throw std::invalid_argument("unknown algorithm: " + spec.algorithm);
    }

    Runner runner(*env, *agent, replay, rc, spec.seed,
                  [&result](const CheckpointRow& row) {
                    result.rows.push_back(row);
                  });
    if (spec.learner == LearnerKind::Lstar)
      runner.run_alg2();
    else
      runner.run_alg1(spec.learner);
    result.final_machines = runner.machines();
    result.stats = runner.stats();
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

ResultSet run_matrix(const ExperimentConfig& cfg, int workers) {
  ResultSet out;
  out.config = cfg;

  std::vector<CellSpec> specs;
  for (const std::string& alg : cfg.algorithms)
    for (const std::string& learner : cfg.learners)
      for (std::uint64_t seed : cfg.seeds)
        specs.push_back({alg, learner_from_string(learner), seed});

  out.cells.resize(specs.size());
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&]() {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= specs.size()) return;
        i = next++;
      }
      out.cells[i] = run_cell(cfg, specs[i]);
    }
  };
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(specs.size())));
  std::vector<std::thread> threads;
  for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  return out;
}

namespace {

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

void write_row_fields(std::ostream& out, const CheckpointRow& row) {
  out << row.run_id << ',' << row.seed << ',' << row.algorithm << ','
      << row.learner << ',' << row.env_name << ',' << row.scheme << ','
      << row.step << ',' << format_double(row.mean_return) << ',';
  for (std::size_t t = 0; t < row.machine_states.size(); ++t)
    out << (t ? ";" : "") << row.machine_states[t];
  out << ',';
  for (std::size_t t = 0; t < row.machine_correct.size(); ++t)
    out << (t ? ";" : "") << (row.machine_correct[t] ? 1 : 0);
}

}  // namespace

void write_results(const ResultSet& results, const std::string& out_dir) {
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/machines");

  const std::string header_comment =
      "# nmrl " + std::string(kVersion) + " | " + results.config.serialize();

  std::ofstream csv(out_dir + "/results.csv");
  std::ofstream timings(out_dir + "/timings.csv");
  csv << header_comment << '\n';
  csv << "run_id,seed,algorithm,learner,env,scheme,step,mean_return,"
         "machine_states,machine_correct\n";
  timings << header_comment << '\n';
  timings << "run_id,seed,step,wall_ms\n";

  std::ofstream errors;
  for (const CellResult& cell : results.cells) {
    if (!cell.error.empty()) {
      if (!errors.is_open()) errors.open(out_dir + "/errors.log");
      errors << cell.spec.algorithm << '-' << to_string(cell.spec.learner)
             << " seed " << cell.spec.seed << ": " << cell.error << '\n';
      continue;
    }
    for (const CheckpointRow& row : cell.rows) {
      write_row_fields(csv, row);
      csv << '\n';
      timings << row.run_id << ',' << row.seed << ',' << row.step << ','
              << row.wall_ms << '\n';
    }
    for (std::size_t t = 0; t < cell.final_machines.size(); ++t) {
      std::ofstream dfa(out_dir + "/machines/" + cell.spec.algorithm + "-" +
                        to_string(cell.spec.learner) + "-seed" +
                        std::to_string(cell.spec.seed) + "-type" +
                        std::to_string(t) + ".dfa");
      dfa << to_table_text(cell.final_machines[t]);
    }
  }

  // mean +/- std across seeds per (variant, step)
  struct Agg {
    std::vector<double> returns;
  };
  std::map<std::pair<std::string, std::uint64_t>, Agg> agg;
  for (const CellResult& cell : results.cells) {
    if (!cell.error.empty()) continue;
    for (const CheckpointRow& row : cell.rows)
      agg[{row.run_id, row.step}].returns.push_back(row.mean_return);
  }
  std::ofstream aggregate(out_dir + "/aggregate.csv");
  aggregate << header_comment << '\n';
  aggregate << "run_id,step,mean,std,n\n";
  for (const auto& [key, a] : agg) {
    double mean = 0.0;
    for (double r : a.returns) mean += r;
    mean /= static_cast<double>(a.returns.size());
    double var = 0.0;
    for (double r : a.returns) var += (r - mean) * (r - mean);
    var = a.returns.size() > 1
              ? var / static_cast<double>(a.returns.size() - 1)
              : 0.0;
    aggregate << key.first << ',' << key.second << ',' << format_double(mean)
              << ',' << format_double(std::sqrt(var)) << ','
              << a.returns.size() << '\n';
  }
}

void emit_plots(const std::vector<std::string>& results_dirs,
                const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream script(out_dir + "/plot.gp");
  script << "# gnuplot script: reward vs steps, one panel per results dir\n";
  script << "set terminal pngcairo size 1400,400*" << std::max<std::size_t>(1, (results_dirs.size() + 3) / 4)
         << "\nset output 'curves.png'\n";
  if (results_dirs.empty()) {
    script << "# no result sets\n";
    return;
  }
  const std::size_t cols = std::min<std::size_t>(4, results_dirs.size());
  const std::size_t rows = (results_dirs.size() + cols - 1) / cols;
  script << "set multiplot layout " << rows << "," << cols << "\n";
  script << "set xlabel 'steps'\nset ylabel 'average reward'\nset key bottom right\n";

  for (std::size_t d = 0; d < results_dirs.size(); ++d) {
    std::ifstream agg(results_dirs[d] + "/aggregate.csv");
    std::string title = "panel" + std::to_string(d);
    // per-variant series
    std::map<std::string, std::vector<std::array<std::string, 3>>> series;
    if (agg) {
      std::string line;
      while (std::getline(agg, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("run_id", 0) == 0) {
          if (line.find("scheme=") != std::string::npos) {
            const std::size_t pos = line.find("scheme=");
            title = line.substr(pos + 7, line.find(' ', pos + 7) - pos - 7);
          }
          continue;
        }
        std::istringstream ls(line);
        std::string run_id, step, mean, stdev, n;
        std::getline(ls, run_id, ',');
        std::getline(ls, step, ',');
        std::getline(ls, mean, ',');
        std::getline(ls, stdev, ',');
        std::getline(ls, n, ',');
        series[run_id].push_back({step, mean, stdev});
      }
    }
    std::vector<std::string> names;
    for (const auto& [run_id, points] : series) {
      const std::string dat =
          "panel" + std::to_string(d) + "-" + run_id + ".dat";
      std::ofstream df(out_dir + "/" + dat);
      df << "# step mean std\n";
      for (const auto& p : points)
        df << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
      names.push_back(dat);
    }
    script << "set title '" << title << "'\n";
    if (names.empty()) {
      script << "plot 0 title 'no data'\n";
      continue;
    }
    script << "plot ";
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) script << ", ";
      script << "'" << names[i] << "' using 1:2:3 with yerrorlines title '"
             << names[i].substr(names[i].find('-') + 1,
                                names[i].size() - names[i].find('-') - 5)
             << "'";
    }
    script << "\n";
  }
  script << "unset multiplot\n";
}

}  // namespace nmrl

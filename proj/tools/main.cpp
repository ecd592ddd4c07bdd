#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nmrl/abbadingo.hpp"
#include "nmrl/edsm.hpp"
#include "nmrl/experiment.hpp"

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("NMRL_OUT");
  return env != nullptr ? env : "out";
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int workers) {
  nmrl::ExperimentConfig cfg = nmrl::parse_config_file(config_path);
  std::cout << "running " << cfg.env_name << " " << cfg.scheme << ": "
            << cfg.algorithms.size() * cfg.learners.size() * cfg.seeds.size()
            << " cells, budget " << cfg.budget << " steps\n";
  nmrl::ResultSet results = nmrl::run_matrix(cfg, workers);
  nmrl::write_results(results, out_dir);
  int failures = 0;
  for (const nmrl::CellResult& cell : results.cells) {
    if (!cell.error.empty()) {
      ++failures;
      std::cerr << "cell failed: " << cell.spec.algorithm << "-"
                << to_string(cell.spec.learner) << " seed " << cell.spec.seed
                << ": " << cell.error << "\n";
    }
  }
  std::cout << "wrote " << out_dir << "/results.csv\n";
  return failures == 0 ? 0 : 1;
}

int cmd_plot(const std::vector<std::string>& dirs, const std::string& out) {
  nmrl::emit_plots(dirs, out);
  std::cout << "wrote " << out << "/plot.gp\n";
  return 0;
}

int cmd_learn_dfa(const std::string& path, int max_states) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << "\n";
    return 1;
  }
  nmrl::AbbadingoFile file = nmrl::read_abbadingo(in);
  nmrl::EdsmConfig cfg;
  cfg.prefix_negatives = false;  // plain Abbadingo labels word ends only
  nmrl::Dfa dfa = nmrl::edsm_run(file.samples, file.alphabet_size, cfg);
  if (max_states > 0 && dfa.n_states > max_states) {
    std::cerr << "learned DFA has " << dfa.n_states << " states (> "
              << max_states << ")\n";
    return 1;
  }
  std::cout << nmrl::to_table_text(dfa);
  std::cout << nmrl::to_dot(dfa);
  return 0;
}

int cmd_oracle(const std::string& env, const std::string& scheme) {
  if (env == "mab") {
    const nmrl::MabScheme s = nmrl::mab_scheme_from_string(scheme);
    for (int t = 0; t < nmrl::mab_reward_type_count(s); ++t) {
      nmrl::Dfa d = nmrl::mab_monitor_dfa(s, t, 3);
      std::cout << "# reward type " << t << "\n"
                << nmrl::to_table_text(d) << nmrl::to_dot(d) << "\n";
    }
    return 0;
  }
  if (env == "robot") {
    const nmrl::RobotScheme s = nmrl::robot_scheme_from_string(scheme);
    for (int t = 0; t < nmrl::robot_reward_type_count(s); ++t) {
      nmrl::Dfa d = nmrl::robot_monitor_dfa(s, t, 2);
      std::cout << "# reward type " << t << "\n"
                << nmrl::to_table_text(d) << nmrl::to_dot(d) << "\n";
    }
    return 0;
  }
  std::cerr << "unknown environment: " << env << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reward-machine learning experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = default_out_dir();
  int workers = 2;
  CLI::App* run = app.add_subcommand("run", "run an experiment matrix");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "concurrent cells");

  std::vector<std::string> plot_dirs;
  std::string plot_out = default_out_dir();
  CLI::App* plot = app.add_subcommand("plot", "emit gnuplot script and data");
  plot->add_option("results", plot_dirs, "results directories")->required();
  plot->add_option("--out", plot_out, "output directory");

  std::string abbadingo_path;
  int max_states = 0;
  CLI::App* learn = app.add_subcommand("learn-dfa", "EDSM on a sample file");
  learn->add_option("file", abbadingo_path, "Abbadingo sample file")
      ->required();
  learn->add_option("--max-states", max_states, "fail above this size");

  std::string oracle_env, oracle_scheme;
  CLI::App* oracle =
      app.add_subcommand("oracle", "print a ground-truth reward machine");
  oracle->add_option("env", oracle_env, "mab | robot")->required();
  oracle->add_option("scheme", oracle_scheme, "S1..S4 | R1..R4")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, workers);
    if (plot->parsed()) return cmd_plot(plot_dirs, plot_out);
    if (learn->parsed()) return cmd_learn_dfa(abbadingo_path, max_states);
    if (oracle->parsed()) return cmd_oracle(oracle_env, oracle_scheme);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

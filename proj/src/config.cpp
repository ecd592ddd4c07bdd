#include "nmrl/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nmrl {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const std::size_t a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_num(const std::string& v, const std::string& key) {
  std::istringstream in(v);
  T out;
  if (!(in >> out))
    throw std::invalid_argument("config: bad value for " + key + ": " + v);
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string section = "experiment";
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value: " + line);
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "experiment.env") cfg.env_name = value;
    else if (key == "experiment.scheme") cfg.scheme = value;
    else if (key == "experiment.algorithms") cfg.algorithms = split_list(value);
    else if (key == "experiment.learners") cfg.learners = split_list(value);
    else if (key == "experiment.budget") cfg.budget = parse_num<std::uint64_t>(value, key);
    else if (key == "experiment.checkpoint_every") cfg.checkpoint_every = parse_num<std::uint64_t>(value, key);
    else if (key == "experiment.seeds") {
      cfg.seeds.clear();
      for (const std::string& s : split_list(value))
        cfg.seeds.push_back(parse_num<std::uint64_t>(s, key));
    }
    else if (key == "experiment.eval_episodes") cfg.eval_episodes = parse_num<int>(value, key);
    else if (key == "exploration.epsilon_start") cfg.schedule.start = parse_num<double>(value, key);
    else if (key == "exploration.epsilon_floor") cfg.schedule.floor = parse_num<double>(value, key);
    else if (key == "exploration.epsilon_decay") cfg.schedule.decay_per_step = parse_num<double>(value, key);
    else if (key == "qlearn.alpha") cfg.alpha = parse_num<double>(value, key);
    else if (key == "qlearn.gamma") cfg.gamma = parse_num<double>(value, key);
    else if (key == "rmax.known_threshold") cfg.known_threshold = parse_num<int>(value, key);
    else if (key == "rmax.reward_obs_min") cfg.reward_obs_min = parse_num<int>(value, key);
    else if (key == "rmax.tol") cfg.plan_tol = parse_num<double>(value, key);
    else if (key == "rmax.horizon") cfg.plan_horizon = parse_num<int>(value, key);
    else if (key == "rmax.replan_interval") cfg.replan_interval = parse_num<std::uint64_t>(value, key);
    else if (key == "learning.c_trials") cfg.c_trials = parse_num<int>(value, key);
    else if (key == "learning.c_pos") cfg.c_pos = parse_num<long>(value, key);
    else if (key == "learning.membership_attempts") cfg.membership_attempts = parse_num<int>(value, key);
    else if (key == "learning.scheduling") cfg.scheduling = value;
    else if (key == "learning.fifo_capacity") cfg.fifo_capacity = parse_num<std::size_t>(value, key);
    else if (key == "learning.replay_capacity") cfg.replay_capacity = parse_num<std::size_t>(value, key);
    else if (key == "learning.edsm_max_states") cfg.edsm_max_states = parse_num<int>(value, key);
    else if (key == "learning.edsm_max_retries") cfg.edsm_max_retries = parse_num<int>(value, key);
    else if (key == "learning.edsm_score_mode") cfg.edsm_score_mode = value;
    else if (key == "learning.alphabet") cfg.alphabet_mode = value;
    else if (key == "learning.query_log_dir") cfg.query_log_dir = value;
    else if (key == "mab.arms") cfg.mab.n_arms = parse_num<int>(value, key);
    else if (key == "mab.episode_steps") cfg.mab.steps_per_episode = parse_num<int>(value, key);
    else if (key == "mab.nmr_value") cfg.mab.nmr_value = parse_num<double>(value, key);
    else if (key == "robot.width") cfg.robot.width = parse_num<int>(value, key);
    else if (key == "robot.height") cfg.robot.height = parse_num<int>(value, key);
    else if (key == "robot.stains") cfg.robot.n_stains = parse_num<int>(value, key);
    else if (key == "robot.fruits") cfg.robot.n_fruits = parse_num<int>(value, key);
    else if (key == "robot.episode_steps") cfg.robot.steps_per_episode = parse_num<int>(value, key);
    else if (key == "robot.start_cell") cfg.robot.start_cell = parse_num<int>(value, key);
    else if (key == "robot.basket_cell") cfg.robot.basket_cell = parse_num<int>(value, key);
    else if (key == "robot.nmr_value") cfg.robot.nmr_value = parse_num<double>(value, key);
    else if (key == "robot.move_success") cfg.robot.move_success = parse_num<double>(value, key);
    else if (key == "robot.op_success") cfg.robot.op_success = parse_num<double>(value, key);
    else throw std::invalid_argument("config: unknown key " + key);
  }
  cfg.mab.scheme = cfg.is_mab() ? mab_scheme_from_string(cfg.scheme)
                                : cfg.mab.scheme;
  if (!cfg.is_mab()) cfg.robot.scheme = robot_scheme_from_string(cfg.scheme);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << "env=" << env_name << " scheme=" << scheme << " algorithms=";
  for (std::size_t i = 0; i < algorithms.size(); ++i)
    out << (i ? "," : "") << algorithms[i];
  out << " learners=";
  for (std::size_t i = 0; i < learners.size(); ++i)
    out << (i ? "," : "") << learners[i];
  out << " budget=" << budget << " checkpoint_every=" << checkpoint_every
      << " seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i)
    out << (i ? "," : "") << seeds[i];
  out << " eval_episodes=" << eval_episodes << " eps_start=" << schedule.start
      << " eps_floor=" << schedule.floor
      << " eps_decay=" << schedule.decay_per_step << " alpha=" << alpha
      << " gamma=" << resolved_gamma() << " K=" << resolved_known_threshold()
      << " reward_obs_min=" << reward_obs_min
      << " plan_tol=" << resolved_plan_tol()
      << " plan_horizon=" << resolved_plan_horizon()
      << " replan_interval=" << resolved_replan_interval()
      << " c_trials=" << c_trials << " c_pos=" << c_pos
      << " k=" << resolved_membership_attempts()
      << " scheduling=" << scheduling << " fifo=" << fifo_capacity
      << " replay=" << replay_capacity
      << " edsm_max_states=" << edsm_max_states
      << " edsm_max_retries=" << edsm_max_retries
      << " edsm_score=" << edsm_score_mode << " alphabet=" << alphabet_mode;
  if (is_mab()) {
    out << " arms=" << mab.n_arms << " episode_steps=" << mab.steps_per_episode
        << " nmr_value=" << mab.nmr_value;
  } else {
    out << " grid=" << robot.width << "x" << robot.height
        << " stains=" << robot.n_stains << " fruits=" << robot.n_fruits
        << " episode_steps=" << robot.steps_per_episode
        << " start=" << robot.start_cell
        << " basket=" << robot.resolved_basket()
        << " nmr_value=" << robot.nmr_value
        << " move_success=" << robot.move_success
        << " op_success=" << robot.op_success;
  }
  return out.str();
}

}  // namespace nmrl

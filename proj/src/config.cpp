#include "dcp/harness/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace dcp {

using nlohmann::json;

Method method_from_name(const std::string& name) {
  if (name == "dp_ddpg") return Method::dp_ddpg;
  if (name == "fully_distributed") return Method::fully_distributed;
  if (name == "centralized") return Method::centralized;
  throw std::runtime_error("unknown method: " + name);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_config: cannot open " + path);
  json j = json::parse(is);
  ExperimentConfig cfg;
  cfg.scenario = j.value("scenario", "parallel");
  cfg.tntp_path = j.value("tntp_path", "");
  cfg.calibration_path = j.value("calibration_path", "");
  cfg.method = method_from_name(j.value("method", "dp_ddpg"));
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.out_dir = j.value("out_dir", "out");

  if (j.contains("control")) {
    const json& c = j["control"];
    auto& cc = cfg.control;
    cc.action_bound = c.value("action_bound", cc.action_bound);
    cc.n_window = c.value("n_window", cc.n_window);
    cc.dw = c.value("dw", cc.dw);
    cc.cycle_days = c.value("cycle_days", cc.cycle_days);
    cc.cycles_per_set = c.value("cycles_per_set", cc.cycles_per_set);
    cc.sets = c.value("sets", cc.sets);
    cc.toll_floor = c.value("toll_floor", cc.toll_floor);
    cc.switching_enabled = c.value("switching_enabled", cc.switching_enabled);
    cc.per_pair_learners = c.value("per_pair_learners", cc.per_pair_learners);
    cc.updates_per_day = c.value("updates_per_day", cc.updates_per_day);
    cc.conv_eps = c.value("conv_eps", cc.conv_eps);
    cc.conv_max_days = c.value("conv_max_days", cc.conv_max_days);
  }
  if (j.contains("ddpg")) {
    const json& d = j["ddpg"];
    auto& dd = cfg.ddpg;
    dd.hidden = d.value("hidden", dd.hidden);
    dd.lr_actor = d.value("lr_actor", dd.lr_actor);
    dd.lr_critic = d.value("lr_critic", dd.lr_critic);
    dd.gamma_rl = d.value("gamma_rl", dd.gamma_rl);
    dd.tau_soft = d.value("tau_soft", dd.tau_soft);
    dd.batch = d.value("batch", dd.batch);
    dd.capacity = d.value("capacity", dd.capacity);
    dd.noise_std_frac = d.value("noise_std_frac", dd.noise_std_frac);
    std::string opt = d.value("optimizer", std::string("adam"));
    if (opt == "adam")
      dd.optimizer = Optimizer::adam;
    else if (opt == "sgd")
      dd.optimizer = Optimizer::sgd;
    else
      throw std::runtime_error("unknown optimizer: " + opt);
  }
  return cfg;
}

void save_config(const std::string& path, const ExperimentConfig& cfg) {
  json j;
  j["scenario"] = cfg.scenario;
  if (!cfg.tntp_path.empty()) j["tntp_path"] = cfg.tntp_path;
  if (!cfg.calibration_path.empty())
    j["calibration_path"] = cfg.calibration_path;
  j["method"] = method_name(cfg.method);
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  const auto& cc = cfg.control;
  j["control"] = {{"action_bound", cc.action_bound},
                  {"n_window", cc.n_window},
                  {"dw", cc.dw},
                  {"cycle_days", cc.cycle_days},
                  {"cycles_per_set", cc.cycles_per_set},
                  {"sets", cc.sets},
                  {"toll_floor", cc.toll_floor},
                  {"switching_enabled", cc.switching_enabled},
                  {"per_pair_learners", cc.per_pair_learners},
                  {"updates_per_day", cc.updates_per_day},
                  {"conv_eps", cc.conv_eps},
                  {"conv_max_days", cc.conv_max_days}};
  const auto& dd = cfg.ddpg;
  j["ddpg"] = {{"hidden", dd.hidden},
               {"lr_actor", dd.lr_actor},
               {"lr_critic", dd.lr_critic},
               {"gamma_rl", dd.gamma_rl},
               {"tau_soft", dd.tau_soft},
               {"batch", dd.batch},
               {"capacity", dd.capacity},
               {"noise_std_frac", dd.noise_std_frac},
               {"optimizer", dd.optimizer == Optimizer::adam ? "adam" : "sgd"}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_config: cannot open " + path);
  os << j.dump(2) << "\n";
}

Network resolve_scenario(const ExperimentConfig& cfg) {
  if (cfg.scenario == "parallel") return build_scenario_parallel();
  if (cfg.scenario == "single") return build_scenario_single();
  if (cfg.scenario == "sioux") {
    if (cfg.tntp_path.empty() || cfg.calibration_path.empty())
      throw std::runtime_error(
          "resolve_scenario: sioux scenario needs tntp_path and "
          "calibration_path");
    return build_scenario_sioux(load_tntp(cfg.tntp_path),
                                load_sioux_calibration(cfg.calibration_path));
  }
  return load_scenario(cfg.scenario);
}

std::string resolve_out_dir(const std::string& out_dir) {
  const char* root = std::getenv("DCP_OUT_ROOT");
  if (root == nullptr || *root == '\0') return out_dir;
  std::filesystem::path p(out_dir);
  if (p.is_absolute()) return out_dir;
  return (std::filesystem::path(root) / p).string();
}

} // namespace dcp

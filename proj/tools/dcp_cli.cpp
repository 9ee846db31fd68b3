#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dcp/baselines.hpp"
#include "dcp/harness/config.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_simulate(const std::string& scenario_ref, const std::string& tntp,
                 const std::string& calibration, const std::string& out_dir,
                 double eps, int max_days) {
  dcp::ExperimentConfig scfg;
  scfg.scenario = scenario_ref;
  scfg.tntp_path = tntp;
  scfg.calibration_path = calibration;
  dcp::Network net = dcp::resolve_scenario(scfg);
  for (const auto& w : dcp::network_warnings(net))
    std::cerr << "warning: " << w << "\n";

  fs::create_directories(out_dir);
  std::ofstream conv_csv(fs::path(out_dir) / "convergence.csv");
  conv_csv << "day,total_travel_time,total_wait\n";
  char buf[96];
  auto observer = [&](int day, const dcp::DayRecord& rec) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g\n", day,
                  rec.total_travel_time(), rec.total_wait());
    conv_csv << buf;
  };

  dcp::DayToDayState state = dcp::initial_state(net);
  dcp::Matrix zero = dcp::Matrix::Zero(
      static_cast<dcp::Index>(net.bottlenecks.size()), net.behavior.horizon);
  auto result =
      dcp::run_to_convergence(state, net, zero, eps, max_days, observer);

  std::ofstream day_csv(fs::path(out_dir) / "converged_day.csv");
  dcp::write_day_csv(day_csv, net, state.last_record, state.day, true);
  dcp::save_state((fs::path(out_dir) / "converged_state.bin").string(), state);

  dcp::BaselineStats bs = dcp::compute_baseline(net, state.last_record);
  std::ofstream base_csv(fs::path(out_dir) / "baseline.csv");
  base_csv << "bottleneck,w0_sum,nz_count,norm,usable\n";
  for (std::size_t i = 0; i < net.bottlenecks.size(); ++i) {
    auto k = static_cast<dcp::Index>(i);
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%d,%.10g,%d\n",
                  net.bottlenecks[i].id, bs.w0_sum(k), bs.nz_count(k),
                  bs.norm(k), bs.usable[i] ? 1 : 0);
    base_csv << buf;
  }

  std::cout << (result.converged ? "converged" : "not converged") << " after "
            << result.days_used << " days\n";
  return result.converged ? 0 : 1;
}

int cmd_train(dcp::ExperimentConfig cfg) {
  dcp::Network net = dcp::resolve_scenario(cfg);
  std::string out = dcp::resolve_out_dir(cfg.out_dir);
  auto result = dcp::run_training(net, cfg.control, cfg.ddpg, cfg.method,
                                  cfg.seed, out);
  std::cout << "baseline daily wait " << result.baseline_day_wait
            << ", outputs in " << out << "\n";
  return 0;
}

int cmd_evaluate(dcp::ExperimentConfig cfg, const std::string& checkpoint) {
  dcp::Network net = dcp::resolve_scenario(cfg);
  std::string out = dcp::resolve_out_dir(cfg.out_dir);
  fs::create_directories(out);

  dcp::DayToDayState state = dcp::initial_state(net);
  dcp::Matrix zero = dcp::Matrix::Zero(
      static_cast<dcp::Index>(net.bottlenecks.size()), net.behavior.horizon);
  dcp::run_to_convergence(state, net, zero, cfg.control.conv_eps,
                          cfg.control.conv_max_days);
  dcp::BaselineStats baseline = dcp::compute_baseline(net, state.last_record);

  std::vector<dcp::DdpgLearner> learners;
  learners.push_back(dcp::DdpgLearner::load(checkpoint));
  std::vector<dcp::ReplayBuffer> replays;
  replays.emplace_back(1);

  dcp::ControlConfig ccfg = cfg.control;
  dcp::CycleLog log;
  if (cfg.method == dcp::Method::centralized) {
    ccfg.switching_enabled = false;
    auto layout = dcp::make_centralized_layout(net, state.last_record, 8);
    log = dcp::run_cycle_centralized(state, net, baseline, learners[0],
                                     replays[0], ccfg, layout, false);
  } else {
    if (cfg.method == dcp::Method::fully_distributed)
      ccfg.switching_enabled = false;
    auto mode = cfg.method == dcp::Method::fully_distributed
                    ? dcp::RewardMode::local
                    : dcp::RewardMode::shared;
    log = dcp::run_cycle(state, net, baseline, learners, replays, ccfg, mode,
                         false);
  }
  std::ofstream os(fs::path(out) / "eval_metrics.csv");
  dcp::write_metrics_csv(os, net, dcp::method_name(cfg.method), 0, 0, log,
                         true);
  std::cout << "final-day total wait " << log.days.back().total_wait << "\n";
  return 0;
}

int cmd_compare(dcp::ExperimentConfig cfg) {
  dcp::Network net = dcp::resolve_scenario(cfg);
  std::string out = dcp::resolve_out_dir(cfg.out_dir);
  fs::create_directories(out);
  std::ofstream combined(fs::path(out) / "compare.csv");
  bool header = true;
  for (dcp::Method m : {dcp::Method::dp_ddpg, dcp::Method::fully_distributed,
                        dcp::Method::centralized}) {
    std::string sub = (fs::path(out) / dcp::method_name(m)).string();
    auto result =
        dcp::run_training(net, cfg.control, cfg.ddpg, m, cfg.seed, sub);
    for (std::size_t set = 0; set < result.eval.size(); ++set) {
      dcp::write_metrics_csv(combined, net, dcp::method_name(m),
                             static_cast<int>(set), cfg.control.cycles_per_set + 1,
                             result.eval[set], header);
      header = false;
    }
    std::cout << dcp::method_name(m) << ": baseline daily wait "
              << result.baseline_day_wait << ", final eval wait "
              << result.eval.back().days.back().total_wait << "\n";
  }
  std::cout << "combined CSV: " << (fs::path(out) / "compare.csv").string()
            << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"day-to-day bottleneck simulator and distributed congestion "
               "pricing trainer"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand(
      "simulate", "run zero-toll day-to-day dynamics to convergence");
  std::string scenario = "parallel", out_dir = "out";
  std::string tntp_path, calibration_path;
  double eps = 1e-3;
  int max_days = 2000;
  sim->add_option("--scenario", scenario, "builtin name or scenario file");
  sim->add_option("--tntp", tntp_path, "TNTP link table (sioux scenario)");
  sim->add_option("--calibration", calibration_path,
                  "calibration file (sioux scenario)");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--eps", eps, "convergence tolerance");
  sim->add_option("--max-days", max_days, "day budget");

  // train / evaluate / compare share a config file
  std::string config_path, checkpoint, method_override;
  std::uint64_t seed_override = 0;
  bool have_seed = false;

  auto* train = app.add_subcommand("train", "run the training protocol");
  train->add_option("--config", config_path, "experiment config file")
      ->required();
  auto* seed_opt = train->add_option("--seed", seed_override, "seed override");
  train->add_option("--out", out_dir, "output directory override");
  bool have_out = false;
  train->add_option("--method", method_override,
                    "dp_ddpg | fully_distributed | centralized");

  auto* eval = app.add_subcommand("evaluate",
                                  "run one frozen-policy evaluation cycle");
  eval->add_option("--config", config_path, "experiment config file")
      ->required();
  eval->add_option("--checkpoint", checkpoint, "learner checkpoint")
      ->required();
  eval->add_option("--out", out_dir, "output directory override");

  auto* cmp = app.add_subcommand(
      "compare", "train and evaluate all three methods");
  cmp->add_option("--config", config_path, "experiment config file")
      ->required();
  cmp->add_option("--out", out_dir, "output directory override");
  auto* cmp_seed = cmp->add_option("--seed", seed_override, "seed override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(scenario, tntp_path, calibration_path, out_dir, eps,
                          max_days);

    dcp::ExperimentConfig cfg = dcp::load_config(config_path);
    have_seed = seed_opt->count() > 0 || cmp_seed->count() > 0;
    if (have_seed) cfg.seed = seed_override;
    have_out = (train->parsed() && train->get_option("--out")->count() > 0) ||
               (eval->parsed() && eval->get_option("--out")->count() > 0) ||
               (cmp->parsed() && cmp->get_option("--out")->count() > 0);
    if (have_out) cfg.out_dir = out_dir;
    if (train->parsed()) {
      if (!method_override.empty())
        cfg.method = dcp::method_from_name(method_override);
      return cmd_train(cfg);
    }
    if (eval->parsed()) return cmd_evaluate(cfg, checkpoint);
    if (cmp->parsed()) return cmd_compare(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

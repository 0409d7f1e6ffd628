#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mordq/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective deep Q-learning for single-asset trading"};
  app.require_subcommand(1);

  std::string config, out, weights, metric, range, checkpoint;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Config file (key = value text or JSON)");
    cmd->add_option("--out", out, "Run directory");
    cmd->add_option("--seed", seed, "Master seed override");
    cmd->add_option("--weights", weights, "Reward weights lr,alr,sr,powc used for evaluation");
    cmd->add_option("--metric", metric, "Checkpoint selection metric")->check(CLI::IsMember({"sharpe", "profit"}));
  };
  CLI::App* train = app.add_subcommand("train", "Train and checkpoint an agent");
  CLI::App* backtest = app.add_subcommand("backtest", "Greedy rollout of a checkpoint on one range");
  CLI::App* walkforward = app.add_subcommand("walkforward", "Anchored walk-forward training and testing");
  CLI::App* report = app.add_subcommand("report", "Summarize metrics.jsonl and write curves.csv");
  for (CLI::App* cmd : {train, backtest, walkforward, report}) add_common(cmd);
  backtest->add_option("--range", range, "Range to roll out on")->check(CLI::IsMember({"train", "eval", "test"}));
  backtest->add_option("--checkpoint", checkpoint, "Checkpoint file (default: best in the run directory)");

  CLI11_PARSE(app, argc, argv);

  mordq::CommandOptions options;
  try {
    if (!config.empty()) options.config = config;
    if (!out.empty()) options.out = out;
    for (CLI::App* cmd : {train, backtest, walkforward, report})
      if (cmd->count("--seed")) options.seed = seed;
    if (!weights.empty()) options.weights = mordq::parse_weights(weights);
    if (!metric.empty()) options.metric = mordq::selection_metric_from_string(metric);
    if (!range.empty()) options.range = mordq::range_id_from_string(range);
    if (!checkpoint.empty()) options.checkpoint = checkpoint;
  } catch (const mordq::Error& e) {
    std::cerr << mordq::error_json(e) << '\n';
    return 1;
  }
  return mordq::dispatch(app.get_subcommands().front()->get_name(), options, std::cout, std::cerr);
}

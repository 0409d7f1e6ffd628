#include "mordq/walk_forward.hpp"

#include <exception>
#include <thread>

namespace mordq {

namespace {

FoldReport run_fold(const TrainConfig& base, const PriceSeries& series, const DataSplit& split, std::size_t fold,
                    SelectionMetric metric) {
  TrainConfig config = base;
  config.seed = base.seed + fold;
  TrainResult result = train(config, series, split);
  FoldReport report;
  report.fold = fold;
  report.split = split;
  const EvalSettings settings = evaluation_settings(config, result.spec.feature_scale);
  if (result.checkpoints.empty()) {
    report.reports = evaluate_split(result.net, series, split, settings);
  } else {
    const Checkpoint& best = select_best_checkpoint(result.checkpoints, metric);
    report.selected_episode = best.episode;
    report.reports = best.reports;
  }
  return report;
}

}  // namespace

std::vector<FoldReport> run_walk_forward(const TrainConfig& config, const PriceSeries& series, const FoldPlan& plan,
                                         SelectionMetric metric, bool parallel) {
  config.validate();
  const std::size_t n = plan.folds.size();
  std::vector<FoldReport> out(n);
  if (!parallel || n < 2) {
    for (std::size_t f = 0; f < n; ++f) out[f] = run_fold(config, series, plan.folds[f], f, metric);
    return out;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  workers.reserve(n);
  for (std::size_t f = 0; f < n; ++f) {
    workers.emplace_back([&, f] {
      try {
        out[f] = run_fold(config, series, plan.folds[f], f, metric);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace mordq

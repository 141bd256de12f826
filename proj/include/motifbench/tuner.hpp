#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "motifbench/composer.hpp"
#include "motifbench/metrics.hpp"
#include "motifbench/params.hpp"

namespace motifbench {

// Maps a per-edge parameter assignment to the metrics it produces. Must be
// deterministic for a fixed assignment (results are averaged over repeats
// by the callers to absorb sampling noise when there is any).
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual MetricVector evaluate(const std::vector<ParameterVector>& params) = 0;
};

// Real-execution evaluator: swaps candidate params into the benchmark and
// runs it with the deterministic surrogate clock. The source dataset is
// generated from the benchmark's source node, rescaled up when a candidate
// dataSize outgrows it.
class RunEvaluator : public Evaluator {
 public:
  RunEvaluator(ProxyBenchmark bench, ArenaConfig arena_cfg, std::string spill_dir,
               TimingMode timing = TimingMode::modeled);
  MetricVector evaluate(const std::vector<ParameterVector>& params) override;

 private:
  ProxyBenchmark bench_;
  ArenaConfig arena_cfg_;
  std::string spill_dir_;
  TimingMode timing_;
  uint64_t base_bytes_ = 0;
  uint64_t cached_bytes_ = 0;
  DataRef source_;
};

// Closed-form evaluator for tests and model-driven tuning: each metric is
// base + sum of coefficient * parameter value. Parameter values are read
// from edge 0 (the tuner moves non-weight parameters in unison), except
// weight which is the maximum edge weight (the redistribution target).
class LinearModelEvaluator : public Evaluator {
 public:
  using Coefficients = std::map<std::string, std::array<double, 9>>;

  LinearModelEvaluator(MetricVector base, Coefficients coefficients);
  static LinearModelEvaluator from_json(const nlohmann::json& j);
  static LinearModelEvaluator load(const std::string& path);

  MetricVector evaluate(const std::vector<ParameterVector>& params) override;

  // The scalar fed into the model for one parameter.
  static double model_input(const std::vector<ParameterVector>& params,
                            TunableParam p);

 private:
  MetricVector base_;
  Coefficients coefficients_;
};

// Central-difference slopes: sensitivity of each selected metric to each
// tunable parameter, averaged over repeats at params * (1 +- perturbation).
struct ImpactTable {
  std::vector<TunableParam> parameters;  // canonical declaration order
  std::vector<std::string> metrics;      // selected metrics, canonical order
  std::vector<std::vector<double>> sensitivity;  // [metric][parameter]
  double perturbation = 0.1;
  uint32_t repeats = 3;

  double at(const std::string& metric, TunableParam p) const;
};

// Dispatch rule for one (metric, deviation-sign) pair: which parameter to
// move, in which direction, with the slope that sized the decision.
struct TreeLeaf {
  TunableParam parameter = TunableParam::data_size;
  int direction = 0;  // sign applied to the multiplicative step
  double sensitivity = 0.0;
};

// Depth-2 dispatch structure: worst metric -> deviation sign -> leaf.
struct DecisionTree {
  std::map<std::pair<std::string, int>, TreeLeaf> leaves;

  const TreeLeaf& leaf(const std::string& metric, int sign) const;
};

struct TuningConfig {
  double tolerance = 0.15;
  uint32_t max_iterations = 50;
  double perturbation = 0.1;
  uint32_t repeats = 3;
  uint32_t stall_window = 10;  // iterations without improvement before stop
};

// One row of tuning history (also the CSV row).
struct TuningStep {
  uint32_t iteration = 0;
  std::vector<ParameterVector> params;
  MetricVector metrics;
  AccuracyReport report;
  std::string adjusted_metric;  // worst metric that drove this step
  std::string adjusted_param;
  double step = 0.0;            // signed multiplicative step applied after this row
};

struct TuneResult {
  ProxyBenchmark benchmark;  // best-seen configuration written back
  MetricVector metrics;      // metrics of that configuration
  AccuracyReport report;
  std::vector<TuningStep> history;
  bool converged = false;
  std::string stop_reason;  // "converged", "stall", or "max_iterations"
};

// Initial per-edge parameters for a profile: dataSize/chunkSize scaled,
// numTasks = parallelism, weights normalized from ratios.
std::vector<ParameterVector> init_parameters(const HotspotProfile& profile,
                                             double scale, uint64_t seed = 0);

// One-parameter-at-a-time perturbation study around `baseline`.
ImpactTable impact_analysis(const ProxyBenchmark& bench,
                            const std::vector<ParameterVector>& baseline,
                            const std::vector<std::string>& selected,
                            double perturbation, uint32_t repeats,
                            Evaluator& eval);

// argmax |sensitivity| per (metric, sign); canonical-order tie-break.
// Throws UntunableMetricError when a metric responds to no parameter.
DecisionTree build_tree(const ImpactTable& impacts);

// The adjusting/feedback loop: evaluate, compare against target, move the
// parameter prescribed for the worst-deviating metric by a multiplicative
// step, repeat until every selected deviation is within tolerance or the
// iteration/stall limits hit. Returns the best-seen configuration by
// average accuracy. Weight moves are redistributed across the remaining
// edges and clamped so every weight stays within the benchmark's band.
TuneResult tune(const ProxyBenchmark& bench, const MetricVector& target,
                const std::vector<std::string>& selected, const TuningConfig& cfg,
                Evaluator& eval);

// Serializes tuning history as CSV (one row per iteration).
std::string history_to_csv(const std::vector<TuningStep>& history,
                           const std::vector<std::string>& selected);

}  // namespace motifbench

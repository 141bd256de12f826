#include "motifbench/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "motifbench/datagen.hpp"

namespace motifbench {
namespace {

constexpr double kMaxStep = 0.2;
constexpr double kTiny = 1e-9;

const std::vector<TunableParam>& all_params() {
  static const std::vector<TunableParam> p = {
      TunableParam::data_size,   TunableParam::chunk_size,
      TunableParam::num_tasks,   TunableParam::batch_size,
      TunableParam::total_size,  TunableParam::height_size,
      TunableParam::width_size,  TunableParam::num_channels,
      TunableParam::weight};
  return p;
}

uint32_t descriptor_width(const DataDescriptor& d) {
  switch (d.kind) {
    case DataKind::text: return 16;
    case DataKind::vectors: return 8;
    case DataKind::graph: return 8;
    case DataKind::tensor: return 4;
  }
  return 1;
}

// Selected metrics reordered into canonical metric order (deduplicated).
std::vector<std::string> canonical_selection(const std::vector<std::string>& selected) {
  std::vector<std::string> out;
  for (const std::string& name : metric_names())
    if (std::find(selected.begin(), selected.end(), name) != selected.end())
      out.push_back(name);
  if (out.size() != selected.size()) {
    for (const std::string& name : selected)
      if (std::find(metric_names().begin(), metric_names().end(), name) ==
          metric_names().end())
        throw ParseError("unknown metric: '" + name + "'");
  }
  return out;
}

// Moves edge k's weight toward weight*factor, redistributing the difference
// across the other edges proportional to their remaining band capacity, so
// the sum stays 1 and every weight stays within band of its initial value.
void apply_weight_move(std::vector<ParameterVector>& params,
                       const std::vector<double>& initial, double band, size_t k,
                       double factor) {
  const double w = params[k].weight;
  const double target =
      std::clamp(w * factor, initial[k] * (1.0 - band), initial[k] * (1.0 + band));
  double delta = target - w;
  if (delta == 0.0) return;
  const double sgn = delta > 0.0 ? 1.0 : -1.0;

  std::vector<double> cap(params.size(), 0.0);
  double total_cap = 0.0;
  for (size_t j = 0; j < params.size(); ++j) {
    if (j == k) continue;
    cap[j] = sgn > 0.0 ? params[j].weight - initial[j] * (1.0 - band)
                       : initial[j] * (1.0 + band) - params[j].weight;
    cap[j] = std::max(0.0, cap[j]);
    total_cap += cap[j];
  }
  const double absorb = std::min(std::abs(delta), total_cap);
  if (absorb <= 0.0) return;
  for (size_t j = 0; j < params.size(); ++j) {
    if (j == k || cap[j] == 0.0) continue;
    params[j].weight -= sgn * absorb * cap[j] / total_cap;
  }
  params[k].weight = w + sgn * absorb;
}

size_t heaviest_edge(const std::vector<double>& initial) {
  size_t k = 0;
  for (size_t i = 1; i < initial.size(); ++i)
    if (initial[i] > initial[k]) k = i;
  return k;
}

void check_finite(const MetricVector& m, const std::vector<std::string>& selected) {
  for (const std::string& name : selected)
    if (!std::isfinite(get_metric(m, name)))
      throw EvaluatorError("evaluator produced non-finite " + name);
}

MetricVector evaluate_averaged(Evaluator& eval,
                               const std::vector<ParameterVector>& params,
                               const std::vector<std::string>& selected,
                               uint32_t repeats) {
  MetricVector acc;
  for (uint32_t r = 0; r < repeats; ++r) {
    const MetricVector m = eval.evaluate(params);
    check_finite(m, selected);
    for (const std::string& name : metric_names())
      set_metric(acc, name, get_metric(acc, name) + get_metric(m, name));
  }
  for (const std::string& name : metric_names())
    set_metric(acc, name, get_metric(acc, name) / double(repeats));
  return acc;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double ImpactTable::at(const std::string& metric, TunableParam p) const {
  for (size_t mi = 0; mi < metrics.size(); ++mi) {
    if (metrics[mi] != metric) continue;
    for (size_t pi = 0; pi < parameters.size(); ++pi)
      if (parameters[pi] == p) return sensitivity[mi][pi];
  }
  throw ParameterError("impact table has no entry for (" + metric + ", " +
                       to_string(p) + ")");
}

const TreeLeaf& DecisionTree::leaf(const std::string& metric, int sign) const {
  auto it = leaves.find({metric, sign});
  if (it == leaves.end())
    throw ParameterError("decision tree has no leaf for metric " + metric);
  return it->second;
}

RunEvaluator::RunEvaluator(ProxyBenchmark bench, ArenaConfig arena_cfg,
                           std::string spill_dir, TimingMode timing)
    : bench_(std::move(bench)),
      arena_cfg_(arena_cfg),
      spill_dir_(std::move(spill_dir)),
      timing_(timing) {
  if (bench_.nodes.empty()) throw EmptyInputError("benchmark has no source node");
  base_bytes_ = bench_.nodes.front().element_count() *
                descriptor_width(bench_.nodes.front());
}

MetricVector RunEvaluator::evaluate(const std::vector<ParameterVector>& params) {
  if (params.size() != bench_.edges.size())
    throw EvaluatorError("parameter vector count does not match edge count");
  ProxyBenchmark b = bench_;
  for (size_t i = 0; i < params.size(); ++i) b.edges[i].params = params[i];

  uint64_t need = 0;
  for (const ParameterVector& p : params) need = std::max(need, p.data_size);
  const uint64_t want = std::max(base_bytes_, need);
  if (!source_.data || cached_bytes_ != want) {
    DataDescriptor d = bench_.nodes.front();
    if (want > base_bytes_)
      d = scale_descriptor(d, double(want) / double(base_bytes_));
    source_.descriptor = d;
    source_.data = generate_dataset(d);
    source_.checksum = source_.data->checksum();
    cached_bytes_ = want;
  }
  return execute_benchmark(b, source_, arena_cfg_, spill_dir_, timing_).metrics;
}

LinearModelEvaluator::LinearModelEvaluator(MetricVector base, Coefficients coefficients)
    : base_(base), coefficients_(std::move(coefficients)) {}

double LinearModelEvaluator::model_input(const std::vector<ParameterVector>& params,
                                         TunableParam p) {
  if (p == TunableParam::weight) {
    double mx = 0.0;
    for (const ParameterVector& e : params) mx = std::max(mx, e.weight);
    return mx;
  }
  return get_param(params.front(), p);
}

MetricVector LinearModelEvaluator::evaluate(
    const std::vector<ParameterVector>& params) {
  if (params.empty()) throw EvaluatorError("linear model needs at least one edge");
  MetricVector m = base_;
  for (const auto& [metric, coefs] : coefficients_) {
    double v = get_metric(m, metric);
    for (size_t j = 0; j < coefs.size(); ++j)
      if (coefs[j] != 0.0)
        v += coefs[j] * model_input(params, static_cast<TunableParam>(j));
    set_metric(m, metric, v);
  }
  return m;
}

LinearModelEvaluator LinearModelEvaluator::from_json(const nlohmann::json& j) {
  MetricVector base;
  Coefficients coefs;
  try {
    if (j.contains("base"))
      for (const auto& [name, value] : j.at("base").items())
        set_metric(base, name, value.get<double>());
    if (j.contains("coefficients"))
      for (const auto& [metric, byparam] : j.at("coefficients").items()) {
        get_metric(base, metric);  // validates the metric name
        std::array<double, 9> row{};
        for (const auto& [pname, c] : byparam.items())
          row[size_t(parse_tunable_param(pname))] = c.get<double>();
        coefs[metric] = row;
      }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad linear model: ") + e.what());
  }
  return LinearModelEvaluator(base, std::move(coefs));
}

LinearModelEvaluator LinearModelEvaluator::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model " + path + ": " + e.what());
  }
  return from_json(j);
}

std::vector<ParameterVector> init_parameters(const HotspotProfile& profile,
                                             double scale, uint64_t seed) {
  const ProxyBenchmark b = decompose(profile, scale, seed);
  std::vector<ParameterVector> out;
  out.reserve(b.edges.size());
  for (const MotifInvocation& e : b.edges) out.push_back(e.params);
  return out;
}

ImpactTable impact_analysis(const ProxyBenchmark& bench,
                            const std::vector<ParameterVector>& baseline,
                            const std::vector<std::string>& selected,
                            double perturbation, uint32_t repeats, Evaluator& eval) {
  if (!(perturbation > 0.0) || perturbation > 0.5)
    throw ParameterError("perturbation must lie in (0, 0.5]");
  if (repeats == 0) throw ParameterError("repeats must be >= 1");
  if (baseline.size() != bench.edges.size())
    throw ParameterError("baseline parameter count does not match edge count");

  ImpactTable table;
  table.parameters = all_params();
  table.metrics = canonical_selection(selected);
  if (table.metrics.empty()) throw ParameterError("no metrics selected");
  table.perturbation = perturbation;
  table.repeats = repeats;
  table.sensitivity.assign(table.metrics.size(),
                           std::vector<double>(table.parameters.size(), 0.0));

  for (size_t pi = 0; pi < table.parameters.size(); ++pi) {
    const TunableParam p = table.parameters[pi];
    std::vector<ParameterVector> plus = baseline, minus = baseline;
    double x_plus, x_minus;
    if (p == TunableParam::weight) {
      const size_t k = heaviest_edge(bench.initial_weights);
      apply_weight_move(plus, bench.initial_weights, bench.weight_band, k,
                        1.0 + perturbation);
      apply_weight_move(minus, bench.initial_weights, bench.weight_band, k,
                        1.0 - perturbation);
      x_plus = plus[k].weight;
      x_minus = minus[k].weight;
    } else {
      for (ParameterVector& e : plus)
        set_param(e, p, get_param(e, p) * (1.0 + perturbation));
      for (ParameterVector& e : minus)
        set_param(e, p, get_param(e, p) * (1.0 - perturbation));
      x_plus = get_param(plus.front(), p);
      x_minus = get_param(minus.front(), p);
    }
    const double denom = x_plus - x_minus;
    if (denom == 0.0) continue;  // parameter immovable at this baseline

    for (uint32_t r = 0; r < repeats; ++r) {
      MetricVector m_plus, m_minus;
      try {
        m_plus = eval.evaluate(plus);
        m_minus = eval.evaluate(minus);
      } catch (const Error& err) {
        throw Error(err.code(), std::string("impact analysis, parameter ") +
                                    to_string(p) + ", trial " +
                                    std::to_string(r + 1) + ": " + err.what());
      }
      for (size_t mi = 0; mi < table.metrics.size(); ++mi) {
        const double delta = get_metric(m_plus, table.metrics[mi]) -
                             get_metric(m_minus, table.metrics[mi]);
        if (!std::isfinite(delta))
          throw EvaluatorError("non-finite response for metric " +
                               table.metrics[mi] + " while perturbing " +
                               to_string(p));
        table.sensitivity[mi][pi] += delta / denom / double(repeats);
      }
    }
  }
  return table;
}

DecisionTree build_tree(const ImpactTable& impacts) {
  DecisionTree tree;
  for (size_t mi = 0; mi < impacts.metrics.size(); ++mi) {
    size_t best = 0;
    for (size_t pi = 1; pi < impacts.parameters.size(); ++pi)
      if (std::abs(impacts.sensitivity[mi][pi]) >
          std::abs(impacts.sensitivity[mi][best]))
        best = pi;  // strict >: canonical order wins ties
    const double s = impacts.sensitivity[mi][best];
    if (s == 0.0)
      throw UntunableMetricError("metric " + impacts.metrics[mi] +
                                 " does not respond to any parameter");
    for (int sign : {+1, -1}) {
      TreeLeaf leaf;
      leaf.parameter = impacts.parameters[best];
      leaf.sensitivity = s;
      // Positive deviation (proxy above target) with positive slope means
      // the parameter must decrease; all other cases mirror.
      leaf.direction = (s > 0.0) == (sign > 0) ? -1 : +1;
      tree.leaves[{impacts.metrics[mi], sign}] = leaf;
    }
  }
  return tree;
}

TuneResult tune(const ProxyBenchmark& bench, const MetricVector& target,
                const std::vector<std::string>& selected, const TuningConfig& cfg,
                Evaluator& eval) {
  if (!(cfg.tolerance > 0.0) || cfg.tolerance >= 1.0)
    throw ParameterError("tolerance must lie in (0, 1)");
  if (cfg.max_iterations == 0) throw ParameterError("max_iterations must be >= 1");
  const std::vector<std::string> metrics_sel = canonical_selection(selected);

  std::vector<ParameterVector> params;
  params.reserve(bench.edges.size());
  for (const MotifInvocation& e : bench.edges) params.push_back(e.params);

  const ImpactTable impacts =
      impact_analysis(bench, params, metrics_sel, cfg.perturbation, cfg.repeats, eval);

  // The dispatch tree covers the metrics that can actually steer a step:
  // zero-valued targets are excluded from accuracy (degenerate reference)
  // and locally flat metrics have no useful direction. A flat metric only
  // aborts the tune when it becomes the worst deviation.
  ImpactTable steerable = impacts;
  steerable.metrics.clear();
  steerable.sensitivity.clear();
  for (size_t mi = 0; mi < impacts.metrics.size(); ++mi) {
    bool responsive = false;
    for (double s : impacts.sensitivity[mi]) responsive |= s != 0.0;
    if (!responsive || get_metric(target, impacts.metrics[mi]) == 0.0) continue;
    steerable.metrics.push_back(impacts.metrics[mi]);
    steerable.sensitivity.push_back(impacts.sensitivity[mi]);
  }
  const DecisionTree tree =
      steerable.metrics.empty() ? DecisionTree{} : build_tree(steerable);

  TuneResult result;
  result.stop_reason = "max_iterations";
  MetricVector metrics = evaluate_averaged(eval, params, metrics_sel, cfg.repeats);

  bool have_best = false;
  TuningStep best;
  uint32_t stall = 0;

  for (uint32_t iter = 1; iter <= cfg.max_iterations; ++iter) {
    TuningStep row;
    row.iteration = iter;
    row.params = params;
    row.metrics = metrics;
    row.report = compare(metrics, target, metrics_sel, cfg.tolerance);

    if (!have_best || row.report.average > best.report.average + 1e-12) {
      best = row;
      have_best = true;
      stall = 0;
    } else {
      ++stall;
    }

    if (row.report.passed) {
      result.stop_reason = "converged";
      result.history.push_back(row);
      break;
    }
    if (stall >= cfg.stall_window) {
      result.stop_reason = "stall";
      result.history.push_back(row);
      break;
    }
    if (iter == cfg.max_iterations) {
      result.history.push_back(row);
      break;
    }

    // Plan the next move from the worst-deviating metric.
    const std::string& worst = row.report.worst_metric;
    const double proxy = get_metric(metrics, worst);
    const double tgt = get_metric(target, worst);
    const double dev = (proxy - tgt) / std::abs(tgt);
    const int sign = dev > 0.0 ? +1 : -1;
    const auto leaf_it = tree.leaves.find({worst, sign});
    if (leaf_it == tree.leaves.end())
      throw UntunableMetricError("metric " + worst +
                                 " does not respond to any parameter");
    const TreeLeaf& leaf = leaf_it->second;

    const double x = LinearModelEvaluator::model_input(params, leaf.parameter);
    const double elasticity = std::abs(leaf.sensitivity) *
                              std::max(std::abs(x), kTiny) /
                              std::max(std::abs(proxy), kTiny);
    const double step =
        std::min(kMaxStep, std::abs(dev) / std::max(elasticity, kTiny));
    row.adjusted_metric = worst;
    row.adjusted_param = to_string(leaf.parameter);
    row.step = leaf.direction * step;
    result.history.push_back(row);

    if (leaf.parameter == TunableParam::weight) {
      apply_weight_move(params, bench.initial_weights, bench.weight_band,
                        heaviest_edge(bench.initial_weights),
                        1.0 + leaf.direction * step);
    } else {
      for (ParameterVector& e : params) {
        const double v = get_param(e, leaf.parameter);
        set_param(e, leaf.parameter, v * (1.0 + leaf.direction * step));
        // Integer parameters too small for the multiplicative step move by
        // one whole unit so the loop cannot silently freeze.
        if (get_param(e, leaf.parameter) == v)
          set_param(e, leaf.parameter, v + leaf.direction);
      }
    }
    metrics = evaluate_averaged(eval, params, metrics_sel, cfg.repeats);
  }

  result.benchmark = bench;
  for (size_t i = 0; i < best.params.size(); ++i)
    result.benchmark.edges[i].params = best.params[i];
  result.metrics = best.metrics;
  result.report = best.report;
  result.converged = best.report.passed;
  return result;
}

std::string history_to_csv(const std::vector<TuningStep>& history,
                           const std::vector<std::string>& selected) {
  const std::vector<std::string> sel = canonical_selection(selected);
  std::ostringstream out;
  out << "iteration,average_accuracy,worst_metric,worst_accuracy,adjusted_metric,"
         "adjusted_param,step";
  for (const std::string& m : sel) out << ",m_" << m;
  const size_t edges = history.empty() ? 0 : history.front().params.size();
  for (size_t e = 0; e < edges; ++e) out << ",weight_" << e;
  out << ",data_size,chunk_size,num_tasks\n";

  for (const TuningStep& row : history) {
    double worst_acc = 0.0;
    for (const AccuracyEntry& e : row.report.per_metric)
      if (e.metric == row.report.worst_metric) worst_acc = e.accuracy;
    out << row.iteration << ',' << format_double(row.report.average) << ','
        << row.report.worst_metric << ',' << format_double(worst_acc) << ','
        << row.adjusted_metric << ',' << row.adjusted_param << ','
        << format_double(row.step);
    for (const std::string& m : sel)
      out << ',' << format_double(get_metric(row.metrics, m));
    for (const ParameterVector& p : row.params)
      out << ',' << format_double(p.weight);
    if (!row.params.empty())
      out << ',' << row.params.front().data_size << ','
          << row.params.front().chunk_size << ',' << row.params.front().num_tasks;
    else
      out << ",0,0,0";
    out << '\n';
  }
  return out.str();
}

}  // namespace motifbench

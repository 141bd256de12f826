// motifbench: synthesize, run, and tune proxy benchmarks built from motif
// kernels. Subcommands: gen-data, decompose, run, tune, compare, report,
// pipeline. Every command that writes files leaves a manifest.json in its
// output directory; `pipeline --from-manifest` replays a recorded run.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "motifbench/composer.hpp"
#include "motifbench/datagen.hpp"
#include "motifbench/manifest.hpp"
#include "motifbench/metrics.hpp"
#include "motifbench/tuner.hpp"

namespace fs = std::filesystem;
using namespace motifbench;

namespace {

int g_exit = int(ExitCode::ok);
std::vector<std::string> g_argv;

// ---- small helpers ---------------------------------------------------------

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << content;
  if (!f) throw IoError("write failed: " + path);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

TensorDims parse_dims(const std::string& s) {
  std::vector<uint64_t> v;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, 'x')) {
    try {
      v.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ParseError("bad --dims component: '" + item + "'");
    }
  }
  if (v.size() != 4) throw ParseError("--dims must be NxHxWxC (four numbers)");
  return TensorDims{uint32_t(v[0]), uint32_t(v[1]), uint32_t(v[2]), uint32_t(v[3])};
}

TimingMode parse_timing(const std::string& s) {
  if (s == "modeled") return TimingMode::modeled;
  if (s == "measured") return TimingMode::measured;
  throw ParameterError("timing must be 'modeled' or 'measured'");
}

void print_table(const std::vector<std::string>& headers,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> w(headers.size());
  for (size_t c = 0; c < headers.size(); ++c) w[c] = headers[c].size();
  for (const auto& r : rows)
    for (size_t c = 0; c < r.size() && c < w.size(); ++c)
      w[c] = std::max(w[c], r[c].size());
  auto line = [&](const std::vector<std::string>& r) {
    std::string out;
    for (size_t c = 0; c < w.size(); ++c) {
      std::string cell = c < r.size() ? r[c] : "";
      cell.resize(w[c], ' ');
      out += cell;
      if (c + 1 < w.size()) out += "  ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    std::cout << out << '\n';
  };
  line(headers);
  std::vector<std::string> dashes;
  for (size_t c = 0; c < w.size(); ++c) dashes.push_back(std::string(w[c], '-'));
  line(dashes);
  for (const auto& r : rows) line(r);
}

// ---- accuracy report emission ----------------------------------------------

nlohmann::json accuracy_to_json(const AccuracyReport& r) {
  nlohmann::json j;
  j["tolerance"] = r.tolerance;
  j["average"] = r.average;
  j["worst_metric"] = r.worst_metric;
  j["passed"] = r.passed;
  j["excluded"] = r.excluded;
  j["per_metric"] = nlohmann::json::array();
  for (const AccuracyEntry& e : r.per_metric)
    j["per_metric"].push_back({{"metric", e.metric},
                               {"target", e.target},
                               {"proxy", e.proxy},
                               {"accuracy", e.accuracy},
                               {"out_of_range", e.out_of_range}});
  return j;
}

AccuracyReport accuracy_from_json(const nlohmann::json& j) {
  AccuracyReport r;
  try {
    r.tolerance = j.at("tolerance").get<double>();
    r.average = j.at("average").get<double>();
    r.worst_metric = j.at("worst_metric").get<std::string>();
    r.passed = j.at("passed").get<bool>();
    r.excluded = j.at("excluded").get<std::vector<std::string>>();
    for (const auto& e : j.at("per_metric")) {
      AccuracyEntry a;
      a.metric = e.at("metric").get<std::string>();
      a.target = e.at("target").get<double>();
      a.proxy = e.at("proxy").get<double>();
      a.accuracy = e.at("accuracy").get<double>();
      a.out_of_range = e.at("out_of_range").get<bool>();
      r.per_metric.push_back(a);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad accuracy report: ") + e.what());
  }
  return r;
}

std::string accuracy_to_csv(const AccuracyReport& r) {
  std::ostringstream out;
  out << "metric,target,proxy,accuracy,out_of_range\n";
  for (const AccuracyEntry& e : r.per_metric)
    out << e.metric << ',' << fmt_exact(e.target) << ',' << fmt_exact(e.proxy)
        << ',' << fmt_exact(e.accuracy) << ',' << (e.out_of_range ? 1 : 0)
        << '\n';
  return out.str();
}

void print_accuracy(const AccuracyReport& r) {
  std::vector<std::vector<std::string>> rows;
  for (const AccuracyEntry& e : r.per_metric)
    rows.push_back({e.metric, fmt(e.target), fmt(e.proxy), fmt(e.accuracy),
                    e.out_of_range ? "out-of-range" : ""});
  print_table({"metric", "target", "proxy", "accuracy", "flag"}, rows);
  for (const std::string& m : r.excluded)
    std::cout << "excluded (zero-valued target): " << m << '\n';
  std::cout << "average accuracy: " << fmt(r.average)
            << "   worst: " << r.worst_metric << "   tolerance: "
            << fmt(r.tolerance) << "   " << (r.passed ? "PASS" : "FAIL")
            << '\n';
}

void write_accuracy(const AccuracyReport& r, const std::string& out_dir) {
  write_text(join_path(out_dir, "accuracy.json"),
             accuracy_to_json(r).dump(2) + "\n");
  write_text(join_path(out_dir, "accuracy.csv"), accuracy_to_csv(r));
}

// ---- manifest plumbing ------------------------------------------------------

struct ManifestBuilder {
  RunManifest m;

  ManifestBuilder(const std::string& command, uint64_t seed,
                  nlohmann::json config) {
    m.command = command;
    m.argv = g_argv;
    m.seed = seed;
    m.config = std::move(config);
  }
  void add_input(const std::string& path) {
    if (!path.empty()) m.inputs[path] = file_digest(path);
  }
  void add_output(const std::string& path) { m.outputs[path] = file_digest(path); }
  void save(const std::string& out_dir) { save_manifest(m, out_dir); }
};

// ---- run emission ------------------------------------------------------------

nlohmann::json run_to_json(const ProxyBenchmark& b, const RunResult& r) {
  nlohmann::json j;
  j["benchmark"] = b.name;
  j["total_runtime"] = r.total_runtime;
  j["edges"] = nlohmann::json::array();
  for (size_t i = 0; i < r.per_edge.size(); ++i) {
    const MotifRunRecord& rec = r.per_edge[i];
    nlohmann::json e;
    e["id"] = i < r.edge_order.size() ? r.edge_order[i] : std::to_string(i);
    e["motif"] = rec.kind.name();
    e["wall_time"] = rec.wall_time;
    e["modeled_time"] = rec.modeled_time;
    e["instructions"] = rec.op_counts.total_instructions();
    e["bytes_read_mem"] = rec.bytes_read_mem;
    e["bytes_written_mem"] = rec.bytes_written_mem;
    e["bytes_read_disk"] = rec.bytes_read_disk;
    e["bytes_written_disk"] = rec.bytes_written_disk;
    e["working_set_bytes"] = rec.working_set_bytes;
    e["arena_pause"] = rec.arena_pause;
    e["output_checksum"] = rec.output.checksum;
    e["params"] = params_to_json(rec.params);
    j["edges"].push_back(std::move(e));
  }
  nlohmann::json mj;
  for (const std::string& name : metric_names())
    mj[name] = get_metric(r.metrics, name);
  j["metrics"] = std::move(mj);
  return j;
}

void print_run(const ProxyBenchmark& b, const RunResult& r) {
  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < r.per_edge.size(); ++i) {
    const MotifRunRecord& rec = r.per_edge[i];
    rows.push_back({i < r.edge_order.size() ? r.edge_order[i] : std::to_string(i),
                    rec.kind.name(), fmt(rec.params.weight),
                    std::to_string(rec.op_counts.total_instructions()),
                    std::to_string(rec.bytes_read_mem + rec.bytes_written_mem),
                    fmt(rec.modeled_time), fmt(rec.wall_time)});
  }
  std::cout << "benchmark: " << b.name << '\n';
  print_table({"edge", "motif", "weight", "instructions", "mem_bytes",
               "modeled_s", "wall_s"},
              rows);
  std::vector<std::vector<std::string>> mrows;
  for (const std::string& name : metric_names())
    mrows.push_back({name, fmt(get_metric(r.metrics, name))});
  std::cout << '\n';
  print_table({"metric", "value"}, mrows);
}

std::string spill_dir_for(const std::string& spill, const std::string& out) {
  const std::string dir = spill.empty() ? join_path(out, "spill") : spill;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create spill directory " + dir);
  return dir;
}

void override_threads(ProxyBenchmark& b, uint32_t threads) {
  if (threads == 0) return;
  for (MotifInvocation& e : b.edges) e.params.num_tasks = threads;
}

std::unique_ptr<Evaluator> make_evaluator(const std::string& spec,
                                          const ProxyBenchmark& bench,
                                          const std::string& spill_dir,
                                          TimingMode timing,
                                          std::string* model_path) {
  if (spec == "run")
    return std::make_unique<RunEvaluator>(bench, ArenaConfig{}, spill_dir, timing);
  if (spec.rfind("model:", 0) == 0) {
    const std::string path = spec.substr(6);
    if (model_path) *model_path = path;
    return std::make_unique<LinearModelEvaluator>(LinearModelEvaluator::load(path));
  }
  throw ParameterError("evaluator must be 'run' or 'model:<file>'");
}

// ---- summary (report command + pipeline stage) -------------------------------

struct SummaryRow {
  std::string source, metric, target, proxy, accuracy, flag;
};

std::vector<SummaryRow> summarize_dir(const std::string& dir) {
  std::vector<fs::path> found;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir);
  for (auto it = fs::recursive_directory_iterator(dir, ec);
       it != fs::recursive_directory_iterator(); ++it)
    if (it->is_regular_file() && it->path().filename() == "accuracy.json")
      found.push_back(it->path());
  std::sort(found.begin(), found.end());
  if (found.empty())
    throw IoError("no accuracy.json files under " + dir +
                  " (expected at least one report to summarize)");

  std::vector<SummaryRow> rows;
  for (const fs::path& p : found) {
    std::ifstream f(p);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(p.string() + ": " + e.what());
    }
    const AccuracyReport r = accuracy_from_json(j);
    std::string source = fs::relative(p.parent_path(), dir, ec).string();
    if (source.empty() || source == ".") source = "-";
    double target_rt = 0, proxy_rt = 0;
    for (const AccuracyEntry& e : r.per_metric) {
      rows.push_back({source, e.metric, fmt_exact(e.target), fmt_exact(e.proxy),
                      fmt_exact(e.accuracy), e.out_of_range ? "out_of_range" : ""});
      if (e.metric == "runtime") {
        target_rt = e.target;
        proxy_rt = e.proxy;
      }
    }
    rows.push_back({source, "average", "", "", fmt_exact(r.average),
                    r.passed ? "pass" : "fail"});
    if (target_rt > 0 && proxy_rt > 0)
      rows.push_back({source, "speedup", fmt_exact(target_rt),
                      fmt_exact(proxy_rt), fmt_exact(speedup(target_rt, proxy_rt)),
                      ""});
  }
  return rows;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "source,metric,target,proxy,value,flag\n";
  for (const SummaryRow& r : rows)
    out << r.source << ',' << r.metric << ',' << r.target << ',' << r.proxy
        << ',' << r.accuracy << ',' << r.flag << '\n';
  return out.str();
}

void print_summary(const std::vector<SummaryRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  auto human = [](const std::string& s) {
    return s.empty() ? s : fmt(std::stod(s));
  };
  for (const SummaryRow& r : rows)
    cells.push_back(
        {r.source, r.metric, human(r.target), human(r.proxy), human(r.accuracy),
         r.flag});
  print_table({"source", "metric", "target", "proxy", "value", "flag"}, cells);
}

// ---- subcommand runners -------------------------------------------------------

struct GenOpts {
  std::string kind = "vectors";
  uint64_t size = 0;
  double sparsity = 0.0;
  std::string distribution = "uniform";
  uint64_t vertices = 0;
  std::string dims;
  std::string name = "data";
};

void cmd_gen_data(uint64_t seed, const std::string& out, const GenOpts& g) {
  if (out.empty()) throw ParameterError("gen-data requires --out");
  DataDescriptor d;
  d.kind = parse_data_kind(g.kind);
  d.size = g.size;
  d.sparsity = g.sparsity;
  d.distribution = parse_distribution(g.distribution);
  d.vertices = g.vertices;
  if (!g.dims.empty()) d.dims = parse_dims(g.dims);
  d.seed = seed;
  d.validate();

  const DatasetPtr data = generate_dataset(d);
  const std::string bin = join_path(out, g.name + ".bin");
  const std::string desc = join_path(out, g.name + ".json");
  std::error_code ec;
  fs::create_directories(out, ec);
  save_dataset(*data, d, bin);
  write_text(desc, descriptor_to_json(d).dump(2) + "\n");

  print_table({"field", "value"},
              {{"kind", to_string(d.kind)},
               {"records", std::to_string(data->element_count())},
               {"bytes", std::to_string(data->content_bytes())},
               {"checksum", std::to_string(data->checksum())},
               {"file", bin}});

  ManifestBuilder mb("gen-data", seed,
                     {{"kind", g.kind},
                      {"size", g.size},
                      {"sparsity", g.sparsity},
                      {"distribution", g.distribution},
                      {"vertices", g.vertices},
                      {"dims", g.dims},
                      {"name", g.name}});
  mb.add_output(bin);
  mb.add_output(desc);
  mb.save(out);
}

void cmd_decompose(uint64_t seed, const std::string& out,
                   const std::string& profile_path, double scale,
                   const std::string& name) {
  if (out.empty()) throw ParameterError("decompose requires --out");
  const HotspotProfile profile = load_profile(profile_path);
  const ProxyBenchmark bench = decompose(profile, scale, seed);
  const std::string path = join_path(out, name + ".json");
  std::error_code ec;
  fs::create_directories(out, ec);
  save_benchmark(bench, path);

  std::vector<std::vector<std::string>> rows;
  for (const MotifInvocation& e : bench.edges)
    rows.push_back({e.id, e.kind.name(), fmt(e.params.weight),
                    std::to_string(e.params.data_size),
                    std::to_string(e.params.chunk_size),
                    std::to_string(e.params.num_tasks),
                    e.bridge.empty() ? "none" : e.bridge});
  std::cout << "benchmark: " << bench.name << "  (" << bench.edges.size()
            << " edges, " << bench.nodes.size() << " nodes)\n";
  print_table({"edge", "motif", "weight", "dataSize", "chunkSize", "numTasks",
               "bridge"},
              rows);

  ManifestBuilder mb("decompose", seed,
                     {{"profile", profile_path}, {"scale", scale}, {"name", name}});
  mb.add_input(profile_path);
  mb.add_output(path);
  mb.save(out);
}

void cmd_run(uint64_t seed, uint32_t threads, const std::string& spill,
             const std::string& out, const std::string& bench_path,
             const std::string& data_path, const std::string& timing_name) {
  (void)seed;  // the benchmark file carries its own seeds
  if (out.empty()) throw ParameterError("run requires --out");
  ProxyBenchmark bench = load_benchmark(bench_path);
  override_threads(bench, threads);
  const TimingMode timing = parse_timing(timing_name);
  const DataRef source =
      data_path.empty() ? materialize_source(bench) : load_dataset(data_path);
  const std::string spill_dir = spill_dir_for(spill, out);

  const RunResult r =
      execute_benchmark(bench, source, ArenaConfig{}, spill_dir, timing);

  const std::string report_path = join_path(out, "proxy.report");
  const std::string run_path = join_path(out, "run.json");
  write_sampler_report(report_path, r.metrics, metric_names());
  write_text(run_path, run_to_json(bench, r).dump(2) + "\n");
  print_run(bench, r);

  ManifestBuilder mb("run", bench.seed,
                     {{"bench", bench_path},
                      {"data", data_path},
                      {"timing", timing_name},
                      {"threads", threads}});
  mb.add_input(bench_path);
  mb.add_input(data_path);
  mb.add_output(report_path);
  mb.add_output(run_path);
  mb.save(out);
}

struct TuneOpts {
  std::string bench, target, metrics;
  std::string evaluator = "run";
  std::string timing = "modeled";
  double tolerance = 0.15;
  uint32_t max_iters = 50;
  double perturbation = 0.1;
  uint32_t repeats = 3;
  uint32_t stall_window = 10;
  bool require_converged = false;
};

void cmd_tune(uint32_t threads, const std::string& spill, const std::string& out,
              const TuneOpts& t) {
  if (out.empty()) throw ParameterError("tune requires --out");
  ProxyBenchmark bench = load_benchmark(t.bench);
  override_threads(bench, threads);
  const SamplerReport target = parse_sampler_report(t.target);
  const std::vector<std::string> selected =
      t.metrics.empty() ? target.present : split_csv(t.metrics);
  if (selected.empty())
    throw ParameterError("target report lists no metrics; pass --metrics");

  const std::string spill_dir = spill_dir_for(spill, out);
  std::string model_path;
  const std::unique_ptr<Evaluator> eval = make_evaluator(
      t.evaluator, bench, spill_dir, parse_timing(t.timing), &model_path);

  TuningConfig cfg;
  cfg.tolerance = t.tolerance;
  cfg.max_iterations = t.max_iters;
  cfg.perturbation = t.perturbation;
  cfg.repeats = t.repeats;
  cfg.stall_window = t.stall_window;

  const TuneResult res = tune(bench, target.values, selected, cfg, *eval);

  const std::string tuned_path = join_path(out, "tuned.json");
  const std::string history_path = join_path(out, "history.csv");
  const std::string report_path = join_path(out, "tuned.report");
  save_benchmark(res.benchmark, tuned_path);
  write_text(history_path, history_to_csv(res.history, selected));
  write_sampler_report(report_path, res.metrics, metric_names());
  write_accuracy(res.report, out);

  print_accuracy(res.report);
  std::cout << "stop: " << res.stop_reason << " after " << res.history.size()
            << " iterations; converged: " << (res.converged ? "yes" : "no")
            << '\n';

  ManifestBuilder mb("tune", bench.seed,
                     {{"bench", t.bench},
                      {"target", t.target},
                      {"metrics", t.metrics},
                      {"evaluator", t.evaluator},
                      {"timing", t.timing},
                      {"tolerance", t.tolerance},
                      {"max_iters", t.max_iters},
                      {"perturbation", t.perturbation},
                      {"repeats", t.repeats},
                      {"stall_window", t.stall_window},
                      {"threads", threads}});
  mb.add_input(t.bench);
  mb.add_input(t.target);
  mb.add_input(model_path);
  mb.add_output(tuned_path);
  mb.add_output(history_path);
  mb.add_output(report_path);
  mb.add_output(join_path(out, "accuracy.json"));
  mb.add_output(join_path(out, "accuracy.csv"));
  mb.save(out);

  if (t.require_converged && !res.converged)
    g_exit = int(ExitCode::tolerance_failed);
}

void cmd_compare(const std::string& out, const std::string& target_path,
                 const std::string& proxy_path, const std::string& metrics,
                 double tolerance) {
  const SamplerReport target = parse_sampler_report(target_path);
  const SamplerReport proxy = parse_sampler_report(proxy_path);
  const std::vector<std::string> selected =
      metrics.empty() ? target.present : split_csv(metrics);
  if (selected.empty())
    throw ParameterError("target report lists no metrics; pass --metrics");

  const AccuracyReport r = compare(proxy.values, target.values, selected, tolerance);
  print_accuracy(r);
  if (!out.empty()) {
    write_accuracy(r, out);
    ManifestBuilder mb("compare", 0,
                       {{"target", target_path},
                        {"proxy", proxy_path},
                        {"metrics", metrics},
                        {"tolerance", tolerance}});
    mb.add_input(target_path);
    mb.add_input(proxy_path);
    mb.add_output(join_path(out, "accuracy.json"));
    mb.add_output(join_path(out, "accuracy.csv"));
    mb.save(out);
  }
  if (!r.passed) g_exit = int(ExitCode::tolerance_failed);
}

void cmd_report(const std::string& dir, std::string out) {
  if (out.empty()) out = join_path(dir, "summary");
  const std::vector<SummaryRow> rows = summarize_dir(dir);
  const std::string csv_path = join_path(out, "summary.csv");
  write_text(csv_path, summary_to_csv(rows));
  print_summary(rows);

  ManifestBuilder mb("report", 0, {{"dir", dir}});
  mb.add_output(csv_path);
  mb.save(out);
}

struct PipelineOpts {
  std::string profile, target, metrics;
  std::string evaluator = "run";
  std::string timing = "modeled";
  double scale = 1.0;
  double tolerance = 0.15;
  uint32_t max_iters = 50;
  double perturbation = 0.1;
  uint32_t repeats = 3;
  uint32_t stall_window = 10;
  std::string from_manifest;
};

template <typename F>
void stage(const char* name, F&& body) {
  std::cout << "[" << name << "]\n";
  try {
    body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  }
  std::cout << '\n';
}

void cmd_pipeline(uint64_t seed, uint32_t threads, const std::string& spill,
                  const std::string& out, PipelineOpts p) {
  if (out.empty()) throw ParameterError("pipeline requires --out");
  if (!p.from_manifest.empty()) {
    const RunManifest m = load_manifest(p.from_manifest);
    if (m.command != "pipeline")
      throw ParameterError("manifest records a '" + m.command +
                           "' run, not a pipeline");
    const nlohmann::json& c = m.config;
    seed = m.seed;
    p.profile = c.value("profile", p.profile);
    p.target = c.value("target", p.target);
    p.metrics = c.value("metrics", p.metrics);
    p.evaluator = c.value("evaluator", p.evaluator);
    p.timing = c.value("timing", p.timing);
    p.scale = c.value("scale", p.scale);
    p.tolerance = c.value("tolerance", p.tolerance);
    p.max_iters = c.value("max_iters", p.max_iters);
    p.perturbation = c.value("perturbation", p.perturbation);
    p.repeats = c.value("repeats", p.repeats);
    p.stall_window = c.value("stall_window", p.stall_window);
    threads = c.value("threads", threads);
  }
  if (p.profile.empty() || p.target.empty())
    throw ParameterError("pipeline requires --profile and --target");

  const std::string spill_dir = spill_dir_for(spill, out);
  const TimingMode timing = parse_timing(p.timing);
  std::string model_path;

  ProxyBenchmark bench;
  stage("decompose", [&] {
    const HotspotProfile profile = load_profile(p.profile);
    bench = decompose(profile, p.scale, seed);
    override_threads(bench, threads);
    save_benchmark(bench, join_path(out, "bench.json"));
    std::cout << "benchmark " << bench.name << ": " << bench.edges.size()
              << " edges\n";
  });

  TuneResult res;
  std::vector<std::string> selected;
  stage("tune", [&] {
    const SamplerReport target = parse_sampler_report(p.target);
    selected = p.metrics.empty() ? target.present : split_csv(p.metrics);
    if (selected.empty())
      throw ParameterError("target report lists no metrics; pass --metrics");
    const std::unique_ptr<Evaluator> eval =
        make_evaluator(p.evaluator, bench, spill_dir, timing, &model_path);
    TuningConfig cfg;
    cfg.tolerance = p.tolerance;
    cfg.max_iterations = p.max_iters;
    cfg.perturbation = p.perturbation;
    cfg.repeats = p.repeats;
    cfg.stall_window = p.stall_window;
    res = tune(bench, target.values, selected, cfg, *eval);
    save_benchmark(res.benchmark, join_path(out, "tuned.json"));
    write_text(join_path(out, "history.csv"),
               history_to_csv(res.history, selected));
    write_accuracy(res.report, out);
    std::cout << "stop: " << res.stop_reason << " after " << res.history.size()
              << " iterations; converged: " << (res.converged ? "yes" : "no")
              << '\n';
  });

  stage("run", [&] {
    const DataRef source = materialize_source(res.benchmark);
    const RunResult r =
        execute_benchmark(res.benchmark, source, ArenaConfig{}, spill_dir, timing);
    write_sampler_report(join_path(out, "proxy.report"), r.metrics,
                         metric_names());
    write_text(join_path(out, "run.json"),
               run_to_json(res.benchmark, r).dump(2) + "\n");
    print_run(res.benchmark, r);
  });

  stage("report", [&] {
    const std::vector<SummaryRow> rows = summarize_dir(out);
    write_text(join_path(out, "summary.csv"), summary_to_csv(rows));
    print_summary(rows);
  });

  ManifestBuilder mb("pipeline", seed,
                     {{"profile", p.profile},
                      {"target", p.target},
                      {"metrics", p.metrics},
                      {"evaluator", p.evaluator},
                      {"timing", p.timing},
                      {"scale", p.scale},
                      {"tolerance", p.tolerance},
                      {"max_iters", p.max_iters},
                      {"perturbation", p.perturbation},
                      {"repeats", p.repeats},
                      {"stall_window", p.stall_window},
                      {"threads", threads}});
  mb.add_input(p.profile);
  mb.add_input(p.target);
  mb.add_input(model_path);
  for (const char* f : {"bench.json", "tuned.json", "history.csv",
                        "accuracy.json", "accuracy.csv", "proxy.report",
                        "run.json", "summary.csv"})
    mb.add_output(join_path(out, f));
  mb.save(out);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) g_argv.push_back(argv[i]);

  CLI::App app{"proxy-benchmark synthesis from motif kernels"};
  app.require_subcommand(1);

  uint64_t seed = 1;
  uint32_t threads = 0;
  std::string spill, out;
  app.add_option("--seed", seed, "root seed; every derived seed flows from it")
      ->envname("MOTIFBENCH_SEED")
      ->capture_default_str();
  app.add_option("--threads", threads,
                 "override numTasks on every edge (0 = keep benchmark values)")
      ->envname("MOTIFBENCH_THREADS")
      ->capture_default_str();
  app.add_option("--spill-dir", spill, "directory for spilled chunks")
      ->envname("MOTIFBENCH_SPILL_DIR");
  app.add_option("--out", out, "output directory (gets the manifest)")
      ->envname("MOTIFBENCH_OUT");

  auto sub = [&](const char* name, const char* desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->fallthrough();
    return s;
  };

  GenOpts gen;
  CLI::App* cgen = sub("gen-data", "synthesize a dataset from a descriptor");
  cgen->add_option("--kind", gen.kind, "text|vectors|graph|tensor")
      ->envname("MOTIFBENCH_KIND")
      ->capture_default_str();
  cgen->add_option("--size", gen.size, "records (text), elements (vectors), edges (graph)")
      ->envname("MOTIFBENCH_SIZE");
  cgen->add_option("--sparsity", gen.sparsity, "fraction of zero elements")
      ->envname("MOTIFBENCH_SPARSITY")
      ->capture_default_str();
  cgen->add_option("--distribution", gen.distribution, "uniform|gaussian|zipf")
      ->envname("MOTIFBENCH_DISTRIBUTION")
      ->capture_default_str();
  cgen->add_option("--vertices", gen.vertices, "graph vertex count")
      ->envname("MOTIFBENCH_VERTICES");
  cgen->add_option("--dims", gen.dims, "tensor shape NxHxWxC")
      ->envname("MOTIFBENCH_DIMS");
  cgen->add_option("--name", gen.name, "output file stem")
      ->envname("MOTIFBENCH_NAME")
      ->capture_default_str();
  cgen->callback([&] { cmd_gen_data(seed, out, gen); });

  std::string profile_path, bench_name = "bench";
  double scale = 1.0;
  CLI::App* cdec = sub("decompose", "build a proxy benchmark from a hotspot profile");
  cdec->add_option("--profile", profile_path, "hotspot profile JSON")
      ->envname("MOTIFBENCH_PROFILE")
      ->required();
  cdec->add_option("--scale", scale, "input size multiplier")
      ->envname("MOTIFBENCH_SCALE")
      ->capture_default_str();
  cdec->add_option("--name", bench_name, "output file stem")
      ->envname("MOTIFBENCH_NAME")
      ->capture_default_str();
  cdec->callback([&] { cmd_decompose(seed, out, profile_path, scale, bench_name); });

  std::string run_bench, run_data, run_timing = "modeled";
  CLI::App* crun = sub("run", "execute a proxy benchmark and report its metrics");
  crun->add_option("--bench", run_bench, "benchmark JSON")
      ->envname("MOTIFBENCH_BENCH")
      ->required();
  crun->add_option("--data", run_data, "source dataset file (default: generate)")
      ->envname("MOTIFBENCH_DATA");
  crun->add_option("--timing", run_timing, "modeled|measured")
      ->envname("MOTIFBENCH_TIMING")
      ->capture_default_str();
  crun->callback([&] { cmd_run(seed, threads, spill, out, run_bench, run_data,
                               run_timing); });

  TuneOpts t;
  CLI::App* ctune = sub("tune", "adjust parameters until metrics match a target");
  ctune->add_option("--bench", t.bench, "benchmark JSON")
      ->envname("MOTIFBENCH_BENCH")
      ->required();
  ctune->add_option("--target", t.target, "target sampler report (metric=value lines)")
      ->envname("MOTIFBENCH_TARGET")
      ->required();
  ctune->add_option("--metrics", t.metrics, "comma list (default: all in target)")
      ->envname("MOTIFBENCH_METRICS");
  ctune->add_option("--tolerance", t.tolerance, "max relative deviation")
      ->envname("MOTIFBENCH_TOLERANCE")
      ->capture_default_str();
  ctune->add_option("--max-iters", t.max_iters, "iteration cap")
      ->envname("MOTIFBENCH_MAX_ITERS")
      ->capture_default_str();
  ctune->add_option("--perturbation", t.perturbation, "impact-analysis step")
      ->envname("MOTIFBENCH_PERTURBATION")
      ->capture_default_str();
  ctune->add_option("--repeats", t.repeats, "evaluations averaged per point")
      ->envname("MOTIFBENCH_REPEATS")
      ->capture_default_str();
  ctune->add_option("--stall-window", t.stall_window,
                    "iterations without improvement before stopping")
      ->envname("MOTIFBENCH_STALL_WINDOW")
      ->capture_default_str();
  ctune->add_option("--evaluator", t.evaluator, "run | model:<file>")
      ->envname("MOTIFBENCH_EVALUATOR")
      ->capture_default_str();
  ctune->add_option("--timing", t.timing, "modeled|measured (run evaluator)")
      ->envname("MOTIFBENCH_TIMING")
      ->capture_default_str();
  ctune->add_flag("--require-converged", t.require_converged,
                  "exit nonzero when the target was not reached")
      ->envname("MOTIFBENCH_REQUIRE_CONVERGED");
  ctune->callback([&] { cmd_tune(threads, spill, out, t); });

  std::string cmp_target, cmp_proxy, cmp_metrics;
  double cmp_tolerance = 0.15;
  CLI::App* ccmp = sub("compare", "accuracy of a proxy report against a target");
  ccmp->add_option("--target", cmp_target, "target sampler report")
      ->envname("MOTIFBENCH_TARGET")
      ->required();
  ccmp->add_option("--proxy", cmp_proxy, "proxy sampler report")
      ->envname("MOTIFBENCH_PROXY")
      ->required();
  ccmp->add_option("--metrics", cmp_metrics, "comma list (default: all in target)")
      ->envname("MOTIFBENCH_METRICS");
  ccmp->add_option("--tolerance", cmp_tolerance, "max relative deviation")
      ->envname("MOTIFBENCH_TOLERANCE")
      ->capture_default_str();
  ccmp->callback(
      [&] { cmd_compare(out, cmp_target, cmp_proxy, cmp_metrics, cmp_tolerance); });

  std::string report_dir;
  CLI::App* crep = sub("report", "summarize accuracy reports and speedups in a directory");
  crep->add_option("--dir", report_dir, "directory holding reports")
      ->envname("MOTIFBENCH_DIR")
      ->required();
  crep->callback([&] { cmd_report(report_dir, out); });

  PipelineOpts p;
  CLI::App* cpipe = sub("pipeline", "decompose, tune, run, and summarize in one pass");
  cpipe->add_option("--profile", p.profile, "hotspot profile JSON")
      ->envname("MOTIFBENCH_PROFILE");
  cpipe->add_option("--target", p.target, "target sampler report")
      ->envname("MOTIFBENCH_TARGET");
  cpipe->add_option("--metrics", p.metrics, "comma list (default: all in target)")
      ->envname("MOTIFBENCH_METRICS");
  cpipe->add_option("--scale", p.scale, "input size multiplier")
      ->envname("MOTIFBENCH_SCALE")
      ->capture_default_str();
  cpipe->add_option("--tolerance", p.tolerance, "max relative deviation")
      ->envname("MOTIFBENCH_TOLERANCE")
      ->capture_default_str();
  cpipe->add_option("--max-iters", p.max_iters, "iteration cap")
      ->envname("MOTIFBENCH_MAX_ITERS")
      ->capture_default_str();
  cpipe->add_option("--perturbation", p.perturbation, "impact-analysis step")
      ->envname("MOTIFBENCH_PERTURBATION")
      ->capture_default_str();
  cpipe->add_option("--repeats", p.repeats, "evaluations averaged per point")
      ->envname("MOTIFBENCH_REPEATS")
      ->capture_default_str();
  cpipe->add_option("--stall-window", p.stall_window,
                    "iterations without improvement before stopping")
      ->envname("MOTIFBENCH_STALL_WINDOW")
      ->capture_default_str();
  cpipe->add_option("--evaluator", p.evaluator, "run | model:<file>")
      ->envname("MOTIFBENCH_EVALUATOR")
      ->capture_default_str();
  cpipe->add_option("--timing", p.timing, "modeled|measured")
      ->envname("MOTIFBENCH_TIMING")
      ->capture_default_str();
  cpipe->add_option("--from-manifest", p.from_manifest,
                    "replay a recorded pipeline (other flags ignored)")
      ->envname("MOTIFBENCH_FROM_MANIFEST");
  cpipe->callback([&] { cmd_pipeline(seed, threads, spill, out, p); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : int(ExitCode::parameter);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return int(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return int(ExitCode::internal);
  }
  return g_exit;
}

#include "motifbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "motifbench/motif_exec.hpp"

namespace motifbench {

namespace {

// Surrogate-model constants. The shape is documented in the README: a fixed
// per-class issue cost plus cache-miss penalties driven by how far the
// working set overflows each cache level. Cache sizes follow a mainstream
// server part (32 KB L1D, 256 KB L2, 12 MB L3, 2.4 GHz). The model is a
// deterministic stand-in for counters, not a simulation.
constexpr double kClockHz = 2.4e9;
constexpr double kComputeCost = 0.35;   // cycles per int/float/branch op
constexpr double kMemoryCost = 0.25;    // cycles per load/store (L1 hit)
constexpr double kMispredictPenalty = 14.0;
constexpr double kL2Latency = 10.0;     // extra cycles per L1D miss
constexpr double kL3Latency = 30.0;     // extra cycles per L2 miss
constexpr double kDramLatency = 180.0;  // extra cycles per L3 miss
constexpr double kL1dBytes = 32.0 * 1024;
constexpr double kL2Bytes = 256.0 * 1024;
constexpr double kL3Bytes = 12.0 * 1024 * 1024;
constexpr double kL1dSlope = 0.03;
constexpr double kL2Slope = 0.04;
constexpr double kL3Slope = 0.05;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Hit ratio decays with the log of working-set pressure past the cache size.
double hit_curve(double working_set, double cache_bytes, double slope) {
  const double pressure = std::max(1.0, working_set / cache_bytes);
  return clamp01(1.0 - slope * std::log2(pressure));
}

}  // namespace

void MetricVector::validate() const {
  if (!(runtime > 0.0)) throw ParameterError("metric runtime must be positive");
  const double mix =
      instr_load + instr_store + instr_branch + instr_float + instr_integer;
  if (std::abs(mix - 1.0) > 1e-6)
    throw ParameterError("instruction mix fractions must sum to 1");
  for (double f : {instr_load, instr_store, instr_branch, instr_float, instr_integer,
                   branch_miss, l1i_hit, l1d_hit, l2_hit, l3_hit})
    if (f < 0.0 || f > 1.0) throw ParameterError("metric fraction outside [0, 1]");
  if (std::abs(mem_bw - (read_bw + write_bw)) >
      1e-6 * std::max(1.0, std::abs(mem_bw)))
    throw ParameterError("mem_bw must equal read_bw + write_bw");
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "runtime",     "ipc",         "mips",       "instr_load", "instr_store",
      "instr_branch", "instr_float", "instr_integer", "branch_miss", "l1i_hit",
      "l1d_hit",     "l2_hit",      "l3_hit",     "read_bw",    "write_bw",
      "mem_bw",      "disk_bw"};
  return names;
}

double get_metric(const MetricVector& m, const std::string& name) {
  if (name == "runtime") return m.runtime;
  if (name == "ipc") return m.ipc;
  if (name == "mips") return m.mips;
  if (name == "instr_load") return m.instr_load;
  if (name == "instr_store") return m.instr_store;
  if (name == "instr_branch") return m.instr_branch;
  if (name == "instr_float") return m.instr_float;
  if (name == "instr_integer") return m.instr_integer;
  if (name == "branch_miss") return m.branch_miss;
  if (name == "l1i_hit") return m.l1i_hit;
  if (name == "l1d_hit") return m.l1d_hit;
  if (name == "l2_hit") return m.l2_hit;
  if (name == "l3_hit") return m.l3_hit;
  if (name == "read_bw") return m.read_bw;
  if (name == "write_bw") return m.write_bw;
  if (name == "mem_bw") return m.mem_bw;
  if (name == "disk_bw") return m.disk_bw;
  throw ParseError("unknown metric: " + name);
}

void set_metric(MetricVector& m, const std::string& name, double value) {
  if (name == "runtime") m.runtime = value;
  else if (name == "ipc") m.ipc = value;
  else if (name == "mips") m.mips = value;
  else if (name == "instr_load") m.instr_load = value;
  else if (name == "instr_store") m.instr_store = value;
  else if (name == "instr_branch") m.instr_branch = value;
  else if (name == "instr_float") m.instr_float = value;
  else if (name == "instr_integer") m.instr_integer = value;
  else if (name == "branch_miss") m.branch_miss = value;
  else if (name == "l1i_hit") m.l1i_hit = value;
  else if (name == "l1d_hit") m.l1d_hit = value;
  else if (name == "l2_hit") m.l2_hit = value;
  else if (name == "l3_hit") m.l3_hit = value;
  else if (name == "read_bw") m.read_bw = value;
  else if (name == "write_bw") m.write_bw = value;
  else if (name == "mem_bw") m.mem_bw = value;
  else if (name == "disk_bw") m.disk_bw = value;
  else throw ParseError("unknown metric: " + name);
}

SoftwareOpCounts& SoftwareOpCounts::operator+=(const SoftwareOpCounts& o) {
  integer_ops += o.integer_ops;
  float_ops += o.float_ops;
  loads += o.loads;
  stores += o.stores;
  branches += o.branches;
  taken_mispredict_estimate += o.taken_mispredict_estimate;
  return *this;
}

double disk_bandwidth(const DiskIOSample& sample) {
  if (sample.sector_size == 0) throw ParameterError("sector size must be positive");
  if (!(sample.runtime > 0.0)) throw ParameterError("runtime must be positive");
  return double(sample.sectors_read_write) * double(sample.sector_size) /
         sample.runtime;
}

double accuracy(double val_r, double val_p) {
  if (val_r == 0.0)
    throw DegenerateReferenceError("accuracy undefined for zero reference");
  return 1.0 - std::abs(val_p - val_r) / std::abs(val_r);
}

double speedup(double time_a, double time_b) {
  if (!(time_a > 0.0) || !(time_b > 0.0))
    throw ParameterError("speedup requires positive times");
  return time_a / time_b;
}

SurrogateEstimate surrogate_estimate(const SoftwareOpCounts& ops,
                                     uint64_t working_set_bytes) {
  SurrogateEstimate e;
  const double ws = double(working_set_bytes);
  e.l1d_hit = hit_curve(ws, kL1dBytes, kL1dSlope);
  e.l2_hit = hit_curve(ws, kL2Bytes, kL2Slope);
  e.l3_hit = hit_curve(ws, kL3Bytes, kL3Slope);

  const double accesses = double(ops.loads + ops.stores);
  const double l1_misses = accesses * (1.0 - e.l1d_hit);
  const double l2_misses = l1_misses * (1.0 - e.l2_hit);
  const double l3_misses = l2_misses * (1.0 - e.l3_hit);

  e.cycles = kComputeCost * double(ops.integer_ops + ops.float_ops + ops.branches) +
             kMemoryCost * accesses +
             kMispredictPenalty * double(ops.taken_mispredict_estimate) +
             kL2Latency * l1_misses + kL3Latency * l2_misses +
             kDramLatency * l3_misses;
  e.modeled_seconds = e.cycles / kClockHz;
  return e;
}

MetricVector derive_metrics(const std::vector<MotifRunRecord>& records,
                            TimingMode timing) {
  if (records.empty()) throw EmptyInputError("no run records to derive metrics from");

  SoftwareOpCounts total;
  double runtime = 0.0, cycles = 0.0;
  double hit_l1d = 0.0, hit_l2 = 0.0, hit_l3 = 0.0, accesses = 0.0;
  uint64_t read_mem = 0, written_mem = 0, disk_bytes = 0;
  for (const MotifRunRecord& r : records) {
    total += r.op_counts;
    runtime += timing == TimingMode::measured ? r.wall_time : r.modeled_time;
    const SurrogateEstimate e = surrogate_estimate(r.op_counts, r.working_set_bytes);
    cycles += e.cycles;
    const double a = double(r.op_counts.loads + r.op_counts.stores);
    accesses += a;
    hit_l1d += a * e.l1d_hit;
    hit_l2 += a * e.l2_hit;
    hit_l3 += a * e.l3_hit;
    read_mem += r.bytes_read_mem;
    written_mem += r.bytes_written_mem;
    disk_bytes += r.bytes_read_disk + r.bytes_written_disk;
  }
  if (!(runtime > 0.0)) throw ParameterError("records carry no positive runtime");

  MetricVector m;
  m.runtime = runtime;
  const double instr = double(total.total_instructions());
  if (instr > 0.0) {
    m.instr_load = double(total.loads) / instr;
    m.instr_store = double(total.stores) / instr;
    m.instr_branch = double(total.branches) / instr;
    m.instr_float = double(total.float_ops) / instr;
    m.instr_integer = double(total.integer_ops) / instr;
  }
  m.mips = instr / runtime / 1e6;
  m.ipc = cycles > 0.0 ? std::clamp(instr / cycles, 0.0, 8.0) : 0.0;
  m.branch_miss =
      total.branches > 0
          ? clamp01(double(total.taken_mispredict_estimate) / double(total.branches))
          : 0.0;
  // Instruction-cache pressure tracks branchiness in this surrogate: straight
  // streaming code stays resident, branchy dispatch-heavy code does not.
  m.l1i_hit = clamp01(0.995 - 0.02 * m.instr_branch);
  m.l1d_hit = accesses > 0.0 ? hit_l1d / accesses : 0.0;
  m.l2_hit = accesses > 0.0 ? hit_l2 / accesses : 0.0;
  m.l3_hit = accesses > 0.0 ? hit_l3 / accesses : 0.0;
  m.read_bw = double(read_mem) / runtime;
  m.write_bw = double(written_mem) / runtime;
  m.mem_bw = m.read_bw + m.write_bw;
  m.disk_bw = double(disk_bytes) / runtime;
  return m;
}

SamplerReport parse_sampler_report(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open sampler report: " + path);
  SamplerReport report;
  std::vector<std::string> seen;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected name=value");
    const std::string name = line.substr(0, eq);
    double value = 0.0;
    try {
      size_t used = 0;
      value = std::stod(line.substr(eq + 1), &used);
      if (used == 0) throw std::invalid_argument("empty");
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad value for " + name);
    }
    set_metric(report.values, name, value);  // unknown names throw ParseError
    seen.push_back(name);
  }
  // Canonical ordering of the present-set keeps downstream selection stable.
  for (const std::string& name : metric_names())
    if (std::find(seen.begin(), seen.end(), name) != seen.end())
      report.present.push_back(name);
  return report;
}

void write_sampler_report(const std::string& path, const MetricVector& values,
                          const std::vector<std::string>& names) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open for write: " + path);
  f.precision(17);
  for (const std::string& name : names) f << name << "=" << get_metric(values, name) << "\n";
  if (!f) throw IoError("write failed: " + path);
}

AccuracyReport compare(const MetricVector& proxy, const MetricVector& target,
                       const std::vector<std::string>& selected, double tolerance) {
  if (selected.empty()) throw ParameterError("metric selection must be nonempty");

  AccuracyReport report;
  report.tolerance = tolerance;
  report.passed = true;

  double sum = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  // Canonical iteration order makes the worst-metric tie-break stable.
  for (const std::string& name : metric_names()) {
    if (std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
    const double val_r = get_metric(target, name);
    const double val_p = get_metric(proxy, name);
    if (val_r == 0.0) {
      report.excluded.push_back(name);
      continue;
    }
    AccuracyEntry entry;
    entry.metric = name;
    entry.target = val_r;
    entry.proxy = val_p;
    entry.accuracy = accuracy(val_r, val_p);
    entry.out_of_range = entry.accuracy < 0.0;
    if (1.0 - entry.accuracy > tolerance) report.passed = false;
    if (entry.accuracy < worst) {
      worst = entry.accuracy;
      report.worst_metric = entry.metric;
    }
    sum += entry.accuracy;
    report.per_metric.push_back(entry);
  }
  if (!report.per_metric.empty()) report.average = sum / double(report.per_metric.size());
  return report;
}

}  // namespace motifbench

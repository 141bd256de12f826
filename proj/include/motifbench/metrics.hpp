#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motifbench/errors.hpp"

namespace motifbench {

struct MotifRunRecord;  // defined in motif_exec.hpp

// Observed behavior profile of one run. Fraction fields live in [0,1];
// bandwidths are bytes/second.
struct MetricVector {
  double runtime = 0.0;  // seconds
  double ipc = 0.0;
  double mips = 0.0;
  double instr_load = 0.0;     // fraction of instructions
  double instr_store = 0.0;
  double instr_branch = 0.0;
  double instr_float = 0.0;
  double instr_integer = 0.0;
  double branch_miss = 0.0;    // fraction of branches
  double l1i_hit = 0.0;
  double l1d_hit = 0.0;
  double l2_hit = 0.0;
  double l3_hit = 0.0;
  double read_bw = 0.0;
  double write_bw = 0.0;
  double mem_bw = 0.0;
  double disk_bw = 0.0;

  void validate() const;
};

// Canonical metric order; doubles as the exact key set of sampler reports
// and the tie-break order for worst-metric selection.
const std::vector<std::string>& metric_names();
double get_metric(const MetricVector& m, const std::string& name);
void set_metric(MetricVector& m, const std::string& name, double value);

struct DiskIOSample {
  uint64_t sectors_read_write = 0;
  uint64_t sector_size = 0;  // bytes
  double runtime = 0.0;      // seconds
};

// Analytically counted operations reported by kernels; the basis of the
// software metric provider.
struct SoftwareOpCounts {
  uint64_t integer_ops = 0;
  uint64_t float_ops = 0;
  uint64_t loads = 0;
  uint64_t stores = 0;
  uint64_t branches = 0;
  uint64_t taken_mispredict_estimate = 0;

  uint64_t total_instructions() const {
    return integer_ops + float_ops + loads + stores + branches;
  }
  SoftwareOpCounts& operator+=(const SoftwareOpCounts& o);
};

struct AccuracyEntry {
  std::string metric;
  double target = 0.0;
  double proxy = 0.0;
  double accuracy = 0.0;     // 1 - |proxy - target| / |target|
  bool out_of_range = false; // accuracy < 0, reported raw with this flag
};

struct AccuracyReport {
  std::vector<AccuracyEntry> per_metric;   // canonical metric order
  std::vector<std::string> excluded;       // zero-valued targets, skipped
  double average = 0.0;
  std::string worst_metric;
  double tolerance = 0.0;
  bool passed = false;  // every included deviation <= tolerance
};

// ---- formula-level operations

// (sectors * sector_size) / runtime.
double disk_bandwidth(const DiskIOSample& sample);

// 1 - |val_p - val_r| / |val_r|. Throws DegenerateReferenceError when the
// reference is zero; values below 0 are returned raw (callers flag them).
double accuracy(double val_r, double val_p);

// time_a / time_b.
double speedup(double time_a, double time_b);

// ---- metric collection

enum class MetricProvider : uint8_t { software, external };
enum class TimingMode : uint8_t { measured, modeled };

// Deterministic surrogate for hardware behavior, computed from op counts
// and the working-set size. The shape is a fixed documented model (base
// cost per op class plus cache-miss penalties on a working-set-vs-cache
// curve); it is NOT a physical simulation.
struct SurrogateEstimate {
  double cycles = 0.0;
  double modeled_seconds = 0.0;
  double l1d_hit = 0.0;
  double l2_hit = 0.0;
  double l3_hit = 0.0;
};
SurrogateEstimate surrogate_estimate(const SoftwareOpCounts& ops,
                                     uint64_t working_set_bytes);

// Aggregates run records into a MetricVector using the software provider.
// TimingMode::modeled uses the surrogate clock (deterministic across runs);
// measured uses recorded wall times.
MetricVector derive_metrics(const std::vector<MotifRunRecord>& records,
                            TimingMode timing);

// Sampler report: UTF-8 lines `metric_name=value`. `present` lists the keys
// the file actually carried, in canonical order.
struct SamplerReport {
  MetricVector values;
  std::vector<std::string> present;
};
SamplerReport parse_sampler_report(const std::string& path);
void write_sampler_report(const std::string& path, const MetricVector& values,
                          const std::vector<std::string>& names);

// Eq.-style comparison of proxy against target over the selected metrics.
AccuracyReport compare(const MetricVector& proxy, const MetricVector& target,
                       const std::vector<std::string>& selected, double tolerance);

}  // namespace motifbench

#pragma once

#include <string>
#include <vector>

#include "motifbench/arena.hpp"
#include "motifbench/dataset.hpp"
#include "motifbench/metrics.hpp"
#include "motifbench/motif_exec.hpp"
#include "motifbench/params.hpp"

#include <json.hpp>

namespace motifbench {

// One time-dominant code region of the real workload, already classified.
struct HotspotEntry {
  std::string hotspot_name;
  MotifKind motif;
  double ratio = 0.0;  // execution-time fraction, in (0, 1]
};

// Workload-level facts the proxy inherits: the input shape, the framework's
// parallelism degree, and its chunking granularity. The optional fields feed
// image/row-structured kernels when the profile knows them.
struct WorkloadConfig {
  DataDescriptor input;
  uint32_t parallelism = 1;
  uint64_t chunk_size = 0;  // bytes
  uint64_t batch_size = 0;
  uint32_t height_size = 0;
  uint32_t width_size = 0;
  uint32_t num_channels = 0;
  uint32_t stride = 0;
  PaddingMode padding = PaddingMode::valid;
  TensorLayout layout = TensorLayout::nhwc;

  bool operator==(const WorkloadConfig&) const = default;
};

struct HotspotProfile {
  std::string workload_name;
  std::vector<HotspotEntry> entries;
  WorkloadConfig config;

  // Throws on invalid ratios (must be in (0,1], sum <= 1 + 1e-6) or an
  // empty entry list (EmptyProfileError).
  void validate() const;
};

HotspotProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const HotspotProfile& p);
HotspotProfile load_profile(const std::string& path);

// One motif edge of the proxy DAG: reads the dataset at node `source`,
// writes the dataset at node `sink`.
struct MotifInvocation {
  std::string id;
  MotifKind kind;
  ParameterVector params;
  uint32_t source = 0;
  uint32_t sink = 0;
  std::string bridge;  // adapter applied to the source data, or "none"

  bool operator==(const MotifInvocation&) const = default;
};

// The proxy benchmark: datasets as nodes, weighted motif invocations as
// edges. Node 0's descriptor is the (scaled) source input; intermediate
// node descriptors record the expected kind and are sized at run time.
struct ProxyBenchmark {
  std::string name;
  uint64_t seed = 0;
  double weight_band = 0.10;  // tuned weight stays within +-band relative
  std::vector<DataDescriptor> nodes;
  std::vector<MotifInvocation> edges;
  std::vector<double> initial_weights;

  // One human-readable violation per entry; empty iff the benchmark is
  // well-formed (acyclic, single source, unique producers, weights in
  // [0,1] summing to 1 +- 1e-6 and inside the band, params valid).
  std::vector<std::string> validate() const;
};

// Builds the proxy from a profile: one edge per entry in profile order
// (a linear chain), weights = ratio / sum(ratios), dataSize/chunkSize
// scaled by `scale`, numTasks = parallelism, per-edge seeds derived from
// `seed`. Type bridges between consecutive motifs are recorded per edge.
ProxyBenchmark decompose(const HotspotProfile& profile, double scale,
                         uint64_t seed = 0);

nlohmann::json params_to_json(const ParameterVector& p);
ParameterVector params_from_json(const nlohmann::json& j);

// Descriptor text round-trip: parse(serialize(b)) equals b structurally.
std::string serialize_benchmark(const ProxyBenchmark& b);
ProxyBenchmark parse_benchmark(const std::string& text);
ProxyBenchmark load_benchmark(const std::string& path);
void save_benchmark(const ProxyBenchmark& b, const std::string& path);

// Generates the source dataset from node 0's descriptor.
DataRef materialize_source(const ProxyBenchmark& b);

struct RunResult {
  std::vector<MotifRunRecord> per_edge;  // in execution (topological) order
  std::vector<std::string> edge_order;   // edge ids matching per_edge
  double total_runtime = 0.0;            // sum of per-edge wall times
  MetricVector metrics;
};

// Runs every edge in topological order. An edge's weight scales its work
// volume: it repeats passes proportional to weight over its own data.
// Outputs are deterministic in (benchmark, data, seed) and identical across
// spill directories and worker counts.
RunResult execute_benchmark(const ProxyBenchmark& b, const DataRef& data,
                            const ArenaConfig& arena_cfg,
                            const std::string& spill_dir,
                            TimingMode timing = TimingMode::modeled);

}  // namespace motifbench

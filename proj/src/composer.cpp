#include "motifbench/composer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "motifbench/datagen.hpp"
#include "motifbench/rng.hpp"

namespace motifbench {
namespace {

constexpr double kWeightSumSlack = 1e-6;
constexpr uint64_t kMaxPasses = 64;  // bounds work blowup from extreme ratios

uint32_t descriptor_width(const DataDescriptor& d) {
  switch (d.kind) {
    case DataKind::text: return 16;
    case DataKind::vectors: return 8;
    case DataKind::graph: return 8;
    case DataKind::tensor: return 4;
  }
  return 1;
}

uint64_t descriptor_bytes(const DataDescriptor& d) {
  return d.element_count() * descriptor_width(d);
}

const nlohmann::json& require(const nlohmann::json& j, const char* key,
                              const std::string& ctx) {
  if (!j.contains(key))
    throw ParseError(ctx + " missing field: " + key);
  return j.at(key);
}

// Node descriptors reuse the dataset-descriptor encoding but skip size
// validation: intermediate nodes are sized at run time and carry size 0.
DataDescriptor node_from_json(const nlohmann::json& j, const std::string& ctx) {
  DataDescriptor d;
  try {
    d.kind = parse_data_kind(require(j, "kind", ctx).get<std::string>());
    d.size = require(j, "size", ctx).get<uint64_t>();
    d.sparsity = j.value("sparsity", 0.0);
    d.distribution =
        parse_distribution(j.value("distribution", std::string("uniform")));
    d.seed = j.value("seed", uint64_t(0));
    d.vertices = j.value("vertices", uint64_t(0));
    if (j.contains("dims")) {
      const auto& a = j.at("dims");
      if (!a.is_array() || a.size() != 4)
        throw ParseError(ctx + ": tensor dims must be a 4-element array");
      d.dims = {a[0].get<uint32_t>(), a[1].get<uint32_t>(), a[2].get<uint32_t>(),
                a[3].get<uint32_t>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  return d;
}

// Work volume per weight: each edge repeats its own data proportional to
// weight / min weight, so a 0.7/0.1/0.2 split runs 7/1/2 passes.
uint64_t passes_for_weight(double weight, double min_weight) {
  const double ratio = weight / std::max(min_weight, 1e-9);
  return std::min<uint64_t>(kMaxPasses,
                            std::max<uint64_t>(1, uint64_t(std::llround(ratio))));
}

// Concatenates same-kind datasets in producer order (fan-in nodes).
Dataset concat_datasets(const std::vector<DatasetPtr>& parts) {
  Dataset out;
  out.kind = parts.front()->kind;
  for (const DatasetPtr& p : parts) {
    if (p->kind != out.kind)
      throw InputTypeError("fan-in producers emit different data kinds");
    switch (out.kind) {
      case DataKind::text:
        if (out.text.empty()) out.text_width = p->text_width;
        else if (out.text_width != p->text_width)
          throw InputTypeError("fan-in text records have different widths");
        out.text.insert(out.text.end(), p->text.begin(), p->text.end());
        break;
      case DataKind::vectors:
        out.values.insert(out.values.end(), p->values.begin(), p->values.end());
        break;
      case DataKind::graph:
        out.vertices = std::max(out.vertices, p->vertices);
        out.edges.insert(out.edges.end(), p->edges.begin(), p->edges.end());
        break;
      case DataKind::tensor:
        if (out.floats.empty()) out.dims = p->dims;
        else if (out.dims.h != p->dims.h || out.dims.w != p->dims.w ||
                 out.dims.c != p->dims.c)
          throw ShapeError("fan-in tensors have mismatched spatial dims");
        else
          out.dims.n += p->dims.n;
        out.floats.insert(out.floats.end(), p->floats.begin(), p->floats.end());
        break;
    }
  }
  return out;
}

}  // namespace

void HotspotProfile::validate() const {
  if (entries.empty()) throw EmptyProfileError("profile has no hotspot entries");
  double sum = 0.0;
  for (const HotspotEntry& e : entries) {
    if (!(e.ratio > 0.0) || e.ratio > 1.0 || !std::isfinite(e.ratio))
      throw ParameterError("hotspot ratio must lie in (0, 1]: " + e.hotspot_name);
    sum += e.ratio;
  }
  if (sum > 1.0 + kWeightSumSlack)
    throw ParameterError("hotspot ratios sum beyond 1");
  config.input.validate();
  if (config.parallelism == 0)
    throw ParameterError("workload parallelism must be >= 1");
}

HotspotProfile profile_from_json(const nlohmann::json& j) {
  HotspotProfile p;
  try {
    p.workload_name = require(j, "workload_name", "profile").get<std::string>();
    const auto& entries = require(j, "entries", "profile");
    for (const auto& ej : entries) {
      HotspotEntry e;
      e.hotspot_name = require(ej, "hotspot", "profile entry").get<std::string>();
      e.motif = MotifKind::parse(
          require(ej, "motif_family", "profile entry").get<std::string>(),
          require(ej, "motif_variant", "profile entry").get<std::string>());
      e.ratio = require(ej, "ratio", "profile entry").get<double>();
      p.entries.push_back(e);
    }
    const auto& cfg = require(j, "workload_config", "profile");
    p.config.input = descriptor_from_json(require(cfg, "input", "workload_config"));
    p.config.parallelism =
        require(cfg, "parallelism", "workload_config").get<uint32_t>();
    p.config.chunk_size = require(cfg, "chunk_size", "workload_config").get<uint64_t>();
    p.config.batch_size = cfg.value("batch_size", uint64_t(0));
    p.config.height_size = cfg.value("height_size", uint32_t(0));
    p.config.width_size = cfg.value("width_size", uint32_t(0));
    p.config.num_channels = cfg.value("num_channels", uint32_t(0));
    p.config.stride = cfg.value("stride", uint32_t(0));
    p.config.padding = parse_padding(cfg.value("padding", std::string("valid")));
    p.config.layout = parse_layout(cfg.value("layout", std::string("nhwc")));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad profile: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json profile_to_json(const HotspotProfile& p) {
  nlohmann::json j;
  j["workload_name"] = p.workload_name;
  j["entries"] = nlohmann::json::array();
  for (const HotspotEntry& e : p.entries)
    j["entries"].push_back({{"hotspot", e.hotspot_name},
                            {"motif_family", to_string(e.motif.family)},
                            {"motif_variant", to_string(e.motif.variant)},
                            {"ratio", e.ratio}});
  nlohmann::json cfg;
  cfg["input"] = descriptor_to_json(p.config.input);
  cfg["parallelism"] = p.config.parallelism;
  cfg["chunk_size"] = p.config.chunk_size;
  if (p.config.batch_size) cfg["batch_size"] = p.config.batch_size;
  if (p.config.height_size) cfg["height_size"] = p.config.height_size;
  if (p.config.width_size) cfg["width_size"] = p.config.width_size;
  if (p.config.num_channels) cfg["num_channels"] = p.config.num_channels;
  if (p.config.stride) cfg["stride"] = p.config.stride;
  cfg["padding"] = to_string(p.config.padding);
  cfg["layout"] = to_string(p.config.layout);
  j["workload_config"] = cfg;
  return j;
}

HotspotProfile load_profile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open profile: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("profile " + path + ": " + e.what());
  }
  return profile_from_json(j);
}

std::vector<std::string> ProxyBenchmark::validate() const {
  std::vector<std::string> report;
  const size_t n_nodes = nodes.size();

  if (nodes.empty()) report.push_back("benchmark has no nodes");
  if (edges.empty()) report.push_back("benchmark has no edges");
  if (initial_weights.size() != edges.size())
    report.push_back("initial_weights count does not match edge count");
  if (!(weight_band > 0.0) || weight_band >= 1.0)
    report.push_back("weight_band must lie in (0, 1)");

  std::vector<uint32_t> producers(n_nodes, 0);
  std::vector<std::string> ids;
  double weight_sum = 0.0;
  for (size_t i = 0; i < edges.size(); ++i) {
    const MotifInvocation& e = edges[i];
    const std::string tag = "edge " + e.id;
    if (e.source >= n_nodes || e.sink >= n_nodes) {
      report.push_back(tag + ": node index out of range");
      continue;
    }
    if (e.source == e.sink) report.push_back(tag + ": self-loop");
    producers[e.sink]++;
    ids.push_back(e.id);
    if (e.params.weight < 0.0 || e.params.weight > 1.0 ||
        !std::isfinite(e.params.weight))
      report.push_back(tag + ": weight outside [0, 1]");
    weight_sum += e.params.weight;
    if (i < initial_weights.size()) {
      const double w0 = initial_weights[i];
      if (std::abs(e.params.weight - w0) > weight_band * w0 + 1e-12)
        report.push_back(tag + ": weight " + std::to_string(e.params.weight) +
                         " outside +-" + std::to_string(weight_band * 100) +
                         "% of initial " + std::to_string(w0));
    }
    try {
      e.params.validate();
    } catch (const Error& err) {
      report.push_back(tag + ": " + err.what());
    }
    const DataKind in_kind = nodes[e.source].kind;
    const DataKind produced =
        output_kind(e.kind, required_input_kind(e.kind, in_kind));
    if (produced != nodes[e.sink].kind)
      report.push_back(tag + ": produces " + to_string(produced) +
                       " but sink node declares " + to_string(nodes[e.sink].kind));
  }

  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    report.push_back("duplicate edge ids");

  if (!edges.empty() && std::abs(weight_sum - 1.0) > kWeightSumSlack)
    report.push_back("edge weights sum to " + std::to_string(weight_sum) +
                     ", expected 1");

  // Acyclicity and single-source via Kahn's elimination over nodes.
  if (!nodes.empty()) {
    uint32_t sources = 0;
    for (size_t i = 0; i < n_nodes; ++i) sources += producers[i] == 0;
    if (sources != 1)
      report.push_back("benchmark must have exactly one source node, found " +
                       std::to_string(sources));
    std::vector<uint32_t> remaining = producers;
    std::vector<bool> ready(n_nodes, false), edge_done(edges.size(), false);
    for (size_t i = 0; i < n_nodes; ++i) ready[i] = remaining[i] == 0;
    size_t done = 0;
    bool progress = true;
    while (progress) {
      progress = false;
      for (size_t i = 0; i < edges.size(); ++i) {
        if (edge_done[i] || edges[i].source >= n_nodes ||
            edges[i].sink >= n_nodes || !ready[edges[i].source])
          continue;
        edge_done[i] = true;
        ++done;
        if (--remaining[edges[i].sink] == 0) ready[edges[i].sink] = true;
        progress = true;
      }
    }
    if (done != edges.size()) report.push_back("benchmark graph contains a cycle");
  }

  try {
    if (!nodes.empty()) nodes.front().validate();
  } catch (const Error& err) {
    report.push_back(std::string("source node: ") + err.what());
  }
  return report;
}

ProxyBenchmark decompose(const HotspotProfile& profile, double scale,
                         uint64_t seed) {
  profile.validate();
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ParameterError("scale must be positive");

  ProxyBenchmark b;
  b.name = profile.workload_name;
  b.seed = seed;

  double ratio_sum = 0.0;
  for (const HotspotEntry& e : profile.entries) ratio_sum += e.ratio;

  DataDescriptor source =
      scale == 1.0 ? profile.config.input
                   : scale_descriptor(profile.config.input, scale);
  source.seed = derive_seed(seed, "source");
  b.nodes.push_back(source);

  const uint64_t scaled_bytes = std::max<uint64_t>(
      1, uint64_t(std::llround(double(descriptor_bytes(profile.config.input)) * scale)));
  // A missing chunk size defaults to one chunk per worker; either way the
  // scaled chunk is clamped into [1, scaled data size] to keep params valid.
  uint64_t scaled_chunk =
      profile.config.chunk_size == 0
          ? (scaled_bytes + profile.config.parallelism - 1) / profile.config.parallelism
          : uint64_t(std::llround(double(profile.config.chunk_size) * scale));
  scaled_chunk = std::min(std::max<uint64_t>(1, scaled_chunk), scaled_bytes);

  DataKind cur_kind = source.kind;
  for (size_t i = 0; i < profile.entries.size(); ++i) {
    const HotspotEntry& entry = profile.entries[i];
    MotifInvocation edge;
    edge.id = entry.hotspot_name.empty()
                  ? entry.motif.name() + "-" + std::to_string(i)
                  : entry.hotspot_name;
    edge.kind = entry.motif;
    edge.source = uint32_t(i);
    edge.sink = uint32_t(i + 1);

    const DataKind need = required_input_kind(entry.motif, cur_kind);
    edge.bridge = bridge_name(cur_kind, need);
    cur_kind = output_kind(entry.motif, need);

    ParameterVector& p = edge.params;
    p.data_size = scaled_bytes;
    p.chunk_size = scaled_chunk;
    p.num_tasks = profile.config.parallelism;
    p.weight = entry.ratio / ratio_sum;
    p.batch_size = profile.config.batch_size;
    p.height_size = profile.config.height_size;
    p.width_size = profile.config.width_size;
    p.num_channels = profile.config.num_channels;
    p.stride = profile.config.stride;
    p.padding = profile.config.padding;
    p.layout = profile.config.layout;
    p.seed = derive_seed(seed, edge.id);

    b.initial_weights.push_back(p.weight);
    b.edges.push_back(edge);

    DataDescriptor inter;
    inter.kind = cur_kind;
    inter.seed = derive_seed(seed, "node-" + std::to_string(i + 1));
    b.nodes.push_back(inter);
  }
  return b;
}

nlohmann::json params_to_json(const ParameterVector& p) {
  return {{"data_size", p.data_size},
          {"chunk_size", p.chunk_size},
          {"num_tasks", p.num_tasks},
          {"weight", p.weight},
          {"batch_size", p.batch_size},
          {"total_size", p.total_size},
          {"height_size", p.height_size},
          {"width_size", p.width_size},
          {"num_channels", p.num_channels},
          {"stride", p.stride},
          {"padding", to_string(p.padding)},
          {"layout", to_string(p.layout)},
          {"seed", p.seed}};
}

ParameterVector params_from_json(const nlohmann::json& j) {
  ParameterVector p;
  const std::string ctx = "parameter vector";
  try {
    p.data_size = require(j, "data_size", ctx).get<uint64_t>();
    p.chunk_size = require(j, "chunk_size", ctx).get<uint64_t>();
    p.num_tasks = require(j, "num_tasks", ctx).get<uint32_t>();
    p.weight = require(j, "weight", ctx).get<double>();
    p.batch_size = require(j, "batch_size", ctx).get<uint64_t>();
    p.total_size = require(j, "total_size", ctx).get<uint64_t>();
    p.height_size = require(j, "height_size", ctx).get<uint32_t>();
    p.width_size = require(j, "width_size", ctx).get<uint32_t>();
    p.num_channels = require(j, "num_channels", ctx).get<uint32_t>();
    p.stride = require(j, "stride", ctx).get<uint32_t>();
    p.padding = parse_padding(require(j, "padding", ctx).get<std::string>());
    p.layout = parse_layout(require(j, "layout", ctx).get<std::string>());
    p.seed = require(j, "seed", ctx).get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ctx + std::string(": ") + e.what());
  }
  return p;
}

std::string serialize_benchmark(const ProxyBenchmark& b) {
  nlohmann::json j;
  j["name"] = b.name;
  j["seed"] = b.seed;
  j["weight_band"] = b.weight_band;
  j["nodes"] = nlohmann::json::array();
  for (const DataDescriptor& n : b.nodes) j["nodes"].push_back(descriptor_to_json(n));
  j["initial_weights"] = b.initial_weights;
  j["edges"] = nlohmann::json::array();
  for (const MotifInvocation& e : b.edges)
    j["edges"].push_back({{"id", e.id},
                          {"family", to_string(e.kind.family)},
                          {"variant", to_string(e.kind.variant)},
                          {"source", e.source},
                          {"sink", e.sink},
                          {"bridge", e.bridge},
                          {"params", params_to_json(e.params)}});
  return j.dump(2) + "\n";
}

ProxyBenchmark parse_benchmark(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("benchmark descriptor: ") + e.what());
  }
  ProxyBenchmark b;
  const std::string ctx = "benchmark descriptor";
  try {
    b.name = require(j, "name", ctx).get<std::string>();
    b.seed = require(j, "seed", ctx).get<uint64_t>();
    b.weight_band = require(j, "weight_band", ctx).get<double>();
    for (const auto& nj : require(j, "nodes", ctx))
      b.nodes.push_back(node_from_json(nj, "benchmark node"));
    b.initial_weights =
        require(j, "initial_weights", ctx).get<std::vector<double>>();
    for (const auto& ej : require(j, "edges", ctx)) {
      MotifInvocation e;
      e.id = require(ej, "id", "benchmark edge").get<std::string>();
      e.kind = MotifKind::parse(
          require(ej, "family", "benchmark edge").get<std::string>(),
          require(ej, "variant", "benchmark edge").get<std::string>());
      e.source = require(ej, "source", "benchmark edge").get<uint32_t>();
      e.sink = require(ej, "sink", "benchmark edge").get<uint32_t>();
      e.bridge = require(ej, "bridge", "benchmark edge").get<std::string>();
      e.params = params_from_json(require(ej, "params", "benchmark edge"));
      b.edges.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  return b;
}

ProxyBenchmark load_benchmark(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open benchmark descriptor: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_benchmark(ss.str());
}

void save_benchmark(const ProxyBenchmark& b, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write benchmark descriptor: " + path);
  f << serialize_benchmark(b);
  if (!f) throw IoError("write failed: " + path);
}

DataRef materialize_source(const ProxyBenchmark& b) {
  if (b.nodes.empty()) throw EmptyInputError("benchmark has no source node");
  DataRef ref;
  ref.descriptor = b.nodes.front();
  ref.data = generate_dataset(ref.descriptor);
  ref.checksum = ref.data->checksum();
  return ref;
}

RunResult execute_benchmark(const ProxyBenchmark& b, const DataRef& data,
                            const ArenaConfig& arena_cfg,
                            const std::string& spill_dir, TimingMode timing) {
  const std::vector<std::string> report = b.validate();
  if (!report.empty()) {
    std::string msg = "invalid benchmark:";
    for (const std::string& r : report) msg += "\n  " + r;
    throw ParameterError(msg);
  }
  if (!data.data) throw InputTypeError("source dataset is not loaded");

  // Locate the unique source node and bind the input there.
  std::vector<uint32_t> producers(b.nodes.size(), 0);
  for (const MotifInvocation& e : b.edges) producers[e.sink]++;
  uint32_t source_node = 0;
  for (uint32_t i = 0; i < producers.size(); ++i)
    if (producers[i] == 0) source_node = i;
  if (data.data->kind != b.nodes[source_node].kind)
    throw InputTypeError(std::string("source data is ") +
                         to_string(data.data->kind) + ", benchmark expects " +
                         to_string(b.nodes[source_node].kind));

  double min_weight = 1.0;
  for (const MotifInvocation& e : b.edges)
    min_weight = std::min(min_weight, e.params.weight);

  std::vector<DataRef> node_data(b.nodes.size());
  std::vector<std::vector<DatasetPtr>> pending(b.nodes.size());
  std::vector<uint32_t> remaining = producers;
  std::vector<bool> node_ready(b.nodes.size(), false), edge_done(b.edges.size(), false);
  node_data[source_node] = data;
  node_ready[source_node] = true;

  RunResult result;
  bool progress = true;
  while (progress) {
    progress = false;
    for (size_t i = 0; i < b.edges.size(); ++i) {
      const MotifInvocation& e = b.edges[i];
      if (edge_done[i] || !node_ready[e.source]) continue;
      edge_done[i] = true;
      progress = true;

      ManagedArena arena(arena_cfg);
      const uint64_t passes = passes_for_weight(e.params.weight, min_weight);
      MotifRunRecord record;
      try {
        record = execute_motif(e.kind, e.params, node_data[e.source], arena,
                               spill_dir, e.id, passes);
      } catch (const Error& err) {
        throw Error(err.code(), "edge " + e.id + ": " + err.what());
      }
      result.per_edge.push_back(record);
      result.edge_order.push_back(e.id);
      result.total_runtime += record.wall_time;

      pending[e.sink].push_back(record.output.data);
      if (--remaining[e.sink] == 0) {
        DataRef ref = record.output;
        if (pending[e.sink].size() > 1) {
          auto merged =
              std::make_shared<Dataset>(concat_datasets(pending[e.sink]));
          ref.descriptor = describe_dataset(*merged, b.seed);
          ref.checksum = merged->checksum();
          ref.data = merged;
        }
        node_data[e.sink] = ref;
        node_ready[e.sink] = true;
      }
    }
  }
  for (bool done : edge_done)
    if (!done) throw ParameterError("benchmark graph could not be scheduled");

  result.metrics = derive_metrics(result.per_edge, timing);
  return result;
}

}  // namespace motifbench

#include "motifbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "motifbench/rng.hpp"

namespace motifbench {

const char* to_string(DataKind k) {
  switch (k) {
    case DataKind::text: return "text";
    case DataKind::vectors: return "vectors";
    case DataKind::graph: return "graph";
    case DataKind::tensor: return "tensor";
  }
  return "?";
}

DataKind parse_data_kind(const std::string& s) {
  if (s == "text") return DataKind::text;
  if (s == "vectors") return DataKind::vectors;
  if (s == "graph") return DataKind::graph;
  if (s == "tensor") return DataKind::tensor;
  throw ParseError("unknown data kind: " + s);
}

const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::uniform: return "uniform";
    case Distribution::zipf: return "zipf";
    case Distribution::gaussian: return "gaussian";
  }
  return "?";
}

Distribution parse_distribution(const std::string& s) {
  if (s == "uniform") return Distribution::uniform;
  if (s == "zipf") return Distribution::zipf;
  if (s == "gaussian") return Distribution::gaussian;
  throw ParseError("unknown distribution: " + s);
}

void DataDescriptor::validate() const {
  if (sparsity < 0.0 || sparsity > 1.0 || !std::isfinite(sparsity))
    throw ParameterError("sparsity must lie in [0, 1]");
  switch (kind) {
    case DataKind::text:
    case DataKind::vectors:
      if (size == 0) throw ParameterError("dataset size must be positive");
      break;
    case DataKind::graph:
      if (size == 0) throw ParameterError("graph edge count must be positive");
      if (vertices == 0) throw ParameterError("graph vertex count must be positive");
      if (vertices > (uint64_t(1) << 32))
        throw ParameterError("graph vertex ids must fit in 32 bits");
      break;
    case DataKind::tensor:
      if (dims.elements() == 0) throw ParameterError("tensor dims must be positive");
      break;
  }
}

uint64_t DataDescriptor::element_count() const {
  return kind == DataKind::tensor ? dims.elements() : size;
}

uint64_t Dataset::element_count() const {
  switch (kind) {
    case DataKind::text: return text_width ? text.size() / text_width : 0;
    case DataKind::vectors: return values.size();
    case DataKind::graph: return edges.size();
    case DataKind::tensor: return floats.size();
  }
  return 0;
}

uint32_t Dataset::record_width() const {
  switch (kind) {
    case DataKind::text: return text_width;
    case DataKind::vectors: return sizeof(double);
    case DataKind::graph: return sizeof(uint64_t);
    case DataKind::tensor: return sizeof(float);
  }
  return 0;
}

const char* Dataset::record_data() const {
  switch (kind) {
    case DataKind::text: return text.data();
    case DataKind::vectors: return reinterpret_cast<const char*>(values.data());
    case DataKind::graph: return reinterpret_cast<const char*>(edges.data());
    case DataKind::tensor: return reinterpret_cast<const char*>(floats.data());
  }
  return nullptr;
}

uint64_t Dataset::checksum() const {
  return fnv1a64(record_data(), content_bytes());
}

std::string bridge_name(DataKind from, DataKind to) {
  if (from == to) return "none";
  return std::string(to_string(from)) + "_to_" + to_string(to);
}

namespace {

constexpr uint32_t kBridgeTextWidth = 16;

// Renders a double as a fixed-width text record; ordering of the rendered
// records matches numeric ordering for same-sign values of similar scale,
// which is all the sort/set motifs need.
void render_record(double v, char* out) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%015.4f", v);
  std::memcpy(out, buf, kBridgeTextWidth - 1);
  out[kBridgeTextWidth - 1] = '\n';
}

std::vector<double> to_values(const Dataset& in) {
  std::vector<double> out;
  switch (in.kind) {
    case DataKind::vectors:
      out = in.values;
      break;
    case DataKind::tensor:
      out.assign(in.floats.begin(), in.floats.end());
      break;
    case DataKind::graph:
      out.reserve(in.edges.size());
      // Map each edge to a value derived from both endpoints. Keep the
      // magnitude bounded so downstream float kernels stay finite.
      for (uint64_t e : in.edges)
        out.push_back(double(e >> 32) + double(e & 0xffffffffu) * 1e-9);
      break;
    case DataKind::text:
      out.reserve(in.element_count());
      for (size_t i = 0; i + in.text_width <= in.text.size(); i += in.text_width)
        out.push_back(double(fnv1a64(in.text.data() + i, in.text_width) >> 11) /
                      double(uint64_t(1) << 53));
      break;
  }
  return out;
}

}  // namespace

DatasetPtr bridge_dataset(const DatasetPtr& in, DataKind target, uint64_t seed) {
  if (!in) throw InputTypeError("bridge requires a populated dataset");
  if (in->kind == target) return in;
  if (in->element_count() == 0) throw EmptyInputError("cannot bridge an empty dataset");

  auto out = std::make_shared<Dataset>();
  out->kind = target;
  const std::vector<double> vals = to_values(*in);

  switch (target) {
    case DataKind::vectors:
      out->values = vals;
      break;
    case DataKind::tensor: {
      // Flatten to a 1 x 1 x n x 1 tensor; kernels that need spatial shape
      // re-derive it from their own parameters.
      out->dims = {1, 1, uint32_t(std::min<uint64_t>(vals.size(), 0xffffffffu)), 1};
      out->floats.assign(vals.begin(), vals.begin() + out->dims.elements());
      break;
    }
    case DataKind::text: {
      out->text_width = kBridgeTextWidth;
      out->text.resize(vals.size() * kBridgeTextWidth);
      for (size_t i = 0; i < vals.size(); ++i)
        render_record(vals[i], out->text.data() + i * kBridgeTextWidth);
      break;
    }
    case DataKind::graph: {
      // Derive an edge list by hashing consecutive values into vertex ids.
      // Vertex-space size tracks the input so graph traversals stay busy.
      const uint64_t n = vals.size();
      const uint64_t verts = std::max<uint64_t>(2, std::min<uint64_t>(n, 1u << 20));
      out->vertices = verts;
      out->edges.reserve(n);
      for (uint64_t i = 0; i < n; ++i) {
        uint64_t h = fnv1a64(reinterpret_cast<const char*>(&vals[i]), sizeof(double),
                             seed + i);
        uint64_t src = (h >> 32) % verts;
        uint64_t dst = (h & 0xffffffffu) % verts;
        out->edges.push_back(src << 32 | dst);
      }
      break;
    }
  }
  if (out->element_count() == 0) throw EmptyInputError("bridge produced no records");
  return out;
}

}  // namespace motifbench

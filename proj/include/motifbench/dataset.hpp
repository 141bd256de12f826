#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "motifbench/errors.hpp"
#include "motifbench/params.hpp"

namespace motifbench {

enum class DataKind : uint8_t { text, vectors, graph, tensor };

const char* to_string(DataKind k);
DataKind parse_data_kind(const std::string& s);

enum class Distribution : uint8_t { uniform, zipf, gaussian };

const char* to_string(Distribution d);
Distribution parse_distribution(const std::string& s);

// Tensor shape, logically N x H x W x C. Storage is always NHWC; a NCHW
// layout parameter only changes how serialized dims are interpreted.
struct TensorDims {
  uint32_t n = 0, h = 0, w = 0, c = 0;
  uint64_t elements() const { return uint64_t(n) * h * w * c; }
  bool operator==(const TensorDims&) const = default;
};

// Everything needed to regenerate a dataset bit for bit.
struct DataDescriptor {
  DataKind kind = DataKind::vectors;
  uint64_t size = 0;        // text: record count; vectors: element count; graph: edge count
  double sparsity = 0.0;    // fraction of zero-valued elements (vectors/tensor)
  Distribution distribution = Distribution::uniform;
  uint64_t vertices = 0;    // graph only
  TensorDims dims;          // tensor only
  uint64_t seed = 0;

  bool operator==(const DataDescriptor&) const = default;
  void validate() const;
  uint64_t element_count() const;
};

// In-memory dataset. Exactly one payload is populated, matching `kind`.
// All kinds are flat fixed-width record arrays so spill and checksum code
// can treat them uniformly.
struct Dataset {
  DataKind kind = DataKind::vectors;

  // text: `text_width`-byte records, concatenated
  uint32_t text_width = 0;
  std::vector<char> text;

  std::vector<double> values;  // vectors

  // graph: packed (src << 32 | dst) edges over [0, vertices)
  uint64_t vertices = 0;
  std::vector<uint64_t> edges;

  TensorDims dims;  // tensor
  std::vector<float> floats;

  uint64_t element_count() const;
  uint32_t record_width() const;
  uint64_t content_bytes() const { return element_count() * record_width(); }
  const char* record_data() const;
  uint64_t checksum() const;
};

using DatasetPtr = std::shared_ptr<const Dataset>;

// Handle to a dataset plus the recipe that produced it. `data` may be empty
// when the ref points at a file that has not been loaded yet.
struct DataRef {
  DataDescriptor descriptor;
  std::string path;  // empty for purely in-memory data
  uint64_t checksum = 0;
  DatasetPtr data;
};

// Converts between data kinds so any motif can consume any upstream output.
// Deterministic in (input contents, target kind, seed).
DatasetPtr bridge_dataset(const DatasetPtr& in, DataKind target, uint64_t seed);

// Name of the adapter `bridge_dataset` applies, or "none".
std::string bridge_name(DataKind from, DataKind to);

}  // namespace motifbench

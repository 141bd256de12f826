#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motifbench/errors.hpp"

namespace motifbench {

enum class MotifFamily : uint8_t {
  matrix,
  sampling,
  transform,
  graph,
  logic,
  set,
  sort,
  statistics,
};

enum class MotifVariant : uint8_t {
  // matrix
  multiply,
  euclidean_distance,
  cosine_distance,
  fully_connected,
  // sampling
  random,
  interval,
  max_pool,
  avg_pool,
  dropout,
  // transform
  fft,
  convolution,
  // graph
  construct,
  traverse,
  degree_count,
  // logic
  bit_and,
  bit_or,
  bit_xor,
  shift,
  relu,
  // set
  set_union,
  set_intersect,
  set_difference,
  // sort
  quick,
  merge,
  // statistics
  count,
  average,
  min_max,
  batch_norm,
  softmax_norm,
};

MotifFamily family_of(MotifVariant v);
const char* to_string(MotifFamily f);
const char* to_string(MotifVariant v);
MotifFamily parse_family(const std::string& name);
MotifVariant parse_variant(const std::string& name);

// One of the eight motif families plus the concrete kernel variant.
struct MotifKind {
  MotifFamily family = MotifFamily::sort;
  MotifVariant variant = MotifVariant::quick;

  MotifKind() = default;
  MotifKind(MotifFamily f, MotifVariant v);
  static MotifKind parse(const std::string& family, const std::string& variant);

  bool operator==(const MotifKind&) const = default;
  std::string name() const;
};

enum class PaddingMode : uint8_t { same, valid };
enum class TensorLayout : uint8_t { nhwc, nchw };

PaddingMode parse_padding(const std::string& s);
TensorLayout parse_layout(const std::string& s);
const char* to_string(PaddingMode p);
const char* to_string(TensorLayout l);

// The tunable configuration of one motif invocation. Fields a kernel does
// not use stay zero.
struct ParameterVector {
  uint64_t data_size = 0;   // input bytes per invocation
  uint64_t chunk_size = 0;  // bytes handed to one worker at a time
  uint32_t num_tasks = 1;
  double weight = 1.0;  // fraction of the proxy's work volume, in [0,1]
  uint64_t batch_size = 0;
  uint64_t total_size = 0;  // input item count
  uint32_t height_size = 0;
  uint32_t width_size = 0;
  uint32_t num_channels = 0;
  uint32_t stride = 0;
  PaddingMode padding = PaddingMode::valid;
  TensorLayout layout = TensorLayout::nhwc;
  uint64_t seed = 0;

  bool operator==(const ParameterVector&) const = default;

  // Throws ParameterError on a violated invariant.
  void validate() const;
};

// Identifier order is the canonical tie-break order everywhere a "first
// parameter wins" rule applies.
enum class TunableParam : uint8_t {
  data_size,
  chunk_size,
  num_tasks,
  batch_size,
  total_size,
  height_size,
  width_size,
  num_channels,
  weight,
};

const char* to_string(TunableParam p);
TunableParam parse_tunable_param(const std::string& name);

double get_param(const ParameterVector& p, TunableParam which);
void set_param(ParameterVector& p, TunableParam which, double value);

}  // namespace motifbench

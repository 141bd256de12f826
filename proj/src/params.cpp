#include "motifbench/params.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace motifbench {

namespace {

struct VariantInfo {
  MotifVariant variant;
  MotifFamily family;
  const char* name;
};

constexpr std::array<VariantInfo, 29> kVariants = {{
    {MotifVariant::multiply, MotifFamily::matrix, "multiply"},
    {MotifVariant::euclidean_distance, MotifFamily::matrix, "euclidean_distance"},
    {MotifVariant::cosine_distance, MotifFamily::matrix, "cosine_distance"},
    {MotifVariant::fully_connected, MotifFamily::matrix, "fully_connected"},
    {MotifVariant::random, MotifFamily::sampling, "random"},
    {MotifVariant::interval, MotifFamily::sampling, "interval"},
    {MotifVariant::max_pool, MotifFamily::sampling, "max_pool"},
    {MotifVariant::avg_pool, MotifFamily::sampling, "avg_pool"},
    {MotifVariant::dropout, MotifFamily::sampling, "dropout"},
    {MotifVariant::fft, MotifFamily::transform, "fft"},
    {MotifVariant::convolution, MotifFamily::transform, "convolution"},
    {MotifVariant::construct, MotifFamily::graph, "construct"},
    {MotifVariant::traverse, MotifFamily::graph, "traverse"},
    {MotifVariant::degree_count, MotifFamily::graph, "degree_count"},
    {MotifVariant::bit_and, MotifFamily::logic, "and"},
    {MotifVariant::bit_or, MotifFamily::logic, "or"},
    {MotifVariant::bit_xor, MotifFamily::logic, "xor"},
    {MotifVariant::shift, MotifFamily::logic, "shift"},
    {MotifVariant::relu, MotifFamily::logic, "relu"},
    {MotifVariant::set_union, MotifFamily::set, "union"},
    {MotifVariant::set_intersect, MotifFamily::set, "intersect"},
    {MotifVariant::set_difference, MotifFamily::set, "difference"},
    {MotifVariant::quick, MotifFamily::sort, "quick"},
    {MotifVariant::merge, MotifFamily::sort, "merge"},
    {MotifVariant::count, MotifFamily::statistics, "count"},
    {MotifVariant::average, MotifFamily::statistics, "average"},
    {MotifVariant::min_max, MotifFamily::statistics, "min_max"},
    {MotifVariant::batch_norm, MotifFamily::statistics, "batch_norm"},
    {MotifVariant::softmax_norm, MotifFamily::statistics, "softmax_norm"},
}};

constexpr std::array<const char*, 8> kFamilyNames = {
    "matrix", "sampling", "transform", "graph", "logic", "set", "sort", "statistics"};

const VariantInfo& info_of(MotifVariant v) {
  for (const auto& i : kVariants)
    if (i.variant == v) return i;
  throw ParameterError("unmapped motif variant");
}

}  // namespace

MotifFamily family_of(MotifVariant v) { return info_of(v).family; }

const char* to_string(MotifFamily f) { return kFamilyNames[static_cast<size_t>(f)]; }

const char* to_string(MotifVariant v) { return info_of(v).name; }

MotifFamily parse_family(const std::string& name) {
  for (size_t i = 0; i < kFamilyNames.size(); ++i)
    if (name == kFamilyNames[i]) return static_cast<MotifFamily>(i);
  throw ParseError("unknown motif family: '" + name + "'");
}

MotifVariant parse_variant(const std::string& name) {
  for (const auto& i : kVariants)
    if (name == i.name) return i.variant;
  throw ParseError("unknown motif variant: '" + name + "'");
}

MotifKind::MotifKind(MotifFamily f, MotifVariant v) : family(f), variant(v) {
  if (family_of(v) != f)
    throw ParameterError(std::string("variant '") + to_string(v) +
                         "' does not belong to family '" + to_string(f) + "'");
}

MotifKind MotifKind::parse(const std::string& family, const std::string& variant) {
  return MotifKind(parse_family(family), parse_variant(variant));
}

std::string MotifKind::name() const {
  return std::string(to_string(family)) + "/" + to_string(variant);
}

PaddingMode parse_padding(const std::string& s) {
  if (s == "same") return PaddingMode::same;
  if (s == "valid") return PaddingMode::valid;
  throw ParseError("unknown padding mode: '" + s + "'");
}

TensorLayout parse_layout(const std::string& s) {
  if (s == "NHWC" || s == "nhwc") return TensorLayout::nhwc;
  if (s == "NCHW" || s == "nchw") return TensorLayout::nchw;
  throw ParseError("unknown tensor layout: '" + s + "'");
}

const char* to_string(PaddingMode p) { return p == PaddingMode::same ? "same" : "valid"; }

const char* to_string(TensorLayout l) { return l == TensorLayout::nhwc ? "NHWC" : "NCHW"; }

void ParameterVector::validate() const {
  if (num_tasks < 1) throw ParameterError("numTasks must be >= 1");
  if (weight < 0.0 || weight > 1.0 || !std::isfinite(weight))
    throw ParameterError("weight must lie in [0,1]");
  if (chunk_size > data_size && data_size > 0)
    throw ParameterError("chunkSize must not exceed dataSize");
  if (data_size > 0 && chunk_size == 0)
    throw ParameterError("chunkSize must be >= 1 when dataSize is set");
}

namespace {
constexpr std::array<const char*, 9> kParamNames = {
    "dataSize",  "chunkSize",  "numTasks",    "batchSize", "totalSize",
    "heightSize", "widthSize", "numChannels", "weight"};
}

const char* to_string(TunableParam p) { return kParamNames[static_cast<size_t>(p)]; }

TunableParam parse_tunable_param(const std::string& name) {
  for (size_t i = 0; i < kParamNames.size(); ++i)
    if (name == kParamNames[i]) return static_cast<TunableParam>(i);
  throw ParseError("unknown tunable parameter: '" + name + "'");
}

double get_param(const ParameterVector& p, TunableParam which) {
  switch (which) {
    case TunableParam::data_size: return double(p.data_size);
    case TunableParam::chunk_size: return double(p.chunk_size);
    case TunableParam::num_tasks: return double(p.num_tasks);
    case TunableParam::batch_size: return double(p.batch_size);
    case TunableParam::total_size: return double(p.total_size);
    case TunableParam::height_size: return double(p.height_size);
    case TunableParam::width_size: return double(p.width_size);
    case TunableParam::num_channels: return double(p.num_channels);
    case TunableParam::weight: return p.weight;
  }
  return 0.0;
}

void set_param(ParameterVector& p, TunableParam which, double value) {
  auto as_count = [](double v) -> uint64_t {
    if (!std::isfinite(v)) throw ParameterError("non-finite parameter value");
    return v < 1.0 ? 1 : static_cast<uint64_t>(std::llround(v));
  };
  switch (which) {
    case TunableParam::data_size: p.data_size = as_count(value); break;
    case TunableParam::chunk_size: p.chunk_size = as_count(value); break;
    case TunableParam::num_tasks: p.num_tasks = static_cast<uint32_t>(as_count(value)); break;
    case TunableParam::batch_size: p.batch_size = as_count(value); break;
    case TunableParam::total_size: p.total_size = as_count(value); break;
    case TunableParam::height_size: p.height_size = static_cast<uint32_t>(as_count(value)); break;
    case TunableParam::width_size: p.width_size = static_cast<uint32_t>(as_count(value)); break;
    case TunableParam::num_channels: p.num_channels = static_cast<uint32_t>(as_count(value)); break;
    case TunableParam::weight: p.weight = std::clamp(value, 0.0, 1.0); break;
  }
  // keep the pair invariant after integer rounding
  if (p.data_size > 0 && p.chunk_size > p.data_size) p.chunk_size = p.data_size;
}

}  // namespace motifbench

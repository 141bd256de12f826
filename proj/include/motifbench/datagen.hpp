#pragma once

#include <string>

#include "motifbench/dataset.hpp"

#include <json.hpp>

namespace motifbench {

// Synthesizes a dataset from its descriptor. Deterministic: equal descriptors
// (including seed) produce byte-identical datasets. Numeric kinds place
// exactly floor(sparsity * n) zero elements; every other element is nonzero.
DatasetPtr generate_dataset(const DataDescriptor& desc);

// On-disk container: 8-byte magic, u32 little-endian header length, JSON
// descriptor header, then the raw fixed-width records.
void save_dataset(const Dataset& data, const DataDescriptor& desc,
                  const std::string& path);
DataRef load_dataset(const std::string& path);

nlohmann::json descriptor_to_json(const DataDescriptor& desc);
DataDescriptor descriptor_from_json(const nlohmann::json& j);

// Multiplies the record count by `factor` (tensors scale the batch dim),
// rounding to at least one record. Used when tuning scales data volume.
DataDescriptor scale_descriptor(const DataDescriptor& desc, double factor);

// Builds a descriptor snapshot of an existing dataset, for saving derived
// (non-generated) outputs in the same container format.
DataDescriptor describe_dataset(const Dataset& data, uint64_t seed);

}  // namespace motifbench

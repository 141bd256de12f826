#pragma once

#include <string>
#include <vector>

#include "motifbench/arena.hpp"
#include "motifbench/dataset.hpp"
#include "motifbench/metrics.hpp"
#include "motifbench/params.hpp"

namespace motifbench {

// Everything observed about one motif invocation; the unit the software
// metric provider aggregates over.
struct MotifRunRecord {
  MotifKind kind;
  ParameterVector params;
  double wall_time = 0.0;    // measured seconds, always > 0
  double modeled_time = 0.0; // surrogate-clock seconds (deterministic)
  SoftwareOpCounts op_counts;
  uint64_t bytes_read_disk = 0;
  uint64_t bytes_written_disk = 0;
  uint64_t bytes_read_mem = 0;   // sparse-aware: zero-valued numeric
  uint64_t bytes_written_mem = 0;  // elements charge no memory traffic
  uint64_t working_set_bytes = 0;  // physical input + output bytes
  double arena_pause = 0.0;        // synthetic GC pause attributed to this run
  DataRef output;

  MotifRunRecord() : kind(MotifFamily::sort, MotifVariant::quick) {}
};

// Input kind a motif needs given what the upstream edge produces; the
// composer bridges when this differs from `upstream`.
DataKind required_input_kind(MotifKind kind, DataKind upstream);

// Kind of dataset the motif emits for a given (already bridged) input kind.
DataKind output_kind(MotifKind kind, DataKind input);

// Runs one motif: partitions the input into chunks, fans the chunks out to
// numTasks workers round-robin, spills intermediates to
// `<spill_dir>/<edge_id>.<chunk>.bin` when dataSize > chunkSize * numTasks,
// then combines (k-way merge / reduction / concatenation as the variant
// demands). Output is identical across numTasks values and spill modes.
// `passes` repeats the compute phase to satisfy a work budget; counters
// accumulate, the output is that of one pass.
MotifRunRecord execute_motif(MotifKind kind, const ParameterVector& params,
                             const DataRef& input, ManagedArena& arena,
                             const std::string& spill_dir,
                             const std::string& edge_id = "edge",
                             uint64_t passes = 1);

}  // namespace motifbench

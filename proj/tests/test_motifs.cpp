// Motif executor tests: the central contract is that every variant's output
// is bit-identical no matter how many workers run it and whether chunks
// spill to disk or stay in memory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "motifbench/arena.hpp"
#include "motifbench/datagen.hpp"
#include "motifbench/errors.hpp"
#include "motifbench/motif_exec.hpp"
#include "motifbench/params.hpp"

using namespace motifbench;
namespace fs = std::filesystem;

namespace {

const std::vector<MotifKind>& all_kinds() {
  static const std::vector<MotifKind> kinds = {
      {MotifFamily::matrix, MotifVariant::multiply},
      {MotifFamily::matrix, MotifVariant::euclidean_distance},
      {MotifFamily::matrix, MotifVariant::cosine_distance},
      {MotifFamily::matrix, MotifVariant::fully_connected},
      {MotifFamily::sampling, MotifVariant::random},
      {MotifFamily::sampling, MotifVariant::interval},
      {MotifFamily::sampling, MotifVariant::max_pool},
      {MotifFamily::sampling, MotifVariant::avg_pool},
      {MotifFamily::sampling, MotifVariant::dropout},
      {MotifFamily::transform, MotifVariant::fft},
      {MotifFamily::transform, MotifVariant::convolution},
      {MotifFamily::graph, MotifVariant::construct},
      {MotifFamily::graph, MotifVariant::traverse},
      {MotifFamily::graph, MotifVariant::degree_count},
      {MotifFamily::logic, MotifVariant::bit_and},
      {MotifFamily::logic, MotifVariant::bit_or},
      {MotifFamily::logic, MotifVariant::bit_xor},
      {MotifFamily::logic, MotifVariant::shift},
      {MotifFamily::logic, MotifVariant::relu},
      {MotifFamily::set, MotifVariant::set_union},
      {MotifFamily::set, MotifVariant::set_intersect},
      {MotifFamily::set, MotifVariant::set_difference},
      {MotifFamily::sort, MotifVariant::quick},
      {MotifFamily::sort, MotifVariant::merge},
      {MotifFamily::statistics, MotifVariant::count},
      {MotifFamily::statistics, MotifVariant::average},
      {MotifFamily::statistics, MotifVariant::min_max},
      {MotifFamily::statistics, MotifVariant::batch_norm},
      {MotifFamily::statistics, MotifVariant::softmax_norm},
  };
  return kinds;
}

bool wants_tensor(MotifKind k) {
  return k.variant == MotifVariant::max_pool || k.variant == MotifVariant::avg_pool ||
         k.variant == MotifVariant::convolution ||
         k.variant == MotifVariant::batch_norm;
}

DataRef input_for(MotifKind kind) {
  DataDescriptor d;
  if (kind.family == MotifFamily::graph) {
    d.kind = DataKind::graph;
    d.size = 2048;
    d.vertices = 256;
    d.seed = 77;
  } else if (wants_tensor(kind)) {
    d.kind = DataKind::tensor;
    d.dims = {4, 12, 12, 3};
    d.sparsity = 0.2;
    d.seed = 78;
  } else {
    d.kind = DataKind::vectors;
    d.size = 4096;
    d.sparsity = 0.25;
    d.seed = 79;
  }
  DataRef ref;
  ref.descriptor = d;
  ref.data = generate_dataset(d);
  ref.checksum = ref.data->checksum();
  return ref;
}

ParameterVector params_for(MotifKind kind, uint32_t num_tasks, uint64_t chunk_size) {
  ParameterVector p;
  p.num_tasks = num_tasks;
  p.chunk_size = chunk_size;
  p.seed = 13;
  switch (kind.variant) {
    case MotifVariant::convolution:
      p.height_size = 3;
      p.width_size = 3;
      p.num_channels = 4;
      p.stride = 1;
      p.padding = PaddingMode::valid;
      break;
    case MotifVariant::max_pool:
    case MotifVariant::avg_pool:
      p.height_size = 2;
      p.width_size = 2;
      p.stride = 2;
      break;
    case MotifVariant::fully_connected:
      p.width_size = 32;
      p.num_channels = 8;
      p.batch_size = 4;
      break;
    case MotifVariant::euclidean_distance:
    case MotifVariant::cosine_distance:
      p.width_size = 16;
      p.batch_size = 4;
      break;
    case MotifVariant::interval:
      p.stride = 4;
      break;
    case MotifVariant::random:
      p.batch_size = 1024;  // sampling rate = 1024/4096
      break;
    case MotifVariant::batch_norm:
    case MotifVariant::softmax_norm:
      p.width_size = 16;
      break;
    default: break;
  }
  return p;
}

std::string fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("motif_exec_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

MotifRunRecord run_once(MotifKind kind, const ParameterVector& p, const DataRef& in,
                        const std::string& spill_dir, uint64_t passes = 1) {
  ManagedArena arena(ArenaConfig{});
  return execute_motif(kind, p, in, arena, spill_dir, "edge", passes);
}

}  // namespace

TEST_CASE("outputs are identical across worker counts for every variant") {
  for (MotifKind kind : all_kinds()) {
    CAPTURE(kind.name());
    const DataRef in = input_for(kind);
    const std::string dir = fresh_dir("tasks");
    uint64_t want = 0;
    bool first = true;
    for (uint32_t nt : {1u, 2u, 8u}) {
      MotifRunRecord r = run_once(kind, params_for(kind, nt, 2048), in, dir);
      REQUIRE(r.output.data);
      CHECK(r.output.data->element_count() > 0);
      if (first) {
        want = r.output.checksum;
        first = false;
      } else {
        CHECK(r.output.checksum == want);
      }
    }
  }
}

TEST_CASE("spilled and in-memory runs produce identical outputs") {
  for (MotifKind kind : all_kinds()) {
    CAPTURE(kind.name());
    const DataRef in = input_for(kind);
    const uint64_t bytes = in.data->content_bytes();

    // Same 1KB chunk grid both times so per-chunk work is identical; only
    // the worker count moves, flipping the data > chunk*workers spill rule.
    ParameterVector spill_params = params_for(kind, 2, 1024);
    const std::string spill_dir = fresh_dir("spill");
    MotifRunRecord spilled = run_once(kind, spill_params, in, spill_dir);
    REQUIRE(bytes > 1024 * 2);  // spill condition really held

    ParameterVector mem_params = params_for(kind, 32, 1024);
    const std::string mem_dir = fresh_dir("mem");
    MotifRunRecord in_memory = run_once(kind, mem_params, in, mem_dir);
    REQUIRE(bytes <= 1024 * 32);  // and really did not hold here

    CHECK(spilled.output.checksum == in_memory.output.checksum);
    CHECK(spilled.bytes_written_disk > 0);
    CHECK(spilled.bytes_read_disk > 0);
    CHECK(in_memory.bytes_written_disk == 0);
  }
}

TEST_CASE("spill files carry the documented container header") {
  MotifKind kind(MotifFamily::sort, MotifVariant::quick);
  const DataRef in = input_for(kind);
  ParameterVector p = params_for(kind, 2, 1024);
  p.data_size = in.data->content_bytes();
  const std::string dir = fresh_dir("header");
  (void)run_once(kind, p, in, dir);

  uint64_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    // <edge-id>.<chunk-index>.bin
    CHECK(name.substr(0, 5) == "edge.");
    CHECK(name.substr(name.size() - 4) == ".bin");
    std::ifstream f(entry.path(), std::ios::binary);
    char magic[8] = {};
    f.read(magic, 8);
    CHECK(std::memcmp(magic, "MBSPILL1", 8) == 0);
    unsigned char hdr[8] = {};
    f.read(reinterpret_cast<char*>(hdr), 8);
    const uint32_t width = uint32_t(hdr[0]) | uint32_t(hdr[1]) << 8 |
                           uint32_t(hdr[2]) << 16 | uint32_t(hdr[3]) << 24;
    const uint32_t count = uint32_t(hdr[4]) | uint32_t(hdr[5]) << 8 |
                           uint32_t(hdr[6]) << 16 | uint32_t(hdr[7]) << 24;
    CHECK(width > 0);
    CHECK(count > 0);
    CHECK(uint64_t(fs::file_size(entry.path())) == 16 + uint64_t(width) * count);
    ++files;
  }
  CHECK(files > 1);  // multiple chunks spilled
}

TEST_CASE("extra passes scale the counters but not the output") {
  MotifKind kind(MotifFamily::sort, MotifVariant::quick);
  const DataRef in = input_for(kind);
  const std::string dir = fresh_dir("passes");
  MotifRunRecord one = run_once(kind, params_for(kind, 2, 0), in, dir);
  MotifRunRecord three = run_once(kind, params_for(kind, 2, 0), in, dir, 3);
  CHECK(three.output.checksum == one.output.checksum);
  CHECK(three.op_counts.integer_ops == 3 * one.op_counts.integer_ops);
  CHECK(three.op_counts.loads == 3 * one.op_counts.loads);
  CHECK(three.bytes_read_mem == 3 * one.bytes_read_mem);
}

TEST_CASE("determinism: same seed same bytes, seeded stages differ by seed") {
  MotifKind kind(MotifFamily::sampling, MotifVariant::random);
  const DataRef in = input_for(kind);
  const std::string dir = fresh_dir("seeds");
  ParameterVector p = params_for(kind, 4, 0);
  MotifRunRecord a = run_once(kind, p, in, dir);
  MotifRunRecord b = run_once(kind, p, in, dir);
  CHECK(a.output.checksum == b.output.checksum);
  p.seed = 14;
  MotifRunRecord c = run_once(kind, p, in, dir);
  CHECK(c.output.checksum != a.output.checksum);
}

TEST_CASE("mismatched upstream kinds are bridged, charging a linear pass") {
  DataDescriptor d;
  d.kind = DataKind::text;
  d.size = 512;
  d.seed = 91;
  DataRef text;
  text.descriptor = d;
  text.data = generate_dataset(d);

  MotifKind kind(MotifFamily::matrix, MotifVariant::multiply);
  const std::string dir = fresh_dir("bridge");
  MotifRunRecord r = run_once(kind, params_for(kind, 2, 0), text, dir);
  CHECK(r.output.data->kind == DataKind::vectors);
  CHECK(r.bytes_read_mem > 0);

  // Same data arriving as the right kind already skips the bridge charge.
  MotifKind sort_kind(MotifFamily::sort, MotifVariant::quick);
  MotifRunRecord direct =
      run_once(sort_kind, params_for(sort_kind, 1, 0), text, dir);
  CHECK(direct.output.data->kind == DataKind::text);  // records reordered
}

TEST_CASE("dropout zeroes the exact global quota under any chunking") {
  DataDescriptor d;
  d.kind = DataKind::vectors;
  d.size = 1000;
  d.sparsity = 0.0;
  d.seed = 92;
  DataRef in;
  in.descriptor = d;
  in.data = generate_dataset(d);

  MotifKind kind(MotifFamily::sampling, MotifVariant::dropout);
  for (uint32_t nt : {1u, 8u}) {
    ParameterVector p = params_for(kind, nt, 512);
    const std::string dir = fresh_dir("dropout");
    MotifRunRecord r = run_once(kind, p, in, dir);
    const auto& out = r.output.data->values;
    REQUIRE(out.size() == 1000);
    uint64_t zeros = 0;
    for (double x : out) zeros += x == 0.0;
    CHECK(zeros == 500);  // floor(0.5 * 1000), exact across chunk quotas
  }
}

TEST_CASE("interval sampling keeps every k-th record") {
  DataDescriptor d;
  d.kind = DataKind::vectors;
  d.size = 100;
  d.seed = 93;
  DataRef in;
  in.descriptor = d;
  in.data = generate_dataset(d);

  MotifKind kind(MotifFamily::sampling, MotifVariant::interval);
  ParameterVector p;
  p.num_tasks = 2;
  p.stride = 10;
  p.seed = 1;
  const std::string dir = fresh_dir("interval");
  MotifRunRecord r = run_once(kind, p, in, dir);
  REQUIRE(r.output.data->values.size() == 10);
  for (uint64_t i = 0; i < 10; ++i)
    CHECK(r.output.data->values[i] == in.data->values[i * 10]);
}

TEST_CASE("working set accounts physical input plus output bytes") {
  MotifKind kind(MotifFamily::sort, MotifVariant::quick);
  const DataRef in = input_for(kind);
  const std::string dir = fresh_dir("ws");
  MotifRunRecord r = run_once(kind, params_for(kind, 2, 0), in, dir);
  CHECK(r.working_set_bytes ==
        in.data->content_bytes() + r.output.data->content_bytes());
  CHECK(r.output.checksum == r.output.data->checksum());
  CHECK(r.modeled_time > 0.0);
  CHECK(r.wall_time > 0.0);
}

TEST_CASE("executor rejects bad inputs and parameters") {
  MotifKind kind(MotifFamily::sort, MotifVariant::quick);
  const DataRef in = input_for(kind);
  ManagedArena arena{ArenaConfig{}};
  const std::string dir = fresh_dir("errors");

  DataRef unloaded;
  unloaded.descriptor = in.descriptor;
  CHECK_THROWS_AS(
      (void)execute_motif(kind, params_for(kind, 1, 0), unloaded, arena, dir),
      InputTypeError);

  DataRef empty;
  empty.data = std::make_shared<Dataset>();
  CHECK_THROWS_AS(
      (void)execute_motif(kind, params_for(kind, 1, 0), empty, arena, dir),
      EmptyInputError);

  CHECK_THROWS_AS(
      (void)execute_motif(kind, params_for(kind, 1, 0), in, arena, dir, "edge", 0),
      ParameterError);

  ParameterVector bad = params_for(kind, 1, 0);
  bad.data_size = 1024;
  bad.chunk_size = 2048;  // chunk larger than data
  CHECK_THROWS_AS((void)execute_motif(kind, bad, in, arena, dir), ParameterError);
}

// ----------------------------------------------------------------- arena

TEST_CASE("arena sweeps on the allocation interval") {
  ArenaConfig cfg;
  cfg.sweep_interval = 4;
  ManagedArena arena(cfg);
  std::vector<uint64_t> ids;
  for (int i = 0; i < 8; ++i) ids.push_back(arena.allocate(100));
  ManagedArena::Stats s = arena.stats();
  CHECK(s.allocations == 8);
  CHECK(s.interval_sweeps == 2);
  CHECK(s.live_bytes == 800);
  CHECK(s.garbage_bytes == 0);
  for (uint64_t id : ids) arena.release(id);
  CHECK(arena.stats().garbage_bytes == 800);
  CHECK(arena.stats().live_bytes == 0);
  // The next interval sweep reclaims everything released.
  for (int i = 0; i < 4; ++i) (void)arena.allocate(10);
  ManagedArena::Stats after = arena.stats();
  CHECK(after.garbage_bytes == 0);
  CHECK(after.allocated_bytes == after.live_bytes);
}

TEST_CASE("capacity pressure forces a sweep before admitting a block") {
  ArenaConfig cfg;
  cfg.capacity = 1000;
  cfg.sweep_interval = 1000000;  // never sweep on interval
  ManagedArena arena(cfg);
  uint64_t a = arena.allocate(600);
  arena.release(a);  // garbage, but still counted as allocated
  uint64_t b = arena.allocate(600);  // must force-sweep the garbage to fit
  ManagedArena::Stats s = arena.stats();
  CHECK(s.forced_sweeps >= 1);
  CHECK(s.live_bytes == 600);
  CHECK(s.peak_allocated <= 1000);

  // With everything live there is nothing to reclaim: the arena refuses.
  CHECK_THROWS_AS((void)arena.allocate(600), Error);
  arena.release(b);
  CHECK_THROWS_AS((void)arena.allocate(2000), Error);  // block > capacity
}

TEST_CASE("registered workers rendezvous at sweep barriers") {
  ArenaConfig cfg;
  cfg.sweep_interval = 8;
  ManagedArena arena(cfg);
  const int kWorkers = 4;
  std::vector<std::thread> threads;
  for (int w = 0; w < kWorkers; ++w)
    threads.emplace_back([&arena] {
      ArenaWorkerScope scope(arena);
      for (int i = 0; i < 64; ++i) {
        uint64_t id = arena.allocate(64);
        arena.data(id)[0] = char(i);
        arena.release(id);
        arena.checkpoint();
      }
    });
  for (auto& t : threads) t.join();
  ManagedArena::Stats s = arena.stats();
  CHECK(s.allocations == 64 * kWorkers);
  CHECK(s.interval_sweeps + s.forced_sweeps >= s.allocations / 8);
  CHECK(s.synthetic_pause_seconds >= 0.0);
  CHECK(s.live_bytes == 0);
}

#include "motifbench/motif_exec.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>

#include "motifbench/datagen.hpp"
#include "motifbench/kernels.hpp"
#include "motifbench/rng.hpp"

namespace motifbench {
namespace {

namespace fs = std::filesystem;
using kernels::StatsPartial;
using kernels::Tensor4;

constexpr char kSpillMagic[8] = {'M', 'B', 'S', 'P', 'I', 'L', 'L', '1'};
constexpr double kBatchNormEpsilon = 1e-5;
constexpr double kDropoutRate = 0.5;

// ------------------------------------------------------------ chunk plans

struct ChunkRange {
  uint64_t start = 0;
  uint64_t end = 0;
  uint64_t size() const { return end - start; }
};

// Fixed-size chunks; the last chunk carries the remainder. Boundaries are a
// function of (n, chunk_elems) only, never of the worker count.
std::vector<ChunkRange> plan_chunks(uint64_t n, uint64_t chunk_elems) {
  std::vector<ChunkRange> chunks;
  for (uint64_t s = 0; s < n; s += chunk_elems)
    chunks.push_back({s, std::min(n, s + chunk_elems)});
  return chunks;
}

// ---------------------------------------------------------- intermediates

// Uniform per-chunk result: a fixed-width little-endian record array that
// can round-trip through a spill file unchanged.
struct Intermediate {
  uint32_t width = 0;
  uint64_t count = 0;
  std::vector<char> bytes;

  template <typename T>
  static Intermediate from(const std::vector<T>& v) {
    Intermediate m;
    m.width = sizeof(T);
    m.count = v.size();
    m.bytes.resize(v.size() * sizeof(T));
    std::memcpy(m.bytes.data(), v.data(), m.bytes.size());
    return m;
  }
  static Intermediate from_records(std::vector<char> raw, uint32_t width) {
    Intermediate m;
    m.width = width;
    m.count = width ? raw.size() / width : 0;
    m.bytes = std::move(raw);
    return m;
  }
  template <typename T>
  const T* as() const {
    return reinterpret_cast<const T*>(bytes.data());
  }
};

void write_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::ifstream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
         uint32_t(b[3]) << 24;
}

// 16-byte header (8-byte magic, u32 record width, u32 record count), then
// little-endian fixed-width records.
void spill_write(const Intermediate& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open spill file for write: " + path);
  f.write(kSpillMagic, sizeof(kSpillMagic));
  write_u32(f, m.width);
  write_u32(f, uint32_t(m.count));
  f.write(m.bytes.data(), std::streamsize(m.bytes.size()));
  if (!f) throw IoError("spill write failed: " + path);
}

Intermediate spill_read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open spill file: " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kSpillMagic, sizeof(kSpillMagic)) != 0)
    throw ParseError("not a spill file: " + path);
  Intermediate m;
  m.width = read_u32(f);
  m.count = read_u32(f);
  m.bytes.resize(size_t(m.width) * m.count);
  f.read(m.bytes.data(), std::streamsize(m.bytes.size()));
  if (!f) throw IoError("truncated spill file: " + path);
  return m;
}

constexpr uint64_t kSpillHeaderBytes = 16;

// --------------------------------------------------------------- counters

struct Counters {
  SoftwareOpCounts ops;
  uint64_t read_mem = 0;
  uint64_t written_mem = 0;
  uint64_t read_disk = 0;
  uint64_t written_disk = 0;

  Counters& operator+=(const Counters& o) {
    ops += o.ops;
    read_mem += o.read_mem;
    written_mem += o.written_mem;
    read_disk += o.read_disk;
    written_disk += o.written_disk;
    return *this;
  }
};

// Sparse-aware traffic: zero-valued numeric elements model sparse storage
// and charge no memory bytes. Text and graph records always charge fully.
uint64_t payload_bytes(const double* p, uint64_t n) {
  uint64_t nz = 0;
  for (uint64_t i = 0; i < n; ++i) nz += p[i] != 0.0;
  return nz * sizeof(double);
}
uint64_t payload_bytes(const float* p, uint64_t n) {
  uint64_t nz = 0;
  for (uint64_t i = 0; i < n; ++i) nz += p[i] != 0.0f;
  return nz * sizeof(float);
}
uint64_t chunk_payload_bytes(const Dataset& d, uint64_t first, uint64_t count) {
  switch (d.kind) {
    case DataKind::vectors: return payload_bytes(d.values.data() + first, count);
    case DataKind::tensor: return payload_bytes(d.floats.data() + first, count);
    case DataKind::text:
    case DataKind::graph: return count * d.record_width();
  }
  return 0;
}

uint64_t intermediate_payload_bytes(const Intermediate& m) {
  if (m.width == sizeof(double)) return payload_bytes(m.as<double>(), m.count);
  if (m.width == sizeof(float)) return payload_bytes(m.as<float>(), m.count);
  return m.bytes.size();
}

// Analytic instruction-count model: one load per element read, one store per
// element written, loop overhead folded into branches, comparison-driven
// kernels charged their expected compare counts, mispredicts as fixed
// fractions of branches per kernel class.
uint64_t u64_of(double x) { return uint64_t(std::llround(std::max(0.0, x))); }

void charge_sort(Counters& c, uint64_t m, bool float_keys, bool quick) {
  const double lg = std::log2(double(std::max<uint64_t>(2, m)));
  const double cmp = (quick ? 1.40 : 1.05) * double(m) * lg;
  c.ops.branches += u64_of(cmp);
  c.ops.loads += u64_of(quick ? cmp : 2.0 * double(m) * lg);
  c.ops.stores += u64_of((quick ? 0.45 : 1.0) * double(m) * lg);
  (float_keys ? c.ops.float_ops : c.ops.integer_ops) += u64_of(cmp);
  c.ops.integer_ops += u64_of(0.6 * double(m) * lg);
  c.ops.taken_mispredict_estimate += u64_of((quick ? 0.12 : 0.08) * cmp);
}

void charge_merge(Counters& c, uint64_t total, uint64_t ways, bool float_keys) {
  const double lg = std::log2(double(std::max<uint64_t>(2, ways)));
  const double cmp = double(total) * lg;
  c.ops.branches += u64_of(cmp);
  c.ops.loads += u64_of(cmp + double(total));
  c.ops.stores += total;
  (float_keys ? c.ops.float_ops : c.ops.integer_ops) += u64_of(cmp);
  c.ops.integer_ops += u64_of(0.5 * cmp);
  c.ops.taken_mispredict_estimate += u64_of(0.10 * cmp);
}

// Plain streaming pass over n elements.
void charge_stream(Counters& c, uint64_t n, uint64_t int_per, uint64_t float_per,
                   bool emits, double mispredict_fraction) {
  c.ops.loads += n;
  if (emits) c.ops.stores += n;
  c.ops.branches += n;
  c.ops.integer_ops += n * int_per;
  c.ops.float_ops += n * float_per;
  c.ops.taken_mispredict_estimate += u64_of(mispredict_fraction * double(n));
}

// ----------------------------------------------------------- worker pool

struct ExecPlan {
  uint64_t n = 0;            // effective element count (prefix of the input)
  uint64_t grain = 1;        // elements per indivisible unit (e.g. one image)
  uint64_t units = 0;        // n / grain
  uint64_t chunk_units = 1;  // units per chunk
  bool spill = false;
  uint32_t num_tasks = 1;
};

// Runs `process(chunk_index, unit_range, counters)` for every chunk,
// round-robin across num_tasks workers, spilling each chunk's intermediate
// when the plan says so. Returns intermediates in chunk order (read back
// from disk in the spill case); per-worker counters merge in worker order.
std::vector<Intermediate> run_chunked(
    const ExecPlan& plan, const std::vector<ChunkRange>& chunks, ManagedArena& arena,
    const std::string& spill_dir, const std::string& edge_id, Counters& total,
    const std::function<Intermediate(uint64_t, ChunkRange, Counters&)>& process) {
  std::vector<Intermediate> results(chunks.size());
  std::vector<std::string> spill_paths(chunks.size());
  std::vector<Counters> worker_counters(plan.num_tasks);

  if (plan.spill) {
    std::error_code ec;
    fs::create_directories(spill_dir, ec);
    if (ec) throw IoError("cannot create spill directory: " + spill_dir);
  }

  std::mutex fail_mu;
  std::exception_ptr failure;

  auto worker = [&](uint32_t w) {
    try {
      ArenaWorkerScope scope(arena);
      for (uint64_t c = w; c < chunks.size(); c += plan.num_tasks) {
        arena.checkpoint();
        Counters& cnt = worker_counters[w];
        Intermediate m = process(c, chunks[c], cnt);
        if (plan.spill) {
          const std::string path =
              (fs::path(spill_dir) / (edge_id + "." + std::to_string(c) + ".bin"))
                  .string();
          spill_write(m, path);
          cnt.written_disk += kSpillHeaderBytes + m.bytes.size();
          spill_paths[c] = path;
          m.bytes.clear();
          m.bytes.shrink_to_fit();
        }
        results[c] = std::move(m);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(fail_mu);
      if (!failure) failure = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(plan.num_tasks);
  for (uint32_t w = 0; w < plan.num_tasks; ++w) pool.emplace_back(worker, w);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  for (const Counters& c : worker_counters) total += c;

  if (plan.spill) {
    for (uint64_t c = 0; c < chunks.size(); ++c) {
      Intermediate m = spill_read(spill_paths[c]);
      total.read_disk += kSpillHeaderBytes + m.bytes.size();
      results[c] = std::move(m);
    }
  }
  return results;
}

// ------------------------------------------------------------------ merge

// K-way merge of sorted runs; equal keys drain lower chunk indices first so
// the result is independent of worker count and spill mode.
template <typename T, typename Less>
std::vector<T> merge_runs(const std::vector<Intermediate>& runs, Less less) {
  struct Cursor {
    const T* p;
    uint64_t n;
    uint64_t i;
    uint64_t run;
  };
  std::vector<Cursor> cursors;
  cursors.reserve(runs.size());
  uint64_t total = 0;
  for (uint64_t r = 0; r < runs.size(); ++r) {
    cursors.push_back({runs[r].template as<T>(), runs[r].count, 0, r});
    total += runs[r].count;
  }
  auto after = [&](const Cursor* a, const Cursor* b) {
    if (less(a->p[a->i], b->p[b->i])) return false;
    if (less(b->p[b->i], a->p[a->i])) return true;
    return a->run > b->run;
  };
  std::priority_queue<Cursor*, std::vector<Cursor*>, decltype(after)> heap(after);
  for (Cursor& c : cursors)
    if (c.i < c.n) heap.push(&c);

  std::vector<T> out;
  out.reserve(total);
  while (!heap.empty()) {
    Cursor* c = heap.top();
    heap.pop();
    out.push_back(c->p[c->i]);
    if (++c->i < c->n) heap.push(c);
  }
  return out;
}

// Same merge for fixed-width byte records ordered by memcmp.
std::vector<char> merge_text_runs(const std::vector<Intermediate>& runs,
                                  uint32_t width) {
  struct Cursor {
    const char* p;
    uint64_t n;
    uint64_t i;
    uint64_t run;
  };
  std::vector<Cursor> cursors;
  cursors.reserve(runs.size());
  uint64_t total = 0;
  for (uint64_t r = 0; r < runs.size(); ++r) {
    cursors.push_back({runs[r].bytes.data(), runs[r].count, 0, r});
    total += runs[r].count;
  }
  auto after = [width](const Cursor* a, const Cursor* b) {
    const int cmp = std::memcmp(a->p + a->i * width, b->p + b->i * width, width);
    if (cmp != 0) return cmp > 0;
    return a->run > b->run;
  };
  std::priority_queue<Cursor*, std::vector<Cursor*>, decltype(after)> heap(after);
  for (Cursor& c : cursors)
    if (c.i < c.n) heap.push(&c);

  std::vector<char> out;
  out.reserve(total * width);
  while (!heap.empty()) {
    Cursor* c = heap.top();
    heap.pop();
    out.insert(out.end(), c->p + c->i * width, c->p + (c->i + 1) * width);
    if (++c->i < c->n) heap.push(c);
  }
  return out;
}

// ------------------------------------------------------------- exec state

struct ExecCtx {
  const Dataset& in;
  const ParameterVector& params;
  ManagedArena& arena;
  std::string spill_dir;
  std::string edge_id;
  ExecPlan plan;
  uint64_t seed = 0;
  Counters total;

  std::vector<Intermediate> chunked(
      const std::vector<ChunkRange>& chunks,
      const std::function<Intermediate(uint64_t, ChunkRange, Counters&)>& process) {
    return run_chunked(plan, chunks, arena, spill_dir, edge_id, total, process);
  }
  std::vector<Intermediate> chunked(
      const std::function<Intermediate(uint64_t, ChunkRange, Counters&)>& process) {
    return chunked(plan_chunks(plan.units, plan.chunk_units), process);
  }
};

Dataset make_vectors(std::vector<double> values) {
  Dataset d;
  d.kind = DataKind::vectors;
  d.values = std::move(values);
  return d;
}

Dataset make_tensor(std::vector<float> floats, TensorDims dims) {
  Dataset d;
  d.kind = DataKind::tensor;
  d.dims = dims;
  d.floats = std::move(floats);
  return d;
}

// Concatenates typed intermediates in chunk order.
template <typename T>
std::vector<T> concat(const std::vector<Intermediate>& parts) {
  std::vector<T> out;
  uint64_t total = 0;
  for (const Intermediate& m : parts) total += m.count;
  out.reserve(total);
  for (const Intermediate& m : parts)
    out.insert(out.end(), m.template as<T>(), m.template as<T>() + m.count);
  return out;
}

// Copies one chunk of numeric input as doubles.
void load_doubles(const Dataset& in, uint64_t start, uint64_t count, double* out) {
  if (in.kind == DataKind::vectors)
    std::memcpy(out, in.values.data() + start, count * sizeof(double));
  else
    for (uint64_t i = 0; i < count; ++i) out[i] = in.floats[start + i];
}

// ------------------------------------------------------------------ sort

Dataset exec_sort(ExecCtx& ctx, MotifVariant variant) {
  const Dataset& in = ctx.in;
  const bool quick = variant == MotifVariant::quick;

  if (in.kind == DataKind::text) {
    const uint32_t w = in.text_width;
    auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
      const uint64_t m = r.size();
      ArenaBuffer<char> buf(ctx.arena, m * w);
      std::memcpy(buf.data(), in.text.data() + r.start * w, m * w);
      // Sort a permutation, then materialize records in order.
      std::vector<uint32_t> perm(m);
      for (uint64_t i = 0; i < m; ++i) perm[i] = uint32_t(i);
      auto less = [&](uint32_t a, uint32_t b) {
        return std::memcmp(buf.data() + uint64_t(a) * w, buf.data() + uint64_t(b) * w,
                           w) < 0;
      };
      if (quick)
        kernels::quick_sort(perm.data(), int64_t(m), less);
      else
        kernels::merge_sort(perm.data(), int64_t(m), less);
      std::vector<char> sorted(m * w);
      for (uint64_t i = 0; i < m; ++i)
        std::memcpy(sorted.data() + i * w, buf.data() + uint64_t(perm[i]) * w, w);
      cnt.read_mem += m * w;
      cnt.written_mem += m * w;
      charge_sort(cnt, m, false, quick);
      return Intermediate::from_records(std::move(sorted), w);
    };
    std::vector<Intermediate> runs = ctx.chunked(process);
    std::vector<char> merged = merge_text_runs(runs, w);
    for (const Intermediate& m : runs) ctx.total.read_mem += m.bytes.size();
    ctx.total.written_mem += merged.size();
    charge_merge(ctx.total, ctx.plan.n, runs.size(), false);
    Dataset out;
    out.kind = DataKind::text;
    out.text_width = w;
    out.text = std::move(merged);
    return out;
  }

  if (in.kind == DataKind::graph) {
    auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
      const uint64_t m = r.size();
      ArenaBuffer<uint64_t> buf(ctx.arena, m);
      std::memcpy(buf.data(), in.edges.data() + r.start, m * sizeof(uint64_t));
      if (quick)
        kernels::quick_sort(buf.data(), int64_t(m));
      else
        kernels::merge_sort(buf.data(), int64_t(m));
      cnt.read_mem += m * sizeof(uint64_t);
      cnt.written_mem += m * sizeof(uint64_t);
      charge_sort(cnt, m, false, quick);
      return Intermediate::from(std::vector<uint64_t>(buf.begin(), buf.end()));
    };
    std::vector<Intermediate> runs = ctx.chunked(process);
    std::vector<uint64_t> merged = merge_runs<uint64_t>(runs, std::less<uint64_t>());
    for (const Intermediate& m : runs) ctx.total.read_mem += m.bytes.size();
    ctx.total.written_mem += merged.size() * sizeof(uint64_t);
    charge_merge(ctx.total, ctx.plan.n, runs.size(), false);
    Dataset out;
    out.kind = DataKind::graph;
    out.vertices = in.vertices;
    out.edges = std::move(merged);
    return out;
  }

  // vectors (tensor inputs are bridged to vectors before dispatch)
  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    const uint64_t m = r.size();
    ArenaBuffer<double> buf(ctx.arena, m);
    load_doubles(in, r.start, m, buf.data());
    if (quick)
      kernels::quick_sort(buf.data(), int64_t(m));
    else
      kernels::merge_sort(buf.data(), int64_t(m));
    cnt.read_mem += chunk_payload_bytes(in, r.start, m);
    charge_sort(cnt, m, true, quick);
    std::vector<double> sorted(buf.begin(), buf.end());
    cnt.written_mem += payload_bytes(sorted.data(), sorted.size());
    return Intermediate::from(sorted);
  };
  std::vector<Intermediate> runs = ctx.chunked(process);
  std::vector<double> merged = merge_runs<double>(runs, std::less<double>());
  for (const Intermediate& m : runs) ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(merged.data(), merged.size());
  charge_merge(ctx.total, ctx.plan.n, runs.size(), true);
  return make_vectors(std::move(merged));
}

// -------------------------------------------------------------- sampling

Dataset exec_subsample(ExecCtx& ctx, MotifVariant variant) {
  const Dataset& in = ctx.in;
  const uint32_t w = in.record_width();
  const uint64_t n = ctx.plan.n;
  const uint64_t interval = ctx.params.stride > 0 ? ctx.params.stride : 2;
  const double rate = ctx.params.batch_size > 0
                          ? std::min(1.0, double(ctx.params.batch_size) / double(n))
                          : 0.5;
  const uint64_t sample_seed = derive_seed(ctx.seed, "sample");

  // Graph records are 8 bytes wide like doubles but are never sparse.
  auto payload_of = [&](const Intermediate& m) -> uint64_t {
    return in.kind == DataKind::graph ? m.bytes.size()
                                      : intermediate_payload_bytes(m);
  };

  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    std::vector<uint64_t> picks;
    if (variant == MotifVariant::interval) {
      // Global index grid: multiples of `interval` that fall in this chunk.
      uint64_t first = (r.start + interval - 1) / interval * interval;
      for (uint64_t i = first; i < r.end; i += interval) picks.push_back(i);
    } else {
      picks = kernels::random_indices_range(r.start, r.end, rate, sample_seed);
    }
    std::vector<char> selected(picks.size() * w);
    const char* base = in.record_data();
    for (uint64_t i = 0; i < picks.size(); ++i)
      std::memcpy(selected.data() + i * w, base + picks[i] * w, w);
    cnt.read_mem += chunk_payload_bytes(in, r.start, r.size());
    charge_stream(cnt, r.size(), 1, 0, false, 0.02);
    cnt.ops.stores += picks.size();
    Intermediate m = Intermediate::from_records(std::move(selected), w);
    cnt.written_mem += payload_of(m);
    return m;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);

  Dataset out;
  out.kind = in.kind;
  uint64_t count = 0;
  for (const Intermediate& m : parts) {
    ctx.total.read_mem += payload_of(m);
    count += m.count;
  }
  if (count == 0) throw EmptyInputError("sampling selected no records");
  switch (in.kind) {
    case DataKind::text: {
      out.text_width = in.text_width;
      out.text.reserve(count * w);
      for (const Intermediate& m : parts)
        out.text.insert(out.text.end(), m.bytes.begin(), m.bytes.end());
      break;
    }
    case DataKind::vectors: out.values = concat<double>(parts); break;
    case DataKind::graph:
      out.vertices = in.vertices;
      out.edges = concat<uint64_t>(parts);
      break;
    case DataKind::tensor:
      out.dims = {1, 1, uint32_t(count), 1};
      out.floats = concat<float>(parts);
      break;
  }
  ctx.total.written_mem += count * w;
  return out;
}

Dataset exec_pool(ExecCtx& ctx, MotifVariant variant) {
  const Dataset& in = ctx.in;
  const TensorDims d = in.dims;
  const uint64_t img = uint64_t(d.h) * d.w * d.c;
  const uint32_t wh = std::min<uint32_t>(
      d.h, ctx.params.height_size > 0 ? uint32_t(ctx.params.height_size) : 2);
  const uint32_t ww = std::min<uint32_t>(
      d.w, ctx.params.width_size > 0 ? uint32_t(ctx.params.width_size) : 2);
  const uint32_t stride = ctx.params.stride > 0 ? uint32_t(ctx.params.stride) : wh;
  const bool take_max = variant == MotifVariant::max_pool;

  TensorDims out_dims{0, 0, 0, d.c};
  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    std::vector<float> result;
    for (uint64_t i = r.start; i < r.end; ++i) {
      Tensor4 t;
      t.dims = {1, d.h, d.w, d.c};
      t.layout = ctx.params.layout;
      t.v.assign(in.floats.begin() + i * img, in.floats.begin() + (i + 1) * img);
      Tensor4 pooled = kernels::pool2d(t, wh, ww, stride, take_max);
      out_dims.h = pooled.dims.h;
      out_dims.w = pooled.dims.w;
      result.insert(result.end(), pooled.v.begin(), pooled.v.end());
      const uint64_t win_ops = uint64_t(pooled.dims.elements()) * wh * ww;
      cnt.ops.float_ops += win_ops;
      cnt.ops.loads += win_ops;
      cnt.ops.stores += pooled.dims.elements();
      cnt.ops.branches += win_ops;
      cnt.ops.integer_ops += win_ops / 2;
      cnt.ops.taken_mispredict_estimate += u64_of(0.05 * double(win_ops));
      cnt.read_mem += chunk_payload_bytes(in, i * img, img);
    }
    Intermediate m = Intermediate::from(result);
    cnt.written_mem += intermediate_payload_bytes(m);
    return m;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<float> all = concat<float>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(all.data(), all.size());
  out_dims.n = uint32_t(ctx.plan.units);
  return make_tensor(std::move(all), out_dims);
}

Dataset exec_dropout(ExecCtx& ctx) {
  const Dataset& in = ctx.in;
  const double scale = 1.0 / (1.0 - kDropoutRate);
  const uint64_t drop_seed = derive_seed(ctx.seed, "dropout");

  auto quota = [&](ChunkRange r) {
    return kernels::sample_count(kDropoutRate, r.end) -
           kernels::sample_count(kDropoutRate, r.start);
  };

  if (in.kind == DataKind::tensor) {
    auto process = [&](uint64_t c, ChunkRange r, Counters& cnt) {
      std::vector<float> out(r.size());
      kernels::dropout_count(in.floats.data() + r.start, out.data(), r.size(),
                             quota(r), scale, derive_seed(drop_seed, c));
      cnt.read_mem += chunk_payload_bytes(in, r.start, r.size());
      charge_stream(cnt, r.size(), 1, 1, true, 0.02);
      Intermediate m = Intermediate::from(out);
      cnt.written_mem += intermediate_payload_bytes(m);
      return m;
    };
    std::vector<Intermediate> parts = ctx.chunked(process);
    std::vector<float> all = concat<float>(parts);
    for (const Intermediate& m : parts)
      ctx.total.read_mem += intermediate_payload_bytes(m);
    ctx.total.written_mem += payload_bytes(all.data(), all.size());
    TensorDims dims = all.size() == in.dims.elements()
                          ? in.dims
                          : TensorDims{1, 1, uint32_t(all.size()), 1};
    return make_tensor(std::move(all), dims);
  }

  auto process = [&](uint64_t c, ChunkRange r, Counters& cnt) {
    std::vector<double> out(r.size());
    kernels::dropout_count(in.values.data() + r.start, out.data(), r.size(), quota(r),
                           scale, derive_seed(drop_seed, c));
    cnt.read_mem += chunk_payload_bytes(in, r.start, r.size());
    charge_stream(cnt, r.size(), 1, 1, true, 0.02);
    Intermediate m = Intermediate::from(out);
    cnt.written_mem += intermediate_payload_bytes(m);
    return m;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<double> all = concat<double>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(all.data(), all.size());
  return make_vectors(std::move(all));
}

// ---------------------------------------------------------------- matrix

Dataset exec_matmul(ExecCtx& ctx) {
  const Dataset& in = ctx.in;
  const uint64_t s = ctx.plan.grain;  // matrix side; grain = one row of A

  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    const uint64_t rows = r.size();
    ArenaBuffer<double> out(ctx.arena, rows * s);
    const double* a = in.values.data() + r.start * s;
    const double* b = in.values.data() + s * s;
    kernels::matmul(a, b, out.data(), rows, s, s);
    const uint64_t inner = rows * s * s;
    cnt.ops.float_ops += 2 * inner;
    cnt.ops.loads += 2 * inner;
    cnt.ops.stores += rows * s;
    cnt.ops.integer_ops += inner;
    cnt.ops.branches += inner;
    cnt.ops.taken_mispredict_estimate += u64_of(0.002 * double(inner));
    cnt.read_mem += chunk_payload_bytes(in, r.start * s, rows * s);  // A rows
    cnt.read_mem += chunk_payload_bytes(in, s * s, s * s);           // B per chunk
    std::vector<double> result(out.begin(), out.end());
    cnt.written_mem += payload_bytes(result.data(), result.size());
    return Intermediate::from(result);
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<double> c = concat<double>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(c.data(), c.size());
  return make_vectors(std::move(c));
}

Dataset exec_distance(ExecCtx& ctx, MotifVariant variant) {
  const Dataset& in = ctx.in;
  const uint64_t d = ctx.plan.grain;
  const uint64_t refs = ctx.params.batch_size > 0
                            ? std::min<uint64_t>(ctx.params.batch_size,
                                                 ctx.plan.n / d - 1)
                            : std::min<uint64_t>(4, ctx.plan.n / d - 1);
  const bool euclid = variant == MotifVariant::euclidean_distance;

  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    std::vector<double> out;
    out.reserve(r.size() * refs);
    for (uint64_t p = r.start; p < r.end; ++p) {
      const double* point = in.values.data() + (refs + p) * d;
      for (uint64_t k = 0; k < refs; ++k) {
        const double* ref = in.values.data() + k * d;
        out.push_back(euclid ? kernels::euclidean_distance(point, ref, d)
                             : kernels::cosine_distance(point, ref, d));
      }
    }
    const uint64_t pairs = r.size() * refs;
    cnt.ops.float_ops += pairs * ((euclid ? 3 : 6) * d + (euclid ? 8 : 20));
    cnt.ops.loads += pairs * 2 * d;
    cnt.ops.stores += pairs;
    cnt.ops.integer_ops += pairs * d;
    cnt.ops.branches += pairs * d;
    cnt.ops.taken_mispredict_estimate += u64_of(0.002 * double(pairs * d));
    cnt.read_mem += chunk_payload_bytes(in, (refs + r.start) * d, r.size() * d);
    cnt.read_mem += chunk_payload_bytes(in, 0, refs * d);  // reference rows
    Intermediate m = Intermediate::from(out);
    cnt.written_mem += intermediate_payload_bytes(m);
    return m;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<double> all = concat<double>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(all.data(), all.size());
  return make_vectors(std::move(all));
}

Dataset exec_fully_connected(ExecCtx& ctx) {
  const Dataset& in = ctx.in;
  const uint64_t f = ctx.plan.grain;  // features per row
  const uint64_t m_out = ctx.params.num_channels > 0
                             ? ctx.params.num_channels
                             : std::min<uint64_t>(f, 64);

  // Seeded dense layer; scaling keeps activations O(1).
  std::vector<float> weights(f * m_out), bias(m_out);
  {
    Rng rng(derive_seed(ctx.seed, "weights"));
    const double scale = 1.0 / std::sqrt(double(f));
    for (float& x : weights) x = float(rng.gaussian() * scale);
    for (float& x : bias) x = float(rng.gaussian() * 0.1);
  }
  const uint64_t weight_bytes =
      payload_bytes(weights.data(), weights.size()) + payload_bytes(bias.data(), bias.size());

  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    const uint64_t rows = r.size();
    std::vector<float> rowbuf(rows * f);
    if (in.kind == DataKind::tensor)
      std::copy(in.floats.begin() + r.start * f, in.floats.begin() + r.end * f,
                rowbuf.begin());
    else
      for (uint64_t i = 0; i < rows * f; ++i)
        rowbuf[i] = float(in.values[r.start * f + i]);
    std::vector<float> out(rows * m_out);
    kernels::fully_connected(rowbuf.data(), rows, f, weights.data(), bias.data(),
                             m_out, out.data());
    const uint64_t inner = rows * f * m_out;
    cnt.ops.float_ops += 2 * inner;
    cnt.ops.loads += 2 * inner;
    cnt.ops.stores += rows * m_out;
    cnt.ops.integer_ops += inner;
    cnt.ops.branches += inner;
    cnt.ops.taken_mispredict_estimate += u64_of(0.002 * double(inner));
    cnt.read_mem += chunk_payload_bytes(in, r.start * f, rows * f) + weight_bytes;
    Intermediate m = Intermediate::from(out);
    cnt.written_mem += intermediate_payload_bytes(m);
    return m;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<float> all = concat<float>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(all.data(), all.size());

  if (in.kind == DataKind::tensor)
    return make_tensor(std::move(all),
                       {uint32_t(ctx.plan.units), 1, 1, uint32_t(m_out)});
  std::vector<double> values(all.begin(), all.end());
  return make_vectors(std::move(values));
}

// ------------------------------------------------------------- transform

Dataset exec_fft(ExecCtx& ctx) {
  const Dataset& in = ctx.in;
  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    const uint64_t m = r.size();
    const uint64_t window = std::bit_ceil(m);
    ArenaBuffer<std::complex<double>> buf(ctx.arena, window);
    for (uint64_t i = 0; i < m; ++i)
      buf[i] = std::complex<double>(in.values[r.start + i], 0.0);
    for (uint64_t i = m; i < window; ++i) buf[i] = {0.0, 0.0};
    kernels::fft_pow2(buf.data(), window);
    std::vector<double> out;
    out.reserve(2 * window);
    for (uint64_t i = 0; i < window; ++i) {
      out.push_back(buf[i].real());
      out.push_back(buf[i].imag());
    }
    const double wlog = double(window) * std::log2(double(std::max<uint64_t>(2, window)));
    cnt.ops.float_ops += u64_of(5.0 * wlog);
    cnt.ops.loads += u64_of(2.0 * wlog);
    cnt.ops.stores += u64_of(wlog);
    cnt.ops.integer_ops += u64_of(wlog);
    cnt.ops.branches += u64_of(wlog);
    cnt.ops.taken_mispredict_estimate += u64_of(0.01 * wlog);
    cnt.read_mem += chunk_payload_bytes(in, r.start, m);
    Intermediate im = Intermediate::from(out);
    cnt.written_mem += intermediate_payload_bytes(im);
    return im;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<double> all = concat<double>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(all.data(), all.size());
  return make_vectors(std::move(all));
}

Dataset exec_conv(ExecCtx& ctx) {
  const Dataset& in = ctx.in;
  const TensorDims d = in.dims;
  const uint64_t img = uint64_t(d.h) * d.w * d.c;
  const uint32_t kh = std::min<uint32_t>(
      d.h, ctx.params.height_size > 0 ? uint32_t(ctx.params.height_size) : 3);
  const uint32_t kw = std::min<uint32_t>(
      d.w, ctx.params.width_size > 0 ? uint32_t(ctx.params.width_size) : 3);
  const uint32_t out_c =
      ctx.params.num_channels > 0 ? uint32_t(ctx.params.num_channels) : d.c;
  const uint32_t stride = ctx.params.stride > 0 ? uint32_t(ctx.params.stride) : 1;

  Tensor4 filter;
  filter.dims = {kh, kw, d.c, out_c};  // (kh, kw, inC, outC)
  filter.v.resize(filter.dims.elements());
  {
    Rng rng(derive_seed(ctx.seed, "filter"));
    const double scale = 1.0 / std::sqrt(double(kh) * kw * d.c);
    for (float& x : filter.v) x = float(rng.gaussian() * scale);
  }
  const uint64_t filter_bytes = payload_bytes(filter.v.data(), filter.v.size());

  TensorDims out_dims{0, 0, 0, out_c};
  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    std::vector<float> result;
    for (uint64_t i = r.start; i < r.end; ++i) {
      Tensor4 t;
      t.dims = {1, d.h, d.w, d.c};
      t.layout = ctx.params.layout;
      t.v.assign(in.floats.begin() + i * img, in.floats.begin() + (i + 1) * img);
      Tensor4 conv = kernels::conv2d(t, filter, stride, ctx.params.padding);
      out_dims.h = conv.dims.h;
      out_dims.w = conv.dims.w;
      result.insert(result.end(), conv.v.begin(), conv.v.end());
      const uint64_t inner = uint64_t(conv.dims.elements()) * kh * kw * d.c;
      cnt.ops.float_ops += 2 * inner;
      cnt.ops.loads += 2 * inner;
      cnt.ops.stores += conv.dims.elements();
      cnt.ops.integer_ops += inner;
      cnt.ops.branches += inner;
      cnt.ops.taken_mispredict_estimate += u64_of(0.01 * double(inner));
      cnt.read_mem += chunk_payload_bytes(in, i * img, img) + filter_bytes;
    }
    Intermediate m = Intermediate::from(result);
    cnt.written_mem += intermediate_payload_bytes(m);
    return m;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<float> all = concat<float>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(all.data(), all.size());
  out_dims.n = uint32_t(ctx.plan.units);
  return make_tensor(std::move(all), out_dims);
}

// ----------------------------------------------------------------- graph

std::vector<Intermediate> sorted_edge_runs(ExecCtx& ctx) {
  const Dataset& in = ctx.in;
  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    const uint64_t m = r.size();
    ArenaBuffer<uint64_t> buf(ctx.arena, m);
    std::memcpy(buf.data(), in.edges.data() + r.start, m * sizeof(uint64_t));
    kernels::quick_sort(buf.data(), int64_t(m));
    cnt.read_mem += m * sizeof(uint64_t);
    cnt.written_mem += m * sizeof(uint64_t);
    charge_sort(cnt, m, false, true);
    return Intermediate::from(std::vector<uint64_t>(buf.begin(), buf.end()));
  };
  return ctx.chunked(process);
}

Dataset exec_graph(ExecCtx& ctx, MotifVariant variant) {
  const Dataset& in = ctx.in;
  const uint64_t v = in.vertices;

  if (variant == MotifVariant::degree_count) {
    auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
      std::vector<uint32_t> counts(2 * v, 0);
      kernels::degree_counts(in.edges.data() + r.start, r.size(), v, counts.data(),
                             counts.data() + v);
      cnt.read_mem += r.size() * sizeof(uint64_t);
      charge_stream(cnt, r.size(), 2, 0, true, 0.02);
      cnt.ops.stores += r.size();  // two increments per edge
      Intermediate m = Intermediate::from(counts);
      cnt.written_mem += m.bytes.size();
      return m;
    };
    std::vector<Intermediate> parts = ctx.chunked(process);
    std::vector<double> totals(2 * v, 0.0);
    for (const Intermediate& m : parts) {
      const uint32_t* p = m.as<uint32_t>();
      for (uint64_t i = 0; i < m.count; ++i) totals[i] += p[i];
      ctx.total.read_mem += m.bytes.size();
      ctx.total.ops.integer_ops += m.count;
      ctx.total.ops.loads += m.count;
      ctx.total.ops.branches += m.count;
    }
    ctx.total.written_mem += payload_bytes(totals.data(), totals.size());
    return make_vectors(std::move(totals));
  }

  std::vector<Intermediate> runs = sorted_edge_runs(ctx);
  std::vector<uint64_t> merged = merge_runs<uint64_t>(runs, std::less<uint64_t>());
  for (const Intermediate& m : runs) ctx.total.read_mem += m.bytes.size();
  charge_merge(ctx.total, ctx.plan.n, runs.size(), false);

  if (variant == MotifVariant::construct) {
    ctx.total.written_mem += merged.size() * sizeof(uint64_t);
    Dataset out;
    out.kind = DataKind::graph;
    out.vertices = v;
    out.edges = std::move(merged);
    return out;
  }

  // traverse: adjacency from the merged edges, then a breadth-first pass.
  kernels::Adjacency adj = kernels::build_adjacency(merged.data(), merged.size(), v);
  std::vector<uint32_t> order = kernels::bfs_order(adj, 0);
  ctx.total.ops.loads += merged.size() + order.size();
  ctx.total.ops.integer_ops += merged.size() + order.size();
  ctx.total.ops.branches += merged.size() + order.size();
  ctx.total.ops.stores += order.size();
  ctx.total.ops.taken_mispredict_estimate += u64_of(0.05 * double(merged.size()));
  ctx.total.read_mem += merged.size() * sizeof(uint64_t);
  std::vector<double> visits(order.begin(), order.end());
  ctx.total.written_mem += payload_bytes(visits.data(), visits.size());
  return make_vectors(std::move(visits));
}

// ----------------------------------------------------------------- logic

Dataset exec_logic(ExecCtx& ctx, MotifVariant variant) {
  const Dataset& in = ctx.in;

  if (variant == MotifVariant::relu) {
    if (in.kind == DataKind::tensor) {
      auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
        std::vector<float> out(r.size());
        kernels::relu(in.floats.data() + r.start, out.data(), r.size());
        cnt.read_mem += chunk_payload_bytes(in, r.start, r.size());
        charge_stream(cnt, r.size(), 0, 1, true, 0.25);
        Intermediate m = Intermediate::from(out);
        cnt.written_mem += intermediate_payload_bytes(m);
        return m;
      };
      std::vector<Intermediate> parts = ctx.chunked(process);
      std::vector<float> all = concat<float>(parts);
      for (const Intermediate& m : parts)
        ctx.total.read_mem += intermediate_payload_bytes(m);
      ctx.total.written_mem += payload_bytes(all.data(), all.size());
      TensorDims dims = all.size() == in.dims.elements()
                            ? in.dims
                            : TensorDims{1, 1, uint32_t(all.size()), 1};
      return make_tensor(std::move(all), dims);
    }
    auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
      std::vector<double> out(r.size());
      kernels::relu(in.values.data() + r.start, out.data(), r.size());
      cnt.read_mem += chunk_payload_bytes(in, r.start, r.size());
      charge_stream(cnt, r.size(), 0, 1, true, 0.25);
      Intermediate m = Intermediate::from(out);
      cnt.written_mem += intermediate_payload_bytes(m);
      return m;
    };
    std::vector<Intermediate> parts = ctx.chunked(process);
    std::vector<double> all = concat<double>(parts);
    for (const Intermediate& m : parts)
      ctx.total.read_mem += intermediate_payload_bytes(m);
    ctx.total.written_mem += payload_bytes(all.data(), all.size());
    return make_vectors(std::move(all));
  }

  // Word-level ops view each double's bit pattern as a 64-bit word; results
  // are re-emitted as exact small integers (top 53 bits) so downstream
  // float kernels never see NaN or denormal garbage.
  uint64_t operand = splitmix64(derive_seed(ctx.seed, "operand"));
  if (variant == MotifVariant::shift) operand &= 63;

  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    const uint64_t m = r.size();
    ArenaBuffer<uint64_t> words(ctx.arena, m);
    for (uint64_t i = 0; i < m; ++i)
      words[i] = std::bit_cast<uint64_t>(in.values[r.start + i]);
    ArenaBuffer<uint64_t> result(ctx.arena, m);
    kernels::word_op(words.data(), result.data(), m, variant, operand);
    std::vector<double> out(m);
    for (uint64_t i = 0; i < m; ++i) out[i] = double(result[i] >> 11);
    cnt.read_mem += chunk_payload_bytes(in, r.start, m);
    charge_stream(cnt, m, 2, 0, true, 0.01);
    Intermediate im = Intermediate::from(out);
    cnt.written_mem += intermediate_payload_bytes(im);
    return im;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<double> all = concat<double>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(all.data(), all.size());
  return make_vectors(std::move(all));
}

// ------------------------------------------------------------------- set

Dataset exec_set(ExecCtx& ctx, MotifVariant variant) {
  const Dataset& in = ctx.in;
  const uint64_t n = ctx.plan.n;
  if (n < 2) throw EmptyInputError("set operations need at least two elements");
  const uint64_t half = n / 2;

  // Chunk the two operand halves separately so every chunk belongs to
  // exactly one side; the boundary is data-dependent, not worker-dependent.
  std::vector<ChunkRange> chunks;
  const uint64_t ce = ctx.plan.chunk_units;
  for (ChunkRange r : plan_chunks(half, ce)) chunks.push_back(r);
  const uint64_t a_chunks = chunks.size();
  for (ChunkRange r : plan_chunks(n - half, ce))
    chunks.push_back({half + r.start, half + r.end});

  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    const uint64_t m = r.size();
    ArenaBuffer<double> buf(ctx.arena, m);
    std::memcpy(buf.data(), in.values.data() + r.start, m * sizeof(double));
    kernels::quick_sort(buf.data(), int64_t(m));
    std::vector<double> run(buf.begin(), buf.end());
    run.erase(std::unique(run.begin(), run.end()), run.end());
    cnt.read_mem += chunk_payload_bytes(in, r.start, m);
    charge_sort(cnt, m, true, true);
    Intermediate im = Intermediate::from(run);
    cnt.written_mem += intermediate_payload_bytes(im);
    return im;
  };
  std::vector<Intermediate> parts = ctx.chunked(chunks, process);

  std::vector<Intermediate> a_runs(parts.begin(), parts.begin() + a_chunks);
  std::vector<Intermediate> b_runs(parts.begin() + a_chunks, parts.end());
  std::vector<double> a = merge_runs<double>(a_runs, std::less<double>());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::vector<double> b = merge_runs<double>(b_runs, std::less<double>());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  charge_merge(ctx.total, n, parts.size(), true);

  std::vector<double> out;
  switch (variant) {
    case MotifVariant::set_union: out = kernels::set_union(a, b); break;
    case MotifVariant::set_intersect: out = kernels::set_intersect(a, b); break;
    default: out = kernels::set_difference(a, b); break;
  }
  const uint64_t scanned = a.size() + b.size();
  ctx.total.ops.float_ops += scanned;
  ctx.total.ops.loads += scanned;
  ctx.total.ops.branches += scanned;
  ctx.total.ops.integer_ops += scanned / 2;
  ctx.total.ops.stores += out.size();
  ctx.total.ops.taken_mispredict_estimate += u64_of(0.15 * double(scanned));
  ctx.total.written_mem += payload_bytes(out.data(), out.size());
  return make_vectors(std::move(out));
}

// ------------------------------------------------------------- statistics

Dataset exec_stats(ExecCtx& ctx, MotifVariant variant) {
  const Dataset& in = ctx.in;
  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    const uint64_t m = r.size();
    ArenaBuffer<double> buf(ctx.arena, m);
    load_doubles(in, r.start, m, buf.data());
    StatsPartial p = kernels::stats_partial(buf.data(), m);
    cnt.read_mem += chunk_payload_bytes(in, r.start, m);
    charge_stream(cnt, m, 0, 6, false, 0.02);
    cnt.ops.branches += m;  // min/max tests
    std::vector<StatsPartial> one{p};
    Intermediate im = Intermediate::from(one);
    cnt.written_mem += im.bytes.size();
    return im;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  StatsPartial total;
  for (const Intermediate& m : parts) {
    total = StatsPartial::merge(total, *m.as<StatsPartial>());
    ctx.total.read_mem += m.bytes.size();
    ctx.total.ops.float_ops += 8;
    ctx.total.ops.loads += 5;
  }
  if (total.count == 0) throw EmptyInputError("statistics over empty input");

  std::vector<double> out;
  switch (variant) {
    case MotifVariant::count: out = {double(total.count)}; break;
    case MotifVariant::average: out = {total.sum / double(total.count)}; break;
    default: out = {total.min, total.max}; break;
  }
  ctx.total.written_mem += payload_bytes(out.data(), out.size());
  return make_vectors(std::move(out));
}

Dataset exec_batch_norm(ExecCtx& ctx) {
  const Dataset& in = ctx.in;
  const uint64_t f = ctx.plan.grain;
  const uint64_t rows = ctx.plan.units;
  if (rows < 2) throw ParameterError("batch normalization needs batch >= 2");

  // Phase 1: per-chunk column moments (tiny, never spilled).
  ExecPlan phase1 = ctx.plan;
  phase1.spill = false;
  std::vector<double> mean(f, 0.0), inv_std(f, 0.0);
  {
    auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
      std::vector<float> rowbuf(r.size() * f);
      if (in.kind == DataKind::tensor)
        std::copy(in.floats.begin() + r.start * f, in.floats.begin() + r.end * f,
                  rowbuf.begin());
      else
        for (uint64_t i = 0; i < r.size() * f; ++i)
          rowbuf[i] = float(in.values[r.start * f + i]);
      std::vector<double> moments(2 * f, 0.0);
      kernels::column_moments(rowbuf.data(), r.size(), f, moments.data(),
                              moments.data() + f);
      cnt.read_mem += chunk_payload_bytes(in, r.start * f, r.size() * f);
      charge_stream(cnt, r.size() * f, 0, 3, false, 0.01);
      Intermediate m = Intermediate::from(moments);
      cnt.written_mem += m.bytes.size();
      return m;
    };
    std::vector<Intermediate> parts = run_chunked(
        phase1, plan_chunks(ctx.plan.units, ctx.plan.chunk_units), ctx.arena,
        ctx.spill_dir, ctx.edge_id, ctx.total, process);
    std::vector<double> sum(f, 0.0), sum_sq(f, 0.0);
    for (const Intermediate& m : parts) {
      const double* p = m.as<double>();
      for (uint64_t i = 0; i < f; ++i) sum[i] += p[i];
      for (uint64_t i = 0; i < f; ++i) sum_sq[i] += p[f + i];
      ctx.total.read_mem += m.bytes.size();
      ctx.total.ops.float_ops += 2 * f;
      ctx.total.ops.loads += 2 * f;
    }
    for (uint64_t i = 0; i < f; ++i) {
      mean[i] = sum[i] / double(rows);
      const double var = std::max(0.0, sum_sq[i] / double(rows) - mean[i] * mean[i]);
      inv_std[i] = 1.0 / std::sqrt(var + kBatchNormEpsilon);
    }
  }

  // Phase 2: normalize rows (spill-eligible, the bulky intermediate).
  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    std::vector<float> rowbuf(r.size() * f);
    if (in.kind == DataKind::tensor)
      std::copy(in.floats.begin() + r.start * f, in.floats.begin() + r.end * f,
                rowbuf.begin());
    else
      for (uint64_t i = 0; i < r.size() * f; ++i)
        rowbuf[i] = float(in.values[r.start * f + i]);
    std::vector<float> out(r.size() * f);
    kernels::normalize_rows(rowbuf.data(), out.data(), r.size(), f, mean.data(),
                            inv_std.data());
    cnt.read_mem += chunk_payload_bytes(in, r.start * f, r.size() * f);
    charge_stream(cnt, r.size() * f, 0, 2, true, 0.01);
    Intermediate m = Intermediate::from(out);
    cnt.written_mem += intermediate_payload_bytes(m);
    return m;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<float> all = concat<float>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(all.data(), all.size());

  if (in.kind == DataKind::tensor && all.size() == in.dims.elements())
    return make_tensor(std::move(all), in.dims);
  if (in.kind == DataKind::tensor)
    return make_tensor(std::move(all), {uint32_t(rows), 1, 1, uint32_t(f)});
  std::vector<double> values(all.begin(), all.end());
  return make_vectors(std::move(values));
}

Dataset exec_softmax(ExecCtx& ctx) {
  const Dataset& in = ctx.in;
  const uint64_t f = ctx.plan.grain;

  auto process = [&](uint64_t, ChunkRange r, Counters& cnt) {
    const uint64_t rows = r.size();
    ArenaBuffer<double> rowbuf(ctx.arena, rows * f);
    load_doubles(in, r.start * f, rows * f, rowbuf.data());
    std::vector<double> out(rows * f);
    kernels::softmax_rows(rowbuf.data(), out.data(), rows, f);
    cnt.read_mem += chunk_payload_bytes(in, r.start * f, rows * f);
    charge_stream(cnt, rows * f, 0, 20, true, 0.01);
    Intermediate m = Intermediate::from(out);
    cnt.written_mem += intermediate_payload_bytes(m);
    return m;
  };
  std::vector<Intermediate> parts = ctx.chunked(process);
  std::vector<double> all = concat<double>(parts);
  for (const Intermediate& m : parts)
    ctx.total.read_mem += intermediate_payload_bytes(m);
  ctx.total.written_mem += payload_bytes(all.data(), all.size());

  if (in.kind == DataKind::tensor) {
    std::vector<float> floats(all.begin(), all.end());
    if (floats.size() == in.dims.elements())
      return make_tensor(std::move(floats), in.dims);
    return make_tensor(std::move(floats),
                       {uint32_t(ctx.plan.units), 1, 1, uint32_t(f)});
  }
  return make_vectors(std::move(all));
}

// ------------------------------------------------------------- dispatch

// Row width used by row-structured kernels when the input is a flat vector.
uint64_t row_features(const ExecCtx& ctx) {
  if (ctx.in.kind == DataKind::tensor)
    return std::max<uint64_t>(1, uint64_t(ctx.in.dims.h) * ctx.in.dims.w *
                                     ctx.in.dims.c);
  if (ctx.params.width_size > 0)
    return std::min<uint64_t>(ctx.params.width_size, ctx.plan.n);
  return std::min<uint64_t>(64, ctx.plan.n);
}

Dataset dispatch(ExecCtx& ctx, MotifKind kind) {
  switch (kind.variant) {
    case MotifVariant::quick:
    case MotifVariant::merge: return exec_sort(ctx, kind.variant);
    case MotifVariant::random:
    case MotifVariant::interval: return exec_subsample(ctx, kind.variant);
    case MotifVariant::max_pool:
    case MotifVariant::avg_pool: return exec_pool(ctx, kind.variant);
    case MotifVariant::dropout: return exec_dropout(ctx);
    case MotifVariant::multiply: return exec_matmul(ctx);
    case MotifVariant::euclidean_distance:
    case MotifVariant::cosine_distance: return exec_distance(ctx, kind.variant);
    case MotifVariant::fully_connected: return exec_fully_connected(ctx);
    case MotifVariant::fft: return exec_fft(ctx);
    case MotifVariant::convolution: return exec_conv(ctx);
    case MotifVariant::construct:
    case MotifVariant::traverse:
    case MotifVariant::degree_count: return exec_graph(ctx, kind.variant);
    case MotifVariant::bit_and:
    case MotifVariant::bit_or:
    case MotifVariant::bit_xor:
    case MotifVariant::shift:
    case MotifVariant::relu: return exec_logic(ctx, kind.variant);
    case MotifVariant::set_union:
    case MotifVariant::set_intersect:
    case MotifVariant::set_difference: return exec_set(ctx, kind.variant);
    case MotifVariant::count:
    case MotifVariant::average:
    case MotifVariant::min_max: return exec_stats(ctx, kind.variant);
    case MotifVariant::batch_norm: return exec_batch_norm(ctx);
    case MotifVariant::softmax_norm: return exec_softmax(ctx);
  }
  throw ParameterError("unmapped motif variant");
}

// Kinds a motif consumes natively; anything else is bridged to the result.
bool accepts_kind(MotifKind kind, DataKind k) {
  switch (kind.variant) {
    case MotifVariant::quick:
    case MotifVariant::merge:
      return k != DataKind::tensor;  // record-ordered kinds sort natively
    case MotifVariant::random:
    case MotifVariant::interval:
      return true;  // any record stream can be subsampled
    case MotifVariant::max_pool:
    case MotifVariant::avg_pool:
    case MotifVariant::convolution:
      return k == DataKind::tensor;
    case MotifVariant::construct:
    case MotifVariant::traverse:
    case MotifVariant::degree_count:
      return k == DataKind::graph;
    case MotifVariant::multiply:
    case MotifVariant::euclidean_distance:
    case MotifVariant::cosine_distance:
    case MotifVariant::fft:
    case MotifVariant::bit_and:
    case MotifVariant::bit_or:
    case MotifVariant::bit_xor:
    case MotifVariant::shift:
    case MotifVariant::set_union:
    case MotifVariant::set_intersect:
    case MotifVariant::set_difference:
      return k == DataKind::vectors;
    case MotifVariant::dropout:
    case MotifVariant::relu:
    case MotifVariant::fully_connected:
    case MotifVariant::batch_norm:
    case MotifVariant::softmax_norm:
    case MotifVariant::count:
    case MotifVariant::average:
    case MotifVariant::min_max:
      return k == DataKind::vectors || k == DataKind::tensor;
  }
  return false;
}

}  // namespace

DataKind required_input_kind(MotifKind kind, DataKind upstream) {
  if (accepts_kind(kind, upstream)) return upstream;
  switch (kind.family) {
    case MotifFamily::graph: return DataKind::graph;
    case MotifFamily::transform:
      return kind.variant == MotifVariant::convolution ? DataKind::tensor
                                                       : DataKind::vectors;
    case MotifFamily::sampling:
      return kind.variant == MotifVariant::max_pool ||
                     kind.variant == MotifVariant::avg_pool
                 ? DataKind::tensor
                 : DataKind::vectors;
    default: return DataKind::vectors;
  }
}

DataKind output_kind(MotifKind kind, DataKind input) {
  switch (kind.variant) {
    case MotifVariant::quick:
    case MotifVariant::merge:
    case MotifVariant::random:
    case MotifVariant::interval:
      return input;  // reorder or subset of the same records
    case MotifVariant::max_pool:
    case MotifVariant::avg_pool:
    case MotifVariant::convolution:
      return DataKind::tensor;
    case MotifVariant::construct: return DataKind::graph;
    case MotifVariant::dropout:
    case MotifVariant::relu:
    case MotifVariant::fully_connected:
    case MotifVariant::batch_norm:
    case MotifVariant::softmax_norm:
      return input == DataKind::tensor ? DataKind::tensor : DataKind::vectors;
    default: return DataKind::vectors;
  }
}

MotifRunRecord execute_motif(MotifKind kind, const ParameterVector& params,
                             const DataRef& input, ManagedArena& arena,
                             const std::string& spill_dir,
                             const std::string& edge_id, uint64_t passes) {
  params.validate();
  if (passes == 0) throw ParameterError("pass count must be >= 1");
  if (!input.data) throw InputTypeError("input dataset is not loaded");
  if (input.data->element_count() == 0)
    throw EmptyInputError("motif input is empty");

  const auto t0 = std::chrono::steady_clock::now();
  const double pause0 = arena.stats().synthetic_pause_seconds;

  MotifRunRecord record;
  record.kind = kind;
  record.params = params;

  // Bridge to the kind this motif consumes; adapters charge a linear pass.
  Counters bridge_cost;
  DatasetPtr data = input.data;
  const DataKind need = required_input_kind(kind, data->kind);
  if (data->kind != need) {
    const uint64_t n_in = data->element_count();
    bridge_cost.read_mem += chunk_payload_bytes(*data, 0, n_in);
    data = bridge_dataset(data, need, derive_seed(params.seed, "bridge"));
    bridge_cost.written_mem += chunk_payload_bytes(*data, 0, data->element_count());
    charge_stream(bridge_cost, n_in, 2, 0, true, 0.02);
  }

  const uint64_t width = data->record_width();

  // Effective element count: dataSize (bytes) and totalSize (records) cap
  // the consumed prefix, making both genuine work-volume knobs.
  uint64_t n = data->element_count();
  if (params.total_size > 0) n = std::min(n, params.total_size);
  if (params.data_size > 0)
    n = std::min(n, std::max<uint64_t>(1, params.data_size / width));

  ExecCtx ctx{*data, params, arena, spill_dir, edge_id, {}, params.seed, {}};
  ctx.total += bridge_cost;
  ctx.plan.n = n;
  ctx.plan.num_tasks = uint32_t(params.num_tasks);

  // Work grain: indivisible unit in elements (image, row, or single record).
  switch (kind.variant) {
    case MotifVariant::max_pool:
    case MotifVariant::avg_pool:
    case MotifVariant::convolution:
      ctx.plan.grain = std::max<uint64_t>(
          1, uint64_t(data->dims.h) * data->dims.w * data->dims.c);
      break;
    case MotifVariant::multiply: {
      const uint64_t side = uint64_t(std::sqrt(double(n) / 2.0));
      if (side < 1)
        throw EmptyInputError("matrix multiply needs at least two elements");
      ctx.plan.grain = side;  // one row of A; B occupies the next side^2
      break;
    }
    case MotifVariant::euclidean_distance:
    case MotifVariant::cosine_distance:
    case MotifVariant::fully_connected:
    case MotifVariant::batch_norm:
    case MotifVariant::softmax_norm:
      ctx.plan.grain = row_features(ctx);
      break;
    default:
      ctx.plan.grain = 1;
      break;
  }

  ctx.plan.units = std::max<uint64_t>(1, n / ctx.plan.grain);
  if (kind.variant == MotifVariant::multiply) {
    // Units = rows of A; ensure A and B both fit in the prefix.
    ctx.plan.units = ctx.plan.grain;
  } else if (kind.variant == MotifVariant::euclidean_distance ||
             kind.variant == MotifVariant::cosine_distance) {
    const uint64_t rows = n / ctx.plan.grain;
    if (rows < 2)
      throw EmptyInputError("distance kernels need at least two rows of data");
    const uint64_t refs =
        params.batch_size > 0 ? std::min<uint64_t>(params.batch_size, rows - 1)
                              : std::min<uint64_t>(4, rows - 1);
    ctx.plan.units = rows - refs;  // points; references are shared
  }
  if (ctx.plan.units == 0) throw EmptyInputError("no work units for motif");

  const uint64_t chunk_elems =
      params.chunk_size > 0
          ? std::max<uint64_t>(1, params.chunk_size / width)
          : (n + params.num_tasks - 1) / params.num_tasks;
  ctx.plan.chunk_units = std::max<uint64_t>(1, chunk_elems / ctx.plan.grain);

  // Spill rule: intermediates go to disk when the data volume exceeds what
  // the workers' chunks jointly cover.
  const uint64_t ds_eff = params.data_size > 0 ? params.data_size : n * width;
  const uint64_t cs_eff =
      params.chunk_size > 0 ? params.chunk_size : chunk_elems * width;
  ctx.plan.spill = ds_eff > cs_eff * params.num_tasks;

  Dataset out;
  for (uint64_t pass = 0; pass < passes; ++pass) out = dispatch(ctx, kind);

  record.op_counts = ctx.total.ops;
  record.bytes_read_mem = ctx.total.read_mem;
  record.bytes_written_mem = ctx.total.written_mem;
  record.bytes_read_disk = ctx.total.read_disk;
  record.bytes_written_disk = ctx.total.written_disk;
  record.working_set_bytes = data->content_bytes() + out.content_bytes();

  auto out_ptr = std::make_shared<Dataset>(std::move(out));
  record.output.descriptor = describe_dataset(*out_ptr, params.seed);
  record.output.checksum = out_ptr->checksum();
  record.output.data = out_ptr;

  record.modeled_time =
      surrogate_estimate(record.op_counts, record.working_set_bytes).modeled_seconds;
  record.wall_time = std::max(
      1e-9, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count());
  record.arena_pause = arena.stats().synthetic_pause_seconds - pause0;
  return record;
}

}  // namespace motifbench

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "motifbench/errors.hpp"

namespace motifbench {

struct ArenaConfig {
  uint64_t capacity = uint64_t(256) << 20;  // bytes
  uint64_t sweep_interval = 256;            // allocations between sweeps
  double pause_ratio = 0.02;                // synthetic pause per elapsed second
};

// Mimics a managed runtime's heap: released blocks become garbage that is
// only reclaimed by a stop-the-world sweep. Sweeps run every sweep_interval
// allocations (and under capacity pressure); all registered workers must
// quiesce at the barrier before one of them performs the sweep. The pause is
// synthetic — a modeled duration charged per sweep, not an actual sleep.
class ManagedArena {
 public:
  struct Stats {
    uint64_t allocations = 0;
    uint64_t interval_sweeps = 0;
    uint64_t forced_sweeps = 0;
    uint64_t live_bytes = 0;
    uint64_t garbage_bytes = 0;
    uint64_t allocated_bytes = 0;  // live + garbage
    uint64_t peak_allocated = 0;
    double synthetic_pause_seconds = 0.0;
  };

  explicit ManagedArena(ArenaConfig cfg);

  // Worker lifecycle. A registered worker must call checkpoint() between
  // work items and deregister before exiting; both double as safepoints.
  void register_worker();
  void deregister_worker();
  void checkpoint();

  // Returns a block id; the backing memory stays valid until release + sweep.
  uint64_t allocate(uint64_t bytes);
  char* data(uint64_t id);
  void release(uint64_t id);  // live -> garbage; reclaimed at next sweep

  Stats stats() const;
  const ArenaConfig& config() const { return cfg_; }

 private:
  struct Block {
    std::unique_ptr<char[]> memory;
    uint64_t bytes = 0;
    bool garbage = false;
  };

  void quiesce(std::unique_lock<std::mutex>& lock);
  void sweep(std::unique_lock<std::mutex>& lock, bool forced);

  ArenaConfig cfg_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::unordered_map<uint64_t, Block> blocks_;
  std::unordered_set<std::thread::id> worker_ids_;
  uint64_t next_id_ = 1;
  uint64_t registered_ = 0;
  uint64_t waiting_ = 0;
  bool pending_ = false;
  bool pending_forced_ = false;
  uint64_t epoch_ = 0;
  Stats stats_;
  std::chrono::steady_clock::time_point last_sweep_;
};

// RAII: registers the current thread as an arena worker.
class ArenaWorkerScope {
 public:
  explicit ArenaWorkerScope(ManagedArena& arena) : arena_(arena) {
    arena_.register_worker();
  }
  ~ArenaWorkerScope() { arena_.deregister_worker(); }
  ArenaWorkerScope(const ArenaWorkerScope&) = delete;
  ArenaWorkerScope& operator=(const ArenaWorkerScope&) = delete;

 private:
  ManagedArena& arena_;
};

// RAII typed scratch buffer allocated from an arena.
template <typename T>
class ArenaBuffer {
 public:
  ArenaBuffer(ManagedArena& arena, uint64_t count)
      : arena_(arena), count_(count), id_(arena.allocate(count * sizeof(T))) {
    ptr_ = reinterpret_cast<T*>(arena.data(id_));
  }
  ~ArenaBuffer() { arena_.release(id_); }
  ArenaBuffer(const ArenaBuffer&) = delete;
  ArenaBuffer& operator=(const ArenaBuffer&) = delete;

  T* data() { return ptr_; }
  const T* data() const { return ptr_; }
  T& operator[](uint64_t i) { return ptr_[i]; }
  const T& operator[](uint64_t i) const { return ptr_[i]; }
  uint64_t size() const { return count_; }
  T* begin() { return ptr_; }
  T* end() { return ptr_ + count_; }

 private:
  ManagedArena& arena_;
  uint64_t count_;
  uint64_t id_;
  T* ptr_;
};

}  // namespace motifbench

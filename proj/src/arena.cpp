#include "motifbench/arena.hpp"

namespace motifbench {

ManagedArena::ManagedArena(ArenaConfig cfg) : cfg_(cfg) {
  if (cfg_.capacity == 0) throw ParameterError("arena capacity must be positive");
  if (cfg_.sweep_interval == 0)
    throw ParameterError("arena sweep interval must be positive");
  if (cfg_.pause_ratio < 0.0) throw ParameterError("pause ratio must be >= 0");
  last_sweep_ = std::chrono::steady_clock::now();
}

void ManagedArena::register_worker() {
  std::unique_lock<std::mutex> lock(mu_);
  ++registered_;
  worker_ids_.insert(std::this_thread::get_id());
}

void ManagedArena::deregister_worker() {
  std::unique_lock<std::mutex> lock(mu_);
  --registered_;
  worker_ids_.erase(std::this_thread::get_id());
  // A departing worker must not strand a pending sweep: if everyone else is
  // already parked (or nobody is left), this thread performs the sweep.
  if (pending_ && waiting_ == registered_) sweep(lock, pending_forced_);
}

void ManagedArena::checkpoint() {
  std::unique_lock<std::mutex> lock(mu_);
  if (pending_) quiesce(lock);
}

void ManagedArena::quiesce(std::unique_lock<std::mutex>& lock) {
  // Caller is a registered worker and pending_ is set. The last thread to
  // arrive sweeps; everyone else waits for the epoch to advance.
  ++waiting_;
  if (waiting_ == registered_) {
    --waiting_;
    sweep(lock, pending_forced_);
  } else {
    const uint64_t epoch = epoch_;
    cv_.wait(lock, [&] { return epoch_ != epoch; });
    --waiting_;
  }
}

void ManagedArena::sweep(std::unique_lock<std::mutex>&, bool forced) {
  for (auto it = blocks_.begin(); it != blocks_.end();) {
    if (it->second.garbage)
      it = blocks_.erase(it);
    else
      ++it;
  }
  stats_.allocated_bytes -= stats_.garbage_bytes;
  stats_.garbage_bytes = 0;

  // Each interval crossing owes one sweep; a single pause discharges all
  // debt accumulated while workers converged on the barrier.
  stats_.interval_sweeps = stats_.allocations / cfg_.sweep_interval;
  if (forced) ++stats_.forced_sweeps;

  const auto now = std::chrono::steady_clock::now();
  stats_.synthetic_pause_seconds +=
      cfg_.pause_ratio * std::chrono::duration<double>(now - last_sweep_).count();
  last_sweep_ = now;

  pending_ = false;
  pending_forced_ = false;
  ++epoch_;
  cv_.notify_all();
}

uint64_t ManagedArena::allocate(uint64_t bytes) {
  std::unique_lock<std::mutex> lock(mu_);
  if (bytes > cfg_.capacity) throw Error(ExitCode::internal, "arena block exceeds capacity");
  const bool is_worker = worker_ids_.count(std::this_thread::get_id()) > 0;

  // Capacity pressure forces a sweep before the new block is admitted.
  if (stats_.allocated_bytes + bytes > cfg_.capacity) {
    pending_ = true;
    pending_forced_ = true;
    if (registered_ == 0)
      sweep(lock, true);
    else if (is_worker)
      quiesce(lock);
    else
      cv_.wait(lock, [&] { return !pending_; });  // workers will converge
    if (stats_.allocated_bytes + bytes > cfg_.capacity)
      throw Error(ExitCode::internal, "arena capacity exhausted");
  }

  ++stats_.allocations;
  if (stats_.allocations % cfg_.sweep_interval == 0) pending_ = true;

  const uint64_t id = next_id_++;
  Block& b = blocks_[id];
  b.memory = std::make_unique<char[]>(bytes);
  b.bytes = bytes;
  stats_.live_bytes += bytes;
  stats_.allocated_bytes += bytes;
  stats_.peak_allocated = std::max(stats_.peak_allocated, stats_.allocated_bytes);

  if (pending_) {
    if (registered_ == 0)
      sweep(lock, pending_forced_);
    else if (is_worker)
      quiesce(lock);
    // Unregistered allocators leave interval sweeps to the workers' barrier.
  }
  return id;
}

char* ManagedArena::data(uint64_t id) {
  std::unique_lock<std::mutex> lock(mu_);
  auto it = blocks_.find(id);
  if (it == blocks_.end() || it->second.garbage)
    throw Error(ExitCode::internal, "arena block not live");
  return it->second.memory.get();
}

void ManagedArena::release(uint64_t id) {
  std::unique_lock<std::mutex> lock(mu_);
  auto it = blocks_.find(id);
  if (it == blocks_.end() || it->second.garbage) return;  // double release is a no-op
  it->second.garbage = true;
  stats_.live_bytes -= it->second.bytes;
  stats_.garbage_bytes += it->second.bytes;
}

ManagedArena::Stats ManagedArena::stats() const {
  std::unique_lock<std::mutex> lock(mu_);
  return stats_;
}

}  // namespace motifbench

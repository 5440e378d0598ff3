#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "aura/engine.hpp"

namespace aura {

enum class BackendKind { reference, parallel, accelerator };

struct BackendDescriptor {
  std::string name;
  BackendKind kind = BackendKind::reference;
  bool available = true;
  std::string detail;  // worker count or device name
};

namespace detail {

/// Fixed worker pool with a function-pointer task slot; dispatching a round
/// performs no allocation. Workers and the calling thread pull indices from
/// a shared atomic counter.
class ThreadPool {
public:
  using TaskFn = void (*)(void* ctx, std::size_t index);

  explicit ThreadPool(unsigned worker_threads) {
    threads_.reserve(worker_threads);
    for (unsigned i = 0; i < worker_threads; ++i)
      threads_.emplace_back([this] { worker_loop(); });
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  unsigned worker_count() const noexcept {
    return static_cast<unsigned>(threads_.size()) + 1;  // callers participate
  }

  void run(std::size_t count, TaskFn fn, void* ctx) {
    if (count == 0) return;
    if (threads_.empty() || count == 1) {
      for (std::size_t i = 0; i < count; ++i) fn(ctx, i);
      return;
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      fn_ = fn;
      ctx_ = ctx;
      count_ = count;
      next_.store(0, std::memory_order_relaxed);
      pending_ = threads_.size();
      ++generation_;
    }
    start_cv_.notify_all();
    for (std::size_t i = next_.fetch_add(1); i < count; i = next_.fetch_add(1))
      fn(ctx, i);
    std::unique_lock<std::mutex> lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
  }

private:
  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      TaskFn fn;
      void* ctx;
      std::size_t count;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        start_cv_.wait(lock,
                       [this, seen] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        fn = fn_;
        ctx = ctx_;
        count = count_;
      }
      for (std::size_t i = next_.fetch_add(1); i < count;
           i = next_.fetch_add(1))
        fn(ctx, i);
      bool last = false;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        last = --pending_ == 0;
      }
      if (last) done_cv_.notify_all();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  TaskFn fn_ = nullptr;
  void* ctx_ = nullptr;
  std::size_t count_ = 0;
  std::atomic<std::size_t> next_{0};
  std::size_t pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace detail

/// Execution strategy for the hot kernels. A backend is a stateless
/// dispatcher over caller-owned buffers; one backend object may be shared by
/// several convolvers.
class ExecutionBackend {
public:
  using TaskFn = void (*)(void* ctx, std::size_t index);

  virtual ~ExecutionBackend() = default;

  virtual const BackendDescriptor& descriptor() const = 0;

  /// Invoke fn(ctx, i) for i in [0, count), possibly concurrently; returns
  /// when all invocations completed. Tasks must write to disjoint state.
  virtual void for_each(std::size_t count, TaskFn fn, void* ctx) = 0;
};

class ReferenceBackend final : public ExecutionBackend {
public:
  ReferenceBackend() {
    desc_.name = "reference";
    desc_.kind = BackendKind::reference;
    desc_.available = true;
    desc_.detail = "single-threaded";
  }

  const BackendDescriptor& descriptor() const override { return desc_; }

  void for_each(std::size_t count, TaskFn fn, void* ctx) override {
    for (std::size_t i = 0; i < count; ++i) fn(ctx, i);
  }

private:
  BackendDescriptor desc_;
};

class ParallelBackend final : public ExecutionBackend {
public:
  explicit ParallelBackend(unsigned workers = 0)
      : pool_(workers != 0 ? workers - 1 : default_worker_threads()) {
    desc_.name = "parallel";
    desc_.kind = BackendKind::parallel;
    desc_.available = true;
    desc_.detail = std::to_string(pool_.worker_count()) + " workers";
  }

  const BackendDescriptor& descriptor() const override { return desc_; }

  void for_each(std::size_t count, TaskFn fn, void* ctx) override {
    pool_.run(count, fn, ctx);
  }

private:
  static unsigned default_worker_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 1 ? hw - 1 : 0;
  }

  BackendDescriptor desc_;
  detail::ThreadPool pool_;
};

/// Backends usable in this process. The reference backend is always present;
/// an accelerator appears only when a compatible device was detected at
/// startup (none is on a plain CPU build).
inline std::vector<BackendDescriptor> list_backends() {
  std::vector<BackendDescriptor> out;
  out.push_back({"reference", BackendKind::reference, true, "single-threaded"});
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  out.push_back({"parallel", BackendKind::parallel, true,
                 std::to_string(hw) + " workers"});
  return out;
}

/// Accepts "reference", "parallel", "accelerator" and the aliases
/// "cpu" -> parallel, "gpu" -> accelerator.
inline std::shared_ptr<ExecutionBackend> make_backend(std::string_view name) {
  if (name == "reference") return std::make_shared<ReferenceBackend>();
  if (name == "parallel" || name == "cpu")
    return std::make_shared<ParallelBackend>();
  if (name == "accelerator" || name == "gpu")
    raise(ErrorCode::backend_unavailable,
          "accelerator backend is not available: no compatible device");
  raise(ErrorCode::backend_unavailable,
        "unknown backend '" + std::string(name) +
            "' (expected reference, parallel or accelerator)");
}

/// out[j] = sum_k fdl.slot(channel, k)[j] * filters.spectrum(out_channel, k)[j]
/// accumulated newest-to-oldest; the deterministic per-channel reduction all
/// backends share.
inline void spectral_mac_channel(const FrequencyDelayLine& fdl,
                                 std::size_t fdl_channel,
                                 const PartitionedFilterSet& filters,
                                 std::size_t out_channel,
                                 std::span<std::complex<float>> out) {
  const std::size_t bins = filters.bins();
  const std::size_t partitions = filters.partition_count();
  if (fdl.capacity() != partitions || fdl.bins() != bins ||
      out.size() != bins)
    raise(ErrorCode::shape_mismatch,
          "delay line, filter set and output shapes disagree");
  std::fill(out.begin(), out.end(), std::complex<float>{});
  for (std::size_t k = 0; k < partitions; ++k) {
    const auto x = fdl.slot(fdl_channel, k);
    const auto h = filters.spectrum(out_channel, k);
    for (std::size_t j = 0; j < bins; ++j) {
      const float xr = x[j].real();
      const float xi = x[j].imag();
      const float hr = h[j].real();
      const float hi = h[j].imag();
      out[j] += std::complex<float>(xr * hr - xi * hi, xr * hi + xi * hr);
    }
  }
}

/// Per-output-channel multiply-accumulate across all K partitions. In
/// broadcast mode every output channel reads the shared delay-line channel 0;
/// in elementwise mode output channel c reads delay-line channel c.
inline std::vector<SpectrumBlock> spectral_mac(
    const FrequencyDelayLine& fdl, const PartitionedFilterSet& filters,
    ChannelMode mode) {
  const std::size_t expected_fdl_channels =
      mode == ChannelMode::broadcast ? 1 : filters.num_channels();
  if (fdl.channels() != expected_fdl_channels)
    raise(ErrorCode::shape_mismatch,
          "delay line channel count does not match the channel mode");
  std::vector<SpectrumBlock> out(filters.num_channels());
  for (std::size_t c = 0; c < filters.num_channels(); ++c) {
    out[c].bins.resize(filters.bins());
    const std::size_t fdl_channel = mode == ChannelMode::broadcast ? 0 : c;
    spectral_mac_channel(fdl, fdl_channel, filters, c, out[c].bins);
  }
  return out;
}

}  // namespace aura

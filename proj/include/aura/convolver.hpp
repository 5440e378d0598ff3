#pragma once

#include <algorithm>
#include <complex>
#include <cstring>
#include <memory>
#include <span>
#include <vector>

#include "aura/backend.hpp"
#include "aura/dft.hpp"
#include "aura/engine.hpp"

namespace aura {

/// Split each time-domain filter into K = ceil(n_h / n_x) sub-filters of
/// n_x taps (tail zero-padded), pad each with another n_x zeros and
/// transform, yielding the K spectra per channel the streaming loop needs.
inline PartitionedFilterSet make_partitioned_filters(
    std::span<const std::vector<float>> filters, std::size_t block_size,
    const DftPlan& plan) {
  if (filters.empty())
    raise(ErrorCode::empty_filter, "need at least one filter");
  const std::size_t filter_length = filters.front().size();
  if (filter_length == 0)
    raise(ErrorCode::empty_filter, "filters must have at least one tap");
  for (const auto& f : filters)
    if (f.size() != filter_length)
      raise(ErrorCode::filter_length_mismatch,
            "all filters must share one length");

  PartitionedFilterSet set(filters.size(), filter_length, block_size);
  std::vector<float> padded(plan.size(), 0.0f);
  DftWorkspace ws(plan);
  for (std::size_t c = 0; c < filters.size(); ++c) {
    for (std::size_t k = 0; k < set.partition_count(); ++k) {
      const std::size_t begin = k * block_size;
      const std::size_t taps = std::min(block_size, filter_length - begin);
      std::fill(padded.begin(), padded.end(), 0.0f);
      std::copy_n(filters[c].begin() + static_cast<std::ptrdiff_t>(begin),
                  taps, padded.begin());
      plan.forward(padded, set.spectrum(c, k), ws);
    }
  }
  return set;
}

/*
 * Uniform partitioned convolution with overlap-save, one partition per
 * block. Per input block:
 *
 *   1. the block is appended to an n_f-point sliding window (previous block
 *      in the first half) and transformed with the real FFT,
 *   2. the spectrum enters the frequency delay line; each of the K filter
 *      partitions is multiplied with the delay-line slot of matching age and
 *      the products accumulate per output channel,
 *   3. the accumulator is transformed back; the last n_x samples of the
 *      inverse are the valid output block.
 *
 * After B blocks the concatenated output equals the first B * n_x samples of
 * the linear convolution of the concatenated input with each filter.
 *
 * All state is allocated up front; process() does not allocate.
 */
class Convolver {
public:
  Convolver(std::span<const std::vector<float>> filters,
            const EngineConfig& cfg, ChannelMode mode,
            std::shared_ptr<ExecutionBackend> backend = nullptr)
      : cfg_(validate_config(cfg)),
        mode_(mode),
        backend_(backend ? std::move(backend)
                         : std::make_shared<ReferenceBackend>()),
        plan_(cfg.fft_size),
        filters_(make_partitioned_filters(filters, cfg.block_size, plan_)),
        fdl_(mode == ChannelMode::broadcast ? 1 : cfg.output_channels,
             filters_.partition_count(), cfg.bins()),
        windows_(cfg.input_channels * cfg.fft_size, 0.0f),
        input_spectra_(cfg.input_channels * cfg.bins()),
        accumulators_(cfg.output_channels * cfg.bins()),
        time_out_(cfg.output_channels * cfg.fft_size, 0.0f),
        workspaces_(std::max(cfg.input_channels, cfg.output_channels),
                    DftWorkspace(plan_)) {
    if (mode == ChannelMode::broadcast && cfg_.input_channels != 1)
      raise(ErrorCode::mode_channel_mismatch,
            "broadcast mode requires one input channel");
    if (mode == ChannelMode::elementwise &&
        cfg_.input_channels != cfg_.output_channels)
      raise(ErrorCode::mode_channel_mismatch,
            "elementwise mode requires input channels == output channels");
    if (filters.size() != cfg_.output_channels)
      raise(ErrorCode::mode_channel_mismatch,
            "filter count must equal the configured output channels");
  }

  const EngineConfig& config() const noexcept { return cfg_; }
  ChannelMode mode() const noexcept { return mode_; }
  std::size_t partition_count() const noexcept {
    return filters_.partition_count();
  }
  std::size_t filter_length() const noexcept {
    return filters_.filter_length();
  }
  std::uint64_t blocks_processed() const noexcept { return blocks_; }
  const PartitionedFilterSet& filters() const noexcept { return filters_; }
  const FrequencyDelayLine& delay_line() const noexcept { return fdl_; }
  const ExecutionBackend& backend() const noexcept { return *backend_; }

  /// Filter one block in place: input C_in x n_x, output C_out x n_x. The
  /// output block must already have the right shape; nothing is allocated.
  void process(const AudioBlock& input, AudioBlock& output) {
    if (input.channels() != cfg_.input_channels ||
        input.samples_per_channel() != cfg_.block_size)
      raise(ErrorCode::shape_mismatch,
            "input block must be input_channels x block_size");
    if (output.channels() != cfg_.output_channels ||
        output.samples_per_channel() != cfg_.block_size)
      raise(ErrorCode::shape_mismatch,
            "output block must be output_channels x block_size");
    if (!all_finite(input))
      raise(ErrorCode::non_finite_input, "input contains NaN or Inf");
    process_unchecked(input, output);
  }

  AudioBlock convolve(const AudioBlock& input) {
    AudioBlock output(cfg_.output_channels, cfg_.block_size);
    process(input, output);
    return output;
  }

  /// Restore the freshly-constructed state: delay line, sliding windows and
  /// accumulators zeroed.
  void reset() {
    std::fill(windows_.begin(), windows_.end(), 0.0f);
    std::fill(input_spectra_.begin(), input_spectra_.end(),
              std::complex<float>{});
    std::fill(accumulators_.begin(), accumulators_.end(),
              std::complex<float>{});
    std::fill(time_out_.begin(), time_out_.end(), 0.0f);
    fdl_.reset();
    blocks_ = 0;
  }

private:
  friend class Auralizer;

  // Pipeline-internal entry: shapes are guaranteed by the owner, and values
  // pass through unvalidated so a diverging feedback estimate surfaces as
  // non-finite output rather than an exception mid-pipeline.
  void process_unchecked(const AudioBlock& input, AudioBlock& output) {
    // Stage 1: input packing, forward transform, delay-line update.
    Stage1Ctx in_ctx{this, &input};
    backend_->for_each(cfg_.input_channels, &Convolver::stage1_task, &in_ctx);

    // Stages 2 + 3: spectral multiply-accumulate and overlap-save unpacking.
    Stage23Ctx out_ctx{this, &output};
    backend_->for_each(cfg_.output_channels, &Convolver::stage23_task,
                       &out_ctx);
    ++blocks_;
  }

  struct Stage1Ctx {
    Convolver* self;
    const AudioBlock* input;
  };
  struct Stage23Ctx {
    Convolver* self;
    AudioBlock* output;
  };

  static void stage1_task(void* ctx, std::size_t channel) {
    auto* c = static_cast<Stage1Ctx*>(ctx);
    c->self->run_stage1(*c->input, channel);
  }
  static void stage23_task(void* ctx, std::size_t channel) {
    auto* c = static_cast<Stage23Ctx*>(ctx);
    c->self->run_stage23(*c->output, channel);
  }

  void run_stage1(const AudioBlock& input, std::size_t channel) {
    const std::size_t n_x = cfg_.block_size;
    float* window = windows_.data() + channel * cfg_.fft_size;
    std::memmove(window, window + n_x, n_x * sizeof(float));
    const auto in = input.channel(channel);
    std::copy(in.begin(), in.end(), window + n_x);
    const std::span<std::complex<float>> spectrum(
        input_spectra_.data() + channel * cfg_.bins(), cfg_.bins());
    plan_.forward(std::span<const float>(window, cfg_.fft_size), spectrum,
                  workspaces_[channel]);
    fdl_.push(channel, spectrum);
  }

  void run_stage23(AudioBlock& output, std::size_t channel) {
    const std::size_t n_x = cfg_.block_size;
    const std::size_t fdl_channel =
        mode_ == ChannelMode::broadcast ? 0 : channel;
    const std::span<std::complex<float>> acc(
        accumulators_.data() + channel * cfg_.bins(), cfg_.bins());
    spectral_mac_channel(fdl_, fdl_channel, filters_, channel, acc);
    const std::span<float> time(time_out_.data() + channel * cfg_.fft_size,
                                cfg_.fft_size);
    plan_.inverse_unchecked(acc, time, workspaces_[channel]);
    const auto out = output.channel(channel);
    std::copy(time.begin() + static_cast<std::ptrdiff_t>(n_x), time.end(),
              out.begin());
  }

  EngineConfig cfg_;
  ChannelMode mode_;
  std::shared_ptr<ExecutionBackend> backend_;
  DftPlan plan_;
  PartitionedFilterSet filters_;
  FrequencyDelayLine fdl_;
  std::vector<float> windows_;                        // C_in sliding windows
  std::vector<std::complex<float>> input_spectra_;    // C_in x bins
  std::vector<std::complex<float>> accumulators_;     // C_out x bins
  std::vector<float> time_out_;                       // C_out x n_f
  std::vector<DftWorkspace> workspaces_;  // one per parallel lane
  std::uint64_t blocks_ = 0;
};

}  // namespace aura

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aura {

enum class ErrorCode {
  non_power_of_two_block,
  fft_size_mismatch,
  bad_channel_combination,
  zero_sample_rate,
  zero_length,
  length_mismatch,
  non_real_edge_bins,
  filter_length_mismatch,
  empty_filter,
  mode_channel_mismatch,
  channel_count_mismatch,
  shape_mismatch,
  non_finite_input,
  empty_input,
  unsupported_format,
  corrupt_header,
  sample_rate_mismatch,
  backend_unavailable,
  out_of_memory,
  io_error,
  invalid_argument,
};

class Error final : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

constexpr bool is_power_of_two(std::size_t v) noexcept {
  return v != 0 && (v & (v - 1)) == 0;
}

inline constexpr std::size_t kMinBlockSize = 16;
inline constexpr std::size_t kMaxBlockSize = 8192;

/// Sizing parameters shared by every processing stage. fft_size is always
/// 2 * block_size; input_channels is 1 (broadcast) or equal to
/// output_channels (elementwise).
struct EngineConfig {
  std::uint32_t sample_rate_hz = 48000;
  std::size_t block_size = 128;     // n_x
  std::size_t fft_size = 256;       // n_f
  std::size_t input_channels = 1;   // C_in
  std::size_t output_channels = 1;  // C_out

  std::size_t bins() const noexcept { return block_size + 1; }
};

inline const EngineConfig& validate_config(const EngineConfig& cfg) {
  if (cfg.sample_rate_hz == 0)
    raise(ErrorCode::zero_sample_rate, "sample rate must be positive");
  if (!is_power_of_two(cfg.block_size) || cfg.block_size < kMinBlockSize ||
      cfg.block_size > kMaxBlockSize)
    raise(ErrorCode::non_power_of_two_block,
          "block size must be a power of two in [" +
              std::to_string(kMinBlockSize) + ", " +
              std::to_string(kMaxBlockSize) + "], got " +
              std::to_string(cfg.block_size));
  if (cfg.fft_size != 2 * cfg.block_size)
    raise(ErrorCode::fft_size_mismatch,
          "fft size must be 2 * block size, got " +
              std::to_string(cfg.fft_size) + " for block size " +
              std::to_string(cfg.block_size));
  if (cfg.output_channels == 0 ||
      (cfg.input_channels != 1 && cfg.input_channels != cfg.output_channels))
    raise(ErrorCode::bad_channel_combination,
          "input channels must be 1 or equal to output channels");
  return cfg;
}

inline EngineConfig make_config(std::uint32_t sample_rate_hz,
                                std::size_t block_size,
                                std::size_t input_channels,
                                std::size_t output_channels) {
  EngineConfig cfg;
  cfg.sample_rate_hz = sample_rate_hz;
  cfg.block_size = block_size;
  cfg.fft_size = 2 * block_size;
  cfg.input_channels = input_channels;
  cfg.output_channels = output_channels;
  validate_config(cfg);
  return cfg;
}

/// Number of sub-filters needed to cover a filter of n_h taps with
/// partitions of n_x taps each; the tail partition is zero-padded.
inline std::size_t partition_count(std::size_t filter_length,
                                   std::size_t block_size) {
  if (filter_length == 0 || block_size == 0)
    raise(ErrorCode::zero_length, "partition_count requires nonzero lengths");
  return (filter_length + block_size - 1) / block_size;
}

/// Maximum allowable per-block processing time: n_x / f_s seconds.
inline double latency_budget(const EngineConfig& cfg) {
  validate_config(cfg);
  return static_cast<double>(cfg.block_size) /
         static_cast<double>(cfg.sample_rate_hz);
}

inline bool all_finite(std::span<const float> samples) noexcept {
  for (float v : samples)
    if (!std::isfinite(v)) return false;
  return true;
}

/// One block of planar (channel-major) audio, channels x samples_per_channel.
class AudioBlock {
public:
  AudioBlock() = default;

  AudioBlock(std::size_t channels, std::size_t samples_per_channel)
      : channels_(channels),
        samples_(samples_per_channel),
        data_(channels * samples_per_channel, 0.0f) {
    if (channels == 0 || samples_per_channel == 0)
      raise(ErrorCode::zero_length, "audio block dimensions must be positive");
  }

  AudioBlock(std::size_t channels, std::size_t samples_per_channel,
             std::vector<float> data)
      : channels_(channels),
        samples_(samples_per_channel),
        data_(std::move(data)) {
    if (channels == 0 || samples_per_channel == 0)
      raise(ErrorCode::zero_length, "audio block dimensions must be positive");
    if (data_.size() != channels_ * samples_)
      raise(ErrorCode::shape_mismatch,
            "audio block data length must be channels * samples_per_channel");
  }

  std::size_t channels() const noexcept { return channels_; }
  std::size_t samples_per_channel() const noexcept { return samples_; }

  std::span<float> channel(std::size_t c) {
    return std::span<float>(data_).subspan(c * samples_, samples_);
  }
  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(data_).subspan(c * samples_, samples_);
  }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  void fill(float value) { std::fill(data_.begin(), data_.end(), value); }

private:
  std::size_t channels_ = 0;
  std::size_t samples_ = 0;
  std::vector<float> data_;
};

inline bool all_finite(const AudioBlock& block) noexcept {
  return all_finite(block.data());
}

/// Real-FFT spectrum of one n_f-point buffer: n_x + 1 complex bins, with the
/// DC and Nyquist bins purely real.
struct SpectrumBlock {
  std::vector<std::complex<float>> bins;

  std::size_t size() const noexcept { return bins.size(); }
};

/// Frequency-domain form of one filter matrix: per output channel, K
/// sub-filter spectra of bins() complex values each.
class PartitionedFilterSet {
public:
  PartitionedFilterSet(std::size_t channels, std::size_t filter_length,
                       std::size_t block_size)
      : channels_(channels),
        filter_length_(filter_length),
        partitions_(aura::partition_count(filter_length, block_size)),
        bins_(block_size + 1),
        spectra_(channels * partitions_ * bins_) {
    if (channels == 0)
      raise(ErrorCode::zero_length, "filter set needs at least one channel");
  }

  std::size_t num_channels() const noexcept { return channels_; }
  std::size_t partition_count() const noexcept { return partitions_; }
  std::size_t filter_length() const noexcept { return filter_length_; }
  std::size_t bins() const noexcept { return bins_; }

  std::span<std::complex<float>> spectrum(std::size_t channel,
                                          std::size_t partition) {
    return std::span<std::complex<float>>(spectra_)
        .subspan((channel * partitions_ + partition) * bins_, bins_);
  }
  std::span<const std::complex<float>> spectrum(std::size_t channel,
                                                std::size_t partition) const {
    return std::span<const std::complex<float>>(spectra_)
        .subspan((channel * partitions_ + partition) * bins_, bins_);
  }

private:
  std::size_t channels_;
  std::size_t filter_length_;
  std::size_t partitions_;
  std::size_t bins_;
  std::vector<std::complex<float>> spectra_;
};

/// Ring of the K most recent input spectra per input channel. Slot 0 is the
/// newest spectrum, slot K-1 the oldest; pushing advances a head index
/// instead of physically shifting blocks, so the observable contract is the
/// usual one-block shift.
class FrequencyDelayLine {
public:
  FrequencyDelayLine(std::size_t channels, std::size_t capacity,
                     std::size_t bins)
      : channels_(channels),
        capacity_(capacity),
        bins_(bins),
        heads_(channels, 0),
        slots_(channels * capacity * bins) {
    if (channels == 0 || capacity == 0 || bins == 0)
      raise(ErrorCode::zero_length, "delay line dimensions must be positive");
  }

  std::size_t channels() const noexcept { return channels_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t bins() const noexcept { return bins_; }

  void push(std::size_t channel, std::span<const std::complex<float>> spectrum) {
    if (spectrum.size() != bins_)
      raise(ErrorCode::length_mismatch, "spectrum bin count mismatch on push");
    heads_[channel] = (heads_[channel] + capacity_ - 1) % capacity_;
    std::copy(spectrum.begin(), spectrum.end(),
              slots_.begin() +
                  static_cast<std::ptrdiff_t>(
                      (channel * capacity_ + heads_[channel]) * bins_));
  }

  /// Spectrum pushed `age` blocks ago (0 = most recent).
  std::span<const std::complex<float>> slot(std::size_t channel,
                                            std::size_t age) const {
    const std::size_t physical = (heads_[channel] + age) % capacity_;
    return std::span<const std::complex<float>>(slots_).subspan(
        (channel * capacity_ + physical) * bins_, bins_);
  }

  void reset() {
    std::fill(slots_.begin(), slots_.end(), std::complex<float>{});
    std::fill(heads_.begin(), heads_.end(), 0);
  }

private:
  std::size_t channels_;
  std::size_t capacity_;
  std::size_t bins_;
  std::vector<std::size_t> heads_;
  std::vector<std::complex<float>> slots_;
};

/// Broadcast: one input channel filtered with each of the C_out filters.
/// Elementwise: C_in = C_out, one-to-one filtering.
enum class ChannelMode { broadcast, elementwise };

inline const char* to_string(ChannelMode mode) noexcept {
  return mode == ChannelMode::broadcast ? "broadcast" : "elementwise";
}

}  // namespace aura

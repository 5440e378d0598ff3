#pragma once

#include <memory>
#include <span>
#include <vector>

#include "aura/convolver.hpp"
#include "aura/engine.hpp"

namespace aura {

/*
 * Synthesis plus acoustic feedback cancellation in one block pipeline.
 *
 * Per microphone block m_n:
 *
 *   m~_n = gain * m_n - f^_n          (f^ estimated from the previous block)
 *   l_n  = m~_n * H_aur               (broadcast convolver, 1 -> C_out)
 *   f^_(n+1) = sum_c (l * F^)_c       (elementwise convolver, C_out -> C_out)
 *
 * and l_n is returned. The estimate derived from l_n is only ever applied to
 * the next input block; F^ taps are expressed relative to the instant l_n
 * begins playback, which the engine maps to that next block.
 */
class Auralizer {
public:
  Auralizer(std::span<const std::vector<float>> synth_filters,
            std::span<const std::vector<float>> fc_filters,
            const EngineConfig& cfg,
            std::shared_ptr<ExecutionBackend> backend = nullptr,
            float input_gain = 1.0f)
      : synth_(check_filters(synth_filters, fc_filters, cfg), cfg,
               ChannelMode::broadcast, backend),
        fc_(fc_filters,
            make_config(cfg.sample_rate_hz, cfg.block_size,
                        cfg.output_channels, cfg.output_channels),
            ChannelMode::elementwise, backend),
        feedback_estimate_(cfg.block_size, 0.0f),
        mic_scaled_(1, cfg.block_size),
        fc_out_(cfg.output_channels, cfg.block_size),
        input_gain_(input_gain) {}

  const EngineConfig& config() const noexcept { return synth_.config(); }
  const Convolver& synthesis() const noexcept { return synth_; }
  const Convolver& feedback_canceller() const noexcept { return fc_; }
  std::size_t synth_partitions() const noexcept {
    return synth_.partition_count();
  }
  std::size_t fc_partitions() const noexcept { return fc_.partition_count(); }

  float input_gain() const noexcept { return input_gain_; }
  void set_input_gain(float gain) noexcept { input_gain_ = gain; }

  /// Feedback estimate that will be subtracted from the next input block;
  /// all-zero before the first call and after reset().
  std::span<const float> feedback_estimate() const noexcept {
    return feedback_estimate_;
  }

  /// mic 1 x n_x in, loudspeaker C_out x n_x out; no allocation.
  void process(const AudioBlock& mic, AudioBlock& speakers) {
    if (mic.channels() != 1 ||
        mic.samples_per_channel() != config().block_size)
      raise(ErrorCode::shape_mismatch, "microphone block must be 1 x block_size");
    if (!all_finite(mic))
      raise(ErrorCode::non_finite_input, "microphone block contains NaN or Inf");

    if (speakers.channels() != config().output_channels ||
        speakers.samples_per_channel() != config().block_size)
      raise(ErrorCode::shape_mismatch,
            "speaker block must be output_channels x block_size");

    const auto in = mic.channel(0);
    const auto scaled = mic_scaled_.channel(0);
    for (std::size_t i = 0; i < in.size(); ++i)
      scaled[i] = input_gain_ * in[i] - feedback_estimate_[i];

    synth_.process_unchecked(mic_scaled_, speakers);
    fc_.process_unchecked(speakers, fc_out_);

    std::fill(feedback_estimate_.begin(), feedback_estimate_.end(), 0.0f);
    for (std::size_t c = 0; c < fc_out_.channels(); ++c) {
      const auto fc_channel = fc_out_.channel(c);
      for (std::size_t i = 0; i < feedback_estimate_.size(); ++i)
        feedback_estimate_[i] += fc_channel[i];
    }
  }

  AudioBlock auralize(const AudioBlock& mic) {
    AudioBlock speakers(config().output_channels, config().block_size);
    process(mic, speakers);
    return speakers;
  }

  void reset() {
    synth_.reset();
    fc_.reset();
    std::fill(feedback_estimate_.begin(), feedback_estimate_.end(), 0.0f);
  }

private:
  static std::span<const std::vector<float>> check_filters(
      std::span<const std::vector<float>> synth_filters,
      std::span<const std::vector<float>> fc_filters,
      const EngineConfig& cfg) {
    validate_config(cfg);
    if (cfg.input_channels != 1)
      raise(ErrorCode::mode_channel_mismatch,
            "auralizer supports a single input channel");
    if (synth_filters.size() != fc_filters.size())
      raise(ErrorCode::channel_count_mismatch,
            "synthesis and feedback-cancellation filter sets must have the "
            "same channel count");
    return synth_filters;
  }

  Convolver synth_;  // H_aur, broadcast 1 -> C_out
  Convolver fc_;     // F^,   elementwise C_out -> C_out
  std::vector<float> feedback_estimate_;  // n_x, applies to the next block
  AudioBlock mic_scaled_;
  AudioBlock fc_out_;
  float input_gain_;
};

}  // namespace aura

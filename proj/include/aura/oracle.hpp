#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "aura/auralizer.hpp"
#include "aura/engine.hpp"

namespace aura::oracle {

/// Plain time-domain convolution in 64-bit precision,
/// y[t] = sum_tau x[tau] * h[t - tau], length N + n_h - 1.
inline std::vector<double> direct_convolve(std::span<const double> signal,
                                           std::span<const double> filter) {
  if (signal.empty() || filter.empty())
    raise(ErrorCode::empty_input, "direct_convolve requires nonempty inputs");
  std::vector<double> out(signal.size() + filter.size() - 1, 0.0);
  for (std::size_t tau = 0; tau < filter.size(); ++tau) {
    const double h = filter[tau];
    if (h == 0.0) continue;
    for (std::size_t t = 0; t < signal.size(); ++t)
      out[t + tau] += signal[t] * h;
  }
  return out;
}

inline std::vector<double> to_double(std::span<const float> v) {
  return std::vector<double>(v.begin(), v.end());
}

/// A talker, a loudspeaker array with physical feedback paths back to the
/// microphone, and the auralizer under test in the loop. The physical
/// response of output block l_n reaches the microphone starting at block
/// n + 1, the same convention the auralizer's estimate uses, so F^ = F is
/// the exact-cancellation case.
struct ClosedLoopScenario {
  std::vector<double> source;  // clean talker signal, >= num_blocks * n_x
  std::vector<std::vector<double>> true_feedback_paths;  // C_out x n_h_f
  std::vector<std::vector<float>> synth_filters;         // C_out x n_h_aur
  std::vector<std::vector<float>> fc_filters;            // C_out x n_h_fc
  EngineConfig cfg;
  std::size_t num_blocks = 0;
  float input_gain = 1.0f;
};

struct ClosedLoopResult {
  std::vector<std::vector<float>> mic_blocks;       // what the mic picked up
  std::vector<AudioBlock> speaker_blocks;           // l_n per block
  std::vector<std::vector<float>> residual_blocks;  // m~_n - source_n
};

/// Run the loop for num_blocks blocks. The physical feedback is computed
/// with direct_convolve on the speaker history (never with the engine under
/// test): each new speaker block's response is accumulated into a feedback
/// timeline offset by one block.
inline ClosedLoopResult simulate_closed_loop(
    const ClosedLoopScenario& scenario,
    std::shared_ptr<ExecutionBackend> backend = nullptr) {
  const EngineConfig& cfg = validate_config(scenario.cfg);
  const std::size_t n_x = cfg.block_size;
  if (scenario.source.size() < scenario.num_blocks * n_x)
    raise(ErrorCode::length_mismatch,
          "source must cover num_blocks * block_size samples");
  if (scenario.true_feedback_paths.size() != cfg.output_channels)
    raise(ErrorCode::channel_count_mismatch,
          "need one true feedback path per output channel");

  Auralizer auralizer(scenario.synth_filters, scenario.fc_filters, cfg,
                      std::move(backend), scenario.input_gain);

  std::size_t max_path = 1;
  for (const auto& f : scenario.true_feedback_paths)
    max_path = std::max(max_path, f.size());

  // Physical feedback reaching the microphone, all channels summed. The
  // response of block l_n starts at timeline index (n + 1) * n_x.
  std::vector<double> feedback_timeline(
      (scenario.num_blocks + 1) * n_x + max_path, 0.0);

  ClosedLoopResult result;
  result.mic_blocks.reserve(scenario.num_blocks);
  result.speaker_blocks.reserve(scenario.num_blocks);
  result.residual_blocks.reserve(scenario.num_blocks);

  AudioBlock mic(1, n_x);
  std::vector<double> speaker_channel(n_x);
  for (std::size_t n = 0; n < scenario.num_blocks; ++n) {
    const auto mic_samples = mic.channel(0);
    for (std::size_t i = 0; i < n_x; ++i)
      mic_samples[i] = static_cast<float>(scenario.source[n * n_x + i] +
                                          feedback_timeline[n * n_x + i]);
    result.mic_blocks.emplace_back(mic_samples.begin(), mic_samples.end());

    const auto estimate = auralizer.feedback_estimate();
    std::vector<float> residual(n_x);
    for (std::size_t i = 0; i < n_x; ++i)
      residual[i] = scenario.input_gain * mic_samples[i] - estimate[i] -
                    static_cast<float>(scenario.source[n * n_x + i]);
    result.residual_blocks.push_back(std::move(residual));

    result.speaker_blocks.push_back(auralizer.auralize(mic));
    const AudioBlock& speakers = result.speaker_blocks.back();

    for (std::size_t c = 0; c < cfg.output_channels; ++c) {
      const auto& path = scenario.true_feedback_paths[c];
      if (path.empty()) continue;
      const auto block = speakers.channel(c);
      for (std::size_t i = 0; i < n_x; ++i)
        speaker_channel[i] = static_cast<double>(block[i]);
      const std::vector<double> response =
          direct_convolve(speaker_channel, path);
      const std::size_t offset = (n + 1) * n_x;
      for (std::size_t i = 0; i < response.size(); ++i) {
        if (offset + i >= feedback_timeline.size()) break;
        feedback_timeline[offset + i] += response[i];
      }
    }
  }
  return result;
}

}  // namespace aura::oracle

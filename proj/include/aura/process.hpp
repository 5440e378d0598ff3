#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "aura/auralizer.hpp"
#include "aura/convolver.hpp"
#include "aura/wav_io.hpp"

namespace aura::io {

struct ProcessOptions {
  std::filesystem::path input;          // mono float32 WAV
  std::filesystem::path synth_filters;  // C_out-channel filter file
  std::optional<std::filesystem::path> fc_filters;
  std::filesystem::path output;  // C_out-channel float32 WAV
  std::size_t block_size = 128;
  std::string device = "reference";
  float input_gain = 1.0f;
};

/// Stream a file through the engine in n_x blocks: auralize when
/// feedback-cancellation filters are given, otherwise plain broadcast
/// convolution. The final partial block is zero-padded, so the output length
/// is the input length rounded up to a block multiple.
inline void process_file(const ProcessOptions& opts) {
  const SoundData input = read_wav_f32(opts.input);
  if (input.channels != 1)
    raise(ErrorCode::shape_mismatch,
          "input must be mono, got " + std::to_string(input.channels) +
              " channels");

  const SoundData synth = read_filters(opts.synth_filters);
  if (synth.sample_rate_hz != input.sample_rate_hz)
    raise(ErrorCode::sample_rate_mismatch,
          "filter sample rate " + std::to_string(synth.sample_rate_hz) +
              " does not match input rate " +
              std::to_string(input.sample_rate_hz));

  const EngineConfig cfg = make_config(input.sample_rate_hz, opts.block_size,
                                       1, synth.channels);
  auto backend = make_backend(opts.device);

  std::optional<Convolver> convolver;
  std::optional<Auralizer> auralizer;
  if (opts.fc_filters) {
    const SoundData fc = read_filters(*opts.fc_filters);
    if (fc.sample_rate_hz != input.sample_rate_hz)
      raise(ErrorCode::sample_rate_mismatch,
            "feedback-cancellation filter sample rate does not match input");
    auralizer.emplace(synth.rows(), fc.rows(), cfg, backend, opts.input_gain);
  } else {
    convolver.emplace(synth.rows(), cfg, ChannelMode::broadcast, backend);
  }

  const std::size_t n_x = cfg.block_size;
  const std::size_t num_blocks = (input.length + n_x - 1) / n_x;

  SoundData out;
  out.channels = cfg.output_channels;
  out.length = num_blocks * n_x;
  out.sample_rate_hz = input.sample_rate_hz;
  out.samples.assign(out.channels * out.length, 0.0f);

  AudioBlock in_block(1, n_x);
  AudioBlock out_block(cfg.output_channels, n_x);
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const auto in = in_block.channel(0);
    for (std::size_t i = 0; i < n_x; ++i) {
      const std::size_t t = b * n_x + i;
      in[i] = t < input.length ? input.samples[t] : 0.0f;
    }
    if (convolver) {
      if (opts.input_gain != 1.0f)
        for (auto& v : in) v *= opts.input_gain;
      convolver->process(in_block, out_block);
    } else {
      auralizer->process(in_block, out_block);
    }
    for (std::size_t c = 0; c < out.channels; ++c) {
      const auto src = out_block.channel(c);
      std::copy(src.begin(), src.end(),
                out.samples.begin() +
                    static_cast<std::ptrdiff_t>(c * out.length + b * n_x));
    }
  }

  write_wav_f32(out, opts.output);
}

}  // namespace aura::io
